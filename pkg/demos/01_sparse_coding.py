"""Sparse coding basics: recover a planted sparse combination with OMP.

A signal built from 3 atoms of a random dictionary is coded with growing
atom budgets.  The residual collapses to machine precision exactly when
the budget reaches the planted support size, and the recovered support
matches the planted one.
"""

import numpy as np

from anodict import normalize_columns, omp, seed_stream


def main():
    rng = seed_stream(0, "demo-omp")
    m, n_atoms, s = 32, 60, 3
    D = normalize_columns(rng.standard_normal((m, n_atoms)))

    support_true = np.sort(rng.choice(n_atoms, size=s, replace=False))
    coeffs_true = rng.standard_normal(s)
    y = D[:, support_true] @ coeffs_true

    print(f"signal dim {m}, dictionary atoms {n_atoms}, planted support {support_true}")
    print()
    print("budget  residual      support")
    for budget in range(1, 6):
        support, coeffs, residual = omp(D, y, budget)
        print(f"{budget:>6}  {residual:.3e}  {np.sort(support)}")

    support, coeffs, _ = omp(D, y, s)
    order = np.argsort(support)
    print()
    print("recovered coefficients:", np.round(coeffs[order], 6))
    print("planted coefficients:  ", np.round(coeffs_true, 6))


if __name__ == "__main__":
    main()
