"""Dictionary learning: alternating sparse coding and atom updates.

Signals are sparse combinations of a hidden dictionary.  Starting from
signal columns, each iteration codes the batch with OMP and then sweeps
the atoms with the approximate K-SVD update.  The squared error falls
monotonically and most hidden atoms are recovered up to sign.
"""

import numpy as np

from anodict import aksvd_pass, batch_code, init_dictionary, normalize_columns, seed_stream


def planted_signals(rng, D_true, count, sparsity):
    m, n_atoms = D_true.shape
    Y = np.empty((m, count))
    for l in range(count):
        support = rng.choice(n_atoms, size=sparsity, replace=False)
        Y[:, l] = D_true[:, support] @ rng.standard_normal(sparsity)
    return normalize_columns(Y)


def main():
    rng = seed_stream(0, "demo-dl")
    m, n_atoms, sparsity, count = 20, 24, 3, 400
    D_true = normalize_columns(rng.standard_normal((m, n_atoms)))
    Y = planted_signals(rng, D_true, count, sparsity)

    D = init_dictionary(Y, n_atoms, rng)
    print("iter  squared error")
    for it in range(12):
        code = batch_code(D, Y, sparsity)
        error = float(np.linalg.norm(Y - D @ code.to_dense()) ** 2)
        print(f"{it:>4}  {error:.6f}")
        D, code = aksvd_pass(D, Y, code)

    # An atom counts as recovered when some learned column matches it up
    # to sign almost exactly.
    overlap = np.abs(D_true.T @ D)
    recovered = int(np.sum(overlap.max(axis=1) > 0.99))
    print()
    print(f"recovered {recovered} of {n_atoms} hidden atoms (|dot| > 0.99)")


if __name__ == "__main__":
    main()
