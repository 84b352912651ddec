"""A reduced benchmark run over both synthetic sets.

Crosses four detector variants with the two generators over repeated
random splits and prints the aggregate tables.  Iteration counts are cut
down so the demo finishes in well under a minute; configs/synthetic_full.json
holds the full-size version for the command line.

The two sets differ sharply in difficulty.  Sparse inliers live in a
50-atom union of subspaces that the dictionary recovers, so outliers
stand out by representation error.  The Gaussian set's outliers overlap
the inlier cloud after column normalization and are dense in signal
space; a dictionary fitted on the contaminated training set represents
them as well as the inliers, so representation error separates little
there.
"""

from anodict import DetectorSpec, format_report_tables, gen_gauss_synthetic, gen_sparse_synthetic, run_benchmark


def main():
    datasets = [gen_sparse_synthetic(seed=0), gen_gauss_synthetic(seed=0)]
    small = dict(iterations=8)
    specs = [
        DetectorSpec("dl", "dl", **small),
        DetectorSpec("sdl", "sdl", **small),
        DetectorSpec("srkdl_s_rbf", "srkdl_s", kernel="rbf", **small),
        DetectorSpec("srkdl_d_poly", "srkdl_d", kernel="polynomial", **small),
    ]
    report = run_benchmark(datasets, specs, rounds=3, master_seed=0, jobs=None)
    print(format_report_tables(report))


if __name__ == "__main__":
    main()
