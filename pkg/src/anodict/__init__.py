"""Anomaly detection via linear and reduced kernel dictionary learning.

Signals are columns of a matrix.  A dictionary is trained on (mostly
normal) data, every signal gets coded with a small atom budget, and the
representation error is the anomaly score: signals the dictionary cannot
approximate well are flagged as outliers.
"""

from .datasets import (
    LabeledDataset,
    gen_gauss_synthetic,
    gen_sparse_synthetic,
    load_labeled_matrix,
    split_train_test,
)
from .detector import (
    DetectorModel,
    KERNEL_METHODS,
    LINEAR_METHODS,
    METHODS,
    decision_scores,
    default_config,
    fit,
    load_model,
    predict,
    save_model,
)
from .dict_learning import (
    DlConfig,
    aksvd_pass,
    drop_worst,
    init_dictionary,
    select_train_indices,
    train_dl,
)
from .errors import (
    AnodictError,
    ConfigError,
    DegenerateSplitError,
    DimensionMismatchError,
    EmptySelectionError,
    IndexOutOfRangeError,
    NonBinaryLabelError,
    ParseError,
    SingleClassError,
    SingularKernelError,
    SingularSubproblemError,
    TooFewSignalsError,
    ZeroColumnError,
)
from .evaluation import (
    BenchmarkReport,
    DetectorSpec,
    format_report_tables,
    precision_at_n,
    report_to_json_dict,
    roc_auc,
    run_benchmark,
)
from .kernel_dl import (
    KdlConfig,
    KernelDictionary,
    batch_kernel_code,
    kernel_objective,
    kernel_omp,
    kernel_score,
    kernel_scores,
    rkdl_d_pass,
    rkdl_s_pass,
    train_rkdl,
)
from .kernels import (
    KernelBase,
    KernelSpec,
    default_kernel_spec,
    gram,
    kernel_diagonal,
    kernel_eval,
    make_kernel_base,
)
from .signals import (
    column_subset,
    derive_seed,
    normalize_columns,
    seed_stream,
)
from .sparse_coding import SparseCode, batch_code, omp, representation_errors

__version__ = "0.1.0"
