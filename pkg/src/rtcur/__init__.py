"""Robust tensor principal component analysis via fiber-sampled CUR decompositions.

Separates an observed tensor into a low-multilinear-rank part and a
sparse outlier part by alternating projections, touching only a small
set of sampled fibers per iteration.  The top-level names cover the
solver (`rtcur`, `SolverConfig`), the decomposition it produces
(`FiberCur`, `cur_reconstruct_full`), dense tensor plumbing
(`DenseTensor`, `unfold`, `mode_product`, ...), synthetic benchmarks
(`make_instance`, `run_phase_transition`, `run_timing`), a full-tensor
baseline (`hosvd`, `ap_hosvd_trpca`), and the on-disk tensor format
(`read_tensor`, `write_tensor`).

Set RTCUR_BACKEND=python or RTCUR_BACKEND=compiled before import to
force a kernel backend; `backend_name` reports which one is active.
"""

from ._backend import backend_name
from .fiber_cur import (
    FiberCur,
    SampleIndices,
    assemble_fiber_cur,
    build_fiber_cur,
    cur_eval_fibers,
    cur_eval_subtensor,
    cur_reconstruct_full,
    draw_sample_indices,
    sample_indices,
    sample_sizes,
)
from .linalg import TruncatedSvd, pinv_truncated, truncated_svd
from .reference import (
    ReferenceSolveResult,
    TuckerDecomp,
    ap_hosvd_trpca,
    hosvd,
    rtcur_dense_reference,
)
from .solver import (
    SolveResult,
    SolverConfig,
    SparseEstimate,
    hard_threshold,
    rtcur,
    sampled_relative_error,
    support_projection_check,
    zeta_schedule,
)
from .synth import (
    InstanceSpec,
    PhaseGrid,
    TimingRow,
    gen_lowrank,
    gen_outliers,
    make_instance,
    run_phase_transition,
    run_timing,
    timing_to_csv,
)
from .tensor import (
    DenseTensor,
    IndexSets,
    fold,
    fro_norm,
    inf_norm,
    linear_offset,
    mode_product,
    subtensor,
    unfold,
)
from .tensorfile import (
    TensorFormatError,
    read_header,
    read_tensor,
    write_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend_name",
    # tensors
    "DenseTensor",
    "IndexSets",
    "linear_offset",
    "unfold",
    "fold",
    "mode_product",
    "subtensor",
    "fro_norm",
    "inf_norm",
    # matrix numerics
    "TruncatedSvd",
    "truncated_svd",
    "pinv_truncated",
    # fiber CUR decomposition
    "SampleIndices",
    "FiberCur",
    "sample_sizes",
    "sample_indices",
    "draw_sample_indices",
    "build_fiber_cur",
    "assemble_fiber_cur",
    "cur_reconstruct_full",
    "cur_eval_subtensor",
    "cur_eval_fibers",
    # solver
    "SolverConfig",
    "SparseEstimate",
    "SolveResult",
    "hard_threshold",
    "zeta_schedule",
    "sampled_relative_error",
    "rtcur",
    "support_projection_check",
    # reference baselines
    "TuckerDecomp",
    "hosvd",
    "ap_hosvd_trpca",
    "ReferenceSolveResult",
    "rtcur_dense_reference",
    # synthetic benchmarks
    "InstanceSpec",
    "gen_lowrank",
    "gen_outliers",
    "make_instance",
    "PhaseGrid",
    "run_phase_transition",
    "TimingRow",
    "run_timing",
    "timing_to_csv",
    # tensor files
    "TensorFormatError",
    "read_header",
    "read_tensor",
    "write_tensor",
]
