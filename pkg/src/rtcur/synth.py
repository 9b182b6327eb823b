"""Synthetic problem generation and benchmark drivers.

Instances are cubic tensors d x ... x d with multilinear rank (r, ..., r)
plus uniformly placed outliers.  All randomness flows through explicit
seeds so every instance and every benchmark row is reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .fiber_cur import _draw_without_replacement, cur_reconstruct_full
from .reference import ap_hosvd_trpca
from .solver import SolverConfig, rtcur
from .tensor import DenseTensor, fro_norm, inf_norm, mode_product

__all__ = [
    "InstanceSpec",
    "gen_lowrank",
    "gen_outliers",
    "make_instance",
    "PhaseGrid",
    "run_phase_transition",
    "TimingRow",
    "run_timing",
    "timing_to_csv",
    "DEFAULT_ALPHAS",
    "DEFAULT_UPSILONS",
    "METHOD_NAMES",
]

DEFAULT_ALPHAS = tuple(round(0.05 * i, 2) for i in range(1, 13))  # 0.05 .. 0.60
DEFAULT_UPSILONS = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
METHOD_NAMES = ("rtcur-f", "rtcur-r", "hosvd-ap")


@dataclass(frozen=True)
class InstanceSpec:
    """Parameters of one synthetic instance."""

    n: int
    d: int
    r: int
    alpha: float
    seed: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"order must be >= 1, got {self.n}")
        if int(self.d) < 1:
            raise ValueError(f"extent must be >= 1, got {self.d}")
        if not 1 <= int(self.r) <= int(self.d):
            raise ValueError(f"rank {self.r} outside [1, {self.d}]")
        if not 0.0 <= float(self.alpha) < 1.0:
            raise ValueError(f"outlier fraction must lie in [0, 1), got {self.alpha}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "r", int(self.r))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.d,) * self.n

    @property
    def ranks(self) -> tuple[int, ...]:
        return (self.r,) * self.n


def gen_lowrank(spec: InstanceSpec) -> DenseTensor:
    """Random tensor of multilinear rank (r, ..., r).

    A core of iid standard normals is expanded by one iid normal d x r
    factor per mode.  Draw order is fixed (core first, then the factors
    mode by mode) so a seed pins the instance bitwise.
    """
    rng = np.random.default_rng(spec.seed)
    core = DenseTensor(rng.standard_normal(spec.r**spec.n), (spec.r,) * spec.n)
    out = core
    for m in range(1, spec.n + 1):
        factor = rng.standard_normal((spec.d, spec.r))
        out = mode_product(out, factor, m)
    return out


def _mean_abs(flat: np.ndarray) -> float:
    # chunked so no full-size |x| temporary is allocated
    total = 0.0
    step = 1 << 18
    for start in range(0, flat.size, step):
        chunk = flat[start : start + step]
        total += float(np.sum(np.abs(chunk)))
    return total / flat.size


def gen_outliers(low: DenseTensor, alpha: float, seed) -> DenseTensor:
    """Sparse corruption for a given low-rank tensor.

    floor(alpha * size) positions are drawn uniformly without
    replacement; values are iid uniform on [-mu, mu] where mu is the
    mean absolute entry of the input.  alpha = 0 returns all zeros.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"outlier fraction must lie in [0, 1), got {alpha}")
    # tiny epsilon so alpha values like 0.3 that round just below the
    # intended product still floor to it
    count = int(math.floor(alpha * low.size + 1e-9))
    values = np.zeros(low.size)
    if count > 0:
        rng = np.random.default_rng(seed)
        positions = _draw_without_replacement(rng, low.size, count) - 1
        mu = _mean_abs(low.data)
        values[positions] = rng.uniform(-mu, mu, size=count)
    return DenseTensor._wrap(np.reshape(values, low.shape, order="F"))


def make_instance(spec: InstanceSpec) -> tuple[DenseTensor, DenseTensor, DenseTensor]:
    """Observation plus its ground-truth parts: (x, low, sparse).

    The outlier stream is seeded by SeedSequence([seed, 1]) so it is
    decoupled from the low-rank draw but still pinned by spec.seed.
    """
    low = gen_lowrank(spec)
    sparse = gen_outliers(low, spec.alpha, np.random.SeedSequence([spec.seed, 1]))
    x = DenseTensor._wrap(np.reshape(low.data + sparse.data, spec.shape, order="F"))
    return x, low, sparse


@dataclass(frozen=True)
class PhaseGrid:
    """Success counts over an (outlier fraction) x (oversampling) grid."""

    alphas: tuple[float, ...]
    upsilons: tuple[float, ...]
    trials: int
    successes: tuple[tuple[int, ...], ...]  # [alpha index][upsilon index]

    def success_rate(self, i: int, j: int) -> float:
        return self.successes[i][j] / self.trials

    def to_csv(self) -> str:
        lines = ["alpha,upsilon,successes,trials"]
        for a, row in zip(self.alphas, self.successes):
            for u, s in zip(self.upsilons, row):
                lines.append(f"{a:g},{u:g},{s},{self.trials}")
        return "\n".join(lines) + "\n"


def _trial_seeds(base_seed: int, *path: int) -> tuple[int, int]:
    state = np.random.SeedSequence([int(base_seed), *[int(p) for p in path]])
    a, b = state.generate_state(2)
    return int(a), int(b)


def run_phase_transition(
    alphas=DEFAULT_ALPHAS,
    upsilons=DEFAULT_UPSILONS,
    trials: int = 10,
    n: int = 3,
    d: int = 60,
    r: int = 3,
    variant: str = "F",
    eps: float = 1e-5,
    gamma: float = 0.7,
    max_iters: int = 150,
    success_tol: float = 1e-3,
    base_seed: int = 0,
    progress=None,
) -> PhaseGrid:
    """Recovery success counts per (alpha, upsilon) cell.

    Each trial builds a fresh instance, solves with the ground-truth
    sup-norm as the initial threshold, and counts success when the
    reconstructed low-rank part is within success_tol relative Frobenius
    error of the truth.  A trial that raises or fails to converge is a
    failure, never an abort.  progress, if given, is called with
    (alpha, upsilon, trial, success) after each trial.
    """
    alphas = tuple(float(a) for a in alphas)
    upsilons = tuple(float(u) for u in upsilons)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    grid: list[tuple[int, ...]] = []
    for ia, alpha in enumerate(alphas):
        row: list[int] = []
        for iu, upsilon in enumerate(upsilons):
            wins = 0
            for t in range(trials):
                inst_seed, solver_seed = _trial_seeds(base_seed, ia, iu, t)
                spec = InstanceSpec(n=n, d=d, r=r, alpha=alpha, seed=inst_seed)
                x, low, _ = make_instance(spec)
                cfg = SolverConfig(
                    ranks=spec.ranks,
                    eps=eps,
                    zeta0=inf_norm(low),
                    gamma=gamma,
                    upsilon=upsilon,
                    variant=variant,
                    max_iters=max_iters,
                    seed=solver_seed,
                )
                ok = False
                try:
                    res = rtcur(x, cfg)
                    est = cur_reconstruct_full(res.cur)
                    rel = fro_norm(
                        DenseTensor(low.data - est.data, low.shape)
                    ) / fro_norm(low)
                    ok = bool(rel <= success_tol)
                except Exception:
                    ok = False
                wins += int(ok)
                if progress is not None:
                    progress(alpha, upsilon, t, ok)
            row.append(wins)
        grid.append(tuple(row))
    return PhaseGrid(
        alphas=alphas, upsilons=upsilons, trials=trials, successes=tuple(grid)
    )


@dataclass(frozen=True)
class TimingRow:
    """One benchmark cell: a method at one tensor size."""

    d: int
    method: str
    mean_s: float
    std_s: float
    iters: float
    censored: bool


def timing_to_csv(rows) -> str:
    lines = ["d,method,mean_s,std_s,iters,censored"]
    for row in rows:
        lines.append(
            f"{row.d},{row.method},{row.mean_s},{row.std_s},{row.iters},"
            f"{int(row.censored)}"
        )
    return "\n".join(lines) + "\n"


def _solve_timed(method: str, x, low, spec: InstanceSpec, solver_seed: int, *,
                 eps: float, gamma: float, upsilon: float, max_iters: int):
    zeta0 = inf_norm(low)
    t0 = time.perf_counter()
    if method in ("rtcur-f", "rtcur-r"):
        cfg = SolverConfig(
            ranks=spec.ranks,
            eps=eps,
            zeta0=zeta0,
            gamma=gamma,
            upsilon=upsilon,
            variant="F" if method == "rtcur-f" else "R",
            max_iters=max_iters,
            seed=solver_seed,
        )
        iters = rtcur(x, cfg).iterations
    elif method == "hosvd-ap":
        _, _, history = ap_hosvd_trpca(
            x, spec.ranks, zeta0=zeta0, gamma=gamma, eps=eps, max_iters=max_iters
        )
        iters = len(history)
    else:
        raise ValueError(f"unknown method {method!r}, expected one of {METHOD_NAMES}")
    return time.perf_counter() - t0, iters


def run_timing(
    dims,
    methods=METHOD_NAMES,
    repeats: int = 3,
    n: int = 3,
    r: int = 3,
    alpha: float = 0.1,
    upsilon: float = 3.0,
    eps: float = 1e-5,
    gamma: float = 0.7,
    max_iters: int = 500,
    timeout_s: float | None = None,
    base_seed: int = 0,
    progress=None,
) -> list[TimingRow]:
    """Wall-clock comparison across methods and tensor sizes.

    Methods see identical instances at each (d, repeat).  Only the solve
    is timed, not instance generation.  When a cell's accumulated time
    passes timeout_s the remaining repeats are skipped and the row is
    marked censored; statistics cover the completed repeats.
    """
    dims = tuple(int(d) for d in dims)
    methods = tuple(methods)
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    for m in methods:
        if m not in METHOD_NAMES:
            raise ValueError(f"unknown method {m!r}, expected one of {METHOD_NAMES}")
    rows: list[TimingRow] = []
    for di, d in enumerate(dims):
        for method in methods:
            times: list[float] = []
            iter_counts: list[int] = []
            censored = False
            spent = 0.0
            for rep in range(repeats):
                inst_seed, solver_seed = _trial_seeds(base_seed, di, rep)
                spec = InstanceSpec(n=n, d=d, r=r, alpha=alpha, seed=inst_seed)
                x, low, _ = make_instance(spec)
                elapsed, iters = _solve_timed(
                    method, x, low, spec, solver_seed,
                    eps=eps, gamma=gamma, upsilon=upsilon, max_iters=max_iters,
                )
                times.append(elapsed)
                iter_counts.append(iters)
                spent += elapsed
                if progress is not None:
                    progress(d, method, rep, elapsed)
                if timeout_s is not None and spent > timeout_s:
                    censored = rep + 1 < repeats
                    break
            rows.append(
                TimingRow(
                    d=d,
                    method=method,
                    mean_s=float(np.mean(times)),
                    std_s=float(np.std(times)),
                    iters=float(np.mean(iter_counts)),
                    censored=censored,
                )
            )
    return rows
