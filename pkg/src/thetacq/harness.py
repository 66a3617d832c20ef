"""
Convergence experiments: error tables, the small-alpha sweep and shift-weight decay.

All errors are L2 norms at ``t_eval = 0.5``. Table runs use the published
(alpha, theta) grids and step sizes 2**-5 .. 2**-8; the reported rate of a row
is ``log2(e[-2] / e[-1])`` over its two finest step sizes.
"""

from __future__ import annotations

import contextlib
import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gamma

from . import stepper
from .mittag_leffler import ml_eval
from .series import BDF2, shift_weights
from .stepper import IndicatorData, ProblemSpec, SchemeConfig, SmoothData, Space

SCHEMES = ("corrected", "standard")
DEFAULT_TAUS = (2.0**-5, 2.0**-6, 2.0**-7, 2.0**-8)

TABLE1_CELLS = [(0.1, -0.9), (0.1, -0.5), (0.1, 0.5), (0.1, 0.9),
                (0.5, -0.8), (0.5, -0.5), (0.5, 0.0), (0.5, 0.6),
                (0.9, -0.5), (0.9, -0.2), (0.9, 0.3), (0.9, 0.6)]
TABLE2_CELLS = [(0.2, -0.5), (0.2, -0.3), (0.2, 0.0), (0.2, 0.9),
                (0.8, -0.5), (0.8, 0.1), (0.8, 0.5), (0.8, 0.7)]
SWEEP_ALPHAS = (0.5, 0.1, 0.01, 0.001)
SWEEP_THETAS = (-0.5, 0.1, 0.4, 0.8)
DECAY_THETAS = (-0.9, -0.5, 0.0, 0.5, 0.9)

# thresholds used by --check
CORRECTED_RATE = (1.8, 2.2)
STANDARD_RATE = (0.85, 1.2)
SWEEP_RATIO = 10.0
DECAY_SLOPE = -0.3
DECAY_TAIL = 1e-10


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    cells: list[tuple[float, float]] = field(default_factory=list)
    taus: tuple[float, ...] = DEFAULT_TAUS
    M: int = 1023
    schemes: tuple[str, ...] = SCHEMES
    t_eval: float = 0.5
    output: Path | None = None
    workers: int = 1
    shift_cutoff: float | None = None
    # table1: "semidiscrete" compares with the exact solution of the
    # space-discrete problem, "exact" with E_a(-t^a) sin x itself
    reference: str = "semidiscrete"
    # table2: which scheme produces the fine reference solution
    reference_scheme: str = "corrected"
    ref_factor: int = 8
    decay_n: int = 60

    def __post_init__(self):
        self.taus = tuple(float(t) for t in self.taus)
        self.cells = [(float(a), float(th)) for a, th in self.cells]
        self.validate()

    def validate(self):
        if self.kind not in ("table1", "table2", "alpha_sweep", "weight_decay", "custom"):
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if any(s not in SCHEMES for s in self.schemes):
            raise ConfigError(f"schemes must be among {SCHEMES}")
        if self.M < 1:
            raise ConfigError("M must be positive")
        if self.kind == "weight_decay":
            # the slope fit starts at n = 5 and needs a few points
            if self.decay_n < 7:
                raise ConfigError("decay_n must be at least 7")
            return
        if not self.taus:
            raise ConfigError("no step sizes given")
        if any(b >= a for a, b in zip(self.taus, self.taus[1:])):
            raise ConfigError("step sizes must be strictly decreasing")
        for tau in self.taus:
            steps = self.t_eval / tau
            if abs(steps - round(steps)) > 1e-9 * steps or round(steps) < 1:
                raise ConfigError(f"t = {self.t_eval} is not on the grid of tau = {tau}")
        for a, th in self.cells:
            if not 0.0 < a < 1.0:
                raise ConfigError(f"alpha {a} outside (0, 1)")
            if not -1.0 < th < 1.0:
                raise ConfigError(f"theta {th} outside (-1, 1)")
        if self.reference not in ("semidiscrete", "exact"):
            raise ConfigError("reference must be 'semidiscrete' or 'exact'")
        if self.reference_scheme not in ("corrected", "same"):
            raise ConfigError("reference_scheme must be 'corrected' or 'same'")

    def steps(self, tau: float) -> int:
        return int(round(self.t_eval / tau))


@dataclass
class RateRow:
    alpha: float
    theta: float
    scheme: str
    taus: tuple[float, ...]
    errors: tuple[float, ...]

    @property
    def key(self):
        return (self.alpha, self.theta, self.scheme)

    @property
    def pairwise_rates(self) -> list[float]:
        return [compute_rate(self.errors[i: i + 2]) for i in range(len(self.errors) - 1)]

    @property
    def rate(self) -> float:
        return compute_rate(self.errors)


@dataclass
class RateTable:
    rows: list[RateRow]
    residuals: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: (r.alpha, r.theta, SCHEMES.index(r.scheme)))

    def row(self, alpha: float, theta: float, scheme: str) -> RateRow:
        for r in self.rows:
            if math.isclose(r.alpha, alpha) and math.isclose(r.theta, theta) and r.scheme == scheme:
                return r
        raise KeyError((alpha, theta, scheme))

    def violations(self) -> list[str]:
        """Rows whose finest-pair rate falls outside the expected band."""
        out = []
        for r in self.rows:
            lo, hi = CORRECTED_RATE
            if r.scheme == "standard" and not math.isclose(r.theta, -0.5):
                lo, hi = STANDARD_RATE
            if not lo <= r.rate <= hi:
                out.append(f"alpha={r.alpha:g} theta={r.theta:g} {r.scheme}: "
                           f"rate {r.rate:.3f} not in [{lo}, {hi}]")
        return out

    def to_csv(self, path) -> None:
        with open_output(path) as fh:
            w = csv.writer(fh)
            w.writerow(["alpha", "theta", "scheme", "tau", "error", "rate"])
            for r in self.rows:
                rates = [None] + r.pairwise_rates
                for tau, err, rate in zip(r.taus, r.errors, rates):
                    w.writerow([fmt(r.alpha), fmt(r.theta), r.scheme, fmt(tau), fmt(err),
                                "" if rate is None else fmt(rate)])

    @classmethod
    def from_csv(cls, path: str | Path) -> "RateTable":
        grouped: dict = {}
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                key = (float(rec["alpha"]), float(rec["theta"]), rec["scheme"])
                grouped.setdefault(key, []).append((float(rec["tau"]), float(rec["error"])))
        rows = [RateRow(a, th, s, tuple(t for t, _ in v), tuple(e for _, e in v))
                for (a, th, s), v in grouped.items()]
        return cls(rows)


def open_output(path):
    # a path, or an already-open text stream
    if hasattr(path, "write"):
        return contextlib.nullcontext(path)
    return open(path, "w", newline="")


def fmt(x: float) -> str:
    return format(x, ".17g")


def compute_rate(errors: Sequence[float]) -> float:
    """Observed order ``log2(e[-2] / e[-1])`` from the two finest levels."""
    if len(errors) < 2:
        raise ValueError("need at least two errors to form a rate")
    e1, e2 = errors[-2], errors[-1]
    if not (e1 > 0 and e2 > 0):
        raise ValueError(f"errors must be positive, got {e1}, {e2}")
    return math.log2(e1 / e2)


# -- problems --------------------------------------------------------------

def example1_smooth(alpha: float) -> ProblemSpec:
    return ProblemSpec(0.0, math.pi, 1.0, alpha, SmoothData(np.sin, np.cos))


def example1_indicator(alpha: float) -> ProblemSpec:
    return ProblemSpec(0.0, 1.0, 1.0, alpha, IndicatorData(0.0, 0.5))


def example2(alpha: float) -> ProblemSpec:
    c = 6.0 / gamma(4.0 - alpha)

    def f(x, t):
        return (c * t ** (3.0 - alpha) + t**3) * np.sin(x)

    return ProblemSpec(0.0, math.pi, 1.0, alpha, SmoothData(np.sin, np.cos), f)


def example2_exact(alpha: float, t: float):
    amp = ml_eval(alpha, -t**alpha) + t**3
    return lambda x: amp * np.sin(x)


def discrete_sine_eigenvalue(h: float) -> float:
    """Eigenvalue of M^-1 A on nodal sin(x) for a uniform mesh of (0, pi)."""
    return 6.0 * (1.0 - math.cos(h)) / (h * h * (2.0 + math.cos(h)))


# -- runners ---------------------------------------------------------------

def _map(fn, jobs, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def _scheme_config(cfg: ExperimentConfig, alpha, theta, tau, scheme) -> SchemeConfig:
    return SchemeConfig(alpha, theta, tau, cfg.steps(tau), corrected=(scheme == "corrected"),
                        shift_cutoff=cfg.shift_cutoff)


def _run(cfg, problem, space, alpha, theta, tau, scheme, residual_log=None):
    sc = _scheme_config(cfg, alpha, theta, tau, scheme)
    traj = stepper.solve(sc, problem, space)
    U = traj.U(sc.N)
    if not np.all(np.isfinite(U)):
        raise FloatingPointError(f"non-finite solution for alpha={alpha}, theta={theta}, tau={tau}")
    if residual_log is not None:
        residual_log[(alpha, theta, scheme, tau)] = sample_residuals(traj)
    return U


def sample_residuals(traj: stepper.Trajectory, k: int = 10, seed: int = 0) -> float:
    """Largest relative residual over k randomly chosen steps."""
    N = traj.config.N
    rng = np.random.default_rng(seed)
    steps = rng.choice(np.arange(1, N + 1), size=min(k, N), replace=False)
    return max(stepper.residual(traj, int(n)) for n in steps)


def run_table1(cfg: ExperimentConfig | None = None) -> RateTable:
    """Smooth data v = sin x on (0, pi), f = 0."""
    cfg = cfg or ExperimentConfig("table1", TABLE1_CELLS)
    cells = cfg.cells or TABLE1_CELLS
    space = Space.build(0.0, math.pi, cfg.M)
    lam = discrete_sine_eigenvalue(space.mesh.h)
    s_nodal = np.sin(space.mesh.interior)
    residuals: dict = {}

    def job(cell):
        alpha, theta = cell
        problem = example1_smooth(alpha)
        t = cfg.t_eval
        if cfg.reference == "semidiscrete":
            ref = ml_eval(alpha, -lam * t**alpha) * s_nodal
            err = lambda U: stepper.l2_norm(space.mesh, U - ref)
        else:
            amp = ml_eval(alpha, -t**alpha)
            err = lambda U: stepper.l2_error(space.mesh, U, lambda x: amp * np.sin(x))
        rows = []
        for scheme in cfg.schemes:
            errs = [err(_run(cfg, problem, space, alpha, theta, tau, scheme, residuals))
                    for tau in cfg.taus]
            rows.append(RateRow(alpha, theta, scheme, cfg.taus, tuple(errs)))
        return rows

    rows = [r for rs in _map(job, cells, cfg.workers) for r in rs]
    table = RateTable(rows, residuals)
    if cfg.output:
        table.to_csv(cfg.output)
    return table


def run_table2(cfg: ExperimentConfig | None = None) -> RateTable:
    """
    Nonsmooth data v = indicator of (0, 1/2) on (0, 1), f = 0.

    No closed form is available, so errors are measured against a run with
    step ``min(taus) / ref_factor`` on the same mesh and with the same theta.
    """
    cfg = cfg or ExperimentConfig("table2", TABLE2_CELLS)
    cells = cfg.cells or TABLE2_CELLS
    space = Space.build(0.0, 1.0, cfg.M)
    tau_ref = min(cfg.taus) / cfg.ref_factor
    residuals: dict = {}

    def job(cell):
        alpha, theta = cell
        problem = example1_indicator(alpha)
        refs = {}
        rows = []
        for scheme in cfg.schemes:
            rs = scheme if cfg.reference_scheme == "same" else "corrected"
            if rs not in refs:
                refs[rs] = _run(cfg, problem, space, alpha, theta, tau_ref, rs, residuals)
            errs = [stepper.l2_norm(space.mesh,
                                    _run(cfg, problem, space, alpha, theta, tau, scheme, residuals)
                                    - refs[rs])
                    for tau in cfg.taus]
            rows.append(RateRow(alpha, theta, scheme, cfg.taus, tuple(errs)))
        return rows

    rows = [r for rs in _map(job, cells, cfg.workers) for r in rs]
    table = RateTable(rows, residuals)
    if cfg.output:
        table.to_csv(cfg.output)
    return table


@dataclass
class SweepResult:
    rows: list[tuple[float, float, float]]   # (alpha, theta, error)
    tau: float
    residuals: dict = field(default_factory=dict, repr=False)

    def error(self, alpha: float, theta: float) -> float:
        for a, th, e in self.rows:
            if math.isclose(a, alpha) and math.isclose(th, theta):
                return e
        raise KeyError((alpha, theta))

    def ratio(self, theta: float, small: float = 0.001, base: float = 0.5) -> float:
        """error(alpha = small) / error(alpha = base) for one theta."""
        return self.error(small, theta) / self.error(base, theta)

    def violations(self) -> list[str]:
        out = []
        alphas = {a for a, _, _ in self.rows}
        for th in sorted({th for _, th, _ in self.rows}):
            if not {0.5, 0.001} <= alphas:
                break
            r = self.ratio(th)
            if not r < SWEEP_RATIO:
                out.append(f"theta={th:g}: error ratio {r:.3g} >= {SWEEP_RATIO}")
        return out

    def to_csv(self, path) -> None:
        with open_output(path) as fh:
            w = csv.writer(fh)
            w.writerow(["alpha", "theta", "error"])
            for a, th, e in self.rows:
                w.writerow([fmt(a), fmt(th), fmt(e)])


def run_alpha_sweep(cfg: ExperimentConfig | None = None, alphas: Iterable[float] = SWEEP_ALPHAS,
                    thetas: Iterable[float] = SWEEP_THETAS) -> SweepResult:
    """Corrected scheme on the manufactured solution (E_a(-t^a) + t^3) sin x."""
    cfg = cfg or ExperimentConfig("alpha_sweep", taus=(2.0**-7,))
    if cfg.cells:
        cells = cfg.cells
    else:
        cells = [(a, th) for a in alphas for th in thetas]
    tau = cfg.taus[-1]
    space = Space.build(0.0, math.pi, cfg.M)
    residuals: dict = {}

    def job(cell):
        alpha, theta = cell
        U = _run(cfg, example2(alpha), space, alpha, theta, tau, "corrected", residuals)
        return alpha, theta, stepper.l2_error(space.mesh, U, example2_exact(alpha, cfg.t_eval))

    rows = sorted(_map(job, cells, cfg.workers), key=lambda r: (-r[0], r[1]))
    res = SweepResult(rows, tau, residuals)
    if cfg.output:
        res.to_csv(cfg.output)
    return res


@dataclass
class DecayResult:
    weights: dict[float, np.ndarray]   # theta -> |t_n|, n = 0..n_max
    slopes: dict[float, float]         # theta -> fitted slope of log|t_n| on n in [5, n_max]

    def violations(self) -> list[str]:
        out = []
        for th, s in self.slopes.items():
            if th == 0.0:
                continue
            if not s < DECAY_SLOPE:
                out.append(f"theta={th:g}: slope {s:.3f} >= {DECAY_SLOPE}")
            if not self.weights[th][-1] < DECAY_TAIL:
                out.append(f"theta={th:g}: |t_n| at n={len(self.weights[th]) - 1} "
                           f"is {self.weights[th][-1]:.2e}")
        return out

    def to_csv(self, path) -> None:
        with open_output(path) as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "n", "abs_weight"])
            for th in sorted(self.weights):
                for n, v in enumerate(self.weights[th]):
                    w.writerow([fmt(th), n, fmt(v)])


def fit_log_slope(values: np.ndarray, lo: int = 5) -> float:
    """Least-squares slope of log|values[n]| against n for n >= lo."""
    n = np.arange(lo, len(values))
    y = np.abs(values[lo:])
    if np.any(y == 0.0):
        return -math.inf
    return float(np.polyfit(n, np.log(y), 1)[0])


def run_weight_decay(cfg: ExperimentConfig | None = None,
                     thetas: Iterable[float] = DECAY_THETAS) -> DecayResult:
    cfg = cfg or ExperimentConfig("weight_decay")
    if cfg.cells:
        thetas = sorted({th for _, th in cfg.cells})
    weights, slopes = {}, {}
    for th in thetas:
        w = np.abs(shift_weights(BDF2, th, cfg.decay_n).values)
        weights[float(th)] = w
        slopes[float(th)] = fit_log_slope(w)
    res = DecayResult(weights, slopes)
    if cfg.output:
        res.to_csv(cfg.output)
    return res


def weights_to_csv(weights, path) -> None:
    with open_output(path) as fh:
        w = csv.writer(fh)
        w.writerow(["n", "value"])
        for n, v in enumerate(np.asarray(weights, dtype=float)):
            w.writerow([n, fmt(v)])
