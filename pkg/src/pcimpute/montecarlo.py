"""Replication harness: p_hat summary grids, theta comparisons, marginal checks."""

from __future__ import annotations

import csv
import io
import json
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .errors import ConfigurationError, UndefinedEstimateError, UnsupportedError
from .estimation import ThetaEstimate, estimate_p, plugin_theta, runs_extremal_index, stagnation_frequency
from .imputation import ModelConfig, control_bits, impute_arrays
from .parallel import default_threads
from .processes import ProcessConfig, normalized_level, simulate_block, theoretical_theta_x
from .rng import mix_seed, stream
from .theory import (
    ClosedFormRequest,
    TauDecomposition,
    finite_tau,
    marginal_cdf_Fj,
    tau_combined,
    tau_j_closed_form,
    theta_y_closed_form,
)

TABLE1_P = (0.1, 0.25, 0.5, 0.75, 0.9)
TABLE1_N = (250, 1000, 5000)


# ---------------------------------------------------------------------------
# replication


@dataclass(frozen=True)
class ExperimentSpec:
    model: ModelConfig
    n_values: tuple[int, ...]
    reps: int = 1000
    master_seed: int = 0
    outputs: tuple[str, ...] = ("csv",)

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if self.reps < 1:
            raise ConfigurationError("reps must be >= 1")
        if not self.n_values:
            raise ConfigurationError("need at least one n")
        low = 2 * self.model.T - 1
        if any(n < low for n in self.n_values):
            raise ConfigurationError(f"every n must be >= 2T - 1 = {low}")

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "n_values": list(self.n_values),
            "reps": self.reps,
            "master_seed": self.master_seed,
            "outputs": list(self.outputs),
        }


def _rep_p_hat(model: ModelConfig, n: int, seed: int) -> float:
    return estimate_p(model.simulate(n, seed)).p_hat


def _rep_stagnation(model: ModelConfig, n: int, seed: int) -> float:
    return stagnation_frequency(model.simulate(n, seed))[0]


PER_REP: dict[str, Callable[[ModelConfig, int, int], float]] = {
    "p_hat": _rep_p_hat,
    "stagnation": _rep_stagnation,
}


def replication_seed(master_seed: int, grid_index: int, i: int) -> int:
    return mix_seed(master_seed, grid_index, i)


def run_replications(spec: ExperimentSpec, per_rep: str = "p_hat", threads: int | None = None,
                     grid_index: int = 0, n: int | None = None) -> np.ndarray:
    """Per-replication results for one n (default: the first of ``spec.n_values``).

    Replication i is simulated from ``replication_seed(master, grid_index, i)``
    alone, so the array does not depend on execution order or thread count.
    """
    try:
        fn = PER_REP[per_rep]
    except KeyError:
        raise ConfigurationError(f"unknown per-replication estimator {per_rep!r}; choose from {sorted(PER_REP)}") from None
    n = spec.n_values[0] if n is None else int(n)
    seeds = [replication_seed(spec.master_seed, grid_index, i) for i in range(spec.reps)]
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1:
        out = [fn(spec.model, n, s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(lambda s: fn(spec.model, n, s), seeds))
    return np.array(out, dtype=float)


@dataclass(frozen=True)
class SummaryStats:
    """Sample mean, bias, sample sd (ddof = 1) and RMSE from raw errors."""

    mean: float
    bias: float
    sd: float
    rmse: float
    reps: int

    @classmethod
    def from_values(cls, values, truth: float) -> "SummaryStats":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            raise ConfigurationError("no values to summarise")
        mean = float(v.mean())
        sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
        rmse = float(np.sqrt(np.mean((v - truth) ** 2)))
        return cls(mean, mean - truth, sd, rmse, int(v.size))


@dataclass(frozen=True)
class Table1Cell:
    p: float
    n: int
    stats: SummaryStats


@dataclass
class Table1Result:
    cells: list[Table1Cell]
    T: int
    reps: int
    master_seed: int
    process: ProcessConfig
    wall_time: float = field(default=0.0, compare=False)

    def cell(self, p: float, n: int) -> Table1Cell:
        for c in self.cells:
            if c.p == p and c.n == n:
                return c
        raise KeyError((p, n))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "n", "mean", "bias", "sd", "rmse"])
        for c in self.cells:
            s = c.stats
            w.writerow([repr(c.p), c.n, repr(s.mean), repr(s.bias), repr(s.sd), repr(s.rmse)])
        return buf.getvalue()

    def manifest(self) -> dict:
        from . import __version__

        return {
            "experiment": "table1",
            "process": self.process.to_dict(),
            "T": self.T,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "p_values": sorted({c.p for c in self.cells}),
            "n_values": sorted({c.n for c in self.cells}),
            "versions": {"pcimpute": __version__, "numpy": np.__version__, "python": platform.python_version()},
            "wall_time_s": self.wall_time,
        }

    def manifest_json(self) -> str:
        return json.dumps(self.manifest(), indent=2, sort_keys=True)


def table1(p_values=TABLE1_P, n_values=TABLE1_N, reps: int = 1000, T: int = 2, master_seed: int = 0,
           process: ProcessConfig | None = None, threads: int | None = None) -> Table1Result:
    """Mean, bias, sd and RMSE of p_hat over ``reps`` independent series per (p, n) cell.

    Cell (a, b) uses master seed mix(master_seed, a, b); the default design
    is the moving-maxima underlying with T = 2.
    """
    process = ProcessConfig.moving_maxima() if process is None else process
    start = time.perf_counter()
    cells = []
    for a, p in enumerate(p_values):
        model = ModelConfig(process, T, float(p))
        for b, n in enumerate(n_values):
            spec = ExperimentSpec(model, (n,), reps, mix_seed(master_seed, a, b))
            vals = run_replications(spec, "p_hat", threads)
            cells.append(Table1Cell(float(p), int(n), SummaryStats.from_values(vals, float(p))))
    return Table1Result(cells, T, reps, master_seed, process, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# extremal index comparison


def pooled_runs_theta(model: ModelConfig, n: int, tau: float = 20.0, run_length: int | None = None,
                      paths: int = 100, seed: int = 0, threads: int | None = None) -> ThetaEstimate:
    """Runs declustering pooled over independent paths: total clusters / total exceedances.

    The standard error is the delta-method ratio s.e. across paths.
    """
    if paths < 2:
        raise ConfigurationError("need at least 2 paths")
    u = normalized_level(model.process, n, tau)
    r = model.T + 1 if run_length is None else int(run_length)

    def one(i: int) -> tuple[int, int]:
        y = model.simulate(n, mix_seed(seed, 0x7245, i)).observations
        try:
            est = runs_extremal_index(y, u, r)
        except ArithmeticError:
            return 0, 0
        return est.exceedance_count, est.cluster_count

    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1:
        counts = [one(i) for i in range(paths)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(one, range(paths)))
    exc = np.array([c[0] for c in counts], dtype=float)
    clu = np.array([c[1] for c in counts], dtype=float)
    if exc.sum() == 0:
        raise UndefinedEstimateError("no exceedances in any path; raise tau or paths")
    theta = clu.sum() / exc.sum()
    resid = clu - theta * exc
    se = float(np.sqrt(paths / (paths - 1) * np.sum(resid**2)) / exc.sum())
    return ThetaEstimate("runs", u, r, float(theta), int(exc.sum()), int(clu.sum()), std_error=se, raw_value=float(theta))


@dataclass(frozen=True)
class ThetaReport:
    model: ModelConfig
    tau: float
    n: int
    closed_form: float | None
    plugin: ThetaEstimate | None
    runs: ThetaEstimate | None
    tau_finite: TauDecomposition
    tau_limit: TauDecomposition | None

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "tau_x": self.tau,
            "n": self.n,
            "closed_form": self.closed_form,
            "plugin": None if self.plugin is None else self.plugin.to_dict(),
            "runs": None if self.runs is None else self.runs.to_dict(),
            "tau_finite": self.tau_finite.to_dict(),
            "tau_limit": None if self.tau_limit is None else self.tau_limit.to_dict(),
        }


THETA_METHODS = ("closed", "plugin", "runs")


def theta_compare(model: ModelConfig, tau: float = 20.0, n: int = 200_000, reps: int = 200_000,
                  methods=THETA_METHODS, seed: int = 0, paths: int = 100, run_length: int | None = None,
                  threads: int | None = None) -> ThetaReport:
    """Closed form, plug-in Monte Carlo and pooled runs estimate side by side.

    ``reps`` drives the plug-in estimator, ``paths`` the runs estimator.
    """
    unknown = set(methods) - set(THETA_METHODS)
    if unknown:
        raise ConfigurationError(f"unknown methods {sorted(unknown)}; choose from {THETA_METHODS}")
    closed = None
    tau_limit = None
    req = ClosedFormRequest.for_process(model.process, model.p, model.T)
    if "closed" in methods:
        closed = theta_y_closed_form(req)
    try:
        tj = tau_j_closed_form(model.process.kind, model.T, model.p, tau, theoretical_theta_x(model.process))
        tau_limit = tau_combined(model.p, model.T, tau, tj)
    except UnsupportedError:
        pass
    plug = plugin_theta(model, n, tau, None, reps, seed, threads) if "plugin" in methods else None
    runs = pooled_runs_theta(model, n, tau, run_length, paths, seed, threads) if "runs" in methods else None
    return ThetaReport(model, tau, n, closed, plug, runs, finite_tau(model.process, model.p, model.T, n, tau), tau_limit)


@dataclass(frozen=True)
class ThetaSurface:
    theta_x: tuple[float, ...]
    p: tuple[float, ...]
    values: np.ndarray  # values[i, j] at (p[i], theta_x[j])
    T: int = 3

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta_x", "p", "theta_y"])
        for i, p in enumerate(self.p):
            for j, th in enumerate(self.theta_x):
                w.writerow([repr(th), repr(p), repr(float(self.values[i, j]))])
        return buf.getvalue()


def theta_surface(theta_x_grid, p_grid, T: int = 3, kind: str = "armax") -> ThetaSurface:
    """theta_Y over a (p, theta_X) grid from the ARMAX closed form."""
    th = tuple(float(v) for v in theta_x_grid)
    ps = tuple(float(v) for v in p_grid)
    if any(not (0.0 <= v <= 1.0) for v in th):
        raise ConfigurationError("theta_X values must lie in [0, 1]")
    vals = np.array([[theta_y_closed_form(ClosedFormRequest(kind, p, T, theta_x=v)) for v in th] for p in ps])
    return ThetaSurface(th, ps, vals, T)


# ---------------------------------------------------------------------------
# marginal law


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float
    sample_size: int
    critical_1pct: float

    @property
    def passed(self) -> bool:
        return self.statistic <= self.critical_1pct


def sample_offset(model: ModelConfig, j: int, size: int, seed: int = 0) -> np.ndarray:
    """``size`` independent draws of Y_{T+j}, each from its own stationary window."""
    T = model.T
    if not (0 <= j < T):
        raise ConfigurationError(f"offset j must be in 0..T-1, got {j}")
    rng = stream(seed, 0x3A)
    x, _ = simulate_block(model.process, rng, size, T + j)
    y = impute_arrays(x, control_bits(rng, x.shape, T, model.p), T)
    return y[:, T + j]


def marginal_check(model: ModelConfig, j: int, sample_size: int = 10_000, seed: int = 0) -> KSResult:
    """KS distance between draws of Y_{sT+j} and the closed-form F_j."""
    sample = sample_offset(model, j, sample_size, seed)
    cdf = lambda v: marginal_cdf_Fj(v, j, model.process, model.p, model.T)
    res = stats.kstest(sample, cdf)
    return KSResult(float(res.statistic), float(res.pvalue), sample_size, 1.63 / np.sqrt(sample_size))
