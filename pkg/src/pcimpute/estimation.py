"""Estimators for the missingness parameter p, the marginal F and theta_Y."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, SampleTooShortError, UndefinedEstimateError
from .imputation import ImputedSeries, ModelConfig, control_bits, impute_arrays, stagnation_indicators
from .parallel import chunked_sums
from .processes import normalized_level, rare_start_probability, simulate_block
from .theory import finite_tau


@dataclass(frozen=True)
class PHatResult:
    block_count: int
    indicator_sum: int
    p_hat: float
    T: int

    def to_dict(self) -> dict:
        return {"m": self.block_count, "indicator_sum": self.indicator_sum, "p_hat": self.p_hat}


def _indicators(series: ImputedSeries) -> np.ndarray:
    ind = stagnation_indicators(series)
    if ind.size < 1:
        raise SampleTooShortError(
            f"need n >= 2T - 1 for at least one full block (n={series.n}, T={series.T})"
        )
    return ind


def estimate_p(series: ImputedSeries) -> PHatResult:
    """p_hat = 1 - (mean of stagnation indicators over s = 1..m)^(1/(T-1)).

    Boundary values 0 and 1 are returned as they are.
    """
    ind = _indicators(series)
    m, k = int(ind.size), int(ind.sum())
    return PHatResult(m, k, 1.0 - (k / m) ** (1.0 / (series.T - 1)), series.T)


def stagnation_frequency(series: ImputedSeries) -> tuple[float, float]:
    """Fraction of stagnant blocks and its binomial standard error."""
    ind = _indicators(series)
    f = float(ind.mean())
    return f, math.sqrt(f * (1.0 - f) / ind.size)


class ECDF:
    """Right-continuous empirical distribution function."""

    def __init__(self, sample):
        self.sample = np.sort(np.asarray(sample, dtype=float))
        if self.sample.size == 0:
            raise SampleTooShortError("empty sample")

    def __call__(self, x):
        return np.searchsorted(self.sample, x, side="right") / self.sample.size

    def __len__(self):
        return self.sample.size


def ecdf_from_controls(series: ImputedSeries) -> ECDF:
    """Empirical d.f. of the control observations Y_{sT} = X_{sT}, s >= 1."""
    controls = series.controls
    if controls.size == 0:
        raise SampleTooShortError(f"no control observation: n={series.n} < T={series.T}")
    return ECDF(controls)


@dataclass(frozen=True)
class ThetaEstimate:
    """Extremal-index estimate.

    ``run_length`` is the declustering run length r (runs) or the window
    length s (plugin).  ``value`` is confined to [0, 1]; ``raw_value`` keeps
    the unclipped Monte Carlo figure.
    """

    method: str
    level: float
    run_length: int | None
    value: float
    exceedance_count: int
    cluster_count: int
    std_error: float | None = None
    raw_value: float | None = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "level": self.level,
            "run_length": self.run_length,
            "value": self.value,
            "std_error": self.std_error,
            "raw_value": self.raw_value,
            "exceedance_count": self.exceedance_count,
            "cluster_count": self.cluster_count,
        }


def runs_extremal_index(y, u: float, run_length: int) -> ThetaEstimate:
    """Runs declustering: clusters per exceedance.

    A new cluster starts at an exceedance preceded by at least ``run_length``
    consecutive non-exceedances.  NaN entries (e.g. Y_0) count as
    non-exceedances.
    """
    if run_length < 1:
        raise ConfigurationError("run length must be >= 1")
    y = np.asarray(y, dtype=float)
    where = np.flatnonzero(y > u)
    if where.size == 0:
        raise UndefinedEstimateError(f"no exceedance of level {u}")
    gaps = np.diff(where) - 1
    clusters = 1 + int(np.count_nonzero(gaps >= run_length))
    return ThetaEstimate("runs", float(u), int(run_length), clusters / where.size, int(where.size), clusters)


def _plugin_chunk(model: ModelConfig, u: float, s: int):
    T = model.T
    length = T + s - 1

    def fn(rng, size):
        x, _ = simulate_block(model.process, rng, size, length, rare_level=u, rare_upto=T)
        y = impute_arrays(x, control_bits(rng, x.shape, T, model.p), T)
        exc = y[:, 1:] > u  # column c is index c + 1
        hits = np.zeros(size)
        for i in range(1, T + 1):
            later = exc[:, i : i + s - 1]
            hit = exc[:, i - 1] & ~later.any(axis=1)
            hits += hit
        v = hits / T
        return np.array([v.sum(), (v * v).sum(), exc[:, :T].sum(), hits.sum()])

    return fn


def plugin_theta(
    model: ModelConfig,
    n: int,
    tau: float = 20.0,
    s: int | None = None,
    reps: int = 200_000,
    seed: int = 0,
    threads: int | None = None,
) -> ThetaEstimate:
    """Finite-n Monte Carlo value of (n / tau) (1/T) sum_i P(Y_i > u_n >= max(Y_{i+1..i+s-1})).

    ``tau`` is the tail constant of the underlying sequence: u_n solves
    n (1 - F(u_n)) = tau.  The divisor is the combined constant of {Y_n},
    computed exactly at this n.  Windows are sampled conditionally on a
    large driving variable among the first T+1 indices, which every
    counted event requires; the exact probability of that condition
    re-weights the indicator mean.  ``s`` defaults to T + 1.
    """
    T = model.T
    s = T + 1 if s is None else int(s)
    if s < 1:
        raise ConfigurationError("s must be >= 1")
    if reps < 2:
        raise ConfigurationError("plugin estimate needs reps >= 2")
    u = normalized_level(model.process, n, tau)
    tau_y = finite_tau(model.process, model.p, T, n, tau).tau
    weight = rare_start_probability(model.process, u, T)
    sums = chunked_sums(_plugin_chunk(model, u, s), reps, (seed, 0x9107), threads)
    sv, svv, n_exc, n_hit = sums
    if n_hit == 0:
        raise UndefinedEstimateError(
            f"no qualifying event in {reps} replications; raise reps or tau"
        )
    mean = sv / reps
    var = max(svv / reps - mean * mean, 0.0) * reps / (reps - 1)
    scale = n * weight / tau_y
    raw = scale * mean
    return ThetaEstimate(
        "plugin",
        u,
        s,
        min(max(raw, 0.0), 1.0),
        int(n_exc),
        int(n_hit),
        std_error=scale * math.sqrt(var / reps),
        raw_value=raw,
    )


def runs_theta(model: ModelConfig, n: int, tau: float = 20.0, run_length: int | None = None, seed: int = 0) -> ThetaEstimate:
    """Runs estimate on one simulated path of length n at u_n = normalized_level(tau)."""
    series = model.simulate(n, seed)
    u = normalized_level(model.process, n, tau)
    r = model.T + 1 if run_length is None else run_length
    return runs_extremal_index(series.observations, u, r)
