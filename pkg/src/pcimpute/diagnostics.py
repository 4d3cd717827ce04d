"""Monte Carlo evidence for the local anti-clustering conditions.

Each estimator returns n times the probability of a "two separated
exceedances within one block" event at the normalized level u_n, so that a
sequence of such numbers along an n-grid indicates whether the limit is 0.

The block horizon is floor(n / (k_n T)) T (plus T for the conditions on the
underlying X).  Replications simulate that horizon only, drawn conditionally
on a large driving variable among the first T+1 indices, which every event
here requires; the exact probability of the conditioning event re-weights
the indicator mean.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, UndefinedEstimateError
from .imputation import ModelConfig, control_bits, impute_arrays
from .parallel import chunked_sums
from .processes import ProcessConfig, normalized_level, rare_start_probability, simulate_block

DTS_LOCAL = "dts_local"
C36 = "c36"
C312 = "c312"
D22_COUNTER = "d22_counter"
CONDITIONS = (DTS_LOCAL, C36, C312, D22_COUNTER)

VANISHING = "vanishing"
NON_VANISHING = "non-vanishing"
INCONCLUSIVE = "inconclusive"

DEFAULT_K_EXPONENT = 0.5


def k_n(n: int, exponent: float = DEFAULT_K_EXPONENT) -> int:
    """k_n = floor(n ** exponent), at least 1."""
    if not (0.0 < exponent < 1.0):
        raise ConfigurationError("k_n exponent must lie in (0, 1) so that k_n -> inf and k_n = o(n)")
    # guard exact powers against rounding (1000 ** (2/3) = 99.999...)
    return max(1, int(math.floor(n**exponent + 1e-9)))


def block_periods(n: int, T: int, exponent: float = DEFAULT_K_EXPONENT) -> int:
    """r_n = floor(n / (k_n T))."""
    return n // (k_n(n, exponent) * T)


@dataclass(frozen=True)
class ConditionValue:
    estimate: float
    std_error: float
    events: int
    reps: int
    upper_bound: float | None = None


def _reduce_mean(sums, reps: int, scale: float) -> ConditionValue:
    """sums = [sum v, sum v^2, number of nonzero v]; the estimate is scale * mean(v)."""
    if reps < 2:
        raise ConfigurationError("need reps >= 2")
    sv, svv, events = float(sums[0]), float(sums[1]), int(sums[2])
    if events == 0:
        # rule of three: one-sided 95% bound for a zero count
        return ConditionValue(0.0, 0.0, 0, reps, upper_bound=scale * 3.0 / reps)
    mean = sv / reps
    var = max(svv / reps - mean * mean, 0.0) * reps / (reps - 1)
    return ConditionValue(scale * mean, scale * math.sqrt(var / reps), events, reps)


def _reduce(sums, reps: int, scale: float) -> ConditionValue:
    """Indicator counts: sums = [hits]."""
    hits = float(sums[0])
    return _reduce_mean(np.array([hits, hits, hits]), reps, scale)


def _suffix_max(a: np.ndarray) -> np.ndarray:
    """out[:, j] = max(a[:, j:]) with a trailing -inf column for empty ranges."""
    padded = np.concatenate([a, np.full((a.shape[0], 1), -np.inf)], axis=1)
    return np.maximum.accumulate(padded[:, ::-1], axis=1)[:, ::-1]


def _window_max(a: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """max(a[:, lo..hi]) inclusive, -inf for empty ranges."""
    hi = min(hi, a.shape[1] - 1)
    if lo > hi:
        return np.full(a.shape[0], -np.inf)
    return a[:, lo : hi + 1].max(axis=1)


def dts_local_sum(
    model: ModelConfig,
    s: int,
    n: int,
    reps: int = 100_000,
    seed: int = 0,
    tau: float = 20.0,
    k_exponent: float = DEFAULT_K_EXPONENT,
    threads: int | None = None,
    grid_index: int = 0,
) -> ConditionValue:
    """n (1/T) sum_{i=1}^T P(Y_i > u_n >= M(i+1, i+s-1), M(i+s, r_n T) > u_n) for {Y_n}."""
    if s < 1:
        raise ConfigurationError("s must be >= 1")
    T = model.T
    u = normalized_level(model.process, n, tau)
    horizon = block_periods(n, T, k_exponent) * T
    # length does not depend on s, so a common seed couples different s
    length = max(horizon, T)
    weight = rare_start_probability(model.process, u, T)

    def fn(rng, size):
        x, _ = simulate_block(model.process, rng, size, length, rare_level=u, rare_upto=T)
        y = impute_arrays(x, control_bits(rng, x.shape, T, model.p), T)
        y = y[:, : horizon + 1] if horizon >= 1 else y[:, :1]
        y[:, 0] = -np.inf
        tail = _suffix_max(y)
        hits = np.zeros(size)
        for i in range(1, T + 1):
            if i > horizon:
                break
            first = y[:, i] > u
            gap_ok = _window_max(y, i + 1, i + s - 1) <= u
            later = tail[:, i + s] > u if i + s <= horizon else np.zeros(size, dtype=bool)
            hits += first & gap_ok & later
        v = hits / T
        return np.array([v.sum(), (v * v).sum(), np.count_nonzero(hits)])

    sums = chunked_sums(fn, reps, (seed, 0xD75, grid_index), threads)
    return _reduce_mean(sums, reps, n * weight)


def _x_condition(process: ProcessConfig, T: int, n: int, reps: int, seed: int, tau: float,
                 k_exponent: float, threads, grid_index: int, middle_gap: bool) -> ConditionValue:
    u = normalized_level(process, n, tau)
    horizon = block_periods(n, T, k_exponent) * T + T
    weight = rare_start_probability(process, u, T)
    start = T + 2 if middle_gap else T + 1

    def fn(rng, size):
        x, _ = simulate_block(process, rng, size, max(horizon, T + 1), rare_level=u, rare_upto=T)
        hit = x[:, : T + 1].max(axis=1) > u
        if middle_gap:
            hit &= x[:, T + 1] <= u
        hit &= _window_max(x, start, horizon) > u
        return np.array([hit.sum()])

    return _reduce(chunked_sums(fn, reps, (seed, 0xC3, grid_index), threads), reps, n * weight)


def condition36_sum(process: ProcessConfig, T: int, n: int, reps: int = 100_000, seed: int = 0, tau: float = 20.0,
                    k_exponent: float = DEFAULT_K_EXPONENT, threads: int | None = None, grid_index: int = 0) -> ConditionValue:
    """n P(max(X_0..X_T) > u_n >= X_{T+1}, max(X_{T+2} .. X_{r_n T + T}) > u_n)."""
    return _x_condition(process, T, n, reps, seed, tau, k_exponent, threads, grid_index, True)


def condition312_sum(process: ProcessConfig, T: int, n: int, reps: int = 100_000, seed: int = 0, tau: float = 20.0,
                     k_exponent: float = DEFAULT_K_EXPONENT, threads: int | None = None, grid_index: int = 0) -> ConditionValue:
    """n P(max(X_0..X_T) > u_n, max(X_{T+1} .. X_{r_n T + T}) > u_n)."""
    return _x_condition(process, T, n, reps, seed, tau, k_exponent, threads, grid_index, False)


# ---------------------------------------------------------------------------
# traces over an n-grid


@dataclass(frozen=True)
class ConditionTrace:
    """Estimates of one anti-clustering sum along an increasing n-grid."""

    condition: str
    n_grid: tuple[int, ...]
    estimates: tuple[float, ...]
    std_errors: tuple[float, ...]
    k_rule: str
    tau: float
    s: int | None = None
    k_values: tuple[int, ...] = ()
    events: tuple[int, ...] = ()
    upper_bounds: tuple[float | None, ...] = ()

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ConfigurationError(f"unknown condition {self.condition!r}")
        if not self.n_grid:
            raise ConfigurationError("empty n-grid")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigurationError("n-grid must be strictly increasing")
        if not (len(self.estimates) == len(self.std_errors) == len(self.n_grid)):
            raise ConfigurationError("estimates and std_errors must align with the n-grid")
        if any(e < 0 for e in self.estimates):
            raise ConfigurationError("estimates must be non-negative")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "estimate", "std_error", "k_n", "tau", "condition", "s"])
        ks = self.k_values or (None,) * len(self.n_grid)
        for n, e, se, k in zip(self.n_grid, self.estimates, self.std_errors, ks):
            w.writerow([n, repr(float(e)), repr(float(se)), "" if k is None else k, repr(float(self.tau)),
                        self.condition, "" if self.s is None else self.s])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "n_grid": list(self.n_grid),
            "estimates": list(self.estimates),
            "std_errors": list(self.std_errors),
            "k_rule": self.k_rule,
            "k_values": list(self.k_values),
            "tau": self.tau,
            "s": self.s,
            "events": list(self.events),
            "upper_bounds": list(self.upper_bounds),
        }


def condition_value(condition: str, model: ModelConfig, n: int, reps: int, seed: int = 0, tau: float = 20.0,
                    s: int | None = None, k_exponent: float = DEFAULT_K_EXPONENT, threads: int | None = None,
                    grid_index: int = 0) -> ConditionValue:
    """Dispatch on the condition name.  ``d22_counter`` is dts_local with s = 2."""
    common = dict(reps=reps, seed=seed, tau=tau, k_exponent=k_exponent, threads=threads, grid_index=grid_index)
    if condition == DTS_LOCAL:
        return dts_local_sum(model, model.T + 1 if s is None else s, n, **common)
    if condition == D22_COUNTER:
        return dts_local_sum(model, 2, n, **common)
    if condition == C36:
        return condition36_sum(model.process, model.T, n, **common)
    if condition == C312:
        return condition312_sum(model.process, model.T, n, **common)
    raise ConfigurationError(f"unknown condition {condition!r}; expected one of {CONDITIONS}")


def trace(condition: str, model: ModelConfig, n_grid, reps: int = 100_000, seed: int = 0, tau: float = 20.0,
          s: int | None = None, k_exponent: float = DEFAULT_K_EXPONENT, threads: int | None = None) -> ConditionTrace:
    """Evaluate a condition along ``n_grid``; grid point g draws from its own stream (seed, ..., g)."""
    grid = tuple(int(n) for n in n_grid)
    if condition == DTS_LOCAL:
        s = model.T + 1 if s is None else int(s)
    elif condition == D22_COUNTER:
        s = 2
    else:
        s = None
    vals = [condition_value(condition, model, n, reps, seed, tau, s, k_exponent, threads, g)
            for g, n in enumerate(grid)]
    return ConditionTrace(
        condition,
        grid,
        tuple(v.estimate for v in vals),
        tuple(v.std_error for v in vals),
        f"k_n = floor(n^{k_exponent:g})",
        float(tau),
        s,
        tuple(k_n(n, k_exponent) for n in grid),
        tuple(v.events for v in vals),
        tuple(v.upper_bound for v in vals),
    )


def trend_report(tr: ConditionTrace) -> str:
    """Classify a trace as vanishing, non-vanishing or inconclusive.

    vanishing: last < 0.1 * first and every step is non-increasing within two
    combined standard errors (an all-zero trace counts as vanishing).
    non-vanishing: last > tau / 2 with standard error < tau / 10.
    """
    est, se = tr.estimates, tr.std_errors
    if len(est) < 3:
        raise ConfigurationError("trend_report needs at least 3 grid points")
    monotone = all(b <= a + 2.0 * math.hypot(sa, sb) for a, b, sa, sb in zip(est, est[1:], se, se[1:]))
    if monotone and (est[-1] < 0.1 * est[0] or all(e == 0 for e in est)):
        return VANISHING
    if est[-1] > 0.5 * tr.tau and se[-1] < 0.1 * tr.tau:
        return NON_VANISHING
    return INCONCLUSIVE


# ---------------------------------------------------------------------------
# coupled two-sided check


@dataclass(frozen=True)
class ExceedanceIdentityResult:
    lhs: float
    rhs: float
    gap: float
    lhs_se: float
    rhs_se: float
    std_error: float
    reps: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def exceedance_identity_check(model: ModelConfig, u: float, reps: int = 100_000, seed: int = 0,
                  threads: int | None = None) -> ExceedanceIdentityResult:
    """Compare P(Y_T > u >= max(Y_{T+1..2T})) with p^(T-1) P(X_T > u >= max(X_{T+1..2T})).

    Both sides are computed on the same X windows and masks; ``gap`` is
    |lhs - rhs| divided by the standard error of the paired difference
    (0 when the difference vanishes identically, as it does for p = 1).
    """
    T, p = model.T, model.p
    if float(model.process.marginal.sf(u)) > 0.1:
        raise ConfigurationError("u must lie in the upper tail (exceedance probability <= 0.1)")
    if reps < 2:
        raise ConfigurationError("need reps >= 2")
    c = p ** (T - 1)

    def fn(rng, size):
        x, _ = simulate_block(model.process, rng, size, 2 * T)
        y = impute_arrays(x, control_bits(rng, x.shape, T, p), T)
        left = (y[:, T] > u) & (y[:, T + 1 :].max(axis=1) <= u)
        right = (x[:, T] > u) & (x[:, T + 1 :].max(axis=1) <= u)
        d = left - c * right
        return np.array([left.sum(), right.sum(), d.sum(), (d * d).sum()])

    sl, sr, sd, sdd = chunked_sums(fn, reps, (seed, 0x1B), threads)
    if sl == 0 and sr == 0:
        raise UndefinedEstimateError(f"no qualifying event in {reps} replications at u={u}")
    ml, mr, md = float(sl) / reps, float(sr) / reps, float(sd) / reps
    var_d = max(sdd / reps - md * md, 0.0) * reps / (reps - 1)
    se = math.sqrt(var_d / reps)
    gap = 0.0 if se == 0.0 and md == 0.0 else (abs(md) / se if se > 0 else math.inf)
    return ExceedanceIdentityResult(
        float(ml),
        float(c * mr),
        float(gap),
        math.sqrt(ml * (1 - ml) / (reps - 1)),
        c * math.sqrt(mr * (1 - mr) / (reps - 1)),
        se,
        reps,
    )
