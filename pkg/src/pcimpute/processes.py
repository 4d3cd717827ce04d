"""Stationary underlying sequences {X_n}_{n>=0}.

Three families are provided, all with Fréchet-type margins:

* ``iid``            i.i.d. draws from ``dist``;
* ``moving_maxima``  X_n = max(Z_n, Z_{n-1}) / 2 with Z i.i.d. ``dist``;
* ``armax``          X_n = t * max(X_{n-1}, W_n), X_0 ~ H = ``dist`` and
                     W_n with d.f. L(x) = H(tx) / H(x).

Besides single seeded paths the module exposes :func:`simulate_block`, a
vectorised sampler of many short stationary windows that can optionally be
conditioned on a rare event at the start of the window (used by the
plug-in and anti-clustering Monte Carlo estimators).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, StructuralError
from .rng import stream

IID = "iid"
MOVING_MAXIMA = "moving_maxima"
ARMAX = "armax"
KINDS = (IID, MOVING_MAXIMA, ARMAX)

# offset keeping uniforms inside the open unit interval
_HALF_ULP = 2.0**-54


@dataclass(frozen=True)
class DistributionSpec:
    """Fréchet law with d.f. ``exp(-(x / scale) ** -alpha)`` on ``x > 0``."""

    family: str = "frechet"
    alpha: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.family != "frechet":
            raise ConfigurationError(f"unsupported distribution family {self.family!r}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ConfigurationError(f"shape alpha must be positive, got {self.alpha}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ConfigurationError(f"scale must be positive, got {self.scale}")

    def _exponent(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(x > 0, (np.maximum(x, 0.0) / self.scale) ** (-self.alpha), np.inf)

    def cdf(self, x):
        return np.exp(-self._exponent(x))

    def sf(self, x):
        """Survival function, accurate deep in the upper tail."""
        return -np.expm1(-self._exponent(x))

    def logcdf(self, x):
        return -self._exponent(x)

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q <= 0) | (q >= 1)):
            raise ValueError("quantile level must lie in (0, 1)")
        return self.scale * (-np.log(q)) ** (-1.0 / self.alpha)

    def isf(self, qbar):
        """Inverse survival function: the level exceeded with probability ``qbar``."""
        qbar = np.asarray(qbar, dtype=float)
        if np.any((qbar <= 0) | (qbar >= 1)):
            raise ValueError("tail probability must lie in (0, 1)")
        return self.scale * (-np.log1p(-qbar)) ** (-1.0 / self.alpha)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.quantile(rng.random(size) + _HALF_ULP)

    def sample_below(self, rng, level, size) -> np.ndarray:
        """Draws conditioned on ``X <= level``."""
        return self.quantile((rng.random(size) + _HALF_ULP) * self.cdf(level))

    def sample_above(self, rng, level, size) -> np.ndarray:
        """Draws conditioned on ``X > level``."""
        return self.isf((rng.random(size) + _HALF_ULP) * self.sf(level))


UNIT_FRECHET = DistributionSpec()


@dataclass(frozen=True)
class ProcessConfig:
    """Which stationary sequence to simulate.

    ``dist`` is the marginal for ``iid``, the innovation law F_Z for
    ``moving_maxima`` and the stationary marginal H for ``armax``.
    """

    kind: str
    dist: DistributionSpec = UNIT_FRECHET
    t: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown process kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.dist, DistributionSpec):
            raise ConfigurationError("dist must be a DistributionSpec")
        if self.kind == ARMAX:
            if self.t is None or not (0.0 < self.t < 1.0):
                raise ConfigurationError(f"armax requires 0 < t < 1, got t={self.t}")
        elif self.t is not None:
            raise ConfigurationError(f"parameter t only applies to armax, not {self.kind}")

    @classmethod
    def iid(cls, alpha: float = 1.0, scale: float = 1.0) -> "ProcessConfig":
        return cls(IID, DistributionSpec(alpha=alpha, scale=scale))

    @classmethod
    def moving_maxima(cls, alpha: float = 1.0, scale: float = 1.0) -> "ProcessConfig":
        return cls(MOVING_MAXIMA, DistributionSpec(alpha=alpha, scale=scale))

    @classmethod
    def armax(cls, t: float, alpha: float = 1.0, scale: float = 1.0) -> "ProcessConfig":
        return cls(ARMAX, DistributionSpec(alpha=alpha, scale=scale), t=t)

    @property
    def marginal(self) -> DistributionSpec:
        """Exact stationary marginal law F of X_n."""
        if self.kind == MOVING_MAXIMA:
            # P(max(Z_n, Z_{n-1}) <= 2x) = exp(-2 (2x/s)^-a)
            a, s = self.dist.alpha, self.dist.scale
            return DistributionSpec(alpha=a, scale=0.5 * s * 2.0 ** (1.0 / a))
        return self.dist

    @property
    def innovation(self) -> DistributionSpec:
        """Law of the driving noise (Z for moving maxima, W for armax)."""
        if self.kind == ARMAX:
            a = self.dist.alpha
            return DistributionSpec(alpha=a, scale=self.dist.scale * (self.t ** (-a) - 1.0) ** (1.0 / a))
        return self.dist

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "alpha": self.dist.alpha, "scale": self.dist.scale}
        if self.t is not None:
            d["t"] = self.t
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessConfig":
        dist = DistributionSpec(alpha=float(d.get("alpha", 1.0)), scale=float(d.get("scale", 1.0)))
        t = d.get("t")
        return cls(d["kind"], dist, None if t is None else float(t))


@dataclass(frozen=True)
class ProcessPath:
    """Sample path X_0, ..., X_n (read-only)."""

    values: np.ndarray
    config: ProcessConfig
    seed: int

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise StructuralError("a path needs at least indices 0 and 1")
        if not np.all(v > 0):
            raise StructuralError("process values must be strictly positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size - 1

    def __len__(self):
        return self.values.size


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ConfigurationError(f"path length n must be a positive integer, got {n}")
    return int(n)


def _moving_maxima_from_innovations(z: np.ndarray) -> np.ndarray:
    """X_k = max(Z_k, Z_{k-1}) / 2 where ``z[0]`` holds Z_{-1}."""
    z = np.asarray(z, dtype=float)
    return 0.5 * np.maximum(z[..., 1:], z[..., :-1])


def _armax_recursion(x0: float, w: Sequence[float], t: float) -> np.ndarray:
    out = [float(x0)]
    x = out[0]
    for wk in w:
        x = t * (x if x > wk else wk)
        out.append(x)
    return np.array(out)


def generate_iid(n: int, dist: DistributionSpec = UNIT_FRECHET, seed: int = 0) -> ProcessPath:
    n = _check_n(n)
    rng = stream(seed)
    return ProcessPath(dist.sample(rng, n + 1), ProcessConfig(IID, dist), seed)


def generate_moving_maxima(n: int, seed: int = 0, dist: DistributionSpec = UNIT_FRECHET) -> ProcessPath:
    n = _check_n(n)
    rng = stream(seed)
    z = dist.sample(rng, n + 2)  # Z_{-1}, ..., Z_n
    return ProcessPath(_moving_maxima_from_innovations(z), ProcessConfig(MOVING_MAXIMA, dist), seed)


def generate_armax(n: int, t: float, alpha: float = 1.0, seed: int = 0, scale: float = 1.0) -> ProcessPath:
    n = _check_n(n)
    config = ProcessConfig.armax(t, alpha, scale)
    rng = stream(seed)
    # X_0 is drawn exactly from H: stationary from index 0, no burn-in
    x0 = config.dist.sample(rng, 1)[0]
    w = config.innovation.sample(rng, n)
    return ProcessPath(_armax_recursion(x0, w.tolist(), t), config, seed)


def generate(config: ProcessConfig, n: int, seed: int = 0) -> ProcessPath:
    """Dispatch on ``config.kind``."""
    if config.kind == IID:
        return generate_iid(n, config.dist, seed)
    if config.kind == MOVING_MAXIMA:
        return generate_moving_maxima(n, seed, config.dist)
    return generate_armax(n, config.t, config.dist.alpha, seed, config.dist.scale)


def theoretical_theta_x(config: ProcessConfig) -> float:
    """Extremal index of {X_n}."""
    if config.kind == IID:
        return 1.0
    if config.kind == MOVING_MAXIMA:
        return 0.5
    return 1.0 - config.t**config.dist.alpha


def normalized_level(config: ProcessConfig, n: int, tau_x: float) -> float:
    """Level u_n with n * (1 - F(u_n)) = tau_x for the exact marginal F."""
    if not (0 < tau_x < n):
        raise ConfigurationError(f"level undefined: need 0 < tau_x < n, got tau_x={tau_x}, n={n}")
    return float(config.marginal.isf(tau_x / n))


def joint_cdf(config: ProcessConfig, levels: dict[int, float]) -> float:
    """P(X_i <= levels[i] for every key i), keys being non-negative indices.

    Unlisted indices are unconstrained.  Infinite levels are allowed.
    """
    if not levels:
        return 1.0
    idx = sorted(levels)
    if idx[0] < 0:
        raise StructuralError("indices must be non-negative")
    if config.kind == IID:
        return float(np.prod([config.dist.cdf(levels[i]) for i in idx]))
    if config.kind == MOVING_MAXIMA:
        # X_i <= c  <=>  Z_i <= 2c and Z_{i-1} <= 2c
        zlev: dict[int, float] = {}
        for i in idx:
            for k in (i - 1, i):
                zlev[k] = min(zlev.get(k, math.inf), 2.0 * levels[i])
        return float(np.prod([config.dist.cdf(c) for c in zlev.values()]))
    # armax: X_m <= c  <=>  X_{m-1} <= c/t and W_m <= c/t; push constraints down to X_0
    t = config.t
    L = config.innovation
    prob = 1.0
    carry = math.inf
    for m in range(idx[-1], 0, -1):
        c = min(carry, levels.get(m, math.inf))
        if math.isfinite(c):
            prob *= float(L.cdf(c / t))
        carry = c / t
    c0 = min(carry, levels.get(0, math.inf))
    return prob * float(config.dist.cdf(c0))


# ---------------------------------------------------------------------------
# batched windows


def _base_laws(config: ProcessConfig, level: float, upto: int):
    """Base variables that must exceed a threshold for some X_j > level, j <= upto.

    Returns (laws, thresholds); the event {max_{j<=upto} X_j > level} is
    contained in {some base variable exceeds its threshold}.
    """
    if config.kind == IID:
        return [config.dist] * (upto + 1), [level] * (upto + 1)
    if config.kind == MOVING_MAXIMA:
        return [config.dist] * (upto + 2), [2.0 * level] * (upto + 2)
    return [config.dist] + [config.innovation] * upto, [level] + [level / config.t] * upto


def rare_start_probability(config: ProcessConfig, level: float, upto: int) -> float:
    """Exact probability of the conditioning event used by :func:`simulate_block`."""
    laws, thr = _base_laws(config, level, upto)
    return float(-np.expm1(sum(float(d.logcdf(c)) for d, c in zip(laws, thr))))


def _sample_with_exceedance(rng, reps: int, laws, thresholds):
    """Sample base variables conditioned on at least one exceeding its threshold.

    The first exceeding coordinate K has P(K=k) proportional to
    prod_{l<k} F_l(c_l) * (1 - F_l(c_k)); earlier coordinates are drawn below
    their threshold, coordinate K above it, later ones unconditionally.
    Returns the (reps, K) draws and the probability of the conditioning event.
    """
    below = np.array([float(d.cdf(c)) for d, c in zip(laws, thresholds)])
    above = np.array([float(d.sf(c)) for d, c in zip(laws, thresholds)])
    # P(first exceedance at k), computed in log space for stability
    log_prefix = np.concatenate([[0.0], np.cumsum(np.log(below))[:-1]])
    w = np.exp(log_prefix) * above
    p_event = float(-np.expm1(np.sum(np.log(below))))
    first = np.searchsorted(np.cumsum(w) / w.sum(), rng.random(reps), side="right")
    first = np.minimum(first, len(laws) - 1)
    out = np.empty((reps, len(laws)))
    for k, (d, c) in enumerate(zip(laws, thresholds)):
        v = rng.random(reps) + _HALF_ULP
        lo = d.quantile(v * below[k])
        hi = d.isf(v * above[k])
        free = d.quantile(v)
        out[:, k] = np.where(first > k, lo, np.where(first == k, hi, free))
    return out, p_event


def simulate_block(
    config: ProcessConfig,
    rng: np.random.Generator,
    reps: int,
    length: int,
    rare_level: float | None = None,
    rare_upto: int | None = None,
) -> tuple[np.ndarray, float]:
    """Simulate ``reps`` independent stationary windows X_0, ..., X_length.

    With ``rare_level`` set, windows are drawn conditionally on a necessary
    condition for ``max(X_0..X_rare_upto) > rare_level`` (a large driving
    variable early in the window).  The second return value is the exact
    probability of that conditioning event (1.0 when unconditioned), so that
    ``weight * mean(indicator)`` is an unbiased probability estimate for any
    event contained in ``{max(X_0..X_rare_upto) > rare_level}``.
    """
    if length < 0 or reps < 1:
        raise ConfigurationError("need reps >= 1 and length >= 0")
    weight = 1.0
    if rare_level is not None:
        upto = min(int(rare_upto if rare_upto is not None else 0), length)
        laws, thr = _base_laws(config, rare_level, upto)
        head, weight = _sample_with_exceedance(rng, reps, laws, thr)
    else:
        head = np.empty((reps, 0))

    if config.kind == IID:
        tail = config.dist.sample(rng, (reps, length + 1 - head.shape[1]))
        return np.concatenate([head, tail], axis=1), weight
    if config.kind == MOVING_MAXIMA:
        tail = config.dist.sample(rng, (reps, length + 2 - head.shape[1]))
        z = np.concatenate([head, tail], axis=1)
        return _moving_maxima_from_innovations(z), weight
    # armax: column 0 of the base is X_0, the rest are W_1, W_2, ...
    if head.shape[1] == 0:
        head = config.dist.sample(rng, (reps, 1))
    w_tail = config.innovation.sample(rng, (reps, length + 1 - head.shape[1]))
    base = np.concatenate([head, w_tail], axis=1)
    x = np.empty((reps, length + 1))
    x[:, 0] = base[:, 0]
    t = config.t
    for k in range(1, length + 1):
        x[:, k] = t * np.maximum(x[:, k - 1], base[:, k])
    return x, weight
