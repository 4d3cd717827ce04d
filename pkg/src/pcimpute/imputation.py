"""Periodically controlled imputation.

Observation n >= 1 is kept when U_n = 1; otherwise it is replaced by the
largest available value in the window [floor((n-1)/T)*T, n-1].  Indices that
are multiples of T are always available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, StructuralError
from .processes import ProcessConfig, ProcessPath, generate
from .rng import mix_seed, stream


@dataclass(frozen=True)
class ControlMask:
    """Availability bits U_0..U_n with U_{kT} = 1."""

    u: np.ndarray
    T: int
    p: float
    seed: int | None = None

    def __post_init__(self):
        u = np.array(self.u, dtype=np.uint8)
        if u.ndim != 1:
            raise StructuralError("mask must be one-dimensional")
        if int(self.T) != self.T or self.T < 2:
            raise ConfigurationError(f"period T must be an integer >= 2, got {self.T}")
        if np.any(u > 1):
            raise StructuralError("mask entries must be 0 or 1")
        if np.any(u[:: int(self.T)] != 1):
            raise StructuralError("control indices kT must be available")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "T", int(self.T))

    @property
    def n(self) -> int:
        return self.u.size - 1


def _check_period_and_p(T, p):
    if int(T) != T or T < 2:
        raise ConfigurationError(f"period T must be an integer >= 2, got {T} (T = 1 means no missing data)")
    # p = 1 is accepted as the degenerate no-missing-data case
    if not (0.0 < p <= 1.0):
        raise ConfigurationError(f"availability probability p must lie in (0, 1], got {p}")


def generate_mask(n: int, T: int, p: float, seed: int = 0) -> ControlMask:
    _check_period_and_p(T, p)
    if int(n) != n or n < 1:
        raise ConfigurationError(f"n must be a positive integer, got {n}")
    u = control_bits(stream(seed), (int(n) + 1,), int(T), p)
    return ControlMask(u, int(T), float(p), seed)


def control_bits(rng: np.random.Generator, shape, T: int, p: float) -> np.ndarray:
    """Bernoulli(p) availability along the last axis, forced to 1 at multiples of T."""
    u = (rng.random(shape) < p).astype(np.uint8)
    u[..., ::T] = 1
    return u


def impute_arrays(x: np.ndarray, u: np.ndarray, T: int) -> np.ndarray:
    """Vectorised imputation along the last axis.

    ``x`` and ``u`` hold indices 0..n; the result has the same shape with
    position 0 set to NaN (Y starts at index 1).
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u)
    if x.shape != u.shape:
        raise StructuralError(f"path and mask shapes differ: {x.shape} vs {u.shape}")
    size = x.shape[-1]
    nblocks = -(-size // T)
    avail = np.zeros(x.shape[:-1] + (nblocks * T,))
    # X > 0, so dropping unavailable terms equals taking the max of U_i X_i
    avail[..., :size] = np.where(u == 1, x, 0.0)
    running = np.maximum.accumulate(avail.reshape(x.shape[:-1] + (nblocks, T)), axis=-1)
    running = running.reshape(x.shape[:-1] + (nblocks * T,))[..., :size]
    y = np.empty_like(x)
    y[..., 1:] = np.where(u[..., 1:] == 1, x[..., 1:], running[..., :-1])
    y[..., 0] = np.nan
    return y


@dataclass(frozen=True)
class ImputedSeries:
    """Aligned X, U and Y arrays; ``y[0]`` is NaN and ``imputed[0]`` is 0."""

    x: ProcessPath
    mask: ControlMask
    y: np.ndarray
    imputed: np.ndarray

    @property
    def n(self) -> int:
        return self.x.n

    @property
    def T(self) -> int:
        return self.mask.T

    @property
    def p(self) -> float:
        return self.mask.p

    @property
    def u(self) -> np.ndarray:
        return self.mask.u

    @property
    def observations(self) -> np.ndarray:
        """Y_1..Y_n."""
        return self.y[1:]

    @property
    def controls(self) -> np.ndarray:
        """Y_{sT} for s >= 1."""
        return self.y[self.T :: self.T]


def impute(x: ProcessPath, mask: ControlMask) -> ImputedSeries:
    if len(x) != mask.u.size:
        raise StructuralError(f"path has {len(x)} values but mask has {mask.u.size}")
    y = impute_arrays(x.values, mask.u, mask.T)
    y.setflags(write=False)
    imputed = (1 - mask.u).astype(np.uint8)
    imputed[0] = 0
    imputed.setflags(write=False)
    return ImputedSeries(x, mask, y, imputed)


def simulate_series(config: ProcessConfig, n: int, T: int, p: float, seed: int = 0) -> ImputedSeries:
    """Path, mask and imputation from one seed (X and U use separate streams)."""
    _check_period_and_p(T, p)
    path = generate(config, n, mix_seed(seed, 1))
    mask = generate_mask(n, T, p, mix_seed(seed, 2))
    return impute(path, mask)


def stagnation_indicator(series: ImputedSeries, s: int) -> int:
    """1 if Y_{sT+j} == Y_{sT} for j = 1..T-1 (exact equality), else 0."""
    T = series.T
    if s < 1 or s * T + T - 1 > series.n:
        raise IndexError(f"block {s} out of range for n={series.n}, T={T}")
    block = series.y[s * T : s * T + T]
    return int(np.all(block[1:] == block[0]))


def stagnation_indicators(series: ImputedSeries) -> np.ndarray:
    """Indicators of A_s for s = 1..m, m = floor((n+1)/T) - 1."""
    T = series.T
    m = (series.n + 1) // T - 1
    if m < 1:
        return np.zeros(0, dtype=np.int64)
    blocks = series.y[T : (m + 1) * T].reshape(m, T)
    return np.all(blocks[:, 1:] == blocks[:, :1], axis=1).astype(np.int64)


@dataclass(frozen=True)
class ModelConfig:
    """Underlying process together with the control period and availability."""

    process: ProcessConfig
    T: int
    p: float

    def __post_init__(self):
        _check_period_and_p(self.T, self.p)
        object.__setattr__(self, "T", int(self.T))

    def simulate(self, n: int, seed: int = 0) -> ImputedSeries:
        return simulate_series(self.process, n, self.T, self.p, seed)

    def to_dict(self) -> dict:
        return {"process": self.process.to_dict(), "T": self.T, "p": self.p}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(ProcessConfig.from_dict(d["process"]), int(d["T"]), float(d["p"]))
