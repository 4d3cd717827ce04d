"""Closed-form quantities for the imputed sequence {Y_n}.

Marginal laws, tail-constant bookkeeping and the extremal indices of the
worked examples (moving maxima with T=2, ARMAX with T=2 and T=3, i.i.d. with
T=3).  Anything outside those cases has to go through the Monte Carlo
plug-in estimator in :mod:`pcimpute.estimation`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ArityError, ConfigurationError, UnsupportedError
from .processes import ARMAX, IID, MOVING_MAXIMA, ProcessConfig, joint_cdf, normalized_level


def stagnation_probability(p: float, T: int) -> float:
    """P(Y_{sT+1} = ... = Y_{sT+T-1} = Y_{sT}) = (1 - p)^(T - 1)."""
    if T < 2:
        raise ConfigurationError("T must be >= 2")
    return (1.0 - p) ** (T - 1)


def subset_weights(j: int, p: float):
    """Yield (S, weight) over S subset of {1..j-1}, weight p^|S| (1-p)^(j-1-|S|)."""
    pool = range(1, j)
    for r in range(j):
        for S in itertools.combinations(pool, r):
            yield S, p ** len(S) * (1.0 - p) ** (j - 1 - len(S))


def g_cdf(x: float, j: int, config: ProcessConfig, p: float) -> float:
    """d.f. of max(X_0, U_1 X_1, ..., U_{j-1} X_{j-1}) at ``x``.

    Sums the joint d.f. of X over {0} and S, evaluated at the common level x,
    over all availability patterns S.
    """
    if j < 1:
        raise ArityError("G_j needs j >= 1")
    total = 0.0
    for S, w in subset_weights(j, p):
        levels = {0: x}
        levels.update({i: x for i in S})
        total += w * joint_cdf(config, levels)
    return total


def marginal_cdf_Fj(x, j: int, config: ProcessConfig, p: float, T: int):
    """d.f. of Y_{kT+j}: F for j in {0, 1}, p F + (1 - p) G_j otherwise."""
    if T < 2 or not (0 <= j < T):
        raise ArityError(f"offset j must be in 0..T-1, got j={j}, T={T}")
    F = config.marginal
    if np.ndim(x):
        return np.array([marginal_cdf_Fj(float(v), j, config, p, T) for v in np.ravel(x)]).reshape(np.shape(x))
    if j in (0, 1):
        return float(F.cdf(x))
    return p * float(F.cdf(x)) + (1.0 - p) * g_cdf(x, j, config, p)


def g_tail(x: float, j: int, config: ProcessConfig, p: float) -> float:
    """1 - G_j(x), summed from complementary joint probabilities to keep precision."""
    total = 0.0
    for S, w in subset_weights(j, p):
        levels = {0: x}
        levels.update({i: x for i in S})
        total += w * (1.0 - joint_cdf(config, levels))
    return total


@dataclass(frozen=True)
class TauDecomposition:
    """tau = [((T-2)p + 2) tau_X + (1-p) sum_j tau_j] / T."""

    tau_x: float
    tau_j: Mapping[int, float]
    tau: float
    T: int
    p: float

    def to_dict(self) -> dict:
        return {"tau_x": self.tau_x, "tau_j": {str(k): v for k, v in self.tau_j.items()}, "tau": self.tau}


def tau_combined(p: float, T: int, tau_x: float, tau_j: Mapping[int, float] | Sequence[float] = ()) -> TauDecomposition:
    if T < 2:
        raise ConfigurationError("T must be >= 2")
    if tau_x <= 0:
        raise ConfigurationError("tau_x must be positive")
    if not isinstance(tau_j, Mapping):
        tau_j = {j: v for j, v in zip(range(2, T), tau_j)}
    needed = set(range(2, T))
    if set(tau_j) != needed:
        raise ArityError(f"tau_j must be given exactly for j in {sorted(needed)}, got {sorted(tau_j)}")
    total = ((T - 2) * p + 2) * tau_x + (1.0 - p) * sum(tau_j[j] for j in sorted(needed))
    return TauDecomposition(tau_x, dict(tau_j), total / T, T, p)


def finite_tau(config: ProcessConfig, p: float, T: int, n: int, tau_x: float) -> TauDecomposition:
    """Exact finite-n bookkeeping at u_n = normalized_level(config, n, tau_x).

    tau_j is n (1 - G_j(u_n)), so the returned tau equals
    n (1 - (1/T) sum_j F_j(u_n)) exactly rather than its limit.
    """
    u = normalized_level(config, n, tau_x)
    tj = {j: n * g_tail(u, j, config, p) for j in range(2, T)}
    return tau_combined(p, T, tau_x, tj)


def tau_j_closed_form(kind: str, T: int, p: float, tau_x: float, theta_x: float) -> dict[int, float]:
    """Limits tau_j for the worked examples."""
    if T == 2:
        return {}
    if T == 3 and kind == ARMAX:
        return {2: tau_x * (1.0 + p * theta_x)}
    if T == 3 and kind == IID:
        return {2: tau_x * (1.0 + p)}
    raise UnsupportedError(f"no closed-form tau_j for ({kind}, T={T})")


@dataclass(frozen=True)
class ClosedFormRequest:
    kind: str
    p: float
    T: int
    theta_x: float | None = None
    t: float | None = None
    alpha: float = 1.0

    @classmethod
    def for_process(cls, config: ProcessConfig, p: float, T: int) -> "ClosedFormRequest":
        return cls(config.kind, p, T, t=config.t, alpha=config.dist.alpha)

    def resolved_theta_x(self) -> float:
        if self.theta_x is not None:
            return self.theta_x
        if self.kind == ARMAX:
            if self.t is None:
                raise ArityError("armax needs theta_x or t")
            return 1.0 - self.t**self.alpha
        return 1.0 if self.kind == IID else 0.5


SUPPORTED_CLOSED_FORMS = ((MOVING_MAXIMA, 2), (ARMAX, 2), (ARMAX, 3), (IID, 3))


def theta_y_closed_form(req: ClosedFormRequest) -> float:
    """Extremal index of {Y_n} for the supported (process, T) pairs."""
    p, T = req.p, req.T
    if (req.kind, T) not in SUPPORTED_CLOSED_FORMS:
        raise UnsupportedError(
            f"no closed form for ({req.kind}, T={T}); use estimation.plugin_theta for a Monte Carlo value"
        )
    if req.kind == MOVING_MAXIMA:
        return 0.5
    if req.kind == IID:
        return (1.0 + 2.0 * p) / (3.0 + p * (1.0 - p))
    th = req.resolved_theta_x()
    if T == 2:
        return th + th * th * (p - 1.0) / 2.0
    num = 3.0 * th + th**2 * (-3.0 + 4.0 * p - p * p) + th**3 * (1.0 - p) ** 2
    return num / (3.0 + p * (1.0 - p) * th)


# ---------------------------------------------------------------------------
# intermediate quantities of the worked examples, kept for cross-checks


def moving_maxima_p12(p: float, tau: float) -> float:
    """P_{1,2} for moving maxima: limits tau/2, tau, tau weighted by p(1-p), (1-p)^2, p(1-p)."""
    return 0.5 * tau * p * (1.0 - p) + tau * (1.0 - p) ** 2 + tau * p * (1.0 - p)


def moving_maxima_theta_via_p12(p: float, tau: float = 1.0) -> float:
    return 0.25 * (p * p + p) + moving_maxima_p12(p, tau) / (2.0 * tau)


def theta_from_block_sums(T: int, p: float, tau_x: float, tau: float, theta_x: float, sum_p_iT: float) -> float:
    """theta_Y = tau_X theta_X ((T-1) p^T + p^(T-1)) / (tau T) + sum_i P_{i,T} / (tau T)."""
    return tau_x * theta_x * ((T - 1) * p**T + p ** (T - 1)) / (tau * T) + sum_p_iT / (tau * T)


def armax_sum_p_t3(p: float, tau_x: float, t: float, alpha: float = 1.0) -> float:
    """sum_{i=1}^{2} P_{i,3} for ARMAX assembled from the tail limits."""
    lim = lambda kind, j: armax_tail_limit(kind, j, tau_x, 1.0 - t**alpha, alpha, t)
    return (
        lim("H_gap", 0) * (p + p * p - 2.0 * p**3)
        + lim("H_gap", 1) * p * (1.0 - p)
        + lim("H_gap", 2) * (1.0 - p) ** 2
        + lim("L_mixed", 2) * p * (1.0 - p)
    )


def armax_p12_t2(p: float, tau_x: float, theta_x: float) -> float:
    """P_{1,2} for ARMAX with T=2."""
    return tau_x * theta_x * ((2.0 - theta_x) * (1.0 - p) + p * (1.0 - p))


# ---------------------------------------------------------------------------
# ARMAX tail limits

ARMAX_LIMIT_KINDS = ("H_gap", "L_power", "L_mixed")


def armax_tail_limit(kind: str, j: int, tau_x: float, theta_x: float, alpha: float, t: float) -> float:
    """Limits of n-scaled tail differences at normalized levels u_n.

    H_gap(j)   : n (H(u_n / t^(j+1)) - H(u_n))         -> tau_X theta_X sum_{k<=j} t^(k alpha)
    L_power(j) : n (1 - L(u_n / t^j))                  -> t^((j-1) alpha) tau_X theta_X
    L_mixed(j) : n (1 - L^j(u_n / t) L(u_n / t^2))     -> tau_X theta_X (j + t^alpha)
    """
    if kind not in ARMAX_LIMIT_KINDS:
        raise ArityError(f"unknown limit kind {kind!r}")
    if int(j) != j or j < (0 if kind == "H_gap" else 1):
        raise ArityError(f"invalid index j={j} for {kind}")
    ta = t**alpha
    base = tau_x * theta_x
    if kind == "H_gap":
        return base * sum(ta**k for k in range(j + 1))
    if kind == "L_power":
        return base * ta ** (j - 1)
    return base * (j + ta)


def armax_tail_prelimit(kind: str, j: int, n: int, tau_x: float, alpha: float, t: float) -> float:
    """Finite-n value of the quantity whose limit :func:`armax_tail_limit` gives."""
    config = ProcessConfig.armax(t, alpha)
    H, L = config.dist, config.innovation
    u = normalized_level(config, n, tau_x)
    if kind == "H_gap":
        return n * float(H.sf(u) - H.sf(u / t ** (j + 1)))
    if kind == "L_power":
        return n * float(L.sf(u / t**j))
    if kind == "L_mixed":
        # 1 - exp(j log L(u/t) + log L(u/t^2))
        expo = j * L._exponent(u / t) + L._exponent(u / t**2)
        return n * float(-np.expm1(-expo))
    raise ArityError(f"unknown limit kind {kind!r}")
