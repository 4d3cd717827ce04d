import math

import numpy as np
import pytest

from pcimpute.errors import ArityError, UnsupportedError
from pcimpute.processes import ProcessConfig
from pcimpute.theory import (
    ARMAX_LIMIT_KINDS,
    ClosedFormRequest,
    armax_p12_t2,
    armax_sum_p_t3,
    armax_tail_limit,
    armax_tail_prelimit,
    finite_tau,
    g_cdf,
    g_tail,
    marginal_cdf_Fj,
    moving_maxima_p12,
    moving_maxima_theta_via_p12,
    stagnation_probability,
    subset_weights,
    tau_combined,
    tau_j_closed_form,
    theta_from_block_sums,
    theta_y_closed_form,
)

P_GRID = [k / 100 for k in range(1, 100)]


def test_stagnation_probability():
    assert stagnation_probability(0.5, 2) == 0.5
    assert stagnation_probability(0.25, 3) == 0.5625
    assert stagnation_probability(1.0, 4) == 0.0


@pytest.mark.parametrize("j", [1, 2, 3, 5])
def test_subset_weights_sum_to_one(j):
    assert sum(w for _, w in subset_weights(j, 0.37)) == pytest.approx(1.0)
    assert len(list(subset_weights(j, 0.37))) == 2 ** (j - 1)


def test_iid_f2_closed_form():
    cfg, p = ProcessConfig.iid(), 0.3
    for x in (0.5, 1.0, 4.0):
        F = math.exp(-1 / x)
        expected = p * F + (1 - p) ** 2 * F + p * (1 - p) * F * F
        assert marginal_cdf_Fj(x, 2, cfg, p, 3) == pytest.approx(expected)


def test_fj_reduces_to_f():
    for cfg in (ProcessConfig.iid(), ProcessConfig.moving_maxima(), ProcessConfig.armax(0.5)):
        for j in (0, 1):
            assert marginal_cdf_Fj(2.0, j, cfg, 0.4, 4) == pytest.approx(float(cfg.marginal.cdf(2.0)))
        for j in (2, 3):
            assert marginal_cdf_Fj(2.0, j, cfg, 1.0, 4) == pytest.approx(float(cfg.marginal.cdf(2.0)))


def test_fj_arity_and_vectorised():
    cfg = ProcessConfig.iid()
    with pytest.raises(ArityError):
        marginal_cdf_Fj(1.0, 3, cfg, 0.5, 3)
    xs = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(marginal_cdf_Fj(xs, 2, cfg, 0.5, 3), [marginal_cdf_Fj(v, 2, cfg, 0.5, 3) for v in xs])


def test_g_tail_complements_g_cdf():
    cfg = ProcessConfig.armax(0.5)
    for x in (0.7, 3.0):
        assert g_tail(x, 3, cfg, 0.4) == pytest.approx(1 - g_cdf(x, 3, cfg, 0.4))


def test_tau_combined_examples():
    assert tau_combined(0.3, 2, 5.0).tau == 5.0
    p, th, tx = 0.4, 0.5, 2.0
    t = tau_combined(p, 3, tx, tau_j_closed_form("armax", 3, p, tx, th)).tau
    assert t == pytest.approx(tx * (1 + p * (1 - p) * th / 3))
    t = tau_combined(p, 3, tx, tau_j_closed_form("iid", 3, p, tx, 1.0)).tau
    assert t == pytest.approx(tx * (3 + p - p * p) / 3)
    with pytest.raises(ArityError):
        tau_combined(0.5, 3, 1.0, {})


def test_finite_tau_approaches_limit():
    cfg, p, tx = ProcessConfig.armax(0.5), 0.4, 3.0
    lim = tx * (1 + p * (1 - p) * 0.5 / 3)
    assert finite_tau(cfg, p, 3, 10**8, tx).tau == pytest.approx(lim, rel=1e-4)
    iid = finite_tau(ProcessConfig.iid(), p, 3, 10**8, tx).tau
    assert iid == pytest.approx(tx * (3 + p - p * p) / 3, rel=1e-4)


def test_closed_forms():
    mm = ClosedFormRequest("moving_maxima", 0.3, 2)
    assert theta_y_closed_form(mm) == 0.5
    assert theta_y_closed_form(ClosedFormRequest("armax", 0.5, 2, theta_x=0.5)) == pytest.approx(0.4375)
    assert theta_y_closed_form(ClosedFormRequest("armax", 0.5, 3, theta_x=0.5)) == pytest.approx(0.39)
    assert theta_y_closed_form(ClosedFormRequest("armax", 1.0, 3, theta_x=0.37)) == pytest.approx(0.37)
    assert theta_y_closed_form(ClosedFormRequest("armax", 1e-9, 3, theta_x=1.0)) == pytest.approx(1 / 3, abs=1e-8)
    assert theta_y_closed_form(ClosedFormRequest("iid", 0.5, 3)) == pytest.approx(2 / 3.25)
    assert theta_y_closed_form(ClosedFormRequest("iid", 0.9, 3)) == pytest.approx(2.8 / 3.09)
    req = ClosedFormRequest.for_process(ProcessConfig.armax(0.5), 0.5, 3)
    assert req.resolved_theta_x() == pytest.approx(0.5)
    with pytest.raises(UnsupportedError):
        theta_y_closed_form(ClosedFormRequest("moving_maxima", 0.5, 3))


def test_closed_forms_bounded_and_continuous():
    for th in (0.1, 0.5, 1.0):
        vals = [theta_y_closed_form(ClosedFormRequest("armax", p, 3, theta_x=th)) for p in P_GRID]
        assert all(0 < v <= 1 for v in vals)
        assert max(abs(a - b) for a, b in zip(vals, vals[1:])) < 0.02


def test_p12_identity_over_grid():
    for p in P_GRID:
        assert moving_maxima_theta_via_p12(p, 1.0) == pytest.approx(0.5, abs=1e-12)
        assert theta_from_block_sums(2, p, 7.0, 7.0, 0.5, moving_maxima_p12(p, 7.0)) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("p", [0.1, 0.5, 0.8])
@pytest.mark.parametrize("t", [0.3, 0.5, 0.9])
def test_block_sum_route_matches_armax_closed_forms(p, t):
    tx, th = 1.7, 1 - t
    closed2 = theta_y_closed_form(ClosedFormRequest("armax", p, 2, theta_x=th))
    assert theta_from_block_sums(2, p, tx, tx, th, armax_p12_t2(p, tx, th)) == pytest.approx(closed2, abs=1e-12)
    tau3 = tau_combined(p, 3, tx, tau_j_closed_form("armax", 3, p, tx, th)).tau
    closed3 = theta_y_closed_form(ClosedFormRequest("armax", p, 3, theta_x=th))
    assert theta_from_block_sums(3, p, tx, tau3, th, armax_sum_p_t3(p, tx, t)) == pytest.approx(closed3, abs=1e-12)


def test_armax_tail_limit_examples():
    assert armax_tail_limit("L_power", 1, 2.0, 0.5, 1.0, 0.5) == pytest.approx(1.0)
    assert armax_tail_limit("H_gap", 0, 2.0, 0.5, 1.0, 0.5) == pytest.approx(1.0)
    assert armax_tail_limit("L_mixed", 2, 1.0, 0.5, 1.0, 0.5) == pytest.approx(1.25)
    with pytest.raises(ArityError):
        armax_tail_limit("nope", 1, 1.0, 0.5, 1.0, 0.5)


@pytest.mark.parametrize("kind", ARMAX_LIMIT_KINDS)
@pytest.mark.parametrize("j", [1, 2, 3])
def test_armax_prelimits_converge(kind, j):
    t, alpha, tx = 0.5, 1.0, 2.0
    lim = armax_tail_limit(kind, j, tx, 1 - t**alpha, alpha, t)
    assert armax_tail_prelimit(kind, j, 10**6, tx, alpha, t) == pytest.approx(lim, rel=0.01)
