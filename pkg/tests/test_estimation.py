import math

import numpy as np
import pytest
from scipy import stats

from pcimpute.errors import ConfigurationError, SampleTooShortError, UndefinedEstimateError
from pcimpute.estimation import (
    ECDF,
    ecdf_from_controls,
    estimate_p,
    plugin_theta,
    runs_extremal_index,
    stagnation_frequency,
)
from pcimpute.imputation import ControlMask, ModelConfig, impute
from pcimpute.processes import ProcessConfig, ProcessPath
from pcimpute.theory import ClosedFormRequest, theta_y_closed_form


def _series(u, T):
    x = np.arange(1.0, len(u) + 1.0)
    return impute(ProcessPath(x, ProcessConfig.iid(), 0), ControlMask(u, T, 0.5))


def test_p_hat_direct_evaluation():
    u = np.ones(21, dtype=np.uint8)
    for s in (1, 2):
        u[3 * s + 1] = u[3 * s + 2] = 0
    res = estimate_p(_series(u, 3))
    assert (res.block_count, res.indicator_sum) == (6, 2)
    assert res.p_hat == pytest.approx(1 - (1 / 3) ** 0.5)
    assert res.p_hat == pytest.approx(0.42265, abs=1e-5)


def test_p_hat_boundaries():
    all_stagnant = np.array([1, 0] * 10 + [1], dtype=np.uint8)
    assert estimate_p(_series(all_stagnant, 2)).p_hat == 0.0
    assert estimate_p(_series(np.ones(21, dtype=np.uint8), 2)).p_hat == 1.0


def test_too_short():
    with pytest.raises(SampleTooShortError):
        estimate_p(_series(np.ones(4, dtype=np.uint8), 3))


@pytest.mark.parametrize("p,T,q", [(0.5, 2, 0.5), (0.25, 3, 0.5625)])
def test_stagnation_frequency_matches_closed_form(p, T, q):
    s = ModelConfig(ProcessConfig.iid(), T, p).simulate(60_000, seed=3)
    f, se = stagnation_frequency(s)
    assert abs(f - q) <= 3 * math.sqrt(q * (1 - q) / stagnation_frequency_blocks(s))


def stagnation_frequency_blocks(series):
    return (series.n + 1) // series.T - 1


def test_stagnation_frequency_near_zero_without_missing_data():
    s = ModelConfig(ProcessConfig.iid(), 2, 1.0).simulate(2000, seed=1)
    assert stagnation_frequency(s)[0] == 0.0


def test_moving_maxima_ties_inflate_stagnation():
    # adjacent moving-maxima values coincide when the shared innovation is the larger one
    p = 0.5
    s = ModelConfig(ProcessConfig.moving_maxima(), 2, p).simulate(200_000, seed=5)
    f, se = stagnation_frequency(s)
    q = (1 - p) + p / 3
    assert abs(f - q) <= 4 * se


def test_ecdf():
    e = ECDF([1.0, 2.0, 3.0])
    assert e(2.0) == pytest.approx(2 / 3)
    assert e(0.5) == 0.0 and e(3.0) == 1.0


def test_ecdf_from_controls_ks():
    s = ModelConfig(ProcessConfig.iid(), 2, 0.5).simulate(20_000, seed=2)
    e = ecdf_from_controls(s)
    assert len(e) == 10_000
    d = stats.kstest(e.sample, lambda v: np.exp(-1.0 / v)).statistic
    assert d <= 1.63 / math.sqrt(10_000)


def test_ecdf_ignores_imputed_indices():
    s = ModelConfig(ProcessConfig.iid(), 3, 0.5).simulate(300, seed=2)
    np.testing.assert_array_equal(ecdf_from_controls(s).sample, np.sort(s.y[3::3]))


def test_runs_patterns():
    assert runs_extremal_index([1, 0, 0, 0, 1], 0.5, 2).value == 1.0
    est = runs_extremal_index([1, 1, 0, 1], 0.5, 2)
    assert (est.cluster_count, est.exceedance_count) == (1, 3)
    assert est.value == pytest.approx(1 / 3)
    with pytest.raises(UndefinedEstimateError):
        runs_extremal_index([0, 0], 0.5, 1)
    with pytest.raises(ConfigurationError):
        runs_extremal_index([1], 0.5, 0)


def test_runs_nan_is_not_exceedance():
    assert runs_extremal_index([np.nan, 2.0, 0.0, 2.0], 1.0, 1).cluster_count == 2


@pytest.mark.parametrize(
    "cfg,T,p",
    [
        (ProcessConfig.iid(), 3, 0.5),
        (ProcessConfig.armax(0.5), 2, 0.5),
        (ProcessConfig.moving_maxima(), 2, 0.3),
    ],
)
def test_plugin_matches_closed_form(cfg, T, p):
    est = plugin_theta(ModelConfig(cfg, T, p), 200_000, 20.0, reps=100_000, seed=7)
    closed = theta_y_closed_form(ClosedFormRequest.for_process(cfg, p, T))
    assert abs(est.raw_value - closed) <= 3 * est.std_error
    assert 0.0 <= est.value <= 1.0


def test_plugin_window_one_is_one():
    est = plugin_theta(ModelConfig(ProcessConfig.iid(), 2, 0.999), 100_000, 20.0, s=1, reps=50_000, seed=1)
    assert est.raw_value == pytest.approx(1.0, abs=3 * est.std_error + 1e-3)


def test_plugin_thread_invariance():
    m = ModelConfig(ProcessConfig.armax(0.5), 3, 0.5)
    a = plugin_theta(m, 10_000, 5.0, reps=30_000, seed=3, threads=1)
    b = plugin_theta(m, 10_000, 5.0, reps=30_000, seed=3, threads=4)
    assert a == b
