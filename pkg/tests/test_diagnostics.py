
import pytest

from pcimpute.diagnostics import (
    C36,
    C312,
    D22_COUNTER,
    DTS_LOCAL,
    INCONCLUSIVE,
    NON_VANISHING,
    VANISHING,
    ConditionTrace,
    block_periods,
    condition36_sum,
    condition312_sum,
    dts_local_sum,
    k_n,
    exceedance_identity_check,
    trace,
    trend_report,
)
from pcimpute.errors import ConfigurationError
from pcimpute.imputation import ModelConfig
from pcimpute.processes import ProcessConfig

MM = ProcessConfig.moving_maxima()
GRID = (1000, 10_000, 100_000)


def _trace(est, se, tau=1.0):
    return ConditionTrace(C36, GRID, tuple(est), tuple(se), "k_n = floor(n^0.5)", tau)


def test_k_rule():
    assert k_n(10_000) == 100
    assert k_n(1000, 2 / 3) == 100
    assert block_periods(10_000, 2) == 50
    with pytest.raises(ConfigurationError):
        k_n(100, 1.0)


def test_trend_report_rules():
    assert trend_report(_trace((2.0, 0.5, 0.1), (0.01, 0.01, 0.01))) == VANISHING
    assert trend_report(_trace((1.1, 1.0, 1.02), (0.01, 0.01, 0.01))) == NON_VANISHING
    assert trend_report(_trace((0.4, 0.5, 0.45), (0.3, 0.3, 0.3))) == INCONCLUSIVE
    assert trend_report(_trace((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))) == VANISHING
    # a jump up beyond two standard errors breaks monotonicity
    assert trend_report(_trace((2.0, 3.0, 0.1), (0.01, 0.01, 0.01))) == INCONCLUSIVE


def test_trace_invariants():
    with pytest.raises(ConfigurationError):
        ConditionTrace(C36, (10, 10, 20), (1, 1, 1), (0, 0, 0), "", 1.0)
    with pytest.raises(ConfigurationError):
        ConditionTrace(C36, (), (), (), "", 1.0)
    with pytest.raises(ConfigurationError):
        ConditionTrace(C36, (1, 2, 3), (1, -1, 1), (0, 0, 0), "", 1.0)
    with pytest.raises(ConfigurationError):
        ConditionTrace("c99", (1, 2, 3), (1, 1, 1), (0, 0, 0), "", 1.0)
    with pytest.raises(ConfigurationError):
        trend_report(ConditionTrace(C36, (1, 2), (1, 1), (0, 0), "", 1.0))


def test_trace_csv_columns():
    tr = trace(DTS_LOCAL, ModelConfig(MM, 2, 0.5), (1000, 2000), reps=5000, seed=1, s=3)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "n,estimate,std_error,k_n,tau,condition,s"
    assert lines[1].startswith("1000,") and lines[1].endswith(",dts_local,3")
    assert tr.k_values == (31, 44)


def test_c312_contains_c36():
    for n in GRID:
        a = condition36_sum(MM, 2, n, reps=20_000, seed=3)
        b = condition312_sum(MM, 2, n, reps=20_000, seed=3)
        # same draws, nested events: exact inequality
        assert b.estimate >= a.estimate


def test_dts_non_increasing_in_s():
    m = ModelConfig(MM, 2, 0.5)
    vals = [dts_local_sum(m, s, 10_000, reps=20_000, seed=2).estimate for s in (1, 2, 3, 4)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_moving_maxima_c36_decreases_and_c312_persists():
    m = ModelConfig(MM, 2, 0.5)
    c36 = trace(C36, m, GRID, reps=50_000, seed=5)
    c312 = trace(C312, m, GRID, reps=50_000, seed=5)
    assert c36.estimates[0] > c36.estimates[1] > c36.estimates[2]
    assert c36.estimates[2] < 0.2 * c36.estimates[0]
    # the limit is tau/2, not 0
    assert c312.estimates[-1] == pytest.approx(10.0, rel=0.15)
    assert trend_report(c312) == NON_VANISHING


def test_armax_and_iid_c36_decrease():
    for cfg, T in ((ProcessConfig.armax(0.5), 3), (ProcessConfig.iid(), 2)):
        tr = trace(C36, ModelConfig(cfg, T, 0.5), GRID, reps=50_000, seed=6)
        assert tr.estimates[0] > tr.estimates[1] > tr.estimates[2]


def test_iid_c312_decreases():
    tr = trace(C312, ModelConfig(ProcessConfig.iid(), 3, 0.5), GRID, reps=50_000, seed=6)
    assert tr.estimates[0] > tr.estimates[1] > tr.estimates[2]


def test_armax_small_t_c312_reported():
    tr = trace(C312, ModelConfig(ProcessConfig.armax(0.1), 2, 0.5), GRID, reps=20_000, seed=6)
    assert all(e >= 0 for e in tr.estimates)
    assert len(tr.events) == 3


def test_d22_counter_decays():
    # two separated exceedances of Y need two independent large innovations
    tr = trace(D22_COUNTER, ModelConfig(MM, 2, 0.5), GRID, reps=50_000, seed=7)
    assert tr.s == 2
    assert tr.estimates[0] > tr.estimates[1] > tr.estimates[2]
    s1 = dts_local_sum(ModelConfig(MM, 2, 0.5), 1, 100_000, reps=50_000, seed=7)
    assert s1.estimate == pytest.approx(10.0, rel=0.15)


def test_zero_events_upper_bound():
    v = condition36_sum(ProcessConfig.iid(), 2, 1000, reps=10, seed=0, tau=1e-3)
    assert v.estimate == 0.0 and v.events == 0 and v.upper_bound > 0


def test_diagnostics_thread_invariance():
    m = ModelConfig(MM, 2, 0.5)
    a = trace(C312, m, GRID, reps=20_000, seed=9, threads=1)
    b = trace(C312, m, GRID, reps=20_000, seed=9, threads=4)
    assert a.to_csv() == b.to_csv()


def test_exceedance_identity():
    for m in (ModelConfig(MM, 2, 0.5), ModelConfig(ProcessConfig.iid(), 3, 0.5)):
        u = float(m.process.marginal.quantile(0.95))
        r = exceedance_identity_check(m, u, reps=100_000, seed=4)
        assert r.gap <= 3.0


def test_exceedance_identity_iid_oracle():
    m = ModelConfig(ProcessConfig.iid(), 3, 0.5)
    u = float(m.process.marginal.quantile(0.95))
    r = exceedance_identity_check(m, u, reps=100_000, seed=8)
    oracle = 0.25 * 0.05 * 0.95**3
    assert abs(r.lhs - oracle) <= 3 * r.lhs_se


def test_exceedance_identity_coupled_exact_at_p_one():
    m = ModelConfig(MM, 2, 1.0)
    r = exceedance_identity_check(m, float(MM.marginal.quantile(0.95)), reps=20_000, seed=1)
    assert r.lhs == r.rhs and r.gap == 0.0


def test_exceedance_identity_rejects_low_level():
    with pytest.raises(ConfigurationError):
        exceedance_identity_check(ModelConfig(MM, 2, 0.5), 0.5, reps=100)
