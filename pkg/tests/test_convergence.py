import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenlab.convergence import (
    TruncationTable,
    absolute_sum_check,
    default_schedule,
    eigenspace_rotation_stress,
    prefix_errors,
    rate_weight,
    rearrangement_stress,
    truncation_curve,
    verify_decay,
)
from eigenlab.errors import HypothesisError
from eigenlab.lattice import (
    FourierField,
    NormSpec,
    measure_norm,
    modes_in_ball,
    partial_sum,
    synthesize_member,
)
from eigenlab.or_functions import PowerLog

ALPHA = PowerLog(0.75)
L4 = NormSpec("Lp", p=4)


@pytest.fixture(scope="module")
def field32():
    return synthesize_member(ALPHA, 2, 0.25, 32, 7)


def fake_table(lams, ratio):
    lams = np.asarray(lams, float)
    ratio = np.asarray(ratio, float)
    return TruncationTable(lams, ratio, ratio, ratio, ratio, 1.0, NormSpec(), "test", float(ratio.max()))


# ------------------------------------------------------------- truncation


def test_default_schedule():
    assert default_schedule(32, 1) == [4.0, 4 * 2 ** 0.5, 8.0, 8 * 2 ** 0.5, 16.0]
    sched = default_schedule(32, 2)
    assert max(sched) ** 0.5 <= 16 and sched[0] == 4.0


def test_beyond_support_is_zero():
    f = synthesize_member(ALPHA, 2, 0.25, 8, 1)
    tab = truncation_curve(f, ALPHA, L4, 1, [2, 4, 8, 9, 20])
    assert np.all(tab.err_target[-3:] == 0) and np.all(tab.ratio[-3:] == 0)
    assert np.all(tab.err_l2[-3:] == 0)


def test_err_l2_is_parseval_tail(field32):
    tab = truncation_curve(field32, ALPHA, NormSpec("L2"), 2, [4, 9, 16, 50])
    r2 = np.sum(field32.modes ** 2, axis=1)
    for lam, e in zip(tab.lambdas, tab.err_l2):
        tail = field32.coeffs[r2 > lam]
        assert e == pytest.approx(np.sqrt(np.sum(np.abs(tail) ** 2)), rel=1e-12)
    assert np.allclose(tab.err_target, tab.err_l2, rtol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10**6))
def test_err_l2_matches_quadrature(n, seed):
    R = {1: 40, 2: 10, 3: 4}[n]
    f = synthesize_member(PowerLog(1.0), n, 0.25, R, seed)
    tab = truncation_curve(f, PowerLog(1.0), NormSpec("L2"), 1, default_schedule(R, 1) or [1.0])
    for lam, e in zip(tab.lambdas, tab.err_l2):
        quad = measure_norm(f - partial_sum(f, lam), NormSpec("Lp", p=2, oversample=2))
        assert quad == pytest.approx(e, rel=1e-8)


def test_err_target_is_direct_norm(field32):
    tab = truncation_curve(field32, ALPHA, L4, 2, [4, 6, 8, 11, 16])
    for lam, e in zip(tab.lambdas, tab.err_target):
        assert e == measure_norm(field32 - partial_sum(field32, lam ** 0.5), L4)
    assert tab.c_free == pytest.approx(tab.ratio.max())
    assert np.all(tab.err_target <= tab.bound * (1 + 1e-12))


def test_powerlog_experiment_passes(field32):
    tab = truncation_curve(field32, ALPHA, L4, 2, [4, 8, 16, 24])
    v = verify_decay(tab)
    assert v.passed and v.slope <= 0.05


def test_missing_h_factor_is_caught():
    # measure the Lp error against a rate that decays too fast: ratio grows
    f = synthesize_member(PowerLog(1.5), 1, 0.25, 128, None)
    tab = truncation_curve(f, PowerLog(1.5), NormSpec("Lp", p=4), 1, [4, 8, 16, 32, 64])
    fast = TruncationTable(tab.lambdas, tab.err_target, tab.err_l2, tab.bound,
                           tab.ratio * tab.lambdas ** 0.5, 1.0, tab.spec, "", 0.0)
    assert verify_decay(tab).passed
    assert not verify_decay(fast).passed


def test_hypotheses_enforced(field32):
    with pytest.raises(HypothesisError, match="not decreasing"):
        truncation_curve(field32, PowerLog(0.5), L4, 2, [4, 8])
    with pytest.raises(HypothesisError, match="beta"):
        truncation_curve(field32, ALPHA, NormSpec("Cl"), 2, [4, 8])
    with pytest.raises(HypothesisError, match="Divergent"):
        truncation_curve(field32, ALPHA, NormSpec("Cl"), 2, [4, 8], beta=PowerLog(0.5))
    with pytest.raises(HypothesisError):
        rate_weight(ALPHA, NormSpec("Lp", p=1.5), 2)
    with pytest.raises(HypothesisError):
        rate_weight(ALPHA, NormSpec("Hoermander", alpha=ALPHA), 2)


def test_schedule_validation(field32):
    with pytest.raises(ValueError):
        truncation_curve(field32, ALPHA, L4, 2, [4, 4])
    with pytest.raises(ValueError):
        truncation_curve(field32, ALPHA, L4, 0, [4])


def test_csv_format(field32):
    tab = truncation_curve(field32, ALPHA, L4, 2, [4, 8])
    text = tab.to_csv()
    assert text.splitlines()[0] == "lambda,err_target,err_l2,bound,ratio"
    back = TruncationTable.read_csv(text)
    assert np.array_equal(back[:, 1], tab.err_target)
    assert np.array_equal(back[:, 4], tab.ratio)


# ------------------------------------------------------------- verify_decay


def test_verify_decay_examples():
    lams = [4, 8, 16, 32]
    flat = verify_decay(fake_table(lams, [1, 1, 1, 1]))
    assert flat.passed and flat.slope == pytest.approx(0, abs=1e-12)
    rising = verify_decay(fake_table(lams, np.sqrt(lams)))
    assert not rising.passed and rising.slope == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ValueError):
        verify_decay(fake_table(lams[:3], [1, 1, 1]))
    with pytest.raises(ValueError):
        verify_decay(fake_table(lams, [1, 1, 1, 0]))


@settings(max_examples=10, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_verify_decay_scale_invariant(c):
    f = synthesize_member(ALPHA, 2, 0.25, 16, 5)
    a = truncation_curve(f, ALPHA, L4, 2, [4, 6, 8, 11, 16])
    b = truncation_curve(f * c, ALPHA, L4, 2, [4, 6, 8, 11, 16])
    assert np.allclose(a.ratio, b.ratio, rtol=1e-12, atol=0)
    assert verify_decay(a).passed == verify_decay(b).passed


# ------------------------------------------------------------ rearrangements


def _masked_tail(f, order, k):
    mask = np.ones(len(f), bool)
    mask[order[:k]] = False
    return np.sqrt(np.sum(np.abs(f.coeffs[mask]) ** 2))


def test_prefix_errors_match_masked_norm(field32):
    order = np.random.default_rng(0).permutation(len(field32))
    errs = prefix_errors(field32, order, NormSpec("L2"))
    for k in range(0, len(field32) + 1, 97):
        assert abs(errs[k] - _masked_tail(field32, order, k)) <= 1e-12
    assert errs[-1] == 0


def test_identity_order_reproduces_ball_errors(field32):
    r2 = np.sum(field32.modes ** 2, axis=1)
    ident = np.arange(len(field32))
    for lam in (4, 8, 16):
        k = int(np.count_nonzero(r2 <= lam))
        tab = truncation_curve(field32, ALPHA, L4, 2, [lam])
        assert prefix_errors(field32, ident, L4, [k])[0] == pytest.approx(tab.err_target[0], rel=1e-12)


def test_prefix_rejects_non_permutation(field32):
    with pytest.raises(ValueError):
        prefix_errors(field32, np.zeros(len(field32), int), NormSpec("L2"))


def test_l2_stress_no_violations(field32):
    rep = rearrangement_stress(field32, NormSpec("L2"), ALPHA, 2, 10, 3)
    assert rep.bound_violations == 0 and rep.final_residual == 0
    assert rep.worst_prefix_ratio <= 1 + 1e-9
    assert rep.prefixes_checked == 10 * (len(field32) + 1)
    text = rep.to_text()
    assert "bound_violations=0\n" in text and text.startswith("trials=10\n")


def test_stress_deterministic(field32):
    a = rearrangement_stress(field32, NormSpec("L2"), ALPHA, 2, 4, 9)
    b = rearrangement_stress(field32, NormSpec("L2"), ALPHA, 2, 4, 9)
    assert a == b


def test_lp_stress_reports_shape_check(field32):
    rep = rearrangement_stress(field32, L4, ALPHA, 2, 2, 1, max_prefixes=16)
    assert rep.trials == 2 and rep.final_residual == 0
    assert rep.worst_prefix_ratio > 0


def test_stress_requires_trials(field32):
    with pytest.raises(ValueError):
        rearrangement_stress(field32, NormSpec("L2"), ALPHA, 2, 0, 1)


# --------------------------------------------------------------- rotations


def test_rotation_level_25_has_twelve_modes():
    modes = modes_in_ball(2, 5)
    assert np.count_nonzero(np.sum(modes ** 2, axis=1) == 25) == 12


@pytest.mark.parametrize("n,R", [(1, 40), (2, 12), (3, 4)])
def test_rotation_discrepancy_tiny(n, R):
    f = synthesize_member(PowerLog(1.0), n, 0.25, R, 4)
    assert eigenspace_rotation_stress(f, 11) <= 1e-10


def test_rotation_single_levels_exact_zero():
    f = FourierField.from_dict(2, {(0, 0): 1.0}, support_radius=0)
    assert eigenspace_rotation_stress(f, 1) == 0.0


def test_rotation_deterministic():
    f = synthesize_member(PowerLog(1.0), 2, 0.25, 10, 4)
    assert eigenspace_rotation_stress(f, 5) == eigenspace_rotation_stress(f, 5)


# --------------------------------------------------------- absolute sums


def test_absolute_sum_examples():
    alpha = PowerLog(1.5)
    one = FourierField.from_dict(2, {(0, 0): 2.5 - 1j}, support_radius=0)
    res = absolute_sum_check(one, alpha, 2)
    assert res.lhs == pytest.approx(res.rhs, rel=1e-15) and res.passed
    zero = FourierField.zero(2, 5)
    res = absolute_sum_check(zero, alpha, 2)
    assert (res.lhs, res.rhs, res.passed) == (0.0, 0.0, True)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 20))
def test_absolute_sum_log_weight(seed, R):
    alpha = PowerLog(1.0, (0.7,), log_shift=1.0)
    f = synthesize_member(alpha, 2, 0.25, R, seed)
    assert absolute_sum_check(f, alpha, 2).passed


def test_absolute_sum_refuses_divergent():
    f = synthesize_member(PowerLog(1.0), 2, 0.25, 4, 0)
    with pytest.raises(HypothesisError):
        absolute_sum_check(f, PowerLog(1.0), 2)
