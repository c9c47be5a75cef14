import io
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenlab.lattice import (
    FourierField,
    NormSpec,
    differentiate,
    evaluate_on_grid,
    hoermander_norm,
    measure_norm,
    modes_in_ball,
    partial_sum,
    read_field_csv,
    synthesize_member,
    weyl_count_ratio,
    write_field_csv,
)
from eigenlab.or_functions import PowerLog

ONE = PowerLog(0.0)


def brute_ball(n, lam):
    r = int(math.floor(lam))
    pts = [j for j in itertools.product(range(-r, r + 1), repeat=n) if sum(x * x for x in j) <= lam * lam]
    return sorted(pts, key=lambda j: (sum(x * x for x in j), j))


def random_field(rng, n, R):
    modes = modes_in_ball(n, R)
    keep = rng.random(len(modes)) < 0.7
    c = rng.normal(size=len(modes)) + 1j * rng.normal(size=len(modes))
    return FourierField(n, modes[keep], c[keep], R)


# -------------------------------------------------------------------- modes


def test_small_balls():
    assert modes_in_ball(1, 2)[:, 0].tolist() == [0, -1, 1, -2, 2]
    assert [tuple(j) for j in modes_in_ball(2, 1)] == [(0, 0), (-1, 0), (0, -1), (0, 1), (1, 0)]


def test_ball_count_317():
    assert len(modes_in_ball(2, 10)) == 317 == len(brute_ball(2, 10))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ball_matches_box_scan(n):
    lams = [0, 0.5, 1, 1.5, 2, 3.3, 7, 12.5, 20] + ([35, 50] if n < 3 else [])
    for lam in lams:
        got = [tuple(j) for j in modes_in_ball(n, lam)]
        assert got == brute_ball(n, lam)


def test_weyl_ratios():
    assert weyl_count_ratio(1, 100) == pytest.approx(1.005, rel=1e-15)
    assert abs(weyl_count_ratio(2, 100) - 1) <= 0.01
    assert abs(weyl_count_ratio(3, 30) - 1) <= 0.02


@pytest.mark.parametrize("lam", [20, 37, 64, 100, 141, 200])
def test_gauss_circle_envelope(lam):
    assert abs(weyl_count_ratio(2, lam) - 1) <= 5 / lam


# ------------------------------------------------------------------- fields


def test_field_canonical_and_immutable():
    f = FourierField.from_dict(2, {(1, 0): 1.0, (0, 0): 2.0, (0, 1): 0.0})
    assert [tuple(j) for j in f.modes] == [(0, 0), (1, 0)]
    with pytest.raises(AttributeError):
        f.n = 3
    with pytest.raises(ValueError):
        f.coeffs[0] = 5
    with pytest.raises(ValueError):
        FourierField(1, [[1], [1]], [1, 2])
    with pytest.raises(ValueError):
        FourierField(1, [[5]], [1], support_radius=2)


def test_field_arithmetic():
    f = FourierField.from_dict(1, {0: 1.0, 1: 2.0})
    g = FourierField.from_dict(1, {1: 2.0, 2: 1.0})
    d = (f - g).as_dict()
    assert d == {(0,): 1.0, (2,): -1.0}
    assert ((f + g) * 0.5).as_dict()[(1,)] == 2.0


def test_synthesize_hand_values():
    f = synthesize_member(ONE, 1, 0.5, 2, None)
    got = dict(zip(f.modes[:, 0].tolist(), f.coeffs))
    assert got[0] == 1 and got[1] == got[-1] == pytest.approx(0.5)
    assert got[2] == got[-2] == pytest.approx(1 / 3)
    assert hoermander_norm(f, ONE) == pytest.approx(math.sqrt(1 + 2 / 4 + 2 / 9), rel=1e-15)


def test_synthesize_deterministic():
    a = synthesize_member(PowerLog(0.75), 2, 0.25, 32, 7)
    b = synthesize_member(PowerLog(0.75), 2, 0.25, 32, 7)
    assert a.modes.tobytes() == b.modes.tobytes()
    assert a.coeffs.tobytes() == b.coeffs.tobytes()


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.floats(0.05, 1.0), st.floats(0.0, 2.0), st.integers(0, 10**6))
def test_synthesize_norm_identity_and_bound(n, eps, s, seed):
    R = {1: 40, 2: 12, 3: 5}[n]
    alpha = PowerLog(s, (0.5,), log_shift=1.0)
    f = synthesize_member(alpha, n, eps, R, seed)
    r = np.sqrt(np.sum(modes_in_ball(n, R) ** 2, axis=1))
    tail = np.sum((1 + r[r > 0]) ** (-(n + 2 * eps)))
    # the j=0 term carries weight 1 but coefficient 1/alpha(1)
    exact = math.sqrt(alpha(1.0) ** -2 + tail)
    assert hoermander_norm(f, alpha) == pytest.approx(exact, rel=1e-12)
    if alpha(1.0) >= 1:
        assert hoermander_norm(f, alpha) <= math.sqrt(1 + tail) * (1 + 1e-12)


def test_hoermander_examples():
    assert hoermander_norm(FourierField.from_dict(2, {(0, 0): 3.0}), PowerLog(5)) == 3.0
    f = FourierField.from_dict(2, {(3, 4): 1.0})
    assert hoermander_norm(f, PowerLog(2)) == pytest.approx(25.0, rel=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 2), st.floats(0, 1))
def test_hoermander_monotone_in_alpha(seed, s, extra):
    f = random_field(np.random.default_rng(seed), 2, 6)
    assert hoermander_norm(f, PowerLog(s)) <= hoermander_norm(f, PowerLog(s + extra)) * (1 + 1e-12)


def test_partial_sum_examples():
    f = synthesize_member(ONE, 2, 0.5, 10, 1)
    assert partial_sum(f, 10) is not f and partial_sum(f, 10).as_dict() == f.as_dict()
    assert [tuple(j) for j in partial_sum(f, 0).modes] == [(0, 0)]
    kept = partial_sum(f, 5)
    assert len(kept) == 81
    assert np.all(np.sum(kept.modes ** 2, axis=1) <= 25)


def test_differentiate_examples():
    f = FourierField.from_dict(1, {3: 1.0})
    assert differentiate(f, [1]).as_dict() == {(3,): 3j}
    g = FourierField.from_dict(2, {(2, -1): 1.0})
    assert differentiate(g, [1, 2]).as_dict()[(2, -1)] == pytest.approx(-2j)
    assert differentiate(g, [0, 0]).as_dict() == g.as_dict()


def test_differentiate_against_finite_differences():
    rng = np.random.default_rng(3)
    f = random_field(rng, 2, 4)
    G = 256
    h = 2 * np.pi / G
    vals = evaluate_on_grid(f, G)
    # sixth-order central differences
    w = {1: 45 / 60, 2: -9 / 60, 3: 1 / 60}

    def d(a, axis):
        return sum(c * (np.roll(a, -k, axis) - np.roll(a, k, axis)) for k, c in w.items()) / h

    fd = d(d(d(vals, 0), 1), 1)
    exact = evaluate_on_grid(differentiate(f, [1, 2]), G)
    assert np.max(np.abs(fd - exact)) / np.max(np.abs(exact)) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 6), st.integers(0, 2), st.integers(0, 2))
def test_differentiate_commutes_with_partial_sum(seed, lam, a, b):
    f = random_field(np.random.default_rng(seed), 2, 6)
    lhs = differentiate(partial_sum(f, lam), [a, b])
    rhs = partial_sum(differentiate(f, [a, b]), lam)
    assert lhs.as_dict() == rhs.as_dict()


# --------------------------------------------------------------- evaluation


@pytest.mark.parametrize("n", [1, 2, 3])
def test_constant_field(n):
    f = FourierField(n, np.zeros((1, n), dtype=int), [(2 * np.pi) ** (n / 2)])
    vals = evaluate_on_grid(f, 5)
    assert np.allclose(vals, 1.0, atol=1e-14)


def test_single_exponential():
    f = FourierField.from_dict(1, {1: (2 * np.pi) ** 0.5})
    G = 16
    tau = 2 * np.pi * np.arange(G) / G
    assert np.allclose(evaluate_on_grid(f, G), np.exp(1j * tau), atol=1e-14)


@pytest.mark.parametrize("n,R", [(1, 10), (2, 6), (3, 3)])
def test_fft_matches_direct(n, R):
    f = random_field(np.random.default_rng(n), n, R)
    G = 4 * R
    diff = evaluate_on_grid(f, G, "fft") - evaluate_on_grid(f, G, "direct")
    assert np.max(np.abs(diff)) < 1e-10


def test_aliasing_rejected():
    f = random_field(np.random.default_rng(0), 1, 5)
    with pytest.raises(ValueError):
        evaluate_on_grid(f, 10)
    with pytest.raises(ValueError):
        measure_norm(f, NormSpec("Lp", p=4, grid_per_axis=20))


# -------------------------------------------------------------------- norms


def test_norm_examples():
    assert measure_norm(FourierField.from_dict(1, {7: 5.0}), NormSpec("L2")) == 5.0
    one = FourierField.from_dict(1, {0: (2 * np.pi) ** 0.5})
    assert measure_norm(one, NormSpec("Lp", p=4)) == pytest.approx((2 * np.pi) ** 0.25, rel=1e-13)
    cos = FourierField.from_dict(1, {1: (2 * np.pi) ** 0.5 / 2, -1: (2 * np.pi) ** 0.5 / 2})
    assert measure_norm(cos, NormSpec("Lp", p=4)) == pytest.approx((3 * np.pi / 4) ** 0.25, rel=1e-13)
    assert measure_norm(cos, NormSpec("Cl", ell=1)) == pytest.approx(2.0, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10**6))
def test_parseval_and_quadrature(n, seed):
    rng = np.random.default_rng(seed)
    f = random_field(rng, n, {1: 12, 2: 5, 3: 2}[n])
    l2 = measure_norm(f, NormSpec("L2"))
    assert l2 ** 2 == pytest.approx(np.sum(np.abs(f.coeffs) ** 2), rel=1e-12)
    quad = measure_norm(f, NormSpec("Lp", p=2, oversample=2))
    assert quad == pytest.approx(l2, rel=1e-8)


SPECS = [NormSpec("L2"), NormSpec("Lp", p=3), NormSpec("Lp", p=4.5, ell=1),
         NormSpec("Cl", ell=0), NormSpec("Cl", ell=1), NormSpec("Hoermander", alpha=PowerLog(1.2))]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(SPECS))
def test_triangle_inequality(seed, spec):
    rng = np.random.default_rng(seed)
    f, g = random_field(rng, 2, 4), random_field(rng, 2, 4)
    f = FourierField(2, f.modes, f.coeffs, 4)
    g = FourierField(2, g.modes, g.coeffs, 4)
    assert measure_norm(f + g, spec) <= (measure_norm(f, spec) + measure_norm(g, spec)) * (1 + 1e-10)


def test_csv_round_trip_bit_exact():
    f = synthesize_member(PowerLog(0.75), 2, 0.25, 6, 11)
    buf = io.StringIO()
    write_field_csv(f, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "j1,j2,re,im"
    back = read_field_csv(io.StringIO(text), f.support_radius)
    assert back.coeffs.tobytes() == f.coeffs.tobytes()
    assert back.modes.tobytes() == f.modes.tobytes()
