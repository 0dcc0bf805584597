import math
from fractions import Fraction
from itertools import count

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bondlab.domination import intersection_profile
from bondlab.errors import DomainError
from bondlab.formulas import (
    FormulaContext,
    binom_cdf_below,
    chernoff_lower_tail,
    chernoff_lower_tail_weak,
    chernoff_upper_tail,
    compute_r,
    density_prefix,
    estimate_pi,
    expected_damage,
    log_ewi_over_pi,
    log_f,
    logsumexp,
    p_hat,
    phi,
    q_i,
    r_closed_form,
)
from bondlab.graph import RandomSource, sample_gnp

from oracles import mp_log_ewi_over_pi, mp_log_f

# (n, p) points where the closed-form r is expected within one of the exact r
GRID = [(100, 0.5), (100, 0.3), (200, 0.5), (50, 0.5), (1000, 0.5), (10**4, 0.6), (10**5, 0.5), (30, 0.8)]


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class TestLogF:
    def test_full_set_is_one(self):
        for n, p in [(5, 0.1), (40, 0.9), (7, 0.0)]:
            assert log_f(n, n, p) == 0.0

    def test_small_value(self):
        assert log_f(4, 2, 0.5) == pytest.approx(math.log(3.375), rel=1e-14)

    def test_p_zero_is_minus_infinity(self):
        assert log_f(10, 3, 0.0) == -math.inf

    def test_range_errors(self):
        with pytest.raises(DomainError):
            log_f(10, 0, 0.5)
        with pytest.raises(DomainError):
            log_f(10, 11, 0.5)

    @pytest.mark.parametrize("n, p", GRID + [(30, 0.3), (12, 0.4), (10**6, 0.5)])
    def test_matches_arbitrary_precision(self, n, p):
        for k in sorted({1, 2, 3, 5, 10, n // 3, n - 1} & set(range(1, n))):
            got = log_f(n, k, p)
            want = float(mp_log_f(n, k, p))
            assert rel(got, want) <= 1e-10, (n, k, p, got, want)

    @settings(max_examples=200)
    @given(st.integers(9, 5000), st.floats(0.01, 0.99), st.data())
    def test_ratio_bound_below_quarter(self, n, p, data):
        k = data.draw(st.integers(1, n // 4))
        if k + 1 > n:
            return
        assert log_f(n, k + 1, p) - log_f(n, k, p) >= math.log(2) - 1e-9


class TestR:
    def test_spot_values(self):
        assert compute_r(100, 0.5) == 3
        assert compute_r(10, 0.9) == 1
        assert r_closed_form(100, 0.5) == 3
        assert r_closed_form(10, 0.9) == 1

    def test_f_values_around_r(self):
        assert math.exp(log_f(100, 2, 0.5)) == pytest.approx(2.8e-9, rel=0.05)
        assert math.exp(log_f(100, 3, 0.5)) == pytest.approx(0.383, rel=0.01)
        assert math.exp(log_f(10, 1, 0.9)) == pytest.approx(3.87, rel=0.01)

    def test_domain(self):
        with pytest.raises(DomainError):
            compute_r(10, 0.1)
        with pytest.raises(DomainError):
            compute_r(10, 1.0)
        with pytest.raises(DomainError):
            r_closed_form(5, 0.5)

    @settings(max_examples=200)
    @given(st.integers(2, 3000), st.floats(0.01, 0.99))
    def test_crossing_invariants(self, n, p):
        if p * n <= 1:
            return
        r = compute_r(n, p)
        thr = -math.log(p * n)
        assert 1 <= r <= n
        assert log_f(n, r, p) > thr
        if r > 1:
            assert log_f(n, r - 1, p) <= thr
        for k in range(1, min(r, n // 4)):
            assert log_f(n, k, p) <= thr

    @pytest.mark.parametrize("n, p", GRID)
    def test_closed_form_within_one_on_grid(self, n, p):
        assert abs(r_closed_form(n, p) - compute_r(n, p)) <= 1


class TestPHatAndChernoff:
    def test_p_hat(self):
        assert p_hat(1 - 1 / math.e) == pytest.approx(1.0, rel=1e-15)
        ps = np.linspace(0.001, 0.999, 200)
        vals = [p_hat(p) for p in ps]
        assert all(v > p for v, p in zip(vals, ps))
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_phi(self):
        assert phi(0) == 0
        assert phi(-1) == 1
        assert phi(-1.5) == math.inf

    @given(st.floats(0, 1e4), st.floats(1e-6, 1 - 1e-6))
    def test_lower_tail_forms_ordered(self, mu, delta):
        assert chernoff_lower_tail(mu, delta) <= chernoff_lower_tail_weak(mu, delta) * (1 + 1e-12)

    def test_tail_domains(self):
        with pytest.raises(DomainError):
            chernoff_lower_tail(1.0, 1.0)
        with pytest.raises(DomainError):
            chernoff_upper_tail(1.0, 0.0)
        assert chernoff_upper_tail(0.0, 1.0) == 1.0

    def test_logsumexp(self):
        assert logsumexp([]) == -math.inf
        assert logsumexp([math.log(2), math.log(3)]) == pytest.approx(math.log(5))

    def test_binom_cdf(self):
        assert binom_cdf_below(5, 0, 0.3) == 0.0
        assert binom_cdf_below(5, 6, 0.3) == 1.0
        assert binom_cdf_below(3, 1, 0.5) == pytest.approx(0.125)


class TestQAndW:
    def test_q_zero_when_l_zero(self):
        ctx = FormulaContext.build(100, 0.5)
        assert ctx.L == 0
        assert all(q_i(ctx, i) == 0.0 for i in range(1, ctx.r + 1))

    def test_epsilon_range(self):
        with pytest.raises(DomainError):
            FormulaContext.build(100, 0.5, epsilon=1.5)
        with pytest.raises(DomainError):
            FormulaContext.build(100, 0.5, epsilon=0.0)

    def test_q_hand_expansion(self):
        ctx = FormulaContext.build(1000, 0.5, epsilon=1.0, r=5)
        assert ctx.L == 2
        ctx1 = FormulaContext.build(1000, 0.4, epsilon=1.0, r=5)
        assert ctx1.L == 2
        ctx = FormulaContext.build(1000, 0.5, epsilon=0.9, r=3)
        assert ctx.L == 1
        assert q_i(ctx, 1) == pytest.approx((1 - 0.5) ** (2 * (ctx.r - 1)), rel=1e-12)

    @settings(max_examples=100)
    @given(st.integers(20, 400), st.floats(0.05, 0.95), st.floats(0.05, 1.0), st.integers(1, 15))
    def test_q_is_probability(self, n, p, eps, r):
        ctx = FormulaContext.build(n, p, epsilon=eps, r=r)
        assert 0 <= ctx.L <= ctx.r
        for i in range(1, r + 1):
            assert 0.0 <= q_i(ctx, i) <= 1.0

    def test_ewi_small_example(self):
        ctx = FormulaContext.build(6, 0.5, r=2)
        assert math.exp(log_ewi_over_pi(ctx, 0)) == pytest.approx(90 * 0.75**4, rel=1e-12)
        with pytest.raises(DomainError):
            log_ewi_over_pi(FormulaContext.build(6, 0.5, r=4), 0)

    @pytest.mark.parametrize("n, p", GRID + [(12, 0.4), (30, 0.3)])
    def test_ewr_equals_f(self, n, p):
        ctx = FormulaContext.build(n, p)
        assert rel(log_ewi_over_pi(ctx, ctx.r), log_f(n, ctx.r, p)) <= 1e-10

    @pytest.mark.parametrize("n, p, r", [(20, 0.5, 3), (200, 0.3, 6), (5000, 0.5, 9)])
    def test_ewi_matches_arbitrary_precision(self, n, p, r):
        ctx = FormulaContext.build(n, p, r=r)
        for i in range(r + 1):
            assert rel(log_ewi_over_pi(ctx, i), float(mp_log_ewi_over_pi(n, r, i, p))) <= 1e-10

    def test_profile_mean_matches_formula(self):
        n, p, r, samples = 10, 0.5, 2, 3000
        ctx = FormulaContext.build(n, p, r=r)
        ws = np.array([intersection_profile(sample_gnp(n, p, RandomSource(21, s)), r).W for s in range(samples)])
        for i in range(r + 1):
            pi, pi_se = estimate_pi(n, p, r, i, 200000, RandomSource(99, i))
            base = math.exp(log_ewi_over_pi(ctx, i))
            mean = ws[:, i].mean()
            se = math.hypot(ws[:, i].std(ddof=1) / math.sqrt(samples), base * pi_se)
            assert abs(mean - base * pi) <= 3 * se, (i, mean, base * pi, se)


class TestEstimatePi:
    def test_degenerate_cases(self):
        assert estimate_pi(10, 0.3, 3, 3, 100, RandomSource(0)) == (1.0, 0.0)
        assert estimate_pi(10, 1.0, 3, 1, 100, RandomSource(0))[0] == 1.0
        assert estimate_pi(10, 0.0, 3, 0, 100, RandomSource(0))[0] == 0.0

    def test_two_plus_two_disjoint(self):
        # edge covers of K_{2,2}: 7 of the 16 subsets of its edges
        est, se = estimate_pi(10, 0.5, 2, 0, 100000, RandomSource(1))
        assert abs(est - 7 / 16) <= 4 * se

    def test_one_private_vertex_each(self):
        # r=2, i=1: the two private vertices need the edge between them or to the shared vertex
        p = 0.3
        exact = p + (1 - p) * p * p
        est, se = estimate_pi(10, p, 2, 1, 100000, RandomSource(2))
        assert abs(est - exact) <= 4 * se


class TestDamageFormula:
    def test_spot_value(self):
        ctx = FormulaContext.build(100, 0.5)
        expected = 97 / 4950 * math.exp(log_f(100, 3, 0.5))
        assert math.exp(expected_damage(ctx)) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(7.5e-3, rel=0.01)

    @settings(max_examples=100)
    @given(st.integers(5, 500), st.floats(0.05, 0.95), st.data())
    def test_bounded_by_f_over_pn(self, n, p, data):
        r = data.draw(st.integers(1, n))
        ctx = FormulaContext.build(n, p, r=r)
        assert expected_damage(ctx) <= log_f(n, r, p) - math.log(p * (n - 1)) + 1e-12


class TestDensity:
    def test_examples(self):
        assert density_prefix(count(1), 10) == 1
        assert density_prefix(lambda k: k % 2 == 0, 10) == Fraction(1, 2)
        assert density_prefix([], 5) == 0
        assert density_prefix(count(2, 2), 10) == Fraction(1, 2)

    def test_domain(self):
        with pytest.raises(DomainError):
            density_prefix([], 0)
