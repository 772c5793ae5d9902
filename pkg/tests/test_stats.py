import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riverpilot.analytics.stats import (
    AllZeroDifferences,
    DegenerateVariance,
    LengthMismatch,
    RankDeficient,
    StatResult,
    TooFew,
    ks_two_sample,
    mediation,
    ols_fit,
    pearson,
    rankdata,
    spearman,
    wilcoxon_signed_rank,
)

# ---------------------------------------------------------------------------
# Independent oracles.  These deliberately use the dumbest possible
# formulations (double loops, literal enumeration, elementary closed forms)
# so they share no code with the implementation under test.
# ---------------------------------------------------------------------------


def _midranks(values):
    # Textbook midrank: 1 + (#strictly smaller) + (#equal - 1) / 2.
    out = []
    for x in values:
        less = sum(1 for u in values if u < x)
        eq = sum(1 for u in values if u == x)
        out.append(less + (eq + 1) / 2.0)
    return out


def _enum_wilcoxon(diffs):
    """Literal 2^n sign enumeration of the min(W+, W-) null distribution."""
    d = [x for x in diffs if x != 0]
    ranks = _midranks([abs(x) for x in d])
    n = len(d)
    total = sum(ranks)
    w_plus = sum(r for r, x in zip(ranks, d) if x > 0)
    t_obs = min(w_plus, total - w_plus)
    count = 0
    for signs in itertools.product((0, 1), repeat=n):
        wp = sum(r for r, s in zip(ranks, signs) if s)
        if min(wp, total - wp) <= t_obs:
            count += 1
    return t_obs, count / 2.0**n


def _t_two_sided_even_df(t, df):
    """P(|T| > t) for even df via the elementary finite series."""
    assert df % 2 == 0 and df >= 2
    u = abs(t) / math.sqrt(df + t * t)
    one_minus_u2 = df / (df + t * t)
    acc = 0.0
    coef = 1.0
    for j in range(df // 2):
        if j > 0:
            coef *= (2 * j - 1) / (2.0 * j)
        acc += coef * one_minus_u2**j
    return 1.0 - u * acc


def _pearson_oracle(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def _ols2_oracle(x, y):
    """Closed-form simple regression with intercept: hand normal equations."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    slope = sxy / sxx
    intercept = my - slope * mx
    rss = sum((b - intercept - slope * a) ** 2 for a, b in zip(x, y))
    tss = sum((b - my) ** 2 for b in y)
    sigma2 = rss / (n - 2)
    se_slope = math.sqrt(sigma2 / sxx)
    se_intercept = math.sqrt(sigma2 * (1.0 / n + mx * mx / sxx))
    return {
        "intercept": intercept,
        "slope": slope,
        "se_intercept": se_intercept,
        "se_slope": se_slope,
        "r_squared": 1.0 - rss / tss,
    }


def _ecdf_oracle_d(a, b):
    grid = sorted(set(a) | set(b))
    d = 0.0
    for x in grid:
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        d = max(d, abs(fa - fb))
    return d


# ---------------------------------------------------------------------------
# rankdata
# ---------------------------------------------------------------------------


class TestRankdata:
    def test_no_ties(self):
        np.testing.assert_allclose(rankdata([30.0, 10.0, 20.0]), [3.0, 1.0, 2.0])

    def test_ties_get_average_rank(self):
        np.testing.assert_allclose(rankdata([1.0, 2.0, 2.0, 3.0]), [1.0, 2.5, 2.5, 4.0])

    @given(
        st.lists(st.integers(-5, 5), min_size=1, max_size=30).map(
            lambda v: [float(x) for x in v]
        )
    )
    def test_matches_midrank_oracle(self, values):
        np.testing.assert_allclose(rankdata(values), _midranks(values), atol=1e-12)


# ---------------------------------------------------------------------------
# Correlation
# ---------------------------------------------------------------------------


class TestPearson:
    def test_exact_linear(self):
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        y = [2 * v + 3 for v in x]
        r = pearson(x, y)
        assert r.statistic == pytest.approx(1.0, abs=1e-12)
        assert r.p_value == pytest.approx(0.0, abs=1e-12)

    def test_constant_y_degenerate(self):
        with pytest.raises(DegenerateVariance):
            pearson([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])

    def test_ten_point_oracle(self):
        rng = np.random.default_rng(11)
        x = list(rng.normal(size=10))
        y = list(0.7 * np.asarray(x) + rng.normal(scale=0.8, size=10))
        res = pearson(x, y)
        r_hand = _pearson_oracle(x, y)
        assert res.statistic == pytest.approx(r_hand, abs=1e-9)
        df = 8
        t = r_hand * math.sqrt(df / (1 - r_hand * r_hand))
        assert res.p_value == pytest.approx(_t_two_sided_even_df(t, df), abs=1e-9)
        assert res.n == 10

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_too_few(self):
        with pytest.raises(TooFew):
            pearson([1.0, 2.0], [3.0, 1.0])


class TestSpearman:
    def test_monotone_is_one(self):
        x = [1.0, 2.0, 5.0, 9.0, 12.0]
        y = [math.exp(v) for v in x]
        r = spearman(x, y)
        assert r.statistic == pytest.approx(1.0, abs=1e-12)
        assert r.p_value == pytest.approx(0.0, abs=1e-12)

    def test_reversed_is_minus_one(self):
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        y = [-v for v in x]
        assert spearman(x, y).statistic == pytest.approx(-1.0, abs=1e-12)

    def test_eight_point_oracle(self):
        rng = np.random.default_rng(23)
        x = list(rng.normal(size=8))
        y = list(rng.normal(size=8) + 0.5 * np.asarray(x))
        res = spearman(x, y)
        rho_hand = _pearson_oracle(_midranks(x), _midranks(y))
        assert res.statistic == pytest.approx(rho_hand, abs=1e-9)
        df = 6
        t = rho_hand * math.sqrt(df / (1 - rho_hand * rho_hand))
        assert res.p_value == pytest.approx(_t_two_sided_even_df(t, df), abs=1e-9)

    def test_tied_data_uses_average_ranks(self):
        x = [1.0, 1.0, 2.0, 3.0, 4.0, 5.0]
        y = [2.0, 1.0, 3.0, 3.0, 5.0, 6.0]
        res = spearman(x, y)
        rho_hand = _pearson_oracle(_midranks(x), _midranks(y))
        assert res.statistic == pytest.approx(rho_hand, abs=1e-12)

    @settings(max_examples=60)
    @given(st.permutations(list(range(7))))
    def test_monotone_transform_invariance(self, perm):
        x = [float(i) for i in range(7)]
        y = [float(p) for p in perm]
        base = spearman(x, y).statistic
        warped_x = [math.exp(0.5 * v) for v in x]
        warped_y = [v**3 + 2 * v for v in y]
        assert spearman(warped_x, warped_y).statistic == pytest.approx(base, abs=1e-12)


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank
# ---------------------------------------------------------------------------


class TestWilcoxon:
    def test_uniform_shift_is_extreme(self):
        pre = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        post = [v + 2.5 for v in pre]
        res = wilcoxon_signed_rank(pre, post)
        assert res.statistic == 0.0
        # Only the two all-same-sign assignments are as extreme.
        assert res.p_value == pytest.approx(2.0 / 2.0**6, abs=1e-15)

    def test_spec_example_n6(self):
        diffs = [1.0, -2.0, 3.0, -4.0, 5.0, 6.0]
        pre = [0.0] * 6
        post = diffs
        res = wilcoxon_signed_rank(pre, post)
        t_hand, p_hand = _enum_wilcoxon(diffs)
        assert res.statistic == pytest.approx(t_hand, abs=1e-12)
        assert res.p_value == pytest.approx(p_hand, abs=1e-12)

    def test_fifty_seeded_datasets_match_enumeration(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            n = int(rng.integers(6, 13))
            # Integer-ish data makes ties (and tied |d| ranks) common.
            pre = rng.integers(0, 6, size=n).astype(float)
            post = pre + rng.integers(-3, 4, size=n).astype(float)
            if np.all(post == pre):
                post[0] += 1.0
            diffs = list(post - pre)
            kept = [d for d in diffs if d != 0]
            if len(kept) < 5:
                continue
            res = wilcoxon_signed_rank(list(pre), list(post))
            t_hand, p_hand = _enum_wilcoxon(diffs)
            assert res.statistic == pytest.approx(t_hand, abs=1e-12)
            assert res.p_value == pytest.approx(p_hand, abs=1e-12)
            assert res.method == "wilcoxon-exact"

    def test_zero_differences_dropped(self):
        pre = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]
        post = [1.0, 3.0, 5.0, 6.0, 7.0, 8.0, 9.0]  # first pair ties
        res = wilcoxon_signed_rank(pre, post)
        assert res.n == 6

    def test_all_zero_differences(self):
        with pytest.raises(AllZeroDifferences):
            wilcoxon_signed_rank([1.0] * 6, [1.0] * 6)

    def test_too_few_after_drop(self):
        with pytest.raises(TooFew):
            wilcoxon_signed_rank([1.0, 2.0, 3.0, 4.0], [2.0, 3.0, 4.0, 5.0])

    def test_normal_approx_close_to_exact_at_boundary(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            pre = rng.normal(size=20)
            post = pre + rng.normal(loc=0.3, size=20)
            exact = wilcoxon_signed_rank(list(pre), list(post), method="exact")
            approx = wilcoxon_signed_rank(list(pre), list(post), method="normal")
            assert abs(exact.p_value - approx.p_value) < 0.01

    def test_large_n_uses_normal(self):
        rng = np.random.default_rng(9)
        pre = rng.normal(size=25)
        post = pre + rng.normal(loc=0.5, size=25)
        res = wilcoxon_signed_rank(list(pre), list(post))
        assert res.method == "wilcoxon-normal"
        assert 0.0 <= res.p_value <= 1.0


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------


class TestKS:
    def test_identical_samples(self):
        a = [1.0, 2.0, 3.0, 4.0]
        res = ks_two_sample(a, list(a))
        assert res.statistic == 0.0
        assert res.p_value == pytest.approx(1.0)

    def test_disjoint_supports(self):
        res = ks_two_sample([1.0, 2.0, 3.0], [10.0, 11.0, 12.0])
        assert res.statistic == pytest.approx(1.0)
        assert res.p_value < 0.2

    def test_d_matches_ecdf_oracle(self):
        rng = np.random.default_rng(5)
        a = list(rng.normal(size=10))
        b = list(rng.normal(loc=0.8, size=10))
        res = ks_two_sample(a, b)
        assert res.statistic == pytest.approx(_ecdf_oracle_d(a, b), abs=1e-12)

    @settings(max_examples=40)
    @given(
        st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=15),
        st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=15),
    )
    def test_order_invariant_and_bounded(self, a, b):
        res = ks_two_sample(a, b)
        shuffled = ks_two_sample(list(reversed(a)), list(reversed(b)))
        assert res.statistic == pytest.approx(shuffled.statistic, abs=1e-12)
        assert res.statistic == pytest.approx(_ecdf_oracle_d(a, b), abs=1e-12)
        assert 0.0 <= res.p_value <= 1.0

    def test_too_few(self):
        with pytest.raises(TooFew):
            ks_two_sample([1.0, 2.0], [1.0, 2.0, 3.0])


# ---------------------------------------------------------------------------
# OLS
# ---------------------------------------------------------------------------


def _design(x):
    return np.column_stack((np.ones(len(x)), np.asarray(x)))


class TestOLS:
    def test_exact_linear(self):
        x = np.arange(8.0)
        y = 3.0 * x - 2.0
        fit = ols_fit(_design(x), y)
        np.testing.assert_allclose(fit.coef, [-2.0, 3.0], atol=1e-10)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(fit.residuals, 0.0, atol=1e-9)

    def test_constant_y_gives_zero_slope(self):
        x = np.arange(10.0)
        y = np.full(10, 4.2)
        fit = ols_fit(_design(x), y)
        assert fit.coef[1] == pytest.approx(0.0, abs=1e-12)

    def test_twelve_point_hand_oracle(self):
        rng = np.random.default_rng(31)
        x = rng.uniform(-3, 3, size=12)
        y = 1.5 * x - 0.7 + rng.normal(scale=0.6, size=12)
        fit = ols_fit(_design(x), y)
        hand = _ols2_oracle(list(x), list(y))
        assert fit.coef[0] == pytest.approx(hand["intercept"], abs=1e-9)
        assert fit.coef[1] == pytest.approx(hand["slope"], abs=1e-9)
        assert fit.stderr[0] == pytest.approx(hand["se_intercept"], abs=1e-9)
        assert fit.stderr[1] == pytest.approx(hand["se_slope"], abs=1e-9)
        assert fit.r_squared == pytest.approx(hand["r_squared"], abs=1e-9)
        df = 10
        for i in (0, 1):
            t = fit.coef[i] / fit.stderr[i]
            assert fit.p_values[i] == pytest.approx(
                _t_two_sided_even_df(t, df), abs=1e-9
            )

    def test_rank_deficient(self):
        x = np.arange(8.0)
        design = np.column_stack((np.ones(8), x, 2 * x))
        with pytest.raises(RankDeficient):
            ols_fit(design, x)

    def test_too_few_rows(self):
        with pytest.raises(TooFew):
            ols_fit(_design([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0]))


# ---------------------------------------------------------------------------
# Mediation
# ---------------------------------------------------------------------------


class TestMediation:
    def test_constructed_chain(self):
        rng = np.random.default_rng(77)
        x = rng.normal(size=50)
        m = 2.0 * x + rng.normal(scale=1e-3, size=50)
        y = 3.0 * m + rng.normal(scale=1e-3, size=50)
        res = mediation(x, m, y)
        # X and M are nearly collinear by construction, which inflates the
        # coefficient split in Y ~ X + M; the product still lands near 6.
        assert res.indirect == pytest.approx(6.0, abs=0.1)
        assert res.p_value < 1e-6

    def test_null_false_positive_rate(self):
        rng = np.random.default_rng(123)
        hits = 0
        reps = 200
        for _ in range(reps):
            x = rng.normal(size=30)
            m = rng.normal(size=30)
            y = rng.normal(size=30)
            res = mediation(x, m, y)
            if res.p_value < 0.05:
                hits += 1
        assert hits / reps <= 0.07

    def test_degenerate_chain_raises_rank_deficient(self):
        x = np.arange(12.0)
        m = 2.0 * x
        y = 3.0 * m
        with pytest.raises(RankDeficient):
            mediation(x, m, y)

    def test_too_few(self):
        with pytest.raises(TooFew):
            mediation(np.arange(5.0), np.arange(5.0), np.arange(5.0))


class TestStatResult:
    def test_p_in_unit_interval(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = list(rng.normal(size=12))
            y = list(rng.normal(size=12))
            for res in (
                pearson(x, y),
                spearman(x, y),
                ks_two_sample(x, y),
                wilcoxon_signed_rank(x, y),
            ):
                assert isinstance(res, StatResult)
                assert 0.0 <= res.p_value <= 1.0
