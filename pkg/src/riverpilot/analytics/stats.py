"""Self-contained statistical tests and regression.

Nothing here depends on an external statistics library: Student-t tails go
through a regularized incomplete-beta continued fraction, the normal CDF
through math.erfc, and the Kolmogorov distribution through its
alternating-series form.  Exact Wilcoxon p-values are computed from the
full null distribution of the signed-rank sum (integer convolution over
doubled ranks, identical to enumerating all 2^n sign assignments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class LengthMismatch(ValueError):
    """Paired inputs have different lengths."""


class TooFew(ValueError):
    """Not enough observations for the requested test."""


class AllZeroDifferences(ValueError):
    """Every pre/post pair is tied; the signed-rank test is undefined."""


class DegenerateVariance(ValueError):
    """An input has zero variance where a correlation needs spread."""


class RankDeficient(ValueError):
    """Design matrix columns are (numerically) linearly dependent."""


@dataclass(frozen=True)
class StatResult:
    statistic: float
    p_value: float
    method: str
    n: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_value <= 1.0):
            raise ValueError(f"p must lie in [0, 1], got {self.p_value}")


# ---------------------------------------------------------------------------
# Distribution tails
# ---------------------------------------------------------------------------


def normal_sf(z: float) -> float:
    """Upper tail of the standard normal."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _betacf(a: float, b: float, x: float) -> float:
    # Lentz's continued fraction for the incomplete beta.
    max_iter = 300
    eps = 3e-15
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided(t: float, df: int) -> float:
    """P(|T_df| >= |t|) via the incomplete beta identity."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return min(1.0, regularized_incomplete_beta(df / 2.0, 0.5, x))


def kolmogorov_sf(lam: float) -> float:
    """Q_KS(lambda) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2)."""
    if lam < 1e-9:
        return 1.0
    acc = 0.0
    sign = 1.0
    for j in range(1, 101):
        term = sign * math.exp(-2.0 * j * j * lam * lam)
        acc += term
        if abs(term) < 1e-16:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * acc))


# ---------------------------------------------------------------------------
# Ranks and correlation
# ---------------------------------------------------------------------------


def rankdata(values) -> np.ndarray:
    """Average (mid) ranks, 1-based; ties share the mean of their positions."""
    a = np.asarray(values, dtype=float)
    order = np.argsort(a, kind="stable")
    ranks = np.empty(len(a), dtype=float)
    sorted_a = a[order]
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _paired(x, y, min_n: int):
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise LengthMismatch(f"paired inputs must match: {xa.shape} vs {ya.shape}")
    if len(xa) < min_n:
        raise TooFew(f"need at least {min_n} pairs, got {len(xa)}")
    return xa, ya


def _correlation(xa: np.ndarray, ya: np.ndarray, method: str) -> StatResult:
    n = len(xa)
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateVariance("correlation undefined for zero-variance input")
    r = float(xc @ yc) / (sx * sy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if 1.0 - r * r < 1e-15:
        p = 0.0
    else:
        t = r * math.sqrt(df / (1.0 - r * r))
        p = student_t_two_sided(t, df)
    return StatResult(r, p, method, n)


def pearson(x, y) -> StatResult:
    """Product-moment correlation with a two-sided t-test p-value."""
    xa, ya = _paired(x, y, 3)
    return _correlation(xa, ya, "pearson")


def spearman(x, y) -> StatResult:
    """Tie-corrected rank correlation; p from t = rho*sqrt((n-2)/(1-rho^2))."""
    xa, ya = _paired(x, y, 3)
    res = _correlation(rankdata(xa), rankdata(ya), "spearman")
    return res


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank
# ---------------------------------------------------------------------------


def _signed_rank_null_counts(ranks2: np.ndarray) -> np.ndarray:
    # counts[s] = number of sign assignments with doubled W+ equal to s;
    # integer convolution, exactly the 2^n enumeration aggregated by sum.
    total = int(ranks2.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in ranks2:
        r = int(r)
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(pre, post, method: str = "auto") -> StatResult:
    """Paired signed-rank test; T = min(W+, W-) with average ranks.

    Zero differences are dropped.  `method` is "auto" (exact when the
    retained n <= 20), "exact", or "normal"; the exact two-sided p is the
    null probability of a min(W+, W-) at least as extreme as observed.
    """
    pre_a, post_a = _paired(pre, post, 1)
    d = post_a - pre_a
    d = d[d != 0.0]
    n = len(d)
    if n == 0:
        raise AllZeroDifferences("all paired differences are zero")
    if n < 5:
        raise TooFew(f"need at least 5 nonzero differences, got {n}")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    total = float(ranks.sum())
    t_stat = min(w_plus, total - w_plus)

    if method == "auto":
        method = "exact" if n <= 20 else "normal"
    if method == "exact":
        # Doubled ranks are exact integers even with midrank ties.
        ranks2 = np.rint(2.0 * ranks).astype(np.int64)
        t2 = int(round(2.0 * t_stat))
        s2 = int(ranks2.sum())
        counts = _signed_rank_null_counts(ranks2)
        low = int(counts[: t2 + 1].sum())
        high = int(counts[s2 - t2 :].sum())
        overlap = int(counts[t2]) if t2 == s2 - t2 else 0
        p = (low + high - overlap) / 2.0**n
        return StatResult(t_stat, min(1.0, p), "wilcoxon-exact", n)
    if method == "normal":
        mean = total / 2.0
        var = float((ranks * ranks).sum()) / 4.0
        z = (t_stat - mean + 0.5) / math.sqrt(var)
        p = min(1.0, 2.0 * (1.0 - normal_sf(z)))
        return StatResult(t_stat, p, "wilcoxon-normal", n)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------


def ks_two_sample(a, b) -> StatResult:
    """Two-sample KS: D = sup |ECDF_a - ECDF_b|, asymptotic p."""
    aa = np.sort(np.asarray(a, dtype=float))
    bb = np.sort(np.asarray(b, dtype=float))
    n, m = len(aa), len(bb)
    if n < 3 or m < 3:
        raise TooFew("both samples need at least 3 observations")
    grid = np.concatenate((aa, bb))
    fa = np.searchsorted(aa, grid, side="right") / n
    fb = np.searchsorted(bb, grid, side="right") / m
    d = float(np.max(np.abs(fa - fb)))
    ne = n * m / (n + m)
    lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * d
    return StatResult(d, kolmogorov_sf(lam), "ks-two-sample", n + m)


# ---------------------------------------------------------------------------
# Regression and mediation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OLSResult:
    coef: np.ndarray
    stderr: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    r_squared: float
    residuals: np.ndarray
    n: int
    df: int


def ols_fit(design, y) -> OLSResult:
    """Least squares on an explicit design matrix (caller supplies intercept).

    Standard errors come from sigma^2 (X^T X)^-1 with sigma^2 = RSS/df;
    p-values are two-sided t-tests per coefficient.
    """
    x = np.asarray(design, dtype=float)
    ya = np.asarray(y, dtype=float)
    if x.ndim != 2 or len(ya) != x.shape[0]:
        raise LengthMismatch("design matrix rows must match y")
    n, k = x.shape
    if n <= k + 1:
        raise TooFew(f"need more than {k + 1} rows for {k} coefficients")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if s[-1] <= 1e-10 * s[0]:
        raise RankDeficient("design matrix is rank deficient")
    coef = vt.T @ ((u.T @ ya) / s)
    residuals = ya - x @ coef
    rss = float(residuals @ residuals)
    df = n - k
    sigma2 = rss / df
    xtx_inv_diag = np.sum((vt.T / s) ** 2, axis=1)
    stderr = np.sqrt(sigma2 * xtx_inv_diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = np.where(
            stderr > 0.0, coef / np.where(stderr > 0.0, stderr, 1.0), np.inf
        )
        t_values = np.where((stderr == 0.0) & (coef == 0.0), 0.0, t_values)
    p_values = np.array([student_t_two_sided(float(t), df) for t in t_values])
    yc = ya - ya.mean()
    tss = float(yc @ yc)
    r_squared = 1.0 - rss / tss if tss > 0.0 else 0.0
    return OLSResult(coef, stderr, t_values, p_values, r_squared, residuals, n, df)


@dataclass(frozen=True)
class MediationResult:
    path_a: float
    path_b: float
    direct: float
    indirect: float
    total: float
    sobel_z: float
    p_value: float
    n: int
    method: str = "baron-kenny+sobel"


def mediation(x, m, y) -> MediationResult:
    """Baron-Kenny mediation of x -> m -> y with a Sobel z test."""
    xa = np.asarray(x, dtype=float)
    ma = np.asarray(m, dtype=float)
    ya = np.asarray(y, dtype=float)
    if not (len(xa) == len(ma) == len(ya)):
        raise LengthMismatch("x, m, y must have equal lengths")
    n = len(xa)
    if n < 10:
        raise TooFew(f"mediation needs at least 10 observations, got {n}")
    ones = np.ones(n)
    fit_a = ols_fit(np.column_stack((ones, xa)), ma)
    fit_b = ols_fit(np.column_stack((ones, xa, ma)), ya)
    fit_c = ols_fit(np.column_stack((ones, xa)), ya)
    a = float(fit_a.coef[1])
    s_a = float(fit_a.stderr[1])
    b = float(fit_b.coef[2])
    s_b = float(fit_b.stderr[2])
    direct = float(fit_b.coef[1])
    total = float(fit_c.coef[1])
    denom = math.sqrt(b * b * s_a * s_a + a * a * s_b * s_b)
    if denom == 0.0:
        raise DegenerateVariance("Sobel denominator is zero")
    z = a * b / denom
    p = min(1.0, 2.0 * normal_sf(abs(z)))
    return MediationResult(a, b, direct, a * b, total, z, p, n)
