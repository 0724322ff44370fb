"""Shared statistics: Welch t, cluster permutation, bootstrap CIs, Wilcoxon, FDR.

All resampling routines are seeded, and every replicate draws from its own
generator derived from (seed, replicate index), so results do not depend on
how the replicate loop is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special
from scipy.stats import rankdata


# ---------------------------------------------------------------------------
# Student-t distribution
# ---------------------------------------------------------------------------

class StudentT:
    """CDF and inverse CDF of Student's t with ``df`` degrees of freedom.

    The CDF is evaluated through the regularized incomplete beta function;
    the inverse is obtained by monotone root finding on the CDF.
    """

    def __init__(self, df: float):
        if df <= 0:
            raise ValueError(f"df must be positive, got {df}")
        self.df = float(df)

    def cdf(self, x: float) -> float:
        v = self.df
        x = float(x)
        if x == 0.0:
            return 0.5
        if math.isinf(x):
            return 1.0 if x > 0 else 0.0
        tail = 0.5 * special.betainc(v / 2.0, 0.5, v / (v + x * x))
        return 1.0 - tail if x > 0 else tail

    def sf(self, x: float) -> float:
        return self.cdf(-float(x))

    def ppf(self, q: float) -> float:
        if not 0.0 < q < 1.0:
            raise ValueError(f"q must be in (0, 1), got {q}")
        if q == 0.5:
            return 0.0
        # expand a bracket around the root, then bisect with Brent's method
        hi = 1.0
        if q > 0.5:
            while self.cdf(hi) < q:
                hi *= 2.0
            lo = 0.0
        else:
            while self.cdf(-hi) > q:
                hi *= 2.0
            lo, hi = -hi, 0.0
        return float(optimize.brentq(lambda x: self.cdf(x) - q, lo, hi, xtol=1e-13, rtol=8.9e-16))

    def two_tailed_critical(self, alpha: float) -> float:
        return self.ppf(1.0 - alpha / 2.0)


def student_t(df: float) -> StudentT:
    return StudentT(df)


# ---------------------------------------------------------------------------
# Welch's t-test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WelchT:
    t: float
    df: float
    p_two_tailed: float


def welch_t(a, b) -> WelchT:
    """Unequal-variance t-test: t = (mean_a - mean_b) / sqrt(va/na + vb/nb).

    Degrees of freedom via Welch-Satterthwaite; two-tailed p from the
    Student-t CDF. Identical samples give t = 0, p = 1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("welch_t needs at least 2 values per group")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    if va + vb == 0.0:
        raise ValueError("welch_t is undefined when both groups have zero variance")
    t = (a.mean() - b.mean()) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    dist = StudentT(df)
    p = 2.0 * dist.sf(abs(t))
    return WelchT(t=float(t), df=float(df), p_two_tailed=min(1.0, float(p)))


# ---------------------------------------------------------------------------
# Cluster-based sign-flip permutation test (one sample, over time)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cluster:
    start: int           # first timepoint index
    end: int             # last timepoint index, inclusive
    sign: int            # +1 or -1
    mass: float          # sum of |t| across the run


@dataclass(frozen=True)
class ClusterResult:
    clusters: tuple[Cluster, ...]
    p_values: tuple[float, ...]
    n_permutations: int
    threshold_t: float

    def significant(self, alpha: float = 0.05) -> list[Cluster]:
        return [c for c, p in zip(self.clusters, self.p_values) if p < alpha]


def _timewise_t(mean: np.ndarray, sumsq: np.ndarray, n: int) -> np.ndarray:
    # var from fixed sum of squares: flipping signs never changes sum(x^2)
    var = (sumsq - n * mean**2) / (n - 1)
    var = np.maximum(var, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = mean / np.sqrt(var / n)
    # degenerate timepoints (zero variance) carry no evidence
    return np.where(var > 0.0, t, 0.0)


def _cluster_runs(t: np.ndarray, threshold: float) -> list[Cluster]:
    labels = np.zeros(t.shape, dtype=np.int8)
    labels[t > threshold] = 1
    labels[t < -threshold] = -1
    clusters: list[Cluster] = []
    start = 0
    for k in range(1, len(labels) + 1):
        if k == len(labels) or labels[k] != labels[start]:
            if labels[start] != 0:
                mass = float(np.abs(t[start:k]).sum())
                clusters.append(Cluster(start=start, end=k - 1, sign=int(labels[start]), mass=mass))
            start = k
    return clusters


def _max_cluster_mass(t: np.ndarray, threshold: float) -> float:
    runs = _cluster_runs(t, threshold)
    return max((c.mass for c in runs), default=0.0)


def cluster_permutation_1samp(
    series,
    n_perm: int = 1000,
    alpha: float = 0.05,
    seed: int | None = None,
    threshold_t: float | None = None,
) -> ClusterResult:
    """Cluster-based permutation test of a subjects x timepoints array vs 0.

    Per-timepoint one-sample t values are thresholded at the two-tailed
    Student-t critical value for ``alpha`` (df = n_subjects - 1) unless an
    explicit ``threshold_t`` is given. Maximal runs of same-sign
    supra-threshold t form clusters with mass = sum of |t|; the null is the
    maximum cluster mass under random per-subject sign flips, and
    p = (1 + #{null >= observed}) / (n_perm + 1).
    """
    data = np.asarray(series, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError("series must be a subjects x timepoints array with >= 2 subjects")
    if n_perm < 1:
        raise ValueError("n_perm must be >= 1")
    n_subj = data.shape[0]
    if threshold_t is None:
        threshold_t = StudentT(n_subj - 1).two_tailed_critical(alpha)

    sumsq = (data**2).sum(axis=0)
    observed_t = _timewise_t(data.mean(axis=0), sumsq, n_subj)
    clusters = _cluster_runs(observed_t, threshold_t)

    signs = np.empty((n_perm, n_subj), dtype=float)
    for b in range(n_perm):
        rng = np.random.default_rng([0 if seed is None else seed, b])
        signs[b] = rng.integers(0, 2, size=n_subj) * 2 - 1
    null_means = signs @ data / n_subj

    null_max = np.empty(n_perm)
    for b in range(n_perm):
        t_b = _timewise_t(null_means[b], sumsq, n_subj)
        null_max[b] = _max_cluster_mass(t_b, threshold_t)

    p_values = tuple(
        float((1 + np.count_nonzero(null_max >= c.mass)) / (n_perm + 1)) for c in clusters
    )
    return ClusterResult(
        clusters=tuple(clusters),
        p_values=p_values,
        n_permutations=n_perm,
        threshold_t=float(threshold_t),
    )


# ---------------------------------------------------------------------------
# Bootstrap confidence band for the subject mean
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BootstrapCI:
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    samples: np.ndarray | None = field(default=None, repr=False)


def bootstrap_ci(
    series,
    n_boot: int = 1000,
    level: float = 0.95,
    seed: int | None = None,
    keep_samples: bool = False,
) -> BootstrapCI:
    """Percentile bootstrap of the subject mean at every timepoint.

    Subjects are resampled with replacement ``n_boot`` times; lo/hi are the
    empirical (1 - level)/2 and (1 + level)/2 percentiles of the resampled
    means (linear interpolation between order statistics), following Efron &
    Tibshirani (1994).
    """
    data = np.asarray(series, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[0] < 2:
        raise ValueError("bootstrap_ci needs >= 2 subjects")
    if n_boot < 2:
        raise ValueError("n_boot must be >= 2")
    n_subj = data.shape[0]

    means = np.empty((n_boot, data.shape[1]))
    for b in range(n_boot):
        rng = np.random.default_rng([0 if seed is None else seed, b])
        idx = rng.integers(0, n_subj, size=n_subj)
        means[b] = data[idx].mean(axis=0)

    tail = 100.0 * (1.0 - level) / 2.0
    lo, hi = np.percentile(means, [tail, 100.0 - tail], axis=0)
    return BootstrapCI(
        mean=data.mean(axis=0),
        lo=lo,
        hi=hi,
        samples=means if keep_samples else None,
    )


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank test (exact for small n)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float     # W = sum of ranks of positive values
    p_value: float
    n: int               # values remaining after dropping exact zeros
    exact: bool


EXACT_WILCOXON_LIMIT = 20


def wilcoxon_signed_rank(values, alternative: str = "greater") -> WilcoxonResult:
    """One-sample Wilcoxon signed-rank test against a zero median.

    Exact zeros are dropped; |values| are ranked with average ranks for
    ties. For n <= 20 the p-value is exact over all 2^n sign assignments
    (computed by convolution over the integer-doubled ranks, which
    enumerates the same distribution); larger n uses the normal
    approximation with tie-corrected variance and continuity correction.
    """
    if alternative not in ("greater", "less", "two-sided"):
        raise ValueError(f"unknown alternative {alternative!r}")
    vals = np.asarray(values, dtype=float)
    vals = vals[vals != 0.0]
    n = vals.size
    if n == 0:
        raise ValueError("all values are zero; the test is undefined")

    ranks = rankdata(np.abs(vals))
    w = float(ranks[vals > 0].sum())

    if n <= EXACT_WILCOXON_LIMIT:
        p = _wilcoxon_exact_p(ranks, w, alternative)
        return WilcoxonResult(statistic=w, p_value=p, n=int(n), exact=True)

    mean = n * (n + 1) / 4.0
    _, counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(((counts**3 - counts) / 48.0).sum())
    sd = math.sqrt(var)
    if alternative == "greater":
        z = (w - mean - 0.5) / sd
        p = 0.5 * math.erfc(z / math.sqrt(2.0))
    elif alternative == "less":
        z = (w - mean + 0.5) / sd
        p = 0.5 * math.erfc(-z / math.sqrt(2.0))
    else:
        z = (w - mean - 0.5 * math.copysign(1.0, w - mean)) / sd if w != mean else 0.0
        p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
    return WilcoxonResult(statistic=w, p_value=float(p), n=int(n), exact=False)


def _wilcoxon_exact_p(ranks: np.ndarray, w: float, alternative: str) -> float:
    # double the ranks so average ranks (halves) become integers
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:-r] if r > 0 else counts
        counts = counts + shifted
    n_patterns = 1 << len(doubled)
    w2 = int(round(2.0 * w))

    def p_ge(threshold: int) -> float:
        return int(counts[max(threshold, 0):].sum()) / n_patterns

    def p_le(threshold: int) -> float:
        return int(counts[: min(threshold, total) + 1].sum()) / n_patterns

    if alternative == "greater":
        return p_ge(w2)
    if alternative == "less":
        return p_le(w2)
    return min(1.0, 2.0 * min(p_ge(w2), p_le(w2)))


# ---------------------------------------------------------------------------
# Benjamini-Hochberg FDR
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FdrResult:
    reject: np.ndarray
    p_adjusted: np.ndarray


def fdr_bh(pvals, alpha: float = 0.05) -> FdrResult:
    """Benjamini-Hochberg (1995) step-up procedure.

    Rejects hypotheses 1..i for the largest i with p_(i) <= i * alpha / m;
    adjusted p_(i) = min_{j >= i} m * p_(j) / j, clipped to 1.
    """
    p = np.asarray(pvals, dtype=float)
    if p.ndim != 1:
        raise ValueError("pvals must be one-dimensional")
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order]
    ranks = np.arange(1, m + 1)

    adjusted_sorted = np.minimum.accumulate((m * ranked / ranks)[::-1])[::-1]
    adjusted_sorted = np.minimum(adjusted_sorted, 1.0)

    passing = np.nonzero(ranked <= ranks * alpha / m)[0]
    reject_sorted = np.zeros(m, dtype=bool)
    if passing.size:
        reject_sorted[: passing[-1] + 1] = True

    reject = np.empty(m, dtype=bool)
    adjusted = np.empty(m, dtype=float)
    reject[order] = reject_sorted
    adjusted[order] = adjusted_sorted
    return FdrResult(reject=reject, p_adjusted=adjusted)
