"""Statistical comparison of simulator output against the exact law.

Trajectory data are time-weighted and autocorrelated, so nothing here assumes
i.i.d. input: effective sample sizes come from the integrated autocorrelation
time of the evenly spaced trajectory series (Geyer's initial positive
sequence estimator), histogram tests scale their counts by that effective
size, and profile/covariance standard errors carry the same correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _sps

from .measure import MixtureSpec, moment_profile
from .occupation import IntHistogram, OccupationStats

__all__ = [
    "GofResult",
    "ProfileReport",
    "integrated_autocorr_time",
    "effective_sample_size",
    "chi_square_discrete",
    "ks_continuous",
    "profile_report",
]

MIN_EFFECTIVE_SAMPLES = 100.0


@dataclass
class GofResult:
    """One goodness-of-fit verdict with the numbers behind it."""

    name: str
    statistic: float
    dof: int
    effective_n: float
    p_value: float
    bins_note: str = ""
    inconclusive: bool = False

    def passed(self, level: float = 0.01) -> bool:
        return not self.inconclusive and self.p_value > level


def integrated_autocorr_time(series) -> float:
    """Integrated autocorrelation time via the initial positive sequence.

    FFT autocovariances, summed over consecutive lag pairs while those pair
    sums stay positive.  Clamped below at 1 (a conservative floor: shorter
    times would only enlarge the claimed effective sample).
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 8:
        return 1.0
    x = x - x.mean()
    var = float(x @ x) / n
    if var <= 0.0:
        return 1.0
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n].real / n
    rho = acov / acov[0]
    tau = -1.0
    j = 0
    while 2 * j + 1 < n:
        pair = rho[2 * j] + rho[2 * j + 1]
        if pair <= 0.0:
            break
        tau += 2.0 * pair
        j += 1
    return max(tau, 1.0)


def effective_sample_size(series) -> float:
    x = np.asarray(series)
    return x.size / integrated_autocorr_time(x)


def _series_mean_se(series: np.ndarray) -> float:
    """Standard error of the mean of one stationary series."""
    x = np.asarray(series, dtype=float)
    var = float(x.var())
    if var == 0.0:
        return 0.0
    return math.sqrt(var * integrated_autocorr_time(x) / x.size)


def chi_square_discrete(
    observed,
    expected_pmf,
    effective_n: float,
    min_expected: float = 5.0,
) -> GofResult:
    """Chi-square test of a time-weighted occupation histogram.

    ``observed`` is an :class:`IntHistogram` or a weight array indexed by
    value; ``expected_pmf`` maps a value array to exact probabilities.  The
    open tail beyond the observed support forms its own cell with the exact
    complementary mass, and adjacent cells are merged from the tail inward
    until every expected count reaches ``min_expected``.
    """
    if isinstance(observed, IntHistogram):
        weights = np.asarray(observed.weights, dtype=float)
    else:
        weights = np.asarray(observed, dtype=float)
    total = weights.sum()
    if total <= 0.0:
        raise ValueError("observed histogram is empty")
    if effective_n < MIN_EFFECTIVE_SAMPLES:
        return GofResult(
            "chi-square", float("nan"), 0, effective_n, float("nan"),
            bins_note="insufficient effective samples", inconclusive=True,
        )
    values = np.arange(len(weights))
    p = np.asarray(expected_pmf(values), dtype=float)
    obs = effective_n * weights / total
    exp = effective_n * p
    # Open tail cell: everything above the observed support.
    tail_mass = max(1.0 - p.sum(), 0.0)
    obs = np.append(obs, 0.0)
    exp = np.append(exp, effective_n * tail_mass)
    merged_obs: list[float] = []
    merged_exp: list[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(obs[::-1], exp[::-1]):  # merge from the tail inward
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            merged_obs.append(acc_o)
            merged_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if not merged_obs:
        return GofResult(
            "chi-square", float("nan"), 0, effective_n, float("nan"),
            bins_note="no cell reaches the minimum expected count",
            inconclusive=True,
        )
    merged_obs[-1] += acc_o
    merged_exp[-1] += acc_e
    o_arr = np.array(merged_obs)
    e_arr = np.array(merged_exp)
    stat = float(((o_arr - e_arr) ** 2 / e_arr).sum())
    dof = len(o_arr) - 1
    if dof < 1:
        return GofResult(
            "chi-square", stat, 0, effective_n, float("nan"),
            bins_note="fewer than two cells after merging", inconclusive=True,
        )
    p_value = float(_sps.chi2.sf(stat, dof))
    return GofResult(
        "chi-square", stat, dof, effective_n, p_value,
        bins_note=f"{len(o_arr)} cells, min expected {e_arr.min():.1f}",
    )


def ks_continuous(samples, expected_cdf, effective_n: float) -> GofResult:
    """Kolmogorov-Smirnov test of trajectory samples against an exact CDF.

    ``samples`` are equally weighted draws (the evenly spaced trajectory
    series); ``expected_cdf`` maps an array of points to CDF values.  The
    statistic uses the full empirical CDF, the p-value the effective size.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if effective_n < MIN_EFFECTIVE_SAMPLES:
        return GofResult(
            "ks", float("nan"), 0, effective_n, float("nan"),
            bins_note="insufficient effective samples", inconclusive=True,
        )
    cdf = np.asarray(expected_cdf(x), dtype=float)
    grid = np.arange(1, n + 1) / n
    d_plus = float(np.max(grid - cdf))
    d_minus = float(np.max(cdf - (grid - 1.0 / n)))
    stat = max(d_plus, d_minus)
    p_value = float(_sps.kstwo.sf(stat, max(int(effective_n), 1)))
    return GofResult("ks", stat, 0, effective_n, p_value,
                     bins_note=f"{n} samples")


@dataclass
class ProfileReport:
    """Empirical vs exact site means and pair covariances with z-scores."""

    sites: np.ndarray
    emp_mean: np.ndarray
    se_mean: np.ndarray
    exact_mean: np.ndarray
    z_mean: np.ndarray
    pairs: list[tuple[int, int]]
    emp_cov: np.ndarray
    se_cov: np.ndarray
    exact_cov: np.ndarray
    z_cov: np.ndarray
    notes: dict = field(default_factory=dict)

    @property
    def max_abs_z(self) -> float:
        zs = np.concatenate([self.z_mean, self.z_cov])
        finite = zs[np.isfinite(zs)]
        return float(np.max(np.abs(finite))) if finite.size else 0.0

    def mean_rows(self):
        for i, x in enumerate(self.sites):
            yield (int(x), self.emp_mean[i], self.se_mean[i],
                   self.exact_mean[i], self.z_mean[i])

    def cov_rows(self):
        for i, (x, y) in enumerate(self.pairs):
            yield (x, y, self.emp_cov[i], self.se_cov[i],
                   self.exact_cov[i], self.z_cov[i])


def _zscore(diff: float, se: float) -> float:
    if se == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return diff / se


def profile_report(stats: OccupationStats, spec: MixtureSpec) -> ProfileReport:
    """Compare a run's moments with the exact stationary moments.

    Means come from the exact time-weighted accumulators; their standard
    errors from per-replica series autocorrelation times, combined as
    independent replicas.  Covariance errors use the autocorrelation time of
    the centred product series.  The series-based errors are exact when the
    sampling interval sits below the autocorrelation time and conservative
    (over-estimates) when the grid is coarser than that.
    """
    if stats.duration <= 0.0:
        raise ValueError("no post-burn-in time accumulated")
    exact = moment_profile(spec)
    n = stats.n_sites
    emp_mean = stats.mean()
    emp_cov = stats.cov()
    reps = stats.series
    r = len(reps)
    se_mean = np.zeros(n)
    for x in range(n):
        se_sq = sum(_series_mean_se(s[:, x]) ** 2 for s in reps)
        se_mean[x] = math.sqrt(se_sq) / r
    z_mean = np.array(
        [_zscore(emp_mean[x] - exact.means[x], se_mean[x]) for x in range(n)]
    )
    pairs = [(x + 1, y + 1) for x in range(n) for y in range(x, n)]
    emp_c, se_c, exact_c, z_c = [], [], [], []
    for x, y in pairs:
        i, j = x - 1, y - 1
        se_sq = 0.0
        for s in reps:
            prod = (s[:, i] - emp_mean[i]) * (s[:, j] - emp_mean[j])
            se_sq += _series_mean_se(prod) ** 2
        se = math.sqrt(se_sq) / r
        emp_c.append(emp_cov[i, j])
        se_c.append(se)
        exact_c.append(exact.covariance[i, j])
        z_c.append(_zscore(emp_cov[i, j] - exact.covariance[i, j], se))
    return ProfileReport(
        sites=np.arange(1, n + 1),
        emp_mean=emp_mean,
        se_mean=se_mean,
        exact_mean=exact.means,
        z_mean=z_mean,
        pairs=pairs,
        emp_cov=np.array(emp_c),
        se_cov=np.array(se_c),
        exact_cov=np.array(exact_c),
        z_cov=np.array(z_c),
        notes={"replicas": r, "duration": stats.duration},
    )
