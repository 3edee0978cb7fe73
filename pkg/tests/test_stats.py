"""Statistical harness: autocorrelation times, GOF tests, profile reports."""

import math

import numpy as np
import pytest
from scipy import stats as sps

from drivenchain.core import ChainParams, make_rng
from drivenchain.discrete_sim import simulate
from drivenchain.measure import (
    MixtureSpec,
    Model,
    geometric_pmf,
    moment_profile,
    sample_exact_discrete,
)
from drivenchain.occupation import IntHistogram, OccupationStats
from drivenchain.stats import (
    GofResult,
    chi_square_discrete,
    effective_sample_size,
    integrated_autocorr_time,
    ks_continuous,
    profile_report,
)


class TestAutocorrelation:
    def test_iid_series(self):
        x = make_rng(0).normal(size=40_000)
        assert integrated_autocorr_time(x) == pytest.approx(1.0, abs=0.08)

    def test_duplicated_series_doubles_tau(self):
        x = np.repeat(make_rng(1).normal(size=20_000), 2)
        assert integrated_autocorr_time(x) == pytest.approx(2.0, abs=0.15)

    def test_ar1_matches_theory(self):
        # AR(1) with coefficient a has tau = (1+a)/(1-a)
        a = 0.6
        rng = make_rng(2)
        n = 200_000
        eps = rng.normal(size=n)
        x = np.empty(n)
        x[0] = eps[0]
        for i in range(1, n):
            x[i] = a * x[i - 1] + eps[i]
        assert integrated_autocorr_time(x) == pytest.approx(4.0, rel=0.1)

    def test_constant_series(self):
        assert integrated_autocorr_time(np.ones(1000)) == 1.0

    def test_ess(self):
        x = np.repeat(make_rng(3).normal(size=5_000), 4)
        assert effective_sample_size(x) == pytest.approx(5_000, rel=0.15)


class TestChiSquare:
    def test_null_calibration(self):
        # synthetic i.i.d. data from the expected pmf itself: p-values uniform
        m = 1.5
        ps = []
        for s in range(80):
            rng = make_rng(1000 + s)
            draws = rng.geometric(1.0 / (1.0 + m), size=3_000) - 1
            w = np.bincount(draws).astype(float)
            g = chi_square_discrete(w, lambda v: geometric_pmf(m, v), 3_000.0)
            ps.append(g.p_value)
        ps = np.array(ps)
        assert sps.kstest(ps, "uniform").pvalue > 1e-3
        assert 0.0 < (ps < 0.2).mean() < 0.45

    def test_detects_wrong_mean(self):
        rng = make_rng(4)
        draws = rng.geometric(1.0 / 2.0, size=20_000) - 1  # mean 1
        w = np.bincount(draws).astype(float)
        g = chi_square_discrete(w, lambda v: geometric_pmf(1.6, v), 20_000.0)
        assert g.p_value < 1e-6

    def test_merges_sparse_tail(self):
        rng = make_rng(5)
        draws = rng.geometric(1.0 / 1.3, size=5_000) - 1
        w = np.bincount(draws, minlength=60).astype(float)
        g = chi_square_discrete(w, lambda v: geometric_pmf(0.3, v), 5_000.0)
        assert g.dof < 59  # sparse cells were merged

    def test_inconclusive_below_min_ess(self):
        g = chi_square_discrete(
            np.array([10.0, 5.0]), lambda v: geometric_pmf(1.0, v), 50.0
        )
        assert g.inconclusive and not g.passed(0.01)

    def test_empty_histogram(self):
        with pytest.raises(ValueError):
            chi_square_discrete(np.zeros(3), lambda v: geometric_pmf(1.0, v), 500.0)


class TestKs:
    def test_null_calibration(self):
        ps = []
        for s in range(60):
            rng = make_rng(2000 + s)
            draws = rng.exponential(1.5, size=2_000)
            g = ks_continuous(draws, sps.expon(scale=1.5).cdf, 2_000.0)
            ps.append(g.p_value)
        assert sps.kstest(np.array(ps), "uniform").pvalue > 1e-3

    def test_detects_wrong_scale(self):
        draws = make_rng(6).exponential(1.5, size=10_000)
        g = ks_continuous(draws, sps.expon(scale=1.0).cdf, 10_000.0)
        assert g.p_value < 1e-6

    def test_inconclusive_below_min_ess(self):
        g = ks_continuous(np.arange(50.0), sps.expon(scale=1.0).cdf, 20.0)
        assert g.inconclusive


def _stats_from_iid(draws: np.ndarray, model: str) -> OccupationStats:
    """Wrap i.i.d. exact-law draws as if they were a unit-rate trajectory."""
    n = draws.shape[1]
    hists = [IntHistogram() for _ in range(n)]
    if model == "discrete":
        for x in range(n):
            for v, w in enumerate(np.bincount(draws[:, x])):
                if w:
                    hists[x].add(v, float(w))
    return OccupationStats(
        n_sites=n,
        model=model,
        duration=float(len(draws)),
        event_count=len(draws),
        mean_acc=draws.sum(axis=0).astype(float),
        second_acc=draws.T.astype(float) @ draws.astype(float),
        hists=hists,
        series=[draws.astype(float)],
        series_dt=1.0,
    )


class TestProfileReport:
    def test_exact_sampler_scores_within_4_sigma(self):
        params = ChainParams(n=4, beta_a=0.5, beta_b=0.75)
        spec = MixtureSpec(params, Model.DISCRETE)
        draws = sample_exact_discrete(spec, make_rng(7), size=200_000)
        rep = profile_report(_stats_from_iid(draws, "discrete"), spec)
        assert rep.max_abs_z < 4.0

    def test_detects_wrong_exact_law(self):
        params = ChainParams(n=3, beta_a=0.5, beta_b=0.75)
        wrong = MixtureSpec(
            ChainParams(n=3, beta_a=0.6, beta_b=0.6), Model.DISCRETE
        )
        draws = sample_exact_discrete(
            MixtureSpec(params, Model.DISCRETE), make_rng(8), size=200_000
        )
        rep = profile_report(_stats_from_iid(draws, "discrete"), wrong)
        assert rep.max_abs_z > 10.0

    def test_se_shrinks_like_sqrt_time(self):
        # doubling ladder of run lengths: log-log slope of SE vs t is -1/2.
        # Grid count scales with t so the sampling interval stays below the
        # autocorrelation time (coarser grids only make the SE conservative).
        params = ChainParams(n=2, beta_a=0.5, beta_b=0.75)
        spec = MixtureSpec(params, Model.DISCRETE)
        lengths = [2_000.0, 4_000.0, 8_000.0, 16_000.0]
        ses = []
        for i, t in enumerate(lengths):
            st = simulate(params, t_max=t, seed=30 + i, grid_samples=int(4 * t))
            ses.append(profile_report(st, spec).se_mean.mean())
        slope = np.polyfit(np.log(lengths), np.log(ses), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.1)

    def test_merged_replicas_match_single_run_moments(self):
        params = ChainParams(n=3, beta_a=0.5, beta_b=0.75)
        parts = [
            simulate(params, t_max=500.0, seed=40 + i, grid_samples=1024)
            for i in range(3)
        ]
        merged = parts[0].merge(parts[1]).merge(parts[2])
        assert merged.duration == pytest.approx(sum(p.duration for p in parts))
        assert np.allclose(
            merged.mean_acc, np.sum([p.mean_acc for p in parts], axis=0)
        )
        assert np.allclose(
            merged.second_acc, np.sum([p.second_acc for p in parts], axis=0)
        )
        # merge is associative/commutative on the accumulators
        other = parts[2].merge(parts[0]).merge(parts[1])
        assert np.allclose(merged.mean_acc, other.mean_acc)
        assert merged.duration == pytest.approx(other.duration)

    def test_requires_positive_duration(self):
        st = OccupationStats(n_sites=1, model="discrete")
        with pytest.raises(ValueError):
            profile_report(st, MixtureSpec(ChainParams(n=1), Model.DISCRETE))


class TestGofResult:
    def test_pass_semantics(self):
        g = GofResult("chi-square", 1.0, 3, 1e4, 0.5)
        assert g.passed(0.01) and not g.passed(0.6)
        bad = GofResult("chi-square", 1.0, 3, 1e4, float("nan"), inconclusive=True)
        assert not bad.passed(0.01)
