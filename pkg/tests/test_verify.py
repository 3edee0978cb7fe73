"""Identity checks, telescoping residuals, and direct balance verification."""

import json
import math

import numpy as np
import pytest

from drivenchain.core import ChainParams, harmonic_number
from drivenchain.measure import MixtureSpec, Model, mixture_density_discrete
from drivenchain.verify import (
    check_antiderivative_continuous,
    check_antiderivative_discrete,
    check_equilibrium_limit,
    check_frullani,
    check_stationarity_direct_discrete,
    check_telescoping_continuous,
    check_telescoping_discrete,
    default_svec_grid,
    equilibrium_suite,
    identity_suite,
    run_suite,
    stationarity_suite,
    telescoping_suite,
)

NEQ1 = ChainParams(n=1, beta_a=0.5, beta_b=0.75)
NEQ2 = ChainParams(n=2, beta_a=0.5, beta_b=0.75)


class TestAntiderivativeChecks:
    def test_lam_zero_closed_forms_coincide(self):
        r = check_antiderivative_discrete(2.5, 0.0, tol=1e-12)
        assert r.passed and abs(r.residuals["residual"]) < 1e-12

    def test_reference_point(self):
        r = check_antiderivative_discrete(2.0, 0.5, tol=1e-10)
        assert r.passed

    def test_lam_above_one(self):
        # radius for m=2 is 1.5; 1.2 sits between the removable point and it
        r = check_antiderivative_discrete(2.0, 1.2, tol=1e-10)
        assert r.passed

    def test_limit_toward_removable_point(self):
        for lam in (1.0 - 1e-6, 1.0 + 1e-6):
            r = check_antiderivative_discrete(2.0, lam, tol=1e-4)
            assert r.passed

    def test_continuous_reference_points(self):
        assert check_antiderivative_continuous(1.0, 0.5, tol=1e-10).passed
        assert check_antiderivative_continuous(3.0, -1.0, tol=1e-10).passed

    def test_continuous_limit_toward_zero(self):
        for t in (-1e-6, 1e-6):
            r = check_antiderivative_continuous(2.0, t, tol=1e-4)
            assert r.passed

    def test_rejects_removable_points(self):
        with pytest.raises(ValueError):
            check_antiderivative_discrete(2.0, 1.0)
        with pytest.raises(ValueError):
            check_antiderivative_continuous(2.0, 0.0)


class TestFrullani:
    def test_equal_arguments(self):
        r = check_frullani(2.0, 2.0)
        assert r.passed and r.residuals["residual"] == 0.0

    @pytest.mark.parametrize("a,b", [(1.0, 2.0), (0.5, 3.0), (0.1, 10.0)])
    def test_log_ratio(self, a, b):
        r = check_frullani(a, b, tol=1e-9)
        assert r.passed, r.residuals

    def test_invalid(self):
        with pytest.raises(ValueError):
            check_frullani(-1.0, 1.0)


class TestTelescoping:
    def test_n1_discrete_closed_form_zero(self):
        r = check_telescoping_discrete(NEQ1, [0.5], tol=1e-10)
        assert r.passed
        assert abs(r.residuals["term_1"]) < 1e-12

    def test_n2_reference_vector(self):
        r = check_telescoping_discrete(NEQ2, [0.3, 0.7], tol=1e-8)
        assert r.passed and r.method == "quadrature"

    def test_n3_per_site_terms_vanish_individually(self):
        p = ChainParams(n=3, beta_a=0.5, beta_b=0.75)
        r = check_telescoping_discrete(p, [0.2, 0.5, 0.8], tol=1e-8)
        assert set(r.residuals) == {"term_1", "term_2", "term_3", "total"}
        assert all(abs(v) < 1e-8 for v in r.residuals.values())

    def test_n1_continuous_reference(self):
        r = check_telescoping_continuous(
            ChainParams(n=1, t_a=1.0, t_b=2.0), [0.3], tol=1e-10
        )
        assert r.passed

    def test_zero_arguments_trivial(self):
        p = ChainParams(n=2, t_a=1.0, t_b=2.0)
        r = check_telescoping_continuous(p, [0.0, 0.0], tol=1e-14)
        assert r.passed  # log F_m(0) = 0 makes the integrand vanish identically

    def test_n3_continuous_mixed_signs(self):
        p = ChainParams(n=3, t_a=1.0, t_b=2.0)
        r = check_telescoping_continuous(p, [-0.5, 0.1, 0.4], tol=1e-8)
        assert r.passed

    def test_monte_carlo_n5(self):
        p = ChainParams(n=5, beta_a=0.5, beta_b=0.75)
        r = check_telescoping_discrete(
            p, [0.3, 0.5, 0.7, 0.4, 0.6], mc_samples=1_000_000, seed=7
        )
        assert r.method == "monte-carlo"
        assert r.passed
        assert r.notes["seed"] == 7

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            check_telescoping_discrete(NEQ2, [0.3, 1.4])  # radius (1+3)/3
        with pytest.raises(ValueError):
            check_telescoping_continuous(
                ChainParams(n=2, t_a=1.0, t_b=2.0), [0.3, 0.6]
            )

    @pytest.mark.parametrize("n", [2, 3])
    def test_impostor_profile_rejected(self, n):
        # independent-marginals impostor: right marginals, no ordering.
        # Power requirement: residual at least 100x the quadrature tolerance.
        p = ChainParams(n=n, beta_a=0.5, beta_b=0.75)
        vec = [0.3 if x % 2 == 0 else 0.7 for x in range(n)]
        r = check_telescoping_discrete(
            p, vec, method="monte-carlo", mc_samples=1_000_000, seed=11,
            profile_law="independent-marginals",
        )
        assert not r.passed
        assert r.max_residual > 100.0 * 1e-8
        assert r.max_residual > r.tolerances["total"]

    def test_quadrature_rejects_impostor_law(self):
        with pytest.raises(ValueError):
            check_telescoping_discrete(
                NEQ2, [0.3, 0.7], method="quadrature",
                profile_law="independent-marginals",
            )

    def test_default_grid_respects_domains(self):
        for n in (1, 3, 5):
            for vec in default_svec_grid(n, Model.DISCRETE, 3.0):
                assert np.all(vec >= 0.0) and np.all(vec < 4.0 / 3.0)
            for vec in default_svec_grid(n, Model.CONTINUOUS, 2.0):
                assert np.all(vec < 0.5)


def _generator_residuals_oracle(params, box, k_sum, mu):
    """Brute-force row balance of the truncated generator.

    Enumerates every outgoing channel of every state in the extended table --
    straight from the jump rules, independent of the balance-equation
    rearrangement -- and accumulates probability inflow per target state.
    Extraction inflows are truncated at the same k_sum as the check.
    """
    lam_a = -math.log1p(-params.beta_a)
    lam_b = -math.log1p(-params.beta_b)
    extent = mu.shape[0] - 1
    inflow = np.zeros((box + 1, box + 1))
    for a in range(extent + 1):
        for b in range(extent + 1):
            m = mu[a, b]
            for k in range(1, a + 1):
                r = m / k
                if a - k <= box and b <= box:
                    inflow[a - k, b] += r  # left exit of site 1: reservoir A
                if a - k <= box and b + k <= box:
                    inflow[a - k, b + k] += r  # right exit of site 1: site 2
            for k in range(1, b + 1):
                r = m / k
                if b - k <= box and a + k <= box:
                    inflow[a + k, b - k] += r  # left exit of site 2: site 1
                if b - k <= box and a <= box:
                    inflow[a, b - k] += r  # right exit of site 2: reservoir B
            if a <= box and b <= box:
                for k in range(1, box - a + 1):
                    inflow[a + k, b] += m * params.beta_a**k / k
                for k in range(1, box - b + 1):
                    inflow[a, b + k] += m * params.beta_b**k / k
    worst = 0.0
    for a in range(box + 1):
        for b in range(box + 1):
            out = mu[a, b] * (
                lam_a + lam_b + 2.0 * harmonic_number(a) + 2.0 * harmonic_number(b)
            )
            worst = max(worst, abs(out - inflow[a, b]))
    return worst


class TestStationarityDirect:
    def test_n1_mixture_passes(self):
        r = check_stationarity_direct_discrete(NEQ1, truncation=120, tol=1e-8)
        assert r.passed
        assert r.notes["tail_bound"] <= 1e-9

    def test_n1_equilibrium_reversible_case(self):
        p = ChainParams(n=1, beta_a=0.5, beta_b=0.5)
        r = check_stationarity_direct_discrete(p, truncation=80, tol=1e-12)
        assert r.passed  # detailed balance of the plain geometric law

    def test_n1_impostor_rejected_with_power_margin(self):
        r = check_stationarity_direct_discrete(
            NEQ1, truncation=120, tol=1e-8, candidate="product-geometric"
        )
        assert not r.passed
        assert r.max_residual > 1e-4
        assert r.max_residual > 100.0 * 1e-8

    def test_n2_mixture_passes_small_box(self):
        r = check_stationarity_direct_discrete(NEQ2, truncation=10, tol=1e-6)
        assert r.passed

    @pytest.mark.parametrize("candidate", ["product-geometric", "product-marginals"])
    def test_n2_impostors_rejected(self, candidate):
        r = check_stationarity_direct_discrete(
            NEQ2, truncation=10, tol=1e-6, candidate=candidate
        )
        assert not r.passed
        assert r.max_residual > 100.0 * 1e-6

    def test_bookkeeping_against_generator_oracle(self):
        # The balance-equation residual and the raw generator row balance
        # must agree: same measure, same truncation, independent bookkeeping.
        box = 8
        r = check_stationarity_direct_discrete(NEQ2, truncation=box, tol=1e-6)
        k_sum = r.notes["k_sum"]
        extent = r.notes["extent"]
        spec = MixtureSpec(NEQ2, Model.DISCRETE)
        mu = np.empty((extent + 1, extent + 1))
        for a in range(extent + 1):
            for b in range(extent + 1):
                mu[a, b] = mixture_density_discrete(spec, [a, b], tol=1e-11).value
        oracle = _generator_residuals_oracle(NEQ2, box, k_sum, mu)
        # the oracle sums extraction inflow to the table edge rather than k_sum,
        # so allow the tail-certificate slack on top of float noise
        assert abs(oracle - r.max_residual) < r.notes["tail_bound"] + 1e-12

    def test_unsupported_size(self):
        with pytest.raises(ValueError):
            check_stationarity_direct_discrete(
                ChainParams(n=3, beta_a=0.5, beta_b=0.75), truncation=5
            )


class TestEquilibriumLimit:
    def test_discrete_exact_product(self):
        p = ChainParams(n=3, beta_a=2.0 / 3.0, beta_b=2.0 / 3.0)  # rho = 2
        r = check_equilibrium_limit(p, Model.DISCRETE, tol=1e-12)
        assert r.passed

    def test_continuous_exact_product(self):
        p = ChainParams(n=2, t_a=1.5, t_b=1.5)
        r = check_equilibrium_limit(p, Model.CONTINUOUS, tol=1e-12)
        assert r.passed

    def test_near_degenerate_interval_tracks_product(self):
        beta_a = 0.5
        rho_gap = 1e-8
        beta_b = (1.0 + rho_gap) / (2.0 + rho_gap)  # rho_b = 1 + 1e-8
        p = ChainParams(n=2, beta_a=beta_a, beta_b=beta_b)
        r = check_equilibrium_limit(p, Model.DISCRETE, tol=1e-6, relative=True)
        assert r.passed


class TestReportsAndSuites:
    def test_report_json_round_trip(self):
        r = check_frullani(1.0, 2.0)
        blob = json.loads(r.to_json())
        assert blob["name"] == "frullani"
        assert blob["passed"] is True
        assert "residual" in blob["residuals"]

    def test_inconclusive_on_quadrature_exhaustion(self):
        p = ChainParams(n=2, beta_a=0.5, beta_b=0.75)
        r = check_telescoping_discrete(p, [0.3, 0.7], tol=1e-30)
        assert r.inconclusive
        assert not r.passed

    def test_identity_suite_all_pass(self):
        reports = identity_suite()
        assert len(reports) > 50
        assert all(r.passed for r in reports)

    def test_equilibrium_suite(self):
        assert all(r.passed for r in equilibrium_suite())

    def test_telescoping_suite_small(self):
        reports = telescoping_suite(sizes=(1, 2), mc_samples=200_000)
        assert all(r.passed for r in reports)

    def test_stationarity_suite_reduced(self):
        reports = stationarity_suite(truncation_1=60, truncation_2=8)
        assert all(r.passed for r in reports)

    def test_run_suite_dispatch(self):
        assert run_suite("identities")
        with pytest.raises(ValueError):
            run_suite("nope")
