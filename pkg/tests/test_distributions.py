"""Tests for creditor-type distributions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from jubilee.core.distributions import DistributionKind, TypeDistribution
from jubilee.errors import AssumptionError, SupportError


@pytest.fixture
def uniform():
    return TypeDistribution.uniform(0.0, 1.0)


FAMILIES = {
    "uniform": {"kind": "uniform", "lo": 0.2, "hi": 0.9},
    "truncated-exponential": {"kind": "truncated-exponential", "lo": 0.0, "hi": 1.0, "rate": 1.0},
    "truncated-pareto": {"kind": "truncated-pareto", "lo": 1.0, "hi": 2.0, "shape": 2.0, "scale": 1.0},
    "truncated-positive-normal": {"kind": "truncated-positive-normal", "lo": 0.0, "hi": 1.0, "sigma": 1.0},
}
NON_UNIFORM = [name for name in FAMILIES if name != "uniform"]


@pytest.fixture(params=list(FAMILIES))
def family(request):
    return TypeDistribution.from_flat(FAMILIES[request.param])


class TestUniform:
    def test_cdf_and_pdf(self, uniform):
        assert uniform.cdf(0.25) == pytest.approx(0.25)
        assert uniform.pdf(0.25) == pytest.approx(1.0)

    def test_cdf_endpoints_are_exact(self, uniform):
        assert uniform.cdf(0.0) == 0.0
        assert uniform.cdf(1.0) == 1.0

    def test_inverse_hazard_is_theta_minus_lo(self):
        dist = TypeDistribution.uniform(0.2, 1.0)
        grid = np.linspace(0.2, 1.0, 9)
        np.testing.assert_allclose(dist.inverse_hazard(grid), grid - 0.2, atol=1e-12)

    def test_inverse_hazard_zero_at_lo(self, uniform):
        assert uniform.inverse_hazard(0.0) == 0.0

    def test_scalar_in_scalar_out(self, uniform):
        assert isinstance(uniform.cdf(0.5), float)
        assert isinstance(uniform.pdf(np.array([0.5])), np.ndarray)

    def test_mean(self):
        assert TypeDistribution.uniform(0.2, 0.8).mean == pytest.approx(0.5)

    def test_pdf_outside_support_raises(self, uniform):
        with pytest.raises(SupportError):
            uniform.pdf(1.5)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_quantile_inverts_cdf(self, u):
        dist = TypeDistribution.uniform(0.0, 1.0)
        assert dist.cdf(dist.quantile(u)) == pytest.approx(u, abs=1e-12)


class TestSampling:
    def test_same_seed_same_draws(self, uniform):
        np.testing.assert_array_equal(uniform.sample(7, 100), uniform.sample(7, 100))

    def test_different_seed_different_draws(self, uniform):
        assert not np.array_equal(uniform.sample(7, 100), uniform.sample(8, 100))

    def test_draws_stay_in_support(self):
        dist = TypeDistribution.uniform(0.3, 0.4)
        draws = dist.sample(0, 1000)
        assert draws.min() >= 0.3
        assert draws.max() <= 0.4

    def test_zero_count_rejected(self, uniform):
        with pytest.raises(ValueError):
            uniform.sample(0, 0)

    def test_truncated_exponential_draws_follow_cdf(self):
        dist = TypeDistribution.from_flat({"kind": "truncated-exponential", "lo": 0.0, "hi": 2.0, "rate": 1.5})
        assert stats.kstest(dist.sample(5, 5000), dist.cdf).pvalue > 0.01

    def test_large_sample_matches_cdf(self, family):
        result = stats.kstest(family.sample(21, 100_000), family.cdf)
        assert result.statistic < 0.02

    def test_uniform_sample_mean(self, uniform):
        assert uniform.sample(3, 100_000).mean() == pytest.approx(0.5, abs=0.005)


class TestFamilies:
    def test_truncated_exponential(self):
        dist = TypeDistribution.from_flat({"kind": "truncated-exponential", "lo": 0.0, "hi": 1.0, "rate": 2.0})
        assert dist.kind is DistributionKind.TRUNCATED_EXPONENTIAL
        assert dist.cdf(1.0) == 1.0
        ratio = dist.inverse_hazard(np.linspace(0.0, 1.0, 50))
        assert np.all(np.diff(ratio) > 0)

    def test_missing_family_parameter(self):
        with pytest.raises(AssumptionError):
            TypeDistribution.from_flat({"kind": "truncated-exponential", "lo": 0.0, "hi": 1.0})

    def test_pareto_support_below_scale(self):
        with pytest.raises(AssumptionError):
            TypeDistribution.from_flat(
                {"kind": "truncated-pareto", "lo": 0.5, "hi": 2.0, "shape": 2.0, "scale": 1.0}
            )

    def test_flat_form_round_trip(self):
        spec = {"kind": "truncated-positive-normal", "lo": 0.0, "hi": 1.5, "sigma": 1.0}
        assert TypeDistribution.from_flat(spec).to_flat() == spec

    def test_reversed_support_rejected(self):
        with pytest.raises(ValueError):
            TypeDistribution.uniform(1.0, 0.5)

    def test_truncated_exponential_values(self):
        dist = TypeDistribution.from_flat(FAMILIES["truncated-exponential"])
        assert dist.cdf(0.5) == pytest.approx(0.62246, abs=1e-5)
        assert dist.pdf(0.0) == pytest.approx(1.58198, abs=1e-5)

    def test_pareto_accepted(self):
        dist = TypeDistribution.from_flat(FAMILIES["truncated-pareto"])
        assert dist.kind is DistributionKind.TRUNCATED_PARETO
        assert dist.inverse_hazard(1.0) == 0.0
        # F/phi = ((theta / lo)^shape * theta - theta) / shape
        assert dist.inverse_hazard(2.0) == pytest.approx(3.0)

    def test_positive_normal_accepted(self):
        dist = TypeDistribution.from_flat(FAMILIES["truncated-positive-normal"])
        assert dist.kind is DistributionKind.TRUNCATED_POSITIVE_NORMAL
        assert dist.cdf(1.0) == 1.0
        assert dist.mean == pytest.approx(0.4598, abs=1e-3)

    def test_positive_normal_vanishing_density_rejected(self):
        with pytest.raises(AssumptionError):
            TypeDistribution.from_flat({"kind": "truncated-positive-normal", "lo": 0.0, "hi": 100.0, "sigma": 0.01})

    def test_positive_normal_without_mass_rejected(self):
        with pytest.raises(AssumptionError):
            TypeDistribution.from_flat({"kind": "truncated-positive-normal", "lo": 50.0, "hi": 51.0, "sigma": 0.01})

    def test_pareto_missing_scale(self):
        with pytest.raises(AssumptionError):
            TypeDistribution.from_flat({"kind": "truncated-pareto", "lo": 1.0, "hi": 2.0, "shape": 2.0})

    def test_flat_inverse_hazard_rejected(self, monkeypatch):
        monkeypatch.setattr(TypeDistribution, "inverse_hazard", lambda self, theta: np.minimum(theta, 0.5))
        with pytest.raises(AssumptionError, match="strictly increasing"):
            TypeDistribution.uniform(0.0, 1.0)


class TestDensity:
    def test_pdf_integrates_to_one(self, family):
        total, _ = integrate.quad(family.pdf, family.support.lo, family.support.hi)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_pdf_is_derivative_of_cdf(self, family):
        lo, hi = family.support.lo, family.support.hi
        grid = np.linspace(lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo), 41)
        h = 1e-5
        slope = (family.cdf(grid + h) - family.cdf(grid - h)) / (2 * h)
        np.testing.assert_allclose(family.pdf(grid), slope, atol=1e-5)

    def test_inverse_hazard_strictly_increasing(self, family):
        grid = np.linspace(family.support.lo, family.support.hi, 200)
        assert np.all(np.diff(family.inverse_hazard(grid)) > 0.0)

    @pytest.mark.parametrize("name", NON_UNIFORM)
    @settings(deadline=None)
    @given(u=st.floats(min_value=0.0, max_value=1.0))
    def test_quantile_inverts_cdf(self, name, u):
        dist = TypeDistribution.from_flat(FAMILIES[name])
        assert dist.cdf(dist.quantile(u)) == pytest.approx(u, abs=1e-9)
