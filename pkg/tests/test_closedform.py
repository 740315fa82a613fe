"""Tests for the two-creditor closed form and the printed-formula comparison."""

import numpy as np
import pytest
from pydantic import ValidationError

from jubilee.core.closedform import (
    TwoCreditorEconomy,
    cf_forgiveness,
    cf_investment_rule,
    cf_pivotal,
    cf_transfer,
    discrepancy_table,
    printed_pivotal,
    printed_transfer,
)
from jubilee.core.distributions import TypeDistribution
from jubilee.core.mechanism import (
    MarketParams,
    RevisionSpec,
    TypeProfile,
    investment_rule,
    optimal_transfer,
    pivotal_type,
    settle,
)
from jubilee.errors import PremiseError, SupportError
from tests.conftest import make_params


@pytest.fixture
def economy(example_params):
    return TwoCreditorEconomy.from_market(example_params)


class TestThreshold:
    def test_example_threshold(self, economy):
        assert economy.tau == pytest.approx(1.0)

    def test_shifted_support(self):
        econ = TwoCreditorEconomy(A=2.0, D=2.0, alpha=0.5, lo=0.2, hi=1.0)
        # (A + 2 alpha mu + 2 lo) / (2 + alpha) with mu = 0.6
        assert econ.tau == pytest.approx((2.0 + 0.6 + 0.4) / 2.5)

    def test_example_values(self, economy):
        assert cf_investment_rule(economy, 0.3, 0.6)
        assert cf_pivotal(economy, 0.6) == pytest.approx(0.4)
        assert cf_transfer(economy, 0, 0.6) == pytest.approx(0.5)
        assert cf_forgiveness(economy, 0, 0.6) == pytest.approx(0.5)

    def test_market_round_trip(self, economy, example_params):
        assert economy.to_market().model_dump() == example_params.model_dump()


class TestAgreesWithMechanism:
    @pytest.mark.parametrize(
        ("A", "alpha", "lo", "hi"),
        [(2.0, 1.0, 0.0, 1.0), (1.0, 0.0, 0.0, 1.0), (1.5, 0.5, 0.2, 1.0), (3.0, 0.0, 0.0, 1.0)],
    )
    def test_pivotal_and_transfer(self, A, alpha, lo, hi):
        params = make_params(A=A, alpha=alpha, lo=lo, hi=hi)
        econ = TwoCreditorEconomy.from_market(params)
        for other in np.linspace(lo, hi, 17):
            assert cf_pivotal(econ, other) == pytest.approx(pivotal_type(params, 0, [other]).value, abs=1e-9)
            assert cf_transfer(econ, 0, other) == pytest.approx(optimal_transfer(params, 0, [other]), abs=1e-9)

    def test_investment_rule(self):
        params = make_params(A=1.5, alpha=0.5)
        econ = TwoCreditorEconomy.from_market(params)
        rng = np.random.default_rng(5)
        for a, b in rng.random((200, 2)):
            assert cf_investment_rule(econ, a, b) == investment_rule(params, TypeProfile.of(a, b))

    def test_clamped_high_branch(self):
        econ = TwoCreditorEconomy(A=3.0, D=2.0)
        assert econ.clamped_high(0.2)
        intercept, slope = econ.transfer_coefficients(True)
        assert intercept + slope * 0.2 == pytest.approx(cf_transfer(econ, 0, 0.2))

    def test_unclamped_branch(self, economy):
        intercept, slope = economy.transfer_coefficients(False)
        assert (intercept, slope) == pytest.approx((0.5, 0.0))


def _random_economies(draws, seed):
    """Yield (params, economy, theta) for random continuation values, revision weights and profiles."""
    unit = TypeDistribution.uniform(0.0, 1.0)
    rng = np.random.default_rng(seed)
    for A, alpha, theta_1, theta_2 in zip(
        rng.uniform(0.5, 4.0, draws),
        rng.uniform(0.0, 2.0, draws),
        rng.random(draws),
        rng.random(draws),
        strict=True,
    ):
        params = MarketParams(D=2.0, n=2, A=A, distribution=unit, revision=RevisionSpec.linear(alpha))
        yield params, TwoCreditorEconomy.from_market(params), (float(theta_1), float(theta_2))


def _assert_matches_mechanism(draws, seed):
    compared = 0
    for params, econ, theta in _random_economies(draws, seed):
        outcome = settle(params, TypeProfile.of(*theta))
        assert outcome.pivotal == pytest.approx((cf_pivotal(econ, theta[1]), cf_pivotal(econ, theta[0])), abs=1e-9)
        # either decision is right within rounding of the threshold
        if abs(sum(theta) - econ.tau) < 1e-9:
            continue
        compared += 1
        assert outcome.solvent == cf_investment_rule(econ, *theta)
        if outcome.solvent:
            expected = (cf_transfer(econ, 0, theta[1]), cf_transfer(econ, 1, theta[0]))
            assert outcome.transfers == pytest.approx(expected, abs=1e-9)
            assert outcome.forgiveness == pytest.approx(
                (cf_forgiveness(econ, 0, theta[1]), cf_forgiveness(econ, 1, theta[0])), abs=1e-9
            )
    assert compared > 0.99 * draws


class TestRandomEconomies:
    def test_matches_mechanism(self):
        _assert_matches_mechanism(500, seed=12)

    @pytest.mark.slow
    def test_matches_mechanism_at_scale(self):
        _assert_matches_mechanism(10_000, seed=2024)


class TestSymmetry:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0])
    def test_swapping_creditors_swaps_the_outcome(self, alpha):
        params = make_params(A=2.0, alpha=alpha)
        rng = np.random.default_rng(8)
        for a, b in rng.random((100, 2)):
            forward = settle(params, TypeProfile.of(a, b))
            backward = settle(params, TypeProfile.of(b, a))
            assert forward.solvent == backward.solvent
            assert forward.pivotal == pytest.approx(backward.pivotal[::-1], abs=1e-12)
            assert forward.transfers == pytest.approx(backward.transfers[::-1], abs=1e-12)

    def test_equal_types_get_equal_transfers(self, example_params):
        for theta in np.linspace(0.0, 0.5, 11):
            outcome = settle(example_params, TypeProfile.of(theta, theta))
            assert outcome.transfers[0] == pytest.approx(outcome.transfers[1], abs=1e-12)

    def test_closed_form_is_the_same_for_both_creditors(self, economy):
        for other in np.linspace(0.0, 1.0, 11):
            assert cf_transfer(economy, 0, other) == cf_transfer(economy, 1, other)


class TestComparativeStatics:
    @pytest.mark.parametrize(("alpha", "sign"), [(0.5, -1.0), (1.0, 0.0), (1.5, 1.0)])
    def test_transfer_slope_changes_sign_at_unit_weight(self, alpha, sign):
        # A = 2 keeps tau = 1, so the pivot 1 - theta_other stays interior
        params = make_params(A=2.0, alpha=alpha)
        low, high = (optimal_transfer(params, 0, [other]) for other in (0.3, 0.7))
        slope = (high - low) / 0.4
        assert slope == pytest.approx(alpha - 1.0, abs=1e-9)
        assert np.sign(round(slope, 9)) == sign
        econ = TwoCreditorEconomy.from_market(params)
        assert econ.transfer_coefficients(False)[1] == pytest.approx(alpha - 1.0)

    def test_clamped_transfer_rises_with_the_other_type(self):
        econ = TwoCreditorEconomy(A=4.0, D=2.0, alpha=0.5)
        assert econ.clamped_high(0.2) and econ.clamped_high(0.4)
        assert cf_transfer(econ, 0, 0.4) > cf_transfer(econ, 0, 0.2)

    def test_threshold_rises_with_continuation_value(self):
        taus = [TwoCreditorEconomy(A=A, D=2.0, alpha=0.5).tau for A in (1.0, 1.5, 2.0, 2.5)]
        assert np.all(np.diff(taus) > 0.0)

    def test_settlement_region_grows_with_continuation_value(self):
        rng = np.random.default_rng(6)
        profiles = [TypeProfile.of(*theta) for theta in rng.random((300, 2))]
        economies = [make_params(A=A, alpha=0.5) for A in (1.0, 1.5, 2.0)]
        counts = [sum(investment_rule(params, p) for p in profiles) for params in economies]
        assert counts[0] <= counts[1] <= counts[2]
        assert counts[0] < counts[2]


class TestValidation:
    def test_needs_two_uniform_creditors(self, three_creditor_params):
        with pytest.raises(PremiseError):
            TwoCreditorEconomy.from_market(three_creditor_params)

    def test_support_above_debt(self):
        with pytest.raises(ValidationError):
            TwoCreditorEconomy(A=1.0, D=0.5)

    def test_type_outside_support(self, economy):
        with pytest.raises(SupportError):
            cf_pivotal(economy, 1.2)

    def test_creditor_index(self, economy):
        with pytest.raises(IndexError):
            cf_transfer(economy, 2, 0.5)


class TestDiscrepancies:
    def test_printed_constants(self, economy):
        assert printed_transfer(economy, 0.0) == pytest.approx(7 / 6)
        assert printed_pivotal(economy, 0.6) == pytest.approx(2.0 - 1.2)

    def test_table(self, economy):
        rows = {row.quantity: row for row in discrepancy_table(economy, samples=1000, seed=0)}
        assert set(rows) == {"investment rule", "pivotal type", "transfer", "forgiveness"}
        assert rows["transfer"].max_abs_deviation == pytest.approx(2 / 3)
        assert rows["transfer"].disagreement_rate == 1.0
        assert rows["pivotal type"].disagreement_rate == 1.0
        # the two rules differ where 1 < theta_1 + theta_2 <= 1.5
        assert 0.3 < rows["investment rule"].disagreement_rate < 0.45

    def test_deterministic(self, economy):
        assert discrepancy_table(economy, samples=200, seed=4) == discrepancy_table(economy, samples=200, seed=4)

    def test_needs_unit_support(self):
        econ = TwoCreditorEconomy(A=2.0, D=2.0, lo=0.2, hi=1.0)
        with pytest.raises(PremiseError):
            discrepancy_table(econ)
