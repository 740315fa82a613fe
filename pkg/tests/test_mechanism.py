"""Tests for the settlement mechanism."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from jubilee.core.distributions import TypeDistribution
from jubilee.core.mechanism import (
    Clamp,
    MarketParams,
    OutcomeFlag,
    RevisionSpec,
    TypeProfile,
    _revision_sums,
    admitted_array,
    b_term,
    investment_rule,
    liquidation_value,
    optimal_transfer,
    pivotal_type,
    pivotal_types_array,
    q_term,
    q_term_array,
    settle,
    solvent_array,
    transfers_array,
)
from jubilee.errors import SupportError
from tests.conftest import make_params


class TestExampleEconomy:
    """A = 2, D = 2, alpha = 1, types uniform on [0, 1]."""

    def test_settles(self, example_params):
        assert investment_rule(example_params, TypeProfile.of(0.3, 0.6))

    def test_pivotal_types(self, example_params):
        outcome = settle(example_params, TypeProfile.of(0.3, 0.6))
        assert outcome.pivotal == pytest.approx((0.4, 0.7), abs=1e-9)

    def test_transfers_and_forgiveness(self, example_params):
        outcome = settle(example_params, TypeProfile.of(0.3, 0.6))
        assert outcome.solvent
        assert outcome.transfers == pytest.approx((0.5, 0.5), abs=1e-9)
        assert outcome.forgiveness == pytest.approx((0.5, 0.5), abs=1e-9)
        assert outcome.flags == ()

    def test_liquidation_value_includes_revision(self, example_params):
        # l_1 = 0.3 + e(0.6) = 0.3 + 0.1
        value = liquidation_value(example_params, 0, TypeProfile.of(0.3, 0.6))
        assert value == pytest.approx(0.4)

    def test_b_and_q_split_the_virtual_cost(self, example_params):
        theta = (0.3, 0.6)
        total = b_term(example_params, theta[0]) + q_term(example_params, 0, [theta[1]])
        # l = (0.4, 0.4), F/phi = (0.3, 0.6)
        assert total == pytest.approx(1.7)


class TestBankruptcy:
    def test_high_types_go_bankrupt(self):
        params = make_params(A=1.0)
        outcome = settle(params, TypeProfile.of(0.99, 0.99))
        assert not outcome.solvent
        assert outcome.transfers == (0.0, 0.0)
        assert outcome.forgiveness == (0.0, 0.0)

    def test_tie_counts_as_solvent(self, plain_params):
        # 2 * (0.25 + 0.25) == A exactly
        assert investment_rule(plain_params, TypeProfile.of(0.25, 0.25))
        assert settle(plain_params, TypeProfile.of(0.25, 0.25)).solvent


class TestPivotalClamps:
    def test_low_clamp(self, plain_params):
        pivot = pivotal_type(plain_params, 0, [0.9])
        assert pivot.clamp is Clamp.LOW
        assert pivot.value == plain_params.lo
        assert not pivot.admits(0.0)

    def test_interior(self, plain_params):
        pivot = pivotal_type(plain_params, 0, [0.0])
        assert pivot.clamp is Clamp.NONE
        assert pivot.value == pytest.approx(0.5, abs=1e-9)

    def test_high_clamp(self):
        params = make_params(A=3.0, alpha=0.0)
        pivot = pivotal_type(params, 0, [0.0])
        assert pivot.clamp is Clamp.HIGH
        assert pivot.value == 1.0
        assert pivot.admits(1.0)

    def test_clamp_flags_on_outcome(self):
        params = make_params(A=3.0, alpha=0.0)
        outcome = settle(params, TypeProfile.of(0.0, 0.0))
        assert outcome.has_flag(OutcomeFlag.PIVOTAL_CLAMPED_HIGH)

    def test_pivot_never_overshoots_target(self, example_params):
        pivot = pivotal_type(example_params, 1, [0.37])
        target = example_params.A - q_term(example_params, 1, [0.37])
        assert b_term(example_params, pivot.value) <= target


class TestTransfers:
    def test_transfer_ignores_own_report(self, three_creditor_params):
        others = [0.2, 0.4]
        expected = optimal_transfer(three_creditor_params, 0, others)
        for own in (0.0, 0.1, 0.25):
            outcome = settle(three_creditor_params, TypeProfile.of(own, *others))
            if outcome.solvent:
                assert outcome.transfers[0] == pytest.approx(expected, abs=1e-12)

    def test_transfer_covers_liquidation_value(self, three_creditor_params):
        rng = np.random.default_rng(11)
        for theta in rng.random((50, 3)):
            profile = TypeProfile.of(*theta)
            outcome = settle(three_creditor_params, profile)
            if outcome.solvent:
                for i in range(3):
                    liquidation = liquidation_value(three_creditor_params, i, profile)
                    assert outcome.transfers[i] >= liquidation - 1e-9

    def test_creditor_index_out_of_range(self, example_params):
        with pytest.raises(IndexError):
            optimal_transfer(example_params, 2, [0.5])


class TestValidation:
    def test_profile_length_must_match(self, example_params):
        with pytest.raises(SupportError):
            settle(example_params, TypeProfile.of(0.1, 0.2, 0.3))

    def test_type_outside_support(self, example_params):
        with pytest.raises(SupportError):
            settle(example_params, TypeProfile.of(0.1, 1.5))

    def test_profile_needs_two_types(self):
        with pytest.raises(ValidationError):
            TypeProfile.of(0.5)

    def test_support_above_debt_rejected(self):
        with pytest.raises(ValidationError):
            MarketParams(D=0.5, n=2, A=1.0, distribution=TypeDistribution.uniform(0.0, 1.0))

    def test_zero_revision_takes_no_alpha(self):
        with pytest.raises(ValidationError):
            RevisionSpec(kind="zero", alpha=0.5)

    def test_revision_is_centered_on_the_mean(self, example_params):
        assert example_params.revision_of(0.5) == pytest.approx(0.0)
        assert example_params.revision_of(0.6) == pytest.approx(0.1)


PROFILES = 10_000

continuation_values = st.floats(min_value=0.5, max_value=5.0)
alphas = st.floats(min_value=0.0, max_value=2.0)
creditor_counts = st.integers(min_value=2, max_value=4)
unit_types = st.floats(min_value=0.0, max_value=1.0)


def _economy(A, alpha, n):
    return make_params(A=A, alpha=alpha, n=n, D=float(n))


def _others(profiles, i):
    return np.delete(profiles, i, axis=1)


class TestProperties:
    """Pivotal characterization of the optimal transfer over many random profiles."""

    @settings(max_examples=20, deadline=None)
    @given(A=continuation_values, alpha=alphas, n=creditor_counts, seed=st.integers(0, 2**32 - 1))
    def test_pivot_balances_b_and_q(self, A, alpha, n, seed):
        params = _economy(A, alpha, n)
        profiles = np.random.default_rng(seed).random((PROFILES, n))
        for i in range(n):
            others = _others(profiles, i)
            pivots, clamps = pivotal_types_array(params, others)
            total = np.asarray(b_term(params, pivots)) + q_term_array(params, others)
            interior = clamps == Clamp.NONE
            assert np.allclose(total[interior], A, atol=1e-9)
            assert np.all(total[clamps == Clamp.HIGH] <= A + 1e-12)
            assert np.all(total[clamps == Clamp.LOW] > A - 1e-12)
            expected = pivots + _revision_sums(params, others)
            assert np.array_equal(transfers_array(params, others), expected)

    @settings(max_examples=20, deadline=None)
    @given(A=continuation_values, alpha=alphas, n=creditor_counts, seed=st.integers(0, 2**32 - 1))
    def test_investment_rule_is_every_creditor_admitted(self, A, alpha, n, seed):
        params = _economy(A, alpha, n)
        profiles = np.random.default_rng(seed).random((PROFILES, n))
        admitted = np.ones(PROFILES, dtype=bool)
        for i in range(n):
            pivots, clamps = pivotal_types_array(params, _others(profiles, i))
            admitted &= admitted_array(pivots, clamps, profiles[:, i])
        assert np.array_equal(solvent_array(params, profiles), admitted)

    @settings(max_examples=100, deadline=None)
    @given(A=continuation_values, alpha=alphas, theta=st.lists(unit_types, min_size=2, max_size=2))
    def test_investment_rule_matches_pivots(self, A, alpha, theta):
        params = _economy(A, alpha, 2)
        profile = TypeProfile.of(*theta)
        pivots = [pivotal_type(params, i, profile.others(i)) for i in range(2)]
        expected = all(p.admits(t) for p, t in zip(pivots, theta, strict=True))
        # a report within the bisection tolerance of its pivot may land on either side
        if all(abs(p.value - t) > 1e-9 for p, t in zip(pivots, theta, strict=True)):
            assert investment_rule(params, profile) == expected

    @settings(max_examples=100, deadline=None)
    @given(
        A=continuation_values,
        alpha=alphas,
        others=st.lists(unit_types, min_size=2, max_size=2),
        bump=st.floats(min_value=0.0, max_value=1.0),
        index=st.integers(min_value=0, max_value=1),
    )
    def test_pivot_non_increasing_in_other_types(self, A, alpha, others, bump, index):
        params = _economy(A, alpha, 3)
        raised = list(others)
        raised[index] = min(1.0, raised[index] + bump)
        before = pivotal_type(params, 0, others)
        after = pivotal_type(params, 0, raised)
        assert after.value <= before.value + 1e-11
