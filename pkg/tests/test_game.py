"""Stage-game payoffs, best-response facts, and equilibrium enumeration."""

from __future__ import annotations

import itertools

import pytest

from gradualism import (
    Action,
    GameParams,
    contribution_premium,
    mixed_ne_probability,
    pure_equilibria,
    stage_payoff,
)
from gradualism.game import EQUILIBRIUM_GROUP_CAP, check_stake, success_payoff

GAME = GameParams()

C = Action.CONTRIBUTE
N = Action.NOT_CONTRIBUTE


def oracle_payoff(own: int, others: tuple[int, ...], stake: int,
                  endowment: int, multiplier: float) -> float:
    # independent re-derivation from the three payoff branches
    if own == 0:
        return endowment
    if all(others):
        return endowment + (multiplier - 1.0) * stake
    return endowment - stake


class TestGameParams:
    def test_defaults(self):
        assert GAME.group_size == 4
        assert GAME.multiplier == 2.0
        assert GAME.endowment == 20
        assert GAME.grid_max == 20
        assert GAME.decision_threshold == 0.5

    @pytest.mark.parametrize("kwargs", [
        {"group_size": 1},
        {"group_size": 2.5},
        {"multiplier": 1.0},
        {"multiplier": 0.5},
        {"endowment": 0},
        {"grid_max": 0},
    ])
    def test_rejects_bad_parameters(self, kwargs):
        with pytest.raises(ValueError):
            GameParams(**kwargs)

    def test_threshold_scales_with_multiplier(self):
        assert GameParams(multiplier=4.0).decision_threshold == 0.25


class TestCheckStake:
    @pytest.mark.parametrize("stake", [1, 10, 19])
    def test_accepts_interior_stakes(self, stake):
        assert check_stake(stake, GAME) == stake

    @pytest.mark.parametrize("stake", [0, 20, -3, 2.0, "2", True])
    def test_rejects_boundary_and_non_integers(self, stake):
        with pytest.raises(ValueError):
            check_stake(stake, GAME)


class TestStagePayoff:
    def test_unanimous_contribution_pays_endowment_plus_stake(self):
        # multiplier 2: each member nets exactly the stake on success
        assert stage_payoff(C, (C, C, C), 14, GAME) == 34
        assert success_payoff(14, GAME) == 34

    def test_holding_out_keeps_the_endowment(self):
        assert stage_payoff(N, (C, C, C), 14, GAME) == 20
        assert stage_payoff(N, (N, N, N), 14, GAME) == 20

    def test_failed_contribution_forfeits_the_stake(self):
        assert stage_payoff(C, (C, C, N), 14, GAME) == 6
        assert stage_payoff(C, (N, N, N), 2, GAME) == 18

    def test_non_integer_multiplier_keeps_float_payoffs(self):
        game = GameParams(multiplier=1.5)
        assert stage_payoff(C, (C, C, C), 14, game) == pytest.approx(27.0)

    def test_accepts_plain_ints_for_actions(self):
        assert stage_payoff(1, (1, 1, 1), 14, GAME) == 34
        assert stage_payoff(0, (1, 1, 0), 14, GAME) == 20

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError):
            stage_payoff(C, (C, C), 14, GAME)

    def test_matches_oracle_on_all_profiles(self):
        for stake in (1, 2, 14, 19):
            for own in (0, 1):
                for others in itertools.product((0, 1), repeat=3):
                    expected = oracle_payoff(own, others, stake, 20, 2.0)
                    assert stage_payoff(Action(own), others, stake, GAME) == expected


class TestContributionPremium:
    def test_zero_exactly_at_threshold(self):
        assert contribution_premium(0.5, 14, GAME) == pytest.approx(0.0)

    def test_sign_tracks_the_threshold(self):
        assert contribution_premium(0.6, 14, GAME) > 0
        assert contribution_premium(0.4, 14, GAME) < 0

    def test_linear_in_probability(self):
        # p*m*S - S at p=1 gives (m-1)*S
        assert contribution_premium(1.0, 14, GAME) == pytest.approx(14.0)
        assert contribution_premium(0.0, 14, GAME) == pytest.approx(-14.0)

    def test_rejects_probability_outside_unit_interval(self):
        with pytest.raises(ValueError):
            contribution_premium(1.5, 14, GAME)
        with pytest.raises(ValueError):
            contribution_premium(-0.1, 14, GAME)


class TestPureEquilibria:
    def test_exactly_all_in_and_all_out(self):
        for stake in (1, 2, 14, 19):
            eqs = pure_equilibria(stake, GAME)
            assert (C, C, C, C) in eqs
            assert (N, N, N, N) in eqs
            assert len(eqs) == 2

    @pytest.mark.parametrize("size", range(2, EQUILIBRIUM_GROUP_CAP + 1))
    def test_holds_for_every_supported_group_size(self, size):
        game = GameParams(group_size=size)
        eqs = pure_equilibria(10, game)
        assert sorted(eqs) == sorted([(C,) * size, (N,) * size])

    def test_matches_brute_force_deviation_oracle(self):
        game = GameParams(group_size=3, multiplier=3.0)
        stake = 7

        def oracle_equilibria():
            found = []
            for profile in itertools.product((0, 1), repeat=3):
                stable = True
                for i in range(3):
                    others = profile[:i] + profile[i + 1:]
                    here = oracle_payoff(profile[i], others, stake, 20, 3.0)
                    there = oracle_payoff(1 - profile[i], others, stake, 20, 3.0)
                    if there > here:
                        stable = False
                if stable:
                    found.append(tuple(Action(a) for a in profile))
            return sorted(found)

        assert sorted(pure_equilibria(stake, game)) == oracle_equilibria()

    def test_group_size_cap_enforced(self):
        game = GameParams(group_size=EQUILIBRIUM_GROUP_CAP + 1)
        with pytest.raises(ValueError):
            pure_equilibria(10, game)


class TestMixedEquilibrium:
    def test_four_player_doubling_value(self):
        assert mixed_ne_probability(4, 2.0) == pytest.approx(0.7937005259840998, abs=1e-9)

    def test_closed_form_cases(self):
        assert mixed_ne_probability(2, 2.0) == pytest.approx(0.5)
        assert mixed_ne_probability(4, 4.0) == pytest.approx(0.6299605249474366, abs=1e-9)

    def test_indifference_identity(self):
        for size in (2, 3, 4, 5):
            for mult in (1.5, 2.0, 3.0):
                q = mixed_ne_probability(size, mult)
                assert q ** (size - 1) == pytest.approx(1.0 / mult, abs=1e-12)

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(ValueError):
            mixed_ne_probability(1, 2.0)
        with pytest.raises(ValueError):
            mixed_ne_probability(4, 1.0)
