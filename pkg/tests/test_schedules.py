"""Stake-schedule families, validation, and serialization."""

from __future__ import annotations

import pytest

from gradualism import StakeSchedule, make_schedule


class TestMakeSchedule:
    def test_gradual_ramp(self):
        sched = make_schedule("gradualism", low=2, high=14, step=2, n1=6, n=12)
        assert sched.stakes == (2, 4, 6, 8, 10, 12, 14, 14, 14, 14, 14, 14)
        assert sched.switch_period == 6
        assert sched.low_stake == 2
        assert sched.high_stake == 14
        assert sched.periods == 12

    def test_single_jump(self):
        sched = make_schedule("semi_gradualism", low=2, high=14, n1=6, n=12)
        assert sched.stakes == (2,) * 6 + (14,) * 6
        assert sched.switch_period == 6

    def test_constant_high(self):
        sched = make_schedule("big_bang", high=14, n=12, n1=6)
        assert sched.stakes == (14,) * 12
        # a nominal switch keeps constant-high designs comparable to the others
        assert sched.switch_period == 6

    def test_constant_high_defaults_to_no_switch(self):
        assert make_schedule("big_bang", high=14, n=12).switch_period == 0

    def test_custom_derives_the_switch_from_the_trailing_run(self):
        sched = make_schedule("custom", stakes=[3, 5, 9, 9, 9])
        assert sched.stakes == (3, 5, 9, 9, 9)
        assert sched.high_stake == 9
        assert sched.low_stake == 3
        assert sched.switch_period == 2

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            make_schedule("adaptive", high=14, n=12)

    def test_ramp_may_not_overshoot_the_high_stake(self):
        with pytest.raises(ValueError):
            make_schedule("gradualism", low=2, high=8, step=2, n1=6, n=12)

    def test_stakes_must_stay_inside_the_endowment(self):
        with pytest.raises(ValueError):
            make_schedule("big_bang", high=20, n=12, endowment=20)
        with pytest.raises(ValueError):
            make_schedule("custom", stakes=[5, 25], endowment=20)

    def test_custom_needs_stakes(self):
        with pytest.raises(ValueError):
            make_schedule("custom")

    @pytest.mark.parametrize("kwargs", [
        {"kind": "semi_gradualism", "low": 2, "high": 14, "n1": 13, "n": 12},
        {"kind": "semi_gradualism", "low": 0, "high": 14, "n1": 6, "n": 12},
        {"kind": "gradualism", "low": 2, "high": 14, "step": 0, "n1": 6, "n": 12},
        {"kind": "big_bang", "high": 14, "n": 0},
    ])
    def test_rejects_degenerate_shapes(self, kwargs):
        with pytest.raises(ValueError):
            make_schedule(**kwargs)


class TestStakeSchedule:
    def test_post_switch_periods_must_hold_the_high_stake(self):
        with pytest.raises(ValueError):
            StakeSchedule((2, 4, 14, 12), 2, 14, 2)

    def test_no_stake_may_exceed_the_high_stake(self):
        with pytest.raises(ValueError):
            StakeSchedule((2, 16, 14, 14), 2, 14, 2)

    def test_low_cannot_exceed_high(self):
        with pytest.raises(ValueError):
            StakeSchedule((14, 14), 15, 14, 0)

    def test_switch_period_bounds(self):
        with pytest.raises(ValueError):
            StakeSchedule((14, 14), 14, 14, 3)
        with pytest.raises(ValueError):
            StakeSchedule((14, 14), 14, 14, -1)

    def test_needs_at_least_one_period(self):
        with pytest.raises(ValueError):
            StakeSchedule((), 2, 14, 0)

    def test_stakes_must_be_positive_integers(self):
        with pytest.raises(ValueError):
            StakeSchedule((2, 0), 2, 14, 1)
        with pytest.raises(ValueError):
            StakeSchedule((2, 4.0), 2, 14, 1)

    def test_dict_round_trip(self):
        sched = make_schedule("gradualism", low=2, high=14, step=2, n1=6, n=12)
        assert StakeSchedule.from_dict(sched.to_dict()) == sched

    def test_accepts_lists_as_stakes(self):
        sched = StakeSchedule([2, 14], 2, 14, 1)
        assert sched.stakes == (2, 14)
