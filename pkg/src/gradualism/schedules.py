"""Stake schedules: the per-period stake path a group faces in stage 1."""

from __future__ import annotations

from dataclasses import dataclass

SCHEDULE_KINDS = ("big_bang", "semi_gradualism", "gradualism", "custom")


@dataclass(frozen=True)
class StakeSchedule:
    """A fixed sequence of integer stakes, one per period.

    switch_period is the number of leading periods before the stake settles at
    high_stake; every later period plays high_stake.  Big-bang schedules keep a
    nominal switch_period so that designs differing only in their early periods
    stay comparable.
    """

    stakes: tuple[int, ...]
    low_stake: int
    high_stake: int
    switch_period: int

    def __post_init__(self):
        object.__setattr__(self, "stakes", tuple(self.stakes))
        if not self.stakes:
            raise ValueError("schedule needs at least one period")
        for s in self.stakes:
            _check_positive_int("stake", s)
        _check_positive_int("low_stake", self.low_stake)
        _check_positive_int("high_stake", self.high_stake)
        if not isinstance(self.switch_period, int) or not 0 <= self.switch_period <= len(self.stakes):
            raise ValueError(f"switch_period must lie in 0..{len(self.stakes)}, got {self.switch_period!r}")
        if self.low_stake > self.high_stake:
            raise ValueError("low_stake cannot exceed high_stake")
        if any(s != self.high_stake for s in self.stakes[self.switch_period:]):
            raise ValueError("every period after the switch must play high_stake")
        if max(self.stakes) > self.high_stake:
            raise ValueError("no stake may exceed high_stake")

    @property
    def periods(self) -> int:
        return len(self.stakes)

    def to_dict(self) -> dict:
        return {
            "stakes": list(self.stakes),
            "low_stake": self.low_stake,
            "high_stake": self.high_stake,
            "switch_period": self.switch_period,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StakeSchedule":
        return cls(tuple(data["stakes"]), data["low_stake"], data["high_stake"],
                   data["switch_period"])


def _check_positive_int(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return value


def make_schedule(kind: str, *, low: int | None = None, high: int | None = None,
                  step: int | None = None, n1: int | None = None, n: int | None = None,
                  stakes=None, endowment: int = 20) -> StakeSchedule:
    """Build one of the preset schedule families (or wrap a custom stake list).

    big_bang plays `high` for all `n` periods; semi_gradualism plays `low` for
    the first `n1` then jumps to `high`; gradualism ramps low, low+step, ... for
    `n1` periods and then holds `high`.  All stakes must lie strictly inside
    (0, endowment).
    """
    if kind not in SCHEDULE_KINDS:
        raise ValueError(f"unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")

    if kind == "custom":
        if not stakes:
            raise ValueError("custom schedules need an explicit stake list")
        seq = tuple(_check_positive_int("stake", s) for s in stakes)
        high_stake = seq[-1]
        switch = len(seq)
        while switch > 0 and seq[switch - 1] == high_stake:
            switch -= 1
        sched = StakeSchedule(seq, min(seq), high_stake, switch)
    else:
        _check_positive_int("n", n)
        _check_positive_int("high", high)
        if kind == "big_bang":
            n1 = 0 if n1 is None else n1
            if not isinstance(n1, int) or not 0 <= n1 <= n:
                raise ValueError(f"n1 must lie in 0..{n}, got {n1!r}")
            sched = StakeSchedule((high,) * n, high, high, n1)
        else:
            _check_positive_int("low", low)
            _check_positive_int("n1", n1)
            if n1 > n:
                raise ValueError(f"n1 must lie in 1..{n}, got {n1}")
            if kind == "semi_gradualism":
                seq = (low,) * n1 + (high,) * (n - n1)
            else:  # gradualism
                _check_positive_int("step", step)
                ramp = tuple(low + k * step for k in range(n1))
                if ramp and ramp[-1] > high:
                    raise ValueError(
                        f"gradual ramp tops out at {ramp[-1]}, above the high stake {high}"
                    )
                seq = ramp + (high,) * (n - n1)
            sched = StakeSchedule(seq, low, high, n1)

    for s in sched.stakes:
        if not 0 < s < endowment:
            raise ValueError(
                f"stake {s} must lie strictly between 0 and the endowment {endowment}"
            )
    return sched
