"""One-shot stage game: binary contributions with weakest-link output.

A group project at stake S returns `multiplier * S` to each member, but only
when every member puts their stake in; a lone contributor forfeits the stake.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import IntEnum

# Exhaustive profile enumeration is 2^I * I * 2 payoff evaluations; keep it honest.
EQUILIBRIUM_GROUP_CAP = 6


class Action(IntEnum):
    """Binary stage move; integer values make contributor counts a plain sum."""

    NOT_CONTRIBUTE = 0
    CONTRIBUTE = 1


@dataclass(frozen=True)
class GameParams:
    """Stage-game parameters.

    Attributes:
        group_size: players per group (at least 2).
        multiplier: gross return per stake point of a successful project (> 1).
        endowment: per-period endowment each player starts from (> 0).
        grid_max: largest stake representable on the integer stake grid.
    """

    group_size: int = 4
    multiplier: float = 2.0
    endowment: int = 20
    grid_max: int = 20

    def __post_init__(self):
        if not isinstance(self.group_size, int) or self.group_size < 2:
            raise ValueError(f"group_size must be an int >= 2, got {self.group_size!r}")
        if not self.multiplier > 1.0:
            raise ValueError(f"multiplier must be > 1, got {self.multiplier!r}")
        if self.endowment <= 0:
            raise ValueError(f"endowment must be > 0, got {self.endowment!r}")
        if not isinstance(self.grid_max, int) or self.grid_max < 1:
            raise ValueError(f"grid_max must be an int >= 1, got {self.grid_max!r}")

    @property
    def decision_threshold(self) -> float:
        """Belief level at which contributing weakly beats holding out (1/multiplier)."""
        return 1.0 / self.multiplier


def check_stake(stake, params: GameParams) -> int:
    """Validate an integer stake strictly between 0 and the endowment."""
    if isinstance(stake, bool) or not isinstance(stake, int):
        raise ValueError(f"stake must be an integer, got {stake!r}")
    if not 0 < stake < params.endowment:
        raise ValueError(
            f"stake must lie strictly between 0 and the endowment "
            f"{params.endowment}, got {stake}"
        )
    return stake


def _as_points(value: float):
    """Report whole-point payoffs as ints (integer multipliers keep them exact)."""
    return int(value) if float(value).is_integer() else value


def success_payoff(stake: int, params: GameParams):
    """Payoff to each member when the whole group contributes at `stake`."""
    return _as_points(params.endowment + (params.multiplier - 1.0) * stake)


def stage_payoff(own: Action, others, stake: int, params: GameParams):
    """Realized points for one player given everyone's moves at a stake level.

    A non-contributor keeps the endowment untouched.  A contributor gains
    (multiplier - 1) * stake when all others contribute too, and loses the
    stake when anyone holds out.
    """
    check_stake(stake, params)
    others = [Action(o) for o in others]
    if len(others) != params.group_size - 1:
        raise ValueError(
            f"expected {params.group_size - 1} other players, got {len(others)}"
        )
    if Action(own) is Action.NOT_CONTRIBUTE:
        return params.endowment
    if all(o is Action.CONTRIBUTE for o in others):
        return success_payoff(stake, params)
    return params.endowment - stake


def contribution_premium(prob_others: float, stake: int, params: GameParams):
    """Expected gain from contributing when all others contribute w.p. `prob_others`.

    Positive exactly when prob_others exceeds 1/multiplier.
    """
    if not 0.0 <= prob_others <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {prob_others!r}")
    check_stake(stake, params)
    return prob_others * params.multiplier * stake - stake


def pure_equilibria(stake: int, params: GameParams) -> list[tuple[Action, ...]]:
    """All pure profiles where no player strictly gains by a unilateral switch.

    For this game that is exactly all-contribute and all-hold-out.
    """
    check_stake(stake, params)
    if params.group_size > EQUILIBRIUM_GROUP_CAP:
        raise ValueError(
            f"exhaustive equilibrium enumeration is capped at group_size "
            f"{EQUILIBRIUM_GROUP_CAP}, got {params.group_size}"
        )
    moves = (Action.CONTRIBUTE, Action.NOT_CONTRIBUTE)
    equilibria = []
    for profile in itertools.product(moves, repeat=params.group_size):
        if all(not _gains_by_switching(profile, i, stake, params)
               for i in range(params.group_size)):
            equilibria.append(profile)
    return equilibria


def _gains_by_switching(profile, i, stake, params) -> bool:
    others = profile[:i] + profile[i + 1:]
    flipped = Action.NOT_CONTRIBUTE if profile[i] is Action.CONTRIBUTE else Action.CONTRIBUTE
    return (stage_payoff(flipped, others, stake, params)
            > stage_payoff(profile[i], others, stake, params))


def mixed_ne_probability(group_size: int, multiplier: float) -> float:
    """Symmetric interior mixed-equilibrium contribution probability.

    A player is indifferent when the chance all I-1 others contribute equals
    1/multiplier, i.e. q^(I-1) = 1/multiplier.
    """
    if group_size < 2:
        raise ValueError(f"group_size must be >= 2, got {group_size!r}")
    if not multiplier > 1.0:
        raise ValueError(f"multiplier must be > 1, got {multiplier!r}")
    return multiplier ** (-1.0 / (group_size - 1))
