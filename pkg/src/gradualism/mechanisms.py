"""Schedule mechanisms: coupled comparisons and guaranteed-success synthesis.

The comparison runs competing schedules on identical copies of one group's
initial curves, so any performance gap is the schedule's doing alone.  The
synthesizer greedily builds the fastest stake path a known group is certain to
coordinate on all the way to a target stake.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .beliefs import BeliefCurve, UpdateParams, evaluate, update_after_success
from .engine import AgentState, run_stage
from .game import GameParams
from .schedules import StakeSchedule


@dataclass
class DominanceReport:
    """Period-by-period outcomes of schedules run on identical belief draws.

    Schedules are keyed in the order given, from most abrupt to most gradual;
    chain_holds is true when, in every compared high-stake period, each later
    schedule succeeds whenever any earlier one does.
    """

    labels: list[str]
    periods: int
    high_periods: list[int]
    success: dict[str, list[bool]] = field(default_factory=dict)
    chain_holds: bool = True

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "periods": self.periods,
            "high_periods": list(self.high_periods),
            "success": {k: list(v) for k, v in self.success.items()},
            "chain_holds": self.chain_holds,
        }


def _check_group(initial_curves, game: GameParams):
    curves = list(initial_curves)
    if len(curves) != game.group_size:
        raise ValueError(f"expected {game.group_size} initial curves, got {len(curves)}")
    for c in curves:
        if not isinstance(c, BeliefCurve):
            raise ValueError(f"initial curves must be BeliefCurve, got {type(c).__name__}")
        if c.grid_max < game.grid_max:
            raise ValueError("curve grid is shorter than the game's stake grid")
    return curves


def _check_update(update_params: UpdateParams, game: GameParams):
    if update_params.failure_cap >= game.decision_threshold:
        raise ValueError(
            "failure_cap must stay below the decision threshold "
            f"{game.decision_threshold} for failures to be absorbing"
        )


def coupled_compare(initial_curves, schedules: dict[str, StakeSchedule],
                    game: GameParams, update_params: UpdateParams) -> DominanceReport:
    """Run each schedule on clones of the same group and report dominance.

    All schedules must share the switch period, total length, and high stake --
    designs that differ in anything but the early stake path are not comparable.
    """
    curves = _check_group(initial_curves, game)
    _check_update(update_params, game)
    if len(schedules) < 2:
        raise ValueError("comparison needs at least two schedules")
    shapes = {(s.switch_period, s.periods, s.high_stake) for s in schedules.values()}
    if len(shapes) != 1:
        raise ValueError(
            "schedules must share (switch_period, periods, high_stake) to be "
            f"comparable, got {sorted(shapes)}"
        )
    switch, periods, _ = next(iter(shapes))
    report = DominanceReport(
        labels=list(schedules),
        periods=periods,
        high_periods=list(range(switch + 1, periods + 1)),
    )
    for name, sched in schedules.items():
        agents = [AgentState(i, c, update_params, name) for i, c in enumerate(curves)]
        records = run_stage([agents], list(sched.stakes), game)[0]
        report.success[name] = [r.success for r in records]
    for earlier, later in zip(report.labels, report.labels[1:]):
        for p in report.high_periods:
            if report.success[earlier][p - 1] and not report.success[later][p - 1]:
                report.chain_holds = False
    return report


@dataclass
class PathSynthesis:
    """Result of a guaranteed-path search.

    status is "ok" when the target was reached, else one of "infeasible_start"
    (no stake clears every member's threshold in period 1), "stalled" (the
    next certain stake would not exceed the current one), or
    "horizon_exhausted".  prefix holds the certain stakes found before giving
    up; verified reports whether an engine run of the schedule succeeded in
    every period.
    """

    status: str
    schedule: StakeSchedule | None
    prefix: tuple[int, ...]
    verified: bool = False

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "schedule": None if self.schedule is None else self.schedule.to_dict(),
            "prefix": list(self.prefix),
            "verified": self.verified,
        }


def synthesize_guaranteed_path(initial_curves, target_stake: int, max_periods: int,
                               game: GameParams, update_params: UpdateParams) -> PathSynthesis:
    """Greedy certain-success stake path from known curves up to a target stake.

    Each period picks the largest stake (capped at the target) that every
    member is still willing to back given the successes so far; success is then
    certain, curves update, and the search repeats until the target is reached
    or no progress is possible.
    """
    curves = _check_group(initial_curves, game)
    _check_update(update_params, game)
    if isinstance(target_stake, bool) or not isinstance(target_stake, int):
        raise ValueError(f"target_stake must be an integer, got {target_stake!r}")
    if not 1 <= target_stake <= game.grid_max:
        raise ValueError(f"target_stake {target_stake} is off the grid 1..{game.grid_max}")
    if target_stake >= game.endowment:
        raise ValueError(
            f"target_stake {target_stake} must stay below the endowment {game.endowment}"
        )
    if not isinstance(max_periods, int) or max_periods < 1:
        raise ValueError(f"max_periods must be an int >= 1, got {max_periods!r}")

    threshold = game.decision_threshold
    current = list(curves)
    path: list[int] = []
    for _ in range(max_periods):
        best = None
        for stake in range(target_stake, 0, -1):
            if min(evaluate(c, stake) for c in current) >= threshold:
                best = stake
                break
        if best is None:
            return PathSynthesis("infeasible_start", None, ())
        if path and best <= path[-1]:
            return PathSynthesis("stalled", None, tuple(path))
        path.append(best)
        current = [update_after_success(c, best, update_params) for c in current]
        if best == target_stake:
            schedule = StakeSchedule(tuple(path), path[0], target_stake, len(path) - 1)
            return PathSynthesis("ok", schedule, tuple(path),
                                 verified=_verify_path(curves, schedule, game, update_params))
    return PathSynthesis("horizon_exhausted", None, tuple(path))


def _verify_path(curves, schedule: StakeSchedule, game: GameParams,
                 update_params: UpdateParams) -> bool:
    agents = [AgentState(i, c, update_params, "synthesized") for i, c in enumerate(curves)]
    records = run_stage([agents], list(schedule.stakes), game)[0]
    return all(r.success for r in records)
