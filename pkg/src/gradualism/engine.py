"""Multi-period session engine.

Groups play a stake schedule under minimal feedback: the only public signal
each period is whether the whole group contributed.  A session runs stage 1
(each treatment's schedule on fresh groups), reshuffles everyone into new
groups, then runs stage 2 at a constant stake.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import streams
from .beliefs import (
    BeliefCurve,
    InitialBeliefParams,
    UpdateParams,
    evaluate,
    sample_initial,
    update_after_observed_failure,
    update_after_own_abstention,
    update_after_success,
)
from .game import Action, GameParams, check_stake, success_payoff
from .schedules import StakeSchedule

STAGE2_TREATMENT = "stage2"  # group tag after the reshuffle mixes origins


@dataclass(slots=True)
class AgentState:
    """One player's evolving state across a session."""

    id: int
    curve: BeliefCurve
    update_params: UpdateParams
    origin_treatment: str
    cumulative_points: float = 0
    action_history: list[Action] = field(default_factory=list)


@dataclass(slots=True)
class PeriodRecord:
    """Everything observable about one group-period.

    elicited_beliefs are each member's curve value at the period stake,
    captured before the period's update is applied.
    """

    period_index: int
    stake: int
    actions: list[Action]
    success: bool
    payoffs: list
    elicited_beliefs: list[float]

    @property
    def n_contribute(self) -> int:
        return int(sum(self.actions))

    def to_dict(self) -> dict:
        return {
            "period_index": self.period_index,
            "stake": self.stake,
            "actions": [int(a) for a in self.actions],
            "success": self.success,
            "payoffs": list(self.payoffs),
            "elicited_beliefs": list(self.elicited_beliefs),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PeriodRecord":
        return cls(
            data["period_index"],
            data["stake"],
            [Action(a) for a in data["actions"]],
            bool(data["success"]),
            list(data["payoffs"]),
            [float(b) for b in data["elicited_beliefs"]],
        )


@dataclass(slots=True)
class GroupRecord:
    """One group's full trace within a stage."""

    group_id: int
    stage: int
    treatment: str
    member_ids: list[int]
    member_origins: list[str]
    periods: list[PeriodRecord]

    def to_dict(self) -> dict:
        return {
            "group_id": self.group_id,
            "stage": self.stage,
            "treatment": self.treatment,
            "member_ids": list(self.member_ids),
            "member_origins": list(self.member_origins),
            "periods": [p.to_dict() for p in self.periods],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroupRecord":
        return cls(
            data["group_id"],
            data["stage"],
            data["treatment"],
            list(data["member_ids"]),
            list(data["member_origins"]),
            [PeriodRecord.from_dict(p) for p in data["periods"]],
        )


@dataclass(slots=True)
class AgentSummary:
    """Final earnings of one agent (points include the show-up fee)."""

    id: int
    origin_treatment: str
    show_up_fee: float
    cumulative_points: float
    currency: float
    final_curve: list[float]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "origin_treatment": self.origin_treatment,
            "show_up_fee": self.show_up_fee,
            "cumulative_points": self.cumulative_points,
            "currency": self.currency,
            "final_curve": list(self.final_curve),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AgentSummary":
        return cls(
            data["id"],
            data["origin_treatment"],
            data["show_up_fee"],
            data["cumulative_points"],
            data["currency"],
            list(data["final_curve"]),
        )


@dataclass(slots=True)
class SessionRecord:
    """Full trace of one session replication."""

    replication: int
    stage1_groups: list[GroupRecord]
    stage2_groups: list[GroupRecord]
    agents: list[AgentSummary]

    def to_dict(self) -> dict:
        return {
            "replication": self.replication,
            "stage1_groups": [g.to_dict() for g in self.stage1_groups],
            "stage2_groups": [g.to_dict() for g in self.stage2_groups],
            "agents": [a.to_dict() for a in self.agents],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionRecord":
        return cls(
            data["replication"],
            [GroupRecord.from_dict(g) for g in data["stage1_groups"]],
            [GroupRecord.from_dict(g) for g in data["stage2_groups"]],
            [AgentSummary.from_dict(a) for a in data["agents"]],
        )


@dataclass(frozen=True)
class TreatmentSpec:
    """One treatment arm: a schedule, how many groups play it, and the fee."""

    name: str
    schedule: StakeSchedule
    group_count: int
    show_up_fee: float = 0

    def __post_init__(self):
        if not self.name:
            raise ValueError("treatment needs a nonempty name")
        if not isinstance(self.group_count, int) or self.group_count < 1:
            raise ValueError(f"group_count must be an int >= 1, got {self.group_count!r}")
        if self.show_up_fee < 0:
            raise ValueError(f"show_up_fee must be >= 0, got {self.show_up_fee!r}")


@dataclass(frozen=True)
class SessionConfig:
    """Everything needed to run one session deterministically."""

    game: GameParams
    treatments: tuple[TreatmentSpec, ...]
    stage2_periods: int
    stage2_stake: int
    exchange_rate: float
    seed: int
    initial_beliefs: InitialBeliefParams
    update_params: UpdateParams

    def __post_init__(self):
        object.__setattr__(self, "treatments", tuple(self.treatments))
        if not self.treatments:
            raise ValueError("session needs at least one treatment")
        names = [t.name for t in self.treatments]
        if len(set(names)) != len(names):
            raise ValueError(f"treatment names must be unique, got {names}")
        if STAGE2_TREATMENT in names:
            raise ValueError(f"treatment name {STAGE2_TREATMENT!r} is reserved")
        lengths = {t.schedule.periods for t in self.treatments}
        if len(lengths) != 1:
            raise ValueError(f"all stage-1 schedules must share one length, got {sorted(lengths)}")
        for t in self.treatments:
            for s in t.schedule.stakes:
                check_stake(s, self.game)
                if s > self.game.grid_max:
                    raise ValueError(f"stake {s} exceeds the grid maximum {self.game.grid_max}")
        if not isinstance(self.stage2_periods, int) or self.stage2_periods < 0:
            raise ValueError(f"stage2_periods must be an int >= 0, got {self.stage2_periods!r}")
        if self.stage2_periods:
            check_stake(self.stage2_stake, self.game)
            if self.stage2_stake > self.game.grid_max:
                raise ValueError(f"stage-2 stake {self.stage2_stake} is off the grid")
        if not self.exchange_rate > 0:
            raise ValueError(f"exchange_rate must be > 0, got {self.exchange_rate!r}")
        streams.stream_key(self.seed)  # range check
        if self.update_params.failure_cap >= self.game.decision_threshold:
            raise ValueError(
                "failure_cap must stay below the decision threshold "
                f"{self.game.decision_threshold} for failures to be absorbing"
            )

    @property
    def stage1_periods(self) -> int:
        return self.treatments[0].schedule.periods

    @property
    def agents_per_session(self) -> int:
        return self.game.group_size * sum(t.group_count for t in self.treatments)


def play_period(agents: list[AgentState], stake: int, game: GameParams,
                period_index: int = 1) -> PeriodRecord:
    """One simultaneous-move round; mutates curves, points, and histories.

    Exactly one update case applies per agent: everyone updates on a success,
    contributors update on a failure they helped reveal, abstainers keep their
    beliefs unchanged.
    """
    if len(agents) != game.group_size:
        raise ValueError(f"expected {game.group_size} agents, got {len(agents)}")
    check_stake(stake, game)
    threshold = game.decision_threshold
    beliefs = [evaluate(a.curve, stake) for a in agents]
    actions = [Action.CONTRIBUTE if b >= threshold else Action.NOT_CONTRIBUTE
               for b in beliefs]
    success = all(actions)
    if success:
        pay = success_payoff(stake, game)
        payoffs = [pay] * game.group_size
        for agent in agents:
            agent.curve = update_after_success(agent.curve, stake, agent.update_params)
    else:
        payoffs = [game.endowment - stake if act else game.endowment for act in actions]
        for agent, act in zip(agents, actions):
            if act:
                agent.curve = update_after_observed_failure(agent.curve, stake,
                                                            agent.update_params)
            else:
                agent.curve = update_after_own_abstention(agent.curve)
    for agent, act, pay in zip(agents, actions, payoffs):
        agent.cumulative_points += pay
        agent.action_history.append(act)
    return PeriodRecord(period_index, stake, actions, bool(success), payoffs, beliefs)


def run_stage(groups: list[list[AgentState]], stakes, game: GameParams,
              start_period: int = 1) -> list[list[PeriodRecord]]:
    """Play a stake sequence independently in each group (no cross-group feedback)."""
    out = []
    for agents in groups:
        out.append([play_period(agents, stake, game, period_index=start_period + t)
                    for t, stake in enumerate(stakes)])
    return out


def reshuffle(agents: list[AgentState], group_size: int,
              rng) -> list[list[AgentState]]:
    """Uniform random partition into fresh groups of `group_size`."""
    if group_size < 1:
        raise ValueError(f"group_size must be >= 1, got {group_size}")
    if len(agents) % group_size:
        raise ValueError(
            f"cannot split {len(agents)} agents into groups of {group_size}"
        )
    order = rng.permutation(len(agents))
    shuffled = [agents[i] for i in order]
    return [shuffled[k: k + group_size] for k in range(0, len(shuffled), group_size)]


def run_session(config: SessionConfig, replication: int = 0) -> SessionRecord:
    """One full two-stage session, fully determined by (config.seed, replication).

    Agent k's initial draw comes from the stream (seed, replication, k + 1);
    the stage-2 reshuffle uses the session stream (seed, replication, 0).
    """
    game = config.game
    all_agents: list[AgentState] = []
    stage1_groups: list[GroupRecord] = []
    group_id = 0
    agent_id = 0
    for spec in config.treatments:
        treatment_groups: list[list[AgentState]] = []
        for _ in range(spec.group_count):
            members = []
            for _ in range(game.group_size):
                rng = streams.stream(config.seed, replication, agent_id + 1)
                members.append(AgentState(
                    id=agent_id,
                    curve=sample_initial(config.initial_beliefs, game, rng),
                    update_params=config.update_params,
                    origin_treatment=spec.name,
                    cumulative_points=spec.show_up_fee,
                ))
                agent_id += 1
            treatment_groups.append(members)
            all_agents.extend(members)
        for members, periods in zip(treatment_groups,
                                    run_stage(treatment_groups, spec.schedule.stakes, game)):
            stage1_groups.append(GroupRecord(
                group_id, 1, spec.name,
                [a.id for a in members], [a.origin_treatment for a in members], periods,
            ))
            group_id += 1

    stage2_groups: list[GroupRecord] = []
    if config.stage2_periods:
        session_rng = streams.stream(config.seed, replication, streams.SESSION_STREAM)
        mixed = reshuffle(all_agents, game.group_size, session_rng)
        stakes = [config.stage2_stake] * config.stage2_periods
        for members, periods in zip(mixed, run_stage(mixed, stakes, game,
                                                     start_period=config.stage1_periods + 1)):
            stage2_groups.append(GroupRecord(
                group_id, 2, STAGE2_TREATMENT,
                [a.id for a in members], [a.origin_treatment for a in members], periods,
            ))
            group_id += 1

    fees = {spec.name: spec.show_up_fee for spec in config.treatments}
    summaries = [AgentSummary(
        id=a.id,
        origin_treatment=a.origin_treatment,
        show_up_fee=fees[a.origin_treatment],
        cumulative_points=a.cumulative_points,
        currency=a.cumulative_points / config.exchange_rate,
        final_curve=a.curve.to_json(),
    ) for a in sorted(all_agents, key=lambda a: a.id)]
    return SessionRecord(replication, stage1_groups, stage2_groups, summaries)


FLAT_CSV_COLUMNS = ("replication", "treatment", "stage", "period", "group_id",
                    "stake", "n_contribute", "success", "mean_payoff", "min_payoff")


def flat_rows(record: SessionRecord):
    """Per-period flat rows (one per group-period) matching FLAT_CSV_COLUMNS."""
    rows = []
    for group in list(record.stage1_groups) + list(record.stage2_groups):
        for rec in group.periods:
            rows.append((
                record.replication,
                group.treatment,
                group.stage,
                rec.period_index,
                group.group_id,
                rec.stake,
                rec.n_contribute,
                int(rec.success),
                sum(rec.payoffs) / len(rec.payoffs),
                min(rec.payoffs),
            ))
    return rows
