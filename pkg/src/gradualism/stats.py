"""Summaries, calibration, and small-sample statistics for run records.

Stage-1 summary rows aggregate over groups per (treatment, period); stage-2
rows key each agent by their stage-1 origin treatment, since reshuffled groups
mix origins.  Success for a stage-2 row is the fraction of that origin's
agents sitting in a succeeding group.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .beliefs import InitialBeliefParams
from .engine import SessionRecord
from .game import GameParams

EXACT_MWU_LIMIT = 12  # combined sample size up to which the permutation test is exact

EARNINGS_BLOCKS = (("periods_1_6", 1, 6), ("periods_7_12", 7, 12), ("periods_13_20", 13, 20))


@dataclass(frozen=True)
class CalibrationTarget:
    """Require P(curve(stake) >= decision threshold) == probability at period 1."""

    stake: int
    probability: float

    def __post_init__(self):
        if isinstance(self.stake, bool) or not isinstance(self.stake, int) or self.stake < 1:
            raise ValueError(f"target stake must be an integer >= 1, got {self.stake!r}")
        if not 0.0 < self.probability < 1.0:
            raise ValueError(
                f"target probability must lie strictly in (0, 1), got {self.probability!r}"
            )


@dataclass(slots=True)
class SummaryRow:
    """Aggregated rates for one (treatment, stage, period) cell."""

    treatment: str
    stage: int
    period: int
    success_rate: float
    contribution_rate: float
    mean_payoff: float
    n_groups: int
    n_agents: int

    def to_dict(self) -> dict:
        return {
            "treatment": self.treatment,
            "stage": self.stage,
            "period": self.period,
            "success_rate": self.success_rate,
            "contribution_rate": self.contribution_rate,
            "mean_payoff": self.mean_payoff,
            "n_groups": self.n_groups,
            "n_agents": self.n_agents,
        }


@dataclass(slots=True)
class RunSummary:
    """Per-period rates plus per-treatment mean earnings by period block."""

    replications: int
    rows: list[SummaryRow]
    earnings_blocks: dict[str, dict[str, float]]

    def row(self, treatment: str, period: int) -> SummaryRow:
        for r in self.rows:
            if r.treatment == treatment and r.period == period:
                return r
        raise KeyError(f"no summary row for {treatment!r} period {period}")

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "rows": [r.to_dict() for r in self.rows],
            "earnings_blocks": {k: dict(v) for k, v in self.earnings_blocks.items()},
        }


class SummaryAccumulator:
    """Streaming aggregation of session records (memory stays flat)."""

    def __init__(self):
        self.replications = 0
        # (treatment, stage, period) -> [groups, successes, agents, contribs, payoff_sum]
        self._cells: dict[tuple[str, int, int], list] = {}
        # treatment -> block -> payoff sum; treatment -> agent exposures
        self._earnings: dict[str, dict[str, float]] = {}
        self._exposures: dict[str, int] = {}

    def add(self, record: SessionRecord) -> None:
        self.replications += 1
        for group in record.stage1_groups:
            size = len(group.member_ids)
            self._exposures[group.treatment] = self._exposures.get(group.treatment, 0) + size
            blocks = self._earnings.setdefault(group.treatment,
                                               {name: 0.0 for name, _, _ in EARNINGS_BLOCKS})
            for rec in group.periods:
                cell = self._cell(group.treatment, 1, rec.period_index)
                cell[0] += 1
                cell[1] += rec.success
                cell[2] += size
                cell[3] += rec.n_contribute
                total = sum(rec.payoffs)
                cell[4] += total
                for name, lo, hi in EARNINGS_BLOCKS:
                    if lo <= rec.period_index <= hi:
                        blocks[name] += total
        for group in record.stage2_groups:
            for rec in group.periods:
                for j, origin in enumerate(group.member_origins):
                    cell = self._cell(origin, 2, rec.period_index)
                    cell[0] += 1
                    cell[1] += rec.success
                    cell[2] += 1
                    cell[3] += int(rec.actions[j])
                    cell[4] += rec.payoffs[j]
                    blocks = self._earnings.setdefault(
                        origin, {name: 0.0 for name, _, _ in EARNINGS_BLOCKS})
                    for name, lo, hi in EARNINGS_BLOCKS:
                        if lo <= rec.period_index <= hi:
                            blocks[name] += rec.payoffs[j]

    def _cell(self, treatment: str, stage: int, period: int) -> list:
        return self._cells.setdefault((treatment, stage, period), [0, 0, 0, 0, 0.0])

    def merge(self, other: "SummaryAccumulator") -> None:
        self.replications += other.replications
        for key, cell in other._cells.items():
            mine = self._cell(*key)
            for i, v in enumerate(cell):
                mine[i] += v
        for treatment, blocks in other._earnings.items():
            mine = self._earnings.setdefault(treatment,
                                             {name: 0.0 for name, _, _ in EARNINGS_BLOCKS})
            for name, v in blocks.items():
                mine[name] += v
        for treatment, n in other._exposures.items():
            self._exposures[treatment] = self._exposures.get(treatment, 0) + n

    def result(self) -> RunSummary:
        rows = []
        for (treatment, stage, period), cell in sorted(self._cells.items(),
                                                       key=lambda kv: (kv[0][1], kv[0][0], kv[0][2])):
            groups, successes, agents, contribs, payoff_sum = cell
            row = SummaryRow(
                treatment=treatment,
                stage=stage,
                period=period,
                success_rate=successes / groups,
                contribution_rate=contribs / agents,
                mean_payoff=payoff_sum / agents,
                n_groups=groups,
                n_agents=agents,
            )
            # a group only succeeds when every member contributes
            if row.success_rate > row.contribution_rate + 1e-12:
                raise AssertionError(
                    f"success rate {row.success_rate} exceeds contribution rate "
                    f"{row.contribution_rate} for {treatment!r} period {period}"
                )
            rows.append(row)
        earnings = {
            treatment: {name: blocks[name] / self._exposures[treatment]
                        for name, _, _ in EARNINGS_BLOCKS}
            for treatment, blocks in sorted(self._earnings.items())
            if self._exposures.get(treatment)
        }
        return RunSummary(self.replications, rows, earnings)


def summarize(records) -> RunSummary:
    """Aggregate a collection of session records into per-period rates."""
    acc = SummaryAccumulator()
    for record in records:
        acc.add(record)
    if not acc.replications:
        raise ValueError("summarize needs at least one session record")
    return acc.result()


def calibrate_beliefs(targets, game: GameParams) -> InitialBeliefParams:
    """Fit the initial-curve population to two period-1 contribution targets.

    An agent contributes at stake S iff exp(-lam*S) clears 1/multiplier, i.e.
    lam <= ln(multiplier)/S.  With lam log-normal the two targets give two
    linear equations in (location, spread); targets implying a nonpositive
    spread are rejected.
    """
    targets = [t if isinstance(t, CalibrationTarget) else CalibrationTarget(*t)
               for t in targets]
    if len(targets) != 2:
        raise ValueError(f"exactly two calibration targets required, got {len(targets)}")
    if targets[0].stake == targets[1].stake:
        raise ValueError("calibration targets need two distinct stakes")
    for t in targets:
        if t.stake > game.grid_max:
            raise ValueError(f"target stake {t.stake} is off the grid 0..{game.grid_max}")
    normal = NormalDist()
    cutoffs = [math.log(math.log(game.multiplier) / t.stake) for t in targets]
    quantiles = [normal.inv_cdf(t.probability) for t in targets]
    if quantiles[0] == quantiles[1]:
        raise ValueError("calibration targets imply an undefined spread")
    spread = (cutoffs[0] - cutoffs[1]) / (quantiles[0] - quantiles[1])
    if spread <= 0:
        raise ValueError(
            f"calibration targets imply a nonpositive spread {spread}; willingness "
            "must fall as the stake rises"
        )
    location = cutoffs[0] - quantiles[0] * spread
    return InitialBeliefParams(location, spread)


def _u_statistic(a, b) -> float:
    # pair-count form: ties credit half a win
    u = 0.0
    for x in a:
        for y in b:
            if x > y:
                u += 1.0
            elif x == y:
                u += 0.5
    return u


def mann_whitney_u(sample_a, sample_b) -> tuple[float, float]:
    """Two-sided Mann-Whitney U test; returns (U_a, p_value).

    Small samples (combined size <= 12) get an exact permutation p-value by
    enumerating every split of the pooled observations; larger samples use the
    normal approximation with the usual tie correction.
    """
    a = [float(x) for x in sample_a]
    b = [float(x) for x in sample_b]
    if not a or not b:
        raise ValueError("both samples must be nonempty")
    n_a, n_b = len(a), len(b)
    n = n_a + n_b
    mu = n_a * n_b / 2.0
    u_obs = _u_statistic(a, b)

    if n <= EXACT_MWU_LIMIT:
        pooled = a + b
        extreme = 0
        total = 0
        observed = abs(u_obs - mu)
        for picks in itertools.combinations(range(n), n_a):
            chosen = set(picks)
            aa = [pooled[i] for i in picks]
            bb = [pooled[i] for i in range(n) if i not in chosen]
            if abs(_u_statistic(aa, bb) - mu) >= observed - 1e-9:
                extreme += 1
            total += 1
        return u_obs, extreme / total

    _, tie_counts = np.unique(np.array(a + b), return_counts=True)
    tie_term = float(np.sum(tie_counts.astype(np.float64) ** 3 - tie_counts))
    variance = (n_a * n_b / 12.0) * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        return u_obs, 1.0  # all observations identical
    z = (u_obs - mu) / math.sqrt(variance)
    return u_obs, min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def ols(y, x_columns) -> tuple[np.ndarray, float]:
    """Least-squares fit of y on the given design matrix; returns (coefs, R^2).

    The caller supplies the intercept column.  A rank-deficient design is
    rejected with the offending column named.
    """
    x = np.asarray(x_columns, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"design matrix must be 2-D, got shape {x.shape}")
    if yv.ndim != 1 or yv.shape[0] != x.shape[0]:
        raise ValueError(f"y has shape {yv.shape}, design has {x.shape[0]} rows")
    if x.shape[0] < x.shape[1]:
        raise ValueError(f"need at least as many rows as columns, got {x.shape}")
    if np.linalg.matrix_rank(x) < x.shape[1]:
        for j in range(x.shape[1]):
            if np.linalg.matrix_rank(x[:, : j + 1]) < j + 1:
                raise ValueError(f"design column {j} is collinear with earlier columns")
    coefs, *_ = np.linalg.lstsq(x, yv, rcond=None)
    residuals = yv - x @ coefs
    total = float(np.sum((yv - yv.mean()) ** 2))
    r_squared = 0.0 if total == 0.0 else 1.0 - float(np.sum(residuals ** 2)) / total
    return coefs, r_squared


@dataclass(slots=True)
class ElicitationReport:
    """Sign checks for the two belief-data regressions on simulated records.

    The choice regression explains the contribute dummy with the elicited
    belief and the stake; the update regression explains the current belief
    with its lag, the lagged group outcome, and the stake change.  Zero
    variance in an outcome marks the regression degenerate; zero-variance
    regressors are dropped and listed.
    """

    choice_rows: int = 0
    choice_degenerate: bool = False
    belief_coef: float | None = None
    stake_coef: float | None = None
    choice_r2: float | None = None
    update_rows: int = 0
    update_degenerate: bool = False
    lagged_belief_coef: float | None = None
    lagged_success_coef: float | None = None
    stake_change_coef: float | None = None
    update_r2: float | None = None
    dropped_columns: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "choice_rows": self.choice_rows,
            "choice_degenerate": self.choice_degenerate,
            "belief_coef": self.belief_coef,
            "stake_coef": self.stake_coef,
            "choice_r2": self.choice_r2,
            "update_rows": self.update_rows,
            "update_degenerate": self.update_degenerate,
            "lagged_belief_coef": self.lagged_belief_coef,
            "lagged_success_coef": self.lagged_success_coef,
            "stake_change_coef": self.stake_change_coef,
            "update_r2": self.update_r2,
            "dropped_columns": list(self.dropped_columns),
        }


def _agent_panel(records):
    """(replication, agent, period) -> (stake, belief, action, success), sorted."""
    panel = []
    for session in records:
        for group in list(session.stage1_groups) + list(session.stage2_groups):
            for rec in group.periods:
                for j, agent_id in enumerate(group.member_ids):
                    panel.append((session.replication, agent_id, rec.period_index,
                                  rec.stake, rec.elicited_beliefs[j],
                                  int(rec.actions[j]), int(rec.success)))
    panel.sort(key=lambda row: (row[0], row[1], row[2]))
    return panel


def _fit_with_drops(y, columns, names):
    """OLS dropping zero-variance regressors; returns (coef by name, r2, dropped)."""
    keep, dropped = [], []
    for name, col in zip(names, columns):
        if np.ptp(col) == 0.0:
            dropped.append(name)
        else:
            keep.append((name, col))
    design = np.column_stack([np.ones(len(y))] + [col for _, col in keep])
    coefs, r2 = ols(y, design)
    by_name = {name: float(c) for (name, _), c in zip(keep, coefs[1:])}
    return by_name, r2, dropped


def elicitation_regressions(records) -> ElicitationReport:
    """Fit the choice and belief-update regressions on simulated records."""
    panel = _agent_panel(records)
    if not panel:
        raise ValueError("no records to regress on")
    periods = {row[2] for row in panel}
    if len(periods) < 2:
        raise ValueError("elicitation regressions need at least two periods")

    report = ElicitationReport()
    stake = np.array([row[3] for row in panel], dtype=np.float64)
    belief = np.array([row[4] for row in panel], dtype=np.float64)
    action = np.array([row[5] for row in panel], dtype=np.float64)
    report.choice_rows = len(panel)
    if np.ptp(action) == 0.0:
        report.choice_degenerate = True
    else:
        coefs, r2, dropped = _fit_with_drops(action, [belief, stake], ["belief", "stake"])
        report.belief_coef = coefs.get("belief")
        report.stake_coef = coefs.get("stake")
        report.choice_r2 = r2
        report.dropped_columns.extend(f"choice:{name}" for name in dropped)

    lagged = []
    for prev, cur in zip(panel, panel[1:]):
        if prev[0] == cur[0] and prev[1] == cur[1] and cur[2] == prev[2] + 1:
            # y, lagged belief, lagged success, stake change
            lagged.append((cur[4], prev[4], prev[6], cur[3] - prev[3]))
    report.update_rows = len(lagged)
    if lagged:
        arr = np.array(lagged, dtype=np.float64)
        if np.ptp(arr[:, 0]) == 0.0:
            report.update_degenerate = True
        else:
            coefs, r2, dropped = _fit_with_drops(
                arr[:, 0], [arr[:, 1], arr[:, 2], arr[:, 3]],
                ["lagged_belief", "lagged_success", "stake_change"])
            report.lagged_belief_coef = coefs.get("lagged_belief")
            report.lagged_success_coef = coefs.get("lagged_success")
            report.stake_change_coef = coefs.get("stake_change")
            report.update_r2 = r2
            report.dropped_columns.extend(f"update:{name}" for name in dropped)
    else:
        report.update_degenerate = True
    return report
