"""Acceptance gate: headline-rate reproduction plus exact theory suites.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS/FAIL line per
criterion.  The shared fixture performs the full benchmark run (556 session
replications = 10,008 groups per main treatment) once for the rate criteria.
"""

from __future__ import annotations

import itertools
import math
import time

import numpy as np
import pytest

from gradualism import (
    AgentState,
    BeliefCurve,
    GameParams,
    UpdateParams,
    coupled_compare,
    elicitation_regressions,
    mann_whitney_u,
    mixed_ne_probability,
    ols,
    play_period,
    pure_equilibria,
    run_session,
    synthesize_guaranteed_path,
)
from gradualism import presets
from gradualism.cli import main, run_replications
from gradualism.game import Action
from gradualism.streams import stream

GAME = presets.DEFAULT_GAME
DEFAULTS = presets.DEFAULT_UPDATE_PARAMS
BELIEFS = presets.default_belief_params(GAME)
GRID = np.arange(GAME.grid_max + 1, dtype=np.float64)
N_DRAWS = 10_000


def report(number: int, name: str, ok: bool, detail: str) -> None:
    print(f"\ncriterion {number:02d} [{name}]: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {number} ({name}) failed: {detail}"


@pytest.fixture(scope="module")
def benchmark():
    """Full-scale benchmark summary plus its wall-clock runtime in seconds."""
    cfg = presets.benchmark_session_config()
    start = time.perf_counter()
    summary = run_replications(cfg, presets.ACCEPTANCE_REPLICATIONS)
    elapsed = time.perf_counter() - start
    return summary, elapsed


def sample_rate_groups(rng: np.random.Generator, n: int) -> np.ndarray:
    """n groups of four decay rates from the calibrated initial population."""
    z = rng.standard_normal((n, 4))
    return np.exp(BELIEFS.location + BELIEFS.spread * z)


def group_curves(lams) -> list[BeliefCurve]:
    return [BeliefCurve(np.exp(-lam * GRID)) for lam in lams]


def random_monotone_curve(rng: np.random.Generator) -> BeliefCurve:
    vals = np.sort(rng.uniform(0.0, 1.0, size=GAME.grid_max))[::-1]
    return BeliefCurve(np.concatenate(([1.0], vals)))


def engine_success(curves, stake: int) -> bool:
    agents = [AgentState(i, c, DEFAULTS, "probe") for i, c in enumerate(curves)]
    return play_period(agents, stake, GAME).success


# ---------------------------------------------------------------------------
# criterion 1: period-7 success rates and strict treatment ranking


def test_criterion_01_high_stake_ranking(benchmark):
    summary, elapsed = benchmark
    problems = []
    rates = {}
    for name in presets.MAIN_TREATMENTS:
        ref, se = presets.REFERENCE_PERIOD7_SUCCESS[name]
        rates[name] = summary.row(name, 7).success_rate
        if abs(rates[name] - ref) > 2.0 * se + 1e-12:
            problems.append(f"{name} {rates[name]:.4f} vs {ref}+-{2 * se:.3f}")
    grad, semi, big = (rates[presets.GRADUALISM], rates[presets.SEMI_GRADUALISM],
                       rates[presets.BIG_BANG])
    if not (grad > semi and grad > big and semi >= big):
        problems.append(f"ordering {grad:.4f} / {semi:.4f} / {big:.4f}")
    if elapsed >= 60.0:
        problems.append(f"runtime {elapsed:.1f}s over budget")
    groups = summary.row(presets.BIG_BANG, 7).n_groups
    report(1, "high-stake ranking", not problems,
           f"period-7 success big={big:.4f} semi={semi:.4f} grad={grad:.4f} "
           f"over {groups} groups each in {elapsed:.1f}s"
           + (f"; problems: {problems}" if problems else ""))


# ---------------------------------------------------------------------------
# criterion 2: final stage-1 period anchor for the gradual ramp


def test_criterion_02_final_period_anchor(benchmark):
    summary, _ = benchmark
    sim = summary.row(presets.GRADUALISM, presets.STAGE1_PERIODS).success_rate
    ref, se = presets.REFERENCE_GRADUALISM_PERIOD12_SUCCESS
    ok = abs(sim - ref) <= 2.0 * se + 1e-12
    report(2, "final-period anchor", ok,
           f"gradualism period-12 success {sim:.4f} vs {ref} +- {2 * se:.4f}")


# ---------------------------------------------------------------------------
# criterion 3: period-1 contribution levels from the calibration


def test_criterion_03_period1_contribution(benchmark):
    summary, _ = benchmark
    problems = []
    shown = []
    for name in presets.LOW_STAKE_TREATMENTS:
        rate = summary.row(name, 1).contribution_rate
        shown.append(f"{name}={rate:.4f}")
        if rate < presets.PERIOD1_LOW_STAKE_MIN_CONTRIBUTION:
            problems.append(f"{name} {rate:.4f} < 0.90")
    for name in presets.HIGH_STAKE_TREATMENTS:
        rate = summary.row(name, 1).contribution_rate
        shown.append(f"{name}={rate:.4f}")
        if abs(rate - presets.PERIOD1_HIGH_STAKE_CONTRIBUTION) > \
                presets.PERIOD1_HIGH_STAKE_TOLERANCE:
            problems.append(f"{name} {rate:.4f} outside 0.60+-0.02")
    report(3, "period-1 contribution", not problems,
           ", ".join(shown) + (f"; problems: {problems}" if problems else ""))


# ---------------------------------------------------------------------------
# criterion 4: behavioral property suites


def _static_down_set_violations(rng) -> int:
    lams = sample_rate_groups(rng, N_DRAWS)
    group_min = np.exp(-lams.max(axis=1)[:, None] * GRID[None, 1:-1])
    ok = group_min >= GAME.decision_threshold  # success per stake 1..19
    violations = int(np.any(np.diff(ok.astype(np.int8), axis=1) > 0, axis=1).sum())
    # wire a subsample through the actual engine
    for i in range(50):
        curves = group_curves(lams[i])
        for s in range(1, GAME.grid_max):
            assert engine_success(curves, s) == bool(ok[i, s - 1])
    return violations


def _repeat_stake_persistence_violations(rng) -> int:
    violations = 0
    for k in range(N_DRAWS):
        if k % 2:
            curves = group_curves(sample_rate_groups(rng, 1)[0])
        else:
            curves = [random_monotone_curve(rng) for _ in range(4)]
        agents = [AgentState(i, c, DEFAULTS, "probe") for i, c in enumerate(curves)]
        stake = int(rng.integers(1, GAME.grid_max))
        first = play_period(agents, stake, GAME).success
        second = play_period(agents, stake, GAME).success
        if first != second:
            violations += 1
    return violations


def _conditioned_post_success(rng, n: int, first_stake=None):
    """n groups conditioned on a feasible first success; returns group-minimum
    post-update belief per stake 1..grid_max-1 and the first stakes used."""
    mins, stakes = [], []
    while len(mins) < n:
        lams = sample_rate_groups(rng, 4 * n)
        lam_max = lams.max(axis=1)
        if first_stake is None:
            feasible = np.exp(-lam_max) >= GAME.decision_threshold  # stake 1 works
        else:
            feasible = np.exp(-lam_max * first_stake) >= GAME.decision_threshold
        lam_max = lam_max[feasible]
        for lm in lam_max:
            if len(mins) >= n:
                break
            if first_stake is None:
                top = int(math.log(2.0) / lm)  # largest certain stake
                s_t = int(rng.integers(1, min(top, GAME.grid_max - 1) + 1))
            else:
                s_t = first_stake
            gaps = GRID[1:-1] - s_t
            kernel = np.where(gaps > 0, np.exp(-DEFAULTS.kernel_scale
                                               * np.maximum(gaps, 0.0)), 1.0)
            mins.append(np.maximum(np.exp(-lm * GRID[1:-1]), kernel))
            stakes.append(s_t)
    return np.array(mins), np.array(stakes)


def _post_success_down_set_violations(rng) -> int:
    mins, stakes = _conditioned_post_success(rng, N_DRAWS)
    ok = mins >= GAME.decision_threshold
    violations = int(np.any(np.diff(ok.astype(np.int8), axis=1) > 0, axis=1).sum())
    # engine spot-check: replay the success then probe each follow-up stake
    lams = sample_rate_groups(rng, 200)
    checked = 0
    for lam in lams:
        if checked >= 25:
            break
        curves = group_curves(lam)
        if not engine_success(curves, 1):
            continue
        checked += 1
        top = min(int(math.log(2.0) / lam.max()), GAME.grid_max - 1)
        s_t = int(rng.integers(1, top + 1))
        base = [AgentState(i, c, DEFAULTS, "probe") for i, c in enumerate(curves)]
        assert play_period(base, s_t, GAME).success
        after = [a.curve for a in base]
        succ = [engine_success(after, s) for s in range(1, GAME.grid_max)]
        as_int = np.array(succ, dtype=np.int8)
        assert not np.any(np.diff(as_int) > 0)
    return violations


def _conditional_success_monotonicity(rng):
    """Conditional success at stake 14 as the previous stake rises."""
    levels = (2, 6, 10, 13)
    per_level = 2_500
    estimates = []
    for s_t in levels:
        mins, _ = _conditioned_post_success(rng, per_level, first_stake=s_t)
        hit = mins[:, 13] >= GAME.decision_threshold  # stake 14 is column 13
        p = float(np.mean(hit))
        estimates.append((p, math.sqrt(max(p * (1 - p), 1e-12) / per_level)))
    problems = []
    for (p_lo, se_lo), (p_hi, se_hi), s_lo, s_hi in zip(
            estimates, estimates[1:], levels, levels[1:]):
        if p_hi < p_lo - 2.0 * math.hypot(se_lo, se_hi):
            problems.append(f"p({s_hi})={p_hi:.3f} < p({s_lo})={p_lo:.3f}")
    return [round(p, 4) for p, _ in estimates], problems


def _gradualism_chain_violations(rng) -> int:
    schedules = presets.benchmark_schedules()  # most abrupt design first
    violations = 0
    for k in range(N_DRAWS):
        if k % 2:
            curves = group_curves(sample_rate_groups(rng, 1)[0])
        else:
            curves = [random_monotone_curve(rng) for _ in range(4)]
        form = ("exponential", "linear", "step")[int(rng.integers(3))]
        params = UpdateParams(kernel_form=form,
                              kernel_scale=float(rng.uniform(0.0, 5.0)),
                              failure_cap=float(rng.uniform(0.0, 0.49)))
        if not coupled_compare(curves, schedules, GAME, params).chain_holds:
            violations += 1
    return violations


def test_criterion_04_behavioral_properties():
    v_static = _static_down_set_violations(stream(2025, 0, 1))
    v_repeat = _repeat_stake_persistence_violations(stream(2025, 0, 2))
    v_post = _post_success_down_set_violations(stream(2025, 0, 3))
    p_cond, problems_cond = _conditional_success_monotonicity(stream(2025, 0, 4))
    v_chain = _gradualism_chain_violations(stream(2025, 0, 5))
    ok = (v_static == 0 and v_repeat == 0 and v_post == 0
          and not problems_cond and v_chain == 0)
    report(4, "behavioral properties", ok,
           f"violations over {N_DRAWS} draws each: down-set={v_static}, "
           f"persistence={v_repeat}, next-stake down-set={v_post}, "
           f"dominance chain={v_chain}; "
           f"conditional success by previous stake {p_cond}"
           + (f"; problems: {problems_cond}" if problems_cond else ""))


# ---------------------------------------------------------------------------
# criterion 5: equilibrium facts


def test_criterion_05_equilibrium_facts():
    problems = []
    value = mixed_ne_probability(4, 2.0)
    if abs(value - 2.0 ** (-1.0 / 3.0)) > 1e-9:
        problems.append(f"mixed probability {value!r}")
    c, n = Action.CONTRIBUTE, Action.NOT_CONTRIBUTE
    for size in range(2, 7):
        game = GameParams(group_size=size)
        for stake in (2, 14):
            eqs = sorted(pure_equilibria(stake, game))
            if eqs != sorted([(c,) * size, (n,) * size]):
                problems.append(f"size {size} stake {stake}: {eqs}")
    report(5, "equilibrium facts", not problems,
           f"mixed contribution probability {value:.9f}; pure equilibria are "
           "all-in and all-out for group sizes 2..6"
           + (f"; problems: {problems}" if problems else ""))


# ---------------------------------------------------------------------------
# criterion 6: stage-2 carry-over direction


def test_criterion_06_stage2_direction(benchmark):
    summary, _ = benchmark
    gaps = []
    for period in (presets.STAGE1_PERIODS + 1, presets.STAGE1_PERIODS + 2):
        grad = summary.row(presets.GRADUALISM, period)
        pooled = 0.0
        agents = 0
        for name in presets.ALL_TREATMENTS:
            if name == presets.GRADUALISM:
                continue
            row = summary.row(name, period)
            pooled += row.contribution_rate * row.n_agents
            agents += row.n_agents
        gaps.append(grad.contribution_rate - pooled / agents)
    ok = gaps[0] >= presets.STAGE2_MIN_ENTRY_GAP and gaps[1] < gaps[0]
    report(6, "stage-2 direction", ok,
           f"gradualism-origin lead {gaps[0]:.4f} at entry (needs >= 0.05), "
           f"{gaps[1]:.4f} one period later (must shrink)")


# ---------------------------------------------------------------------------
# criterion 7: regression signs on simulated elicitation data


def test_criterion_07_regression_signs():
    cfg = presets.benchmark_session_config()
    records = [run_session(cfg, rep) for rep in range(30)]
    rep = elicitation_regressions(records)
    problems = []
    if rep.choice_degenerate or rep.belief_coef is None or rep.belief_coef <= 0:
        problems.append(f"belief coefficient {rep.belief_coef}")
    if rep.update_degenerate or rep.lagged_belief_coef is None \
            or rep.lagged_belief_coef <= 0:
        problems.append(f"lagged belief coefficient {rep.lagged_belief_coef}")
    if rep.lagged_success_coef is None or rep.lagged_success_coef <= 0:
        problems.append(f"lagged success coefficient {rep.lagged_success_coef}")
    report(7, "regression signs", not problems,
           f"belief {rep.belief_coef:+.4f}, lagged belief "
           f"{rep.lagged_belief_coef:+.4f}, lagged success "
           f"{rep.lagged_success_coef:+.4f} on {rep.choice_rows} choice rows"
           + (f"; problems: {problems}" if problems else ""))


# ---------------------------------------------------------------------------
# criterion 8: synthesizer worked example


def test_criterion_08_synthesizer():
    game = GameParams(endowment=25)
    curves = [BeliefCurve(1.0 - 0.04 * GRID) for _ in range(4)]
    result = synthesize_guaranteed_path(curves, 20, 12, game, DEFAULTS)
    ok = (result.status == "ok"
          and list(result.schedule.stakes) == [12, 15, 18, 20]
          and result.verified)
    report(8, "synthesizer", ok,
           f"status={result.status} stakes="
           f"{list(result.schedule.stakes) if result.schedule else None} "
           f"verified={result.verified}")


# ---------------------------------------------------------------------------
# criterion 9: statistics oracles


def test_criterion_09_statistics_oracles():
    problems = []
    u, p = mann_whitney_u([1, 2, 3], [4, 5, 6])
    if u != 0.0 or abs(p - 0.1) > 1e-12:
        problems.append(f"separated triples gave U={u} p={p}")

    def rank_u(a, b):
        pooled = sorted(a + b)
        rank = {}
        i = 0
        while i < len(pooled):
            j = i
            while j < len(pooled) and pooled[j] == pooled[i]:
                j += 1
            rank[pooled[i]] = (i + 1 + j) / 2.0
            i = j
        return sum(rank[x] for x in a) - len(a) * (len(a) + 1) / 2.0

    rng = np.random.Generator(np.random.Philox(key=2025))
    checked = 0
    for n_a in range(1, 10):
        for n_b in range(1, 11 - n_a):
            for _ in range(3):
                a = rng.integers(0, 4, size=n_a).tolist()
                b = rng.integers(0, 4, size=n_b).tolist()
                u_got, p_got = mann_whitney_u(a, b)
                mu = n_a * n_b / 2.0
                pooled = a + b
                extreme = total = 0
                for picks in itertools.combinations(range(n_a + n_b), n_a):
                    aa = [pooled[i] for i in picks]
                    bb = [pooled[i] for i in range(n_a + n_b)
                          if i not in set(picks)]
                    if abs(rank_u(aa, bb) - mu) >= abs(rank_u(a, b) - mu) - 1e-9:
                        extreme += 1
                    total += 1
                if abs(u_got - rank_u(a, b)) > 1e-12 \
                        or abs(p_got - extreme / total) > 1e-12:
                    problems.append(f"mismatch on {a} vs {b}")
                checked += 1

    ols_rng = np.random.Generator(np.random.Philox(key=2026))
    for _ in range(20):
        rows = int(ols_rng.integers(10, 40))
        x = np.column_stack([np.ones(rows), ols_rng.normal(size=(rows, 3))])
        y = ols_rng.normal(size=rows)
        coefs, _ = ols(y, x)
        oracle = np.linalg.solve(x.T @ x, x.T @ y)
        if not np.allclose(coefs, oracle, atol=1e-9):
            problems.append("least-squares mismatch")

    report(9, "statistics oracles", not problems,
           f"rank-test exact p matches enumeration on {checked} small samples; "
           "least squares matches the normal equations to 1e-9"
           + (f"; problems: {problems}" if problems else ""))


# ---------------------------------------------------------------------------
# criterion 10: byte-identical repeated runs


def test_criterion_10_determinism(tmp_path, capsys):
    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        main(["replicate-paper", "--seed", "5", "--replications", "5",
              "--out", str(out)])
        outs.append(out)
    capsys.readouterr()
    files = ("summary.csv", "success_rates.csv", "contribution_rates.csv",
             "mean_payoffs.csv")
    same = {f: (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
            for f in files}
    report(10, "determinism", all(same.values()),
           "byte-identical CSV outputs across repeated runs: "
           + ", ".join(f"{f}={'yes' if ok else 'NO'}" for f, ok in same.items()))
