"""Command-line interface.

Subcommands: simulate (run sessions, dump records), calibrate (fit initial
beliefs to period-1 targets), compare (coupled schedule dominance), synthesize
(guaranteed-success stake path), analyze (re-summarize stored records), and
replicate-paper (benchmark preset run plus the headline acceptance checks).

Exit codes: 0 success, 1 usage error, 2 configuration/IO error, 3 acceptance
failure (replicate-paper only).  Output files are written via a temp file and
an atomic rename, so readers never observe partial files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import presets, streams
from .beliefs import BeliefCurve, InitialBeliefParams, UpdateParams, sample_initial
from .engine import (
    FLAT_CSV_COLUMNS,
    STAGE2_TREATMENT,
    SessionConfig,
    SessionRecord,
    TreatmentSpec,
    flat_rows,
    run_session,
)
from .game import GameParams
from .mechanisms import coupled_compare, synthesize_guaranteed_path
from .schedules import StakeSchedule, make_schedule
from .stats import (
    CalibrationTarget,
    RunSummary,
    SummaryAccumulator,
    calibrate_beliefs,
)

SUMMARY_CSV_COLUMNS = ("treatment", "period", "success_rate", "contribution_rate",
                       "mean_payoff")

# default curve family for `synthesize` demos: 1 - slope * stake, one per member
DEMO_CURVE_SLOPE = 0.04


class ConfigError(ValueError):
    """Malformed configuration or unusable output destination (exit code 2)."""


# ---------------------------------------------------------------------------
# experiment configuration


@dataclass(frozen=True)
class ExperimentConfig:
    """A session design plus how many replications to run of it."""

    game: GameParams
    treatments: tuple[TreatmentSpec, ...]
    stage2_periods: int
    stage2_stake: int
    exchange_rate: float
    seed: int
    replications: int
    update_params: UpdateParams
    initial_beliefs: InitialBeliefParams
    calibration_targets: tuple[CalibrationTarget, ...] | None
    synthesize_curves: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError(f"replications must be an int >= 1, got {self.replications!r}")

    def build_session_config(self) -> SessionConfig:
        return SessionConfig(
            game=self.game,
            treatments=self.treatments,
            stage2_periods=self.stage2_periods,
            stage2_stake=self.stage2_stake,
            exchange_rate=self.exchange_rate,
            seed=self.seed,
            initial_beliefs=self.initial_beliefs,
            update_params=self.update_params,
        )

    def to_dict(self) -> dict:
        data = {
            "game": {
                "group_size": self.game.group_size,
                "multiplier": self.game.multiplier,
                "endowment": self.game.endowment,
                "grid_max": self.game.grid_max,
            },
            "treatments": [
                {
                    "name": t.name,
                    "group_count": t.group_count,
                    "show_up_fee": t.show_up_fee,
                    "schedule": t.schedule.to_dict(),
                }
                for t in self.treatments
            ],
            "stage2_periods": self.stage2_periods,
            "stage2_stake": self.stage2_stake,
            "exchange_rate": self.exchange_rate,
            "seed": self.seed,
            "replications": self.replications,
            "update": {
                "kernel_form": self.update_params.kernel_form.value,
                "kernel_scale": self.update_params.kernel_scale,
                "failure_cap": self.update_params.failure_cap,
            },
        }
        if self.calibration_targets is not None:
            data["calibration_targets"] = [[t.stake, t.probability]
                                           for t in self.calibration_targets]
        else:
            data["initial_beliefs"] = {
                "location": self.initial_beliefs.location,
                "spread": self.initial_beliefs.spread,
            }
        if self.synthesize_curves is not None:
            data["synthesize_curves"] = [list(c) for c in self.synthesize_curves]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {"game", "treatments", "stage2_periods", "stage2_stake", "exchange_rate",
                 "seed", "replications", "update", "initial_beliefs",
                 "calibration_targets", "synthesize_curves"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            game = GameParams(**data.get("game", {}))
            update = UpdateParams(**data.get("update", {}))
            treatments = tuple(_treatment_from_dict(t, game.endowment)
                               for t in data["treatments"]) if "treatments" in data else \
                presets.benchmark_session_config(game=game).treatments

            targets = None
            if "initial_beliefs" in data and "calibration_targets" in data:
                raise ConfigError(
                    "give either initial_beliefs or calibration_targets, not both")
            if "initial_beliefs" in data:
                beliefs = InitialBeliefParams(**data["initial_beliefs"])
            else:
                raw = data.get("calibration_targets",
                               [[t.stake, t.probability]
                                for t in presets.DEFAULT_CALIBRATION_TARGETS])
                targets = tuple(CalibrationTarget(int(s), float(p)) for s, p in raw)
                beliefs = calibrate_beliefs(targets, game)

            synth = data.get("synthesize_curves")
            if synth is not None:
                synth = tuple(tuple(float(v) for v in curve) for curve in synth)

            return cls(
                game=game,
                treatments=treatments,
                stage2_periods=data.get("stage2_periods", presets.STAGE2_PERIODS),
                stage2_stake=data.get("stage2_stake", presets.STAGE2_STAKE),
                exchange_rate=data.get("exchange_rate", presets.EXCHANGE_RATE),
                seed=data.get("seed", presets.DEFAULT_SEED),
                replications=data.get("replications", presets.DEFAULT_REPLICATIONS),
                update_params=update,
                initial_beliefs=beliefs,
                calibration_targets=targets,
                synthesize_curves=synth,
            )
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc


def _treatment_from_dict(data: dict, endowment: int) -> TreatmentSpec:
    known = {"name", "group_count", "show_up_fee", "schedule", "kind", "low", "high",
             "step", "n1", "n", "stakes"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown treatment keys: {sorted(unknown)}")
    if "schedule" in data:
        schedule = StakeSchedule.from_dict(data["schedule"])
    elif "kind" in data:
        schedule = make_schedule(
            data["kind"],
            low=data.get("low"), high=data.get("high"), step=data.get("step"),
            n1=data.get("n1"), n=data.get("n"), stakes=data.get("stakes"),
            endowment=endowment,
        )
    else:
        raise ConfigError(f"treatment {data.get('name')!r} needs a schedule or a kind")
    return TreatmentSpec(
        name=data["name"],
        schedule=schedule,
        group_count=data.get("group_count", 1),
        show_up_fee=data.get("show_up_fee", 0),
    )


def default_config() -> ExperimentConfig:
    return ExperimentConfig.from_dict({})


def load_config(args) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    cfg = ExperimentConfig.from_dict(data)
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if getattr(args, "replications", None) is not None:
        cfg = dataclasses.replace(cfg, replications=args.replications)
    return cfg


# ---------------------------------------------------------------------------
# atomic output helpers


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".6f")
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    _write_text(path, "\n".join(lines) + "\n")


def write_json(path: Path, obj) -> None:
    _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# shared run helpers


def _accumulate_range(session_cfg: SessionConfig, start: int, stop: int) -> SummaryAccumulator:
    acc = SummaryAccumulator()
    for rep in range(start, stop):
        acc.add(run_session(session_cfg, rep))
    return acc


def run_replications(session_cfg: SessionConfig, replications: int,
                     workers: int = 1) -> RunSummary:
    """Run sessions 0..replications-1 and aggregate; worker split cannot change results."""
    if workers <= 1 or replications == 1:
        return _accumulate_range(session_cfg, 0, replications).result()
    chunk = -(-replications // workers)
    bounds = [(k, min(k + chunk, replications)) for k in range(0, replications, chunk)]
    acc = SummaryAccumulator()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_accumulate_range, session_cfg, a, b) for a, b in bounds]
        for future in futures:
            acc.merge(future.result())
    return acc.result()


def _summary_csv_rows(summary: RunSummary, treatment: str | None = None):
    rows = []
    for row in summary.rows:
        if treatment is not None and row.treatment != treatment:
            continue
        rows.append((row.treatment, row.period, row.success_rate,
                     row.contribution_rate, row.mean_payoff))
    return rows


def _check_treatment_filter(name: str | None, cfg: ExperimentConfig) -> None:
    if name is None:
        return
    valid = {t.name for t in cfg.treatments} | {STAGE2_TREATMENT}
    if name not in valid:
        raise ConfigError(f"unknown treatment {name!r}; expected one of {sorted(valid)}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    cfg = load_config(args)
    _check_treatment_filter(args.treatment, cfg)
    session_cfg = cfg.build_session_config()
    out = Path(args.out)
    records = [run_session(session_cfg, rep) for rep in range(cfg.replications)]
    if args.format == "json":
        payload = []
        for rec in records:
            d = rec.to_dict()
            if args.treatment is not None:
                d["stage1_groups"] = [g for g in d["stage1_groups"]
                                      if g["treatment"] == args.treatment]
                d["stage2_groups"] = [g for g in d["stage2_groups"]
                                      if g["treatment"] == args.treatment]
            payload.append(d)
        path = out / "records.json"
        write_json(path, payload)
    else:
        rows = [row for rec in records for row in flat_rows(rec)]
        if args.treatment is not None:
            rows = [row for row in rows if row[1] == args.treatment]
        path = out / "periods.csv"
        write_csv(path, FLAT_CSV_COLUMNS, rows)
    print(f"simulated {cfg.replications} session(s) with seed {cfg.seed} -> {path}")
    return 0


def cmd_calibrate(args) -> int:
    cfg = load_config(args)
    targets = cfg.calibration_targets or presets.DEFAULT_CALIBRATION_TARGETS
    params = calibrate_beliefs(targets, cfg.game)
    out = Path(args.out) / "belief_params.json"
    write_json(out, {
        "location": params.location,
        "spread": params.spread,
        "targets": [[t.stake, t.probability] for t in targets],
        "multiplier": cfg.game.multiplier,
    })
    print(f"calibrated initial beliefs: location={params.location:.6f} "
          f"spread={params.spread:.6f} -> {out}")
    return 0


def cmd_compare(args) -> int:
    cfg = load_config(args)
    game = cfg.game
    schedules: dict[str, StakeSchedule] = {}
    for spec in cfg.treatments:
        if spec.schedule not in schedules.values():
            schedules[spec.name] = spec.schedule
    if len(schedules) < 2:
        raise ConfigError("compare needs at least two distinct schedules in the config")
    counts = None
    violations = 0
    names = list(schedules)
    for rep in range(cfg.replications):
        curves = [sample_initial(cfg.initial_beliefs, game,
                                 streams.stream(cfg.seed, rep, i + 1))
                  for i in range(game.group_size)]
        report = coupled_compare(curves, schedules, game, cfg.update_params)
        if counts is None:
            counts = {name: np.zeros(report.periods, dtype=np.int64) for name in names}
            high_periods = report.high_periods
        for name in names:
            counts[name] += np.array(report.success[name], dtype=np.int64)
        if not report.chain_holds:
            violations += 1
    payload = {
        "replications": cfg.replications,
        "seed": cfg.seed,
        "labels": names,
        "high_periods": high_periods,
        "chain_violations": violations,
        "chain_holds_always": violations == 0,
        "success_rates": {name: [c / cfg.replications for c in counts[name].tolist()]
                          for name in names},
    }
    out = Path(args.out) / "compare_report.json"
    write_json(out, payload)
    print(f"compared {names} over {cfg.replications} coupled draws: "
          f"{violations} chain violation(s) -> {out}")
    return 0


def cmd_synthesize(args) -> int:
    cfg = load_config(args)
    game = cfg.game
    target = args.target if args.target is not None else min(game.grid_max,
                                                             game.endowment - 1)
    if cfg.synthesize_curves is not None:
        curves = [BeliefCurve(np.asarray(c, dtype=np.float64))
                  for c in cfg.synthesize_curves]
    else:
        grid = np.arange(game.grid_max + 1, dtype=np.float64)
        curves = [BeliefCurve(np.maximum(0.0, 1.0 - DEMO_CURVE_SLOPE * grid))
                  for _ in range(game.group_size)]
    result = synthesize_guaranteed_path(curves, target, args.max_periods, game,
                                        cfg.update_params)
    out = Path(args.out) / "schedule.json"
    write_json(out, result.to_dict())
    if result.status == "ok":
        print(f"synthesized certain-success path {list(result.schedule.stakes)} "
              f"(verified={result.verified}) -> {out}")
    else:
        print(f"no certain-success path: {result.status} "
              f"(prefix {list(result.prefix)}) -> {out}")
    return 0


def cmd_analyze(args) -> int:
    cfg = load_config(args)
    _check_treatment_filter(args.treatment, cfg)
    try:
        with open(args.records, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read records {args.records}: {exc}") from exc
    if not isinstance(payload, list) or not payload:
        raise ConfigError("records file must hold a nonempty JSON list of sessions")
    try:
        records = [SessionRecord.from_dict(d) for d in payload]
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError(f"malformed session record: {exc}") from exc
    acc = SummaryAccumulator()
    for rec in records:
        acc.add(rec)
    summary = acc.result()
    out = Path(args.out)
    if args.format == "json":
        path = out / "summary.json"
        data = summary.to_dict()
        if args.treatment is not None:
            data["rows"] = [r for r in data["rows"] if r["treatment"] == args.treatment]
        write_json(path, data)
    else:
        path = out / "summary.csv"
        write_csv(path, SUMMARY_CSV_COLUMNS, _summary_csv_rows(summary, args.treatment))
    print(f"summarized {len(records)} session(s) -> {path}")
    return 0


def cmd_replicate_paper(args) -> int:
    if args.config:
        raise ConfigError("replicate-paper always uses the built-in benchmark preset; "
                          "--config is not accepted")
    seed = args.seed if args.seed is not None else presets.DEFAULT_SEED
    replications = (args.replications if args.replications is not None
                    else presets.ACCEPTANCE_REPLICATIONS)
    session_cfg = presets.benchmark_session_config(seed=seed)
    summary = run_replications(session_cfg, replications, workers=args.workers)

    out = Path(args.out)
    write_csv(out / "summary.csv", SUMMARY_CSV_COLUMNS, _summary_csv_rows(summary))
    for fname, column in (("success_rates.csv", "success_rate"),
                          ("contribution_rates.csv", "contribution_rate"),
                          ("mean_payoffs.csv", "mean_payoff")):
        rows = [(r.treatment, r.period, getattr(r, column)) for r in summary.rows]
        write_csv(out / fname, ("treatment", "period", column), rows)
    write_json(out / "summary.json", summary.to_dict())

    checks = presets.benchmark_checks(summary)
    write_json(out / "acceptance_report.json", {
        "seed": seed,
        "replications": replications,
        "groups_per_main_treatment": replications * presets.GROUP_COUNTS[presets.BIG_BANG],
        "checks": [c.to_dict() for c in checks],
        "all_passed": all(c.passed for c in checks),
    })
    for check in checks:
        print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}")
    if not all(c.passed for c in checks):
        print(f"acceptance FAILED -> {out / 'acceptance_report.json'}", file=sys.stderr)
        return 3
    print(f"acceptance passed ({len(checks)} checks) -> {out / 'acceptance_report.json'}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1 (2 is reserved for config errors)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="master seed override")
    common.add_argument("--replications", type=int, help="session replications override")
    common.add_argument("--out", default="out", metavar="DIR", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format where a choice applies")
    common.add_argument("--treatment", metavar="NAME", help="restrict output rows")
    common.add_argument("--workers", type=int, default=1,
                        help="parallel worker processes (results are identical)")

    parser = _Parser(prog="gradualism",
                     description="Belief-learning simulator for stake-schedule "
                                 "coordination mechanisms")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("simulate", parents=[common],
                   help="run sessions and write period records")
    sub.add_parser("calibrate", parents=[common],
                   help="fit initial beliefs to period-1 contribution targets")
    sub.add_parser("compare", parents=[common],
                   help="coupled schedule comparison on identical draws")
    synth = sub.add_parser("synthesize", parents=[common],
                           help="search a certain-success stake path")
    synth.add_argument("--target", type=int, help="target stake to reach")
    synth.add_argument("--max-periods", type=int, default=12,
                       help="search horizon in periods")
    analyze = sub.add_parser("analyze", parents=[common],
                             help="re-summarize stored session records")
    analyze.add_argument("--records", required=True, metavar="PATH",
                         help="records.json produced by simulate --format json")
    sub.add_parser("replicate-paper", parents=[common],
                   help="benchmark preset run plus headline acceptance checks")
    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "compare": cmd_compare,
    "synthesize": cmd_synthesize,
    "analyze": cmd_analyze,
    "replicate-paper": cmd_replicate_paper,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
