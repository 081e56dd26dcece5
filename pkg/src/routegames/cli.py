"""Command-line surface: run experiments to a JSONL log, analyze logs into
CSV/JSON/SVG reports, replay recorded trials, and list representation codes."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import (
    ConfigError,
    ExperimentConfig,
    apply_overrides,
    build_backend,
    config_to_dict,
    load_config,
    trial_template,
)
from .engine import TrialFailure, TrialResult, run_experiment, run_trial_safe
from .llm import ReplayBackend, ReplayMissError, TranscriptStore
from .metrics import summarize_experiment
from .reports import (
    write_summary_json,
    write_table1_csv,
    write_tau_csv,
    write_trajectories_csv,
    write_trajectory_charts,
    write_trial_rounds_csv,
)
from .representations import ALL_REPRESENTATIONS
from .runlog import RunLogError, RunLogWriter, read_runlog, reconstruct_results


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="routegames",
        description="Repeated selfish-routing games with algorithmic and LLM agents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and stream a JSONL run log")
    run.add_argument("--config", type=Path, help="TOML experiment config")
    run.add_argument("--game", choices=["A", "B"], help="canonical game id")
    run.add_argument("--repr", dest="representation", help="representation code, e.g. S-RO")
    run.add_argument("--agent", help="policy kind: random | best-response | mwu | exp3 | llm")
    run.add_argument("--trials", type=int)
    run.add_argument("--rounds", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--backend", choices=["live", "replay", "scripted"])
    run.add_argument("--out", help="output directory for the run log")
    run.add_argument(
        "--workers",
        type=int,
        help="trial worker pool width; 1 (default) streams rounds as they finish",
    )

    analyze = sub.add_parser("analyze", help="aggregate run logs into report files")
    analyze.add_argument("runlogs", nargs="+", type=Path)
    analyze.add_argument("--out", type=Path, default=Path("reports"))
    analyze.add_argument("--svg", action="store_true", help="also write SVG trajectory charts")

    replay = sub.add_parser("replay", help="re-execute a recorded trial and verify decisions")
    replay.add_argument("runlog", type=Path)
    replay.add_argument("--trial", required=True, help="trial id, e.g. trial-000")

    sub.add_parser("list-representations", help="print the eight representation codes")
    return parser


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else ExperimentConfig()
    config = apply_overrides(
        config,
        game=args.game,
        representation=args.representation,
        agent=args.agent,
        trials=args.trials,
        rounds=args.rounds,
        seed=args.seed,
        backend=args.backend,
        out=args.out,
        workers=args.workers,
    )
    template = trial_template(config)
    backend = build_backend(config)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    runlog_path = out_dir / "runlog.jsonl"

    results: list[TrialResult | TrialFailure] = []
    with RunLogWriter(runlog_path, config_to_dict(config)) as writer:
        if config.workers <= 1:
            for i in range(config.trials):
                trial_config = replace(
                    template, seed=config.seed + i, trial_id=f"trial-{i:03d}"
                )
                result = run_trial_safe(
                    trial_config,
                    backend=backend,
                    on_record=lambda rec, tid=trial_config.trial_id: writer.round(tid, rec),
                )
                writer.trial_end(result)
                results.append(result)
        else:
            results = run_experiment(
                template,
                config.trials,
                config.seed,
                backend=backend,
                workers=config.workers,
            )
            for result in results:
                if isinstance(result, TrialResult):
                    for record in result.history:
                        writer.round(result.config.trial_id, record)
                writer.trial_end(result)

    for result in results:
        if isinstance(result, TrialResult) and result.transcript is not None:
            transcript_dir = out_dir / "transcripts"
            transcript_dir.mkdir(exist_ok=True)
            result.transcript.save(transcript_dir / f"{result.config.trial_id}.jsonl")

    failures = [r for r in results if isinstance(r, TrialFailure)]
    for failure in failures:
        print(f"{failure.trial_id}: FAILED ({failure.error})", file=sys.stderr)
    print(f"{len(results) - len(failures)}/{len(results)} trials ok -> {runlog_path}")
    return 1 if failures else 0


def cmd_analyze(args: argparse.Namespace) -> int:
    summaries, games = [], []
    for path in args.runlogs:
        parsed = read_runlog(path)
        results = reconstruct_results(parsed)
        summaries.append(summarize_experiment(results, label=parsed.config.label))
        if parsed.config.network is not None:
            games.append(str(parsed.config.network.get("name", "custom")))
        else:
            games.append(parsed.config.game)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_table1_csv(out / "table1.csv", summaries, games)
    write_trajectories_csv(out / "trajectories.csv", summaries, games)
    write_trial_rounds_csv(out / "trial_rounds.csv", summaries, games)
    write_tau_csv(out / "tau.csv", summaries, games)
    write_summary_json(out / "summary.json", summaries, games)
    if args.svg:
        write_trajectory_charts(out, summaries, games)
    print(f"wrote reports for {len(summaries)} run log(s) to {out}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    parsed = read_runlog(args.runlog)
    log = parsed.trials.get(args.trial)
    if log is None:
        print(f"no trial {args.trial!r} in {args.runlog}", file=sys.stderr)
        return 2
    if log.footer is None or log.footer.get("status") != "ok":
        print(f"trial {args.trial} did not complete; nothing to verify", file=sys.stderr)
        return 2

    template = trial_template(parsed.config)
    config = replace(template, seed=log.footer["seed"], trial_id=args.trial)
    backend = None
    if config.agent_spec.kind == "llm":
        transcript_path = Path(args.runlog).parent / "transcripts" / f"{args.trial}.jsonl"
        if not transcript_path.exists():
            print(f"missing transcript file {transcript_path}", file=sys.stderr)
            return 2
        backend = ReplayBackend(TranscriptStore.load(transcript_path))

    result = run_trial_safe(config, backend=backend)
    if isinstance(result, TrialFailure):
        print(f"replay failed: {result.error}", file=sys.stderr)
        return 1

    original = sorted(log.rounds, key=lambda event: event["round"])
    for event, record in zip(original, result.history):
        recorded = list(event["choices"])
        replayed = list(record.choices.choices)
        if recorded != replayed:
            for agent, (a, b) in enumerate(zip(recorded, replayed)):
                if a != b:
                    print(
                        f"divergence at agent {agent}, round {event['round']}: "
                        f"recorded route {a}, replayed route {b}",
                        file=sys.stderr,
                    )
                    return 1
    print(f"replay ok: {len(original)} rounds, decisions match")
    return 0


def cmd_list_representations() -> int:
    for axes in ALL_REPRESENTATIONS:
        style = "full-chat" if axes.style.value == "F" else "summarized"
        reward = "payoff" if axes.reward_info.value == "P" else "regret"
        action = "everyone's actions" if axes.action_info.value == "E" else "own actions only"
        print(f"{axes.code()}  {style}, {reward}, {action}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "replay":
            return cmd_replay(args)
        return cmd_list_representations()
    except (ConfigError, RunLogError, ReplayMissError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
