"""Durable JSONL run logging and reconstruction.

A RunLog holds one experiment: a header line echoing the config and schema
version, one line per finished round, and one footer line per trial.  Lines
are written with sorted keys and flushed immediately, so a log truncated by
a crash stays readable up to the last complete line and identical runs
produce byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping

from .config import ExperimentConfig, config_from_dict, trial_template
from .engine import RoundRecord, TrialFailure, TrialResult
from .metrics import focal_series
from .network import ActionProfile

SCHEMA_VERSION = 1


class RunLogError(ValueError):
    """The log is missing, malformed, or has an incompatible schema."""


def _dump(data: Mapping[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


class RunLogWriter:
    """Streams one experiment to a JSONL file, one line per event."""

    def __init__(self, path, config_echo: Mapping[str, Any]) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = open(self.path, "w", encoding="utf-8")
        self._write({"type": "header", "schema": SCHEMA_VERSION, "config": dict(config_echo)})

    def _write(self, data: Mapping[str, Any]) -> None:
        self._handle.write(_dump(data) + "\n")
        self._handle.flush()

    def round(self, trial_id: str, record: RoundRecord) -> None:
        self._write(
            {
                "type": "round",
                "trial": trial_id,
                "round": record.round,
                "choices": list(record.choices.choices),
                "distribution": record.distribution,
                "payoffs": list(record.payoffs),
                "regrets": list(record.regrets),
            }
        )

    def trial_end(self, result: TrialResult | TrialFailure) -> None:
        if isinstance(result, TrialFailure):
            footer: dict[str, Any] = {
                "type": "trial_end",
                "trial": result.trial_id,
                "seed": result.seed,
                "status": "failed",
                "error": result.error,
            }
            if result.round is not None:
                footer["round"] = result.round
            if result.agent is not None:
                footer["agent"] = result.agent
        else:
            footer = {
                "type": "trial_end",
                "trial": result.config.trial_id,
                "seed": result.config.seed,
                "status": "ok",
                "switch_counts": list(result.switch_counts),
            }
        self._write(footer)

    def close(self) -> None:
        self._handle.close()

    def __enter__(self) -> RunLogWriter:
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


@dataclass
class TrialLog:
    rounds: list[dict]
    footer: dict | None = None


@dataclass
class ParsedRunLog:
    config: ExperimentConfig
    config_echo: dict
    trials: dict[str, TrialLog]


def read_runlog(path) -> ParsedRunLog:
    """Parse a RunLog, tolerating a truncated final line (crash safety)."""
    path = Path(path)
    header: dict | None = None
    trials: dict[str, TrialLog] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            try:
                event = json.loads(line)
            except json.JSONDecodeError:
                break  # partial trailing line from an interrupted run
            kind = event.get("type")
            if kind == "header":
                header = event
            elif kind == "round":
                trials.setdefault(event["trial"], TrialLog(rounds=[])).rounds.append(event)
            elif kind == "trial_end":
                trials.setdefault(event["trial"], TrialLog(rounds=[])).footer = event
    if header is None:
        raise RunLogError(f"{path}: no header line")
    if header.get("schema") != SCHEMA_VERSION:
        raise RunLogError(
            f"{path}: schema version {header.get('schema')} != supported {SCHEMA_VERSION}"
        )
    return ParsedRunLog(
        config=config_from_dict(header["config"]),
        config_echo=header["config"],
        trials=trials,
    )


def reconstruct_results(parsed: ParsedRunLog) -> list[TrialResult | TrialFailure]:
    """Rebuild TrialResults from a parsed log.

    Integer payoffs/regrets round-trip exactly through JSON, so records come
    back bit-for-bit.  Trials without an ``ok`` footer become TrialFailures.
    """
    template = trial_template(parsed.config)
    results: list[TrialResult | TrialFailure] = []
    for trial_id, log in parsed.trials.items():
        footer = log.footer
        if footer is None or footer.get("status") != "ok":
            results.append(
                TrialFailure(
                    trial_id=trial_id,
                    seed=(footer or {}).get("seed", -1),
                    error=(footer or {}).get("error", "incomplete trial (no footer)"),
                    round=(footer or {}).get("round"),
                    agent=(footer or {}).get("agent"),
                )
            )
            continue
        config = replace(template, seed=footer["seed"], trial_id=trial_id)
        history = tuple(
            RoundRecord(
                round=event["round"],
                choices=ActionProfile(tuple(event["choices"])),
                distribution=dict(event["distribution"]),
                payoffs=tuple(event["payoffs"]),
                regrets=tuple(event["regrets"]),
            )
            for event in sorted(log.rounds, key=lambda e: e["round"])
        )
        results.append(
            TrialResult(
                config=config,
                history=history,
                switch_counts=tuple(footer["switch_counts"]),
                focal_counts=focal_series(config.network, history),
                transcript=None,
            )
        )
    return results
