from __future__ import annotations

import csv
import json

from routegames.cli import main

SCRIPTED_TOML = """
game = "B"
agent = "llm"
representation = "S-RO"
n = 2
rounds = 2
trials = 1
seed = 3
out = "{out}"

[backend]
kind = "scripted"
responses = {responses}
"""


def scripted_config(tmp_path, pick="O-L-R-D", count=4):
    responses = json.dumps([f'{{"route": "{pick}"}}'] * count)
    path = tmp_path / "scripted.toml"
    path.write_text(SCRIPTED_TOML.format(out=tmp_path / "run", responses=responses))
    return path


def read_rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def test_run_with_flags_only(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(
        ["run", "--agent", "random", "--game", "A", "--trials", "2", "--rounds", "3",
         "--seed", "7", "--out", str(out)]
    )
    assert code == 0
    lines = (out / "runlog.jsonl").read_text().splitlines()
    events = [json.loads(line) for line in lines]
    assert events[0]["type"] == "header"
    assert sum(e["type"] == "trial_end" for e in events) == 2
    assert sum(e["type"] == "round" for e in events) == 6
    assert "2/2 trials ok" in capsys.readouterr().out


def test_run_is_byte_deterministic(tmp_path):
    for name in ("one", "two"):
        assert main(
            ["run", "--agent", "exp3", "--game", "B", "--trials", "2", "--rounds", "5",
             "--seed", "11", "--out", str(tmp_path / name)]
        ) == 0
    first = (tmp_path / "one" / "runlog.jsonl").read_bytes()
    second = (tmp_path / "two" / "runlog.jsonl").read_bytes()
    assert first == second


def test_run_parallel_workers_match_serial(tmp_path):
    for name, workers in (("serial", "1"), ("parallel", "3")):
        assert main(
            ["run", "--agent", "mwu", "--game", "A", "--trials", "3", "--rounds", "4",
             "--seed", "2", "--out", str(tmp_path / name), "--workers", workers]
        ) == 0
    assert (tmp_path / "serial" / "runlog.jsonl").read_bytes() == (
        tmp_path / "parallel" / "runlog.jsonl"
    ).read_bytes()


def test_run_scripted_llm_completes_offline(tmp_path):
    config = scripted_config(tmp_path)
    assert main(["run", "--config", str(config)]) == 0
    out = tmp_path / "run"
    assert (out / "runlog.jsonl").exists()
    assert (out / "transcripts" / "trial-000.jsonl").exists()


def test_run_reports_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('agent = "unknown-kind"\n')
    assert main(["run", "--config", str(bad)]) == 2
    assert "agent" in capsys.readouterr().err


def test_run_exhausted_script_fails_trial(tmp_path, capsys):
    config = scripted_config(tmp_path, count=2)  # needs 4 responses
    assert main(["run", "--config", str(config)]) == 1
    assert "FAILED" in capsys.readouterr().err


def test_analyze_writes_reports(tmp_path):
    out = tmp_path / "run"
    main(["run", "--agent", "best-response", "--game", "B", "--trials", "3",
          "--rounds", "6", "--seed", "5", "--out", str(out)])
    reports = tmp_path / "reports"
    assert main(["analyze", str(out / "runlog.jsonl"), "--out", str(reports), "--svg"]) == 0
    for name in ("table1.csv", "trajectories.csv", "trial_rounds.csv", "tau.csv", "summary.json"):
        assert (reports / name).exists()
    assert (reports / "focal_gameB.svg").exists()

    rows = read_rows(reports / "table1.csv")
    assert rows[0]["label"] == "best-response"
    assert rows[0]["game"] == "B"
    # best-response locks onto the bridge from round 2: mean bridge count > 15
    assert float(rows[0]["O-L-R-D mean"]) > 15.0


def test_analyze_synthetic_equilibrium_log(tmp_path):
    """An all-bridge fixed-point log reproduces the pure-equilibrium row and
    an undefined tau marker."""
    from routegames.config import config_from_dict, config_to_dict
    from routegames.engine import RoundRecord
    from routegames.network import ActionProfile, game_b, payoffs, regret
    from routegames.runlog import RunLogWriter

    net = game_b()
    profile = ActionProfile((2,) * 18)
    config = config_from_dict({"game": "B", "agent": "best-response", "rounds": 5, "trials": 1})
    runlog = tmp_path / "runlog.jsonl"
    with RunLogWriter(runlog, config_to_dict(config)) as writer:
        for t in range(1, 6):
            writer.round(
                "trial-000",
                RoundRecord(
                    round=t,
                    choices=profile,
                    distribution={"O-L-D": 0, "O-R-D": 0, "O-L-R-D": 18},
                    payoffs=payoffs(net, profile),
                    regrets=tuple(regret(net, profile, a) for a in range(18)),
                ),
            )
        writer._write(
            {
                "type": "trial_end",
                "trial": "trial-000",
                "seed": 0,
                "status": "ok",
                "switch_counts": [0] * 18,
            }
        )
    reports = tmp_path / "reports"
    assert main(["analyze", str(runlog), "--out", str(reports)]) == 0
    row = read_rows(reports / "table1.csv")[0]
    assert float(row["O-L-D mean"]) == 0.0
    assert float(row["O-R-D mean"]) == 0.0
    assert float(row["O-L-R-D mean"]) == 18.0
    tau_rows = read_rows(reports / "tau.csv")
    assert tau_rows[0]["status"] == "undefined"
    summary = json.loads((reports / "summary.json").read_text())
    assert summary[0]["tau"]["undefined_count"] == 1
    assert summary[0]["metrics"]["regret"]["mean"] == 0.0


def test_analyze_missing_file(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path)]) == 2


def test_replay_algorithmic_trial(tmp_path, capsys):
    out = tmp_path / "run"
    main(["run", "--agent", "mwu", "--game", "A", "--trials", "2", "--rounds", "4",
          "--seed", "9", "--out", str(out)])
    assert main(["replay", str(out / "runlog.jsonl"), "--trial", "trial-001"]) == 0
    assert "decisions match" in capsys.readouterr().out


def test_replay_llm_trial_and_divergence_detection(tmp_path, capsys):
    config = scripted_config(tmp_path)
    main(["run", "--config", str(config)])
    runlog = tmp_path / "run" / "runlog.jsonl"
    assert main(["replay", str(runlog), "--trial", "trial-000"]) == 0

    # tamper with one stored response: replay must diverge at that decision
    transcript = tmp_path / "run" / "transcripts" / "trial-000.jsonl"
    entries = [json.loads(line) for line in transcript.read_text().splitlines()]
    entries[2]["response"] = '{"route": "O-L-D"}'  # agent 0, round 2
    transcript.write_text("\n".join(json.dumps(e) for e in entries) + "\n")
    assert main(["replay", str(runlog), "--trial", "trial-000"]) == 1
    err = capsys.readouterr().err
    assert "agent 0" in err and "round 2" in err


def test_replay_missing_transcript(tmp_path, capsys):
    config = scripted_config(tmp_path)
    main(["run", "--config", str(config)])
    runlog = tmp_path / "run" / "runlog.jsonl"
    (tmp_path / "run" / "transcripts" / "trial-000.jsonl").unlink()
    assert main(["replay", str(runlog), "--trial", "trial-000"]) == 2


def test_replay_unknown_trial(tmp_path, capsys):
    out = tmp_path / "run"
    main(["run", "--agent", "random", "--game", "A", "--trials", "1", "--rounds", "2",
          "--seed", "1", "--out", str(out)])
    assert main(["replay", str(out / "runlog.jsonl"), "--trial", "trial-009"]) == 2


def test_list_representations(capsys):
    assert main(["list-representations"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 8
    assert lines[0].startswith("F-PE")
    assert any(line.startswith("S-RO") for line in lines)
