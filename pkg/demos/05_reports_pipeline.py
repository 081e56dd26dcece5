"""
From run logs to report files
=============================

Experiments stream to a JSONL run log (header, one line per round, one
footer per trial).  The analysis step rebuilds trials from the log and
writes CSV tables, a JSON summary, and standalone SVG trajectory charts.
"""
import tempfile
from pathlib import Path

from routegames.cli import main

out = Path(tempfile.mkdtemp(prefix="routegames-demo-"))

# two experiments: multiplicative weights on each game
for game in ("A", "B"):
    code = main([
        "run", "--agent", "mwu", "--game", game, "--trials", "10",
        "--rounds", "40", "--seed", "5", "--out", str(out / f"mwu-{game}"),
    ])
    assert code == 0

code = main([
    "analyze",
    str(out / "mwu-A" / "runlog.jsonl"),
    str(out / "mwu-B" / "runlog.jsonl"),
    "--out", str(out / "reports"),
    "--svg",
])
assert code == 0

print("\nreport files:")
for path in sorted((out / "reports").iterdir()):
    print(f"  {path.name:22s} {path.stat().st_size:7d} bytes")

print("\ntable1.csv:")
print((out / "reports" / "table1.csv").read_text())

# every recorded trial can be re-verified against its log
assert main(["replay", str(out / "mwu-A" / "runlog.jsonl"), "--trial", "trial-003"]) == 0
