"""Analysis artifacts: CSV tables, a JSON summary, and standalone SVG charts.

The charts are a convenience layer generated straight from the summary
data; no plotting library is involved.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from .metrics import METRIC_NAMES, ExperimentSummary

_CANONICAL_ROUTE_ORDER = ("O-L-D", "O-R-D", "O-L-R-D")


def _route_columns(summaries: Sequence[ExperimentSummary]) -> list[str]:
    routes = [r for r in _CANONICAL_ROUTE_ORDER if any(r in s.route_names for s in summaries)]
    for summary in summaries:
        for name in summary.route_names:
            if name not in routes:
                routes.append(name)
    return routes


def write_table1_csv(path, summaries: Sequence[ExperimentSummary], games: Sequence[str]) -> None:
    """Per-route mean occupancy, one row per representation/agent, columns
    per route; both error estimates are labeled explicitly."""
    routes = _route_columns(summaries)
    header = ["label", "game", "trials", "failures"]
    for route in routes:
        header += [f"{route} mean", f"{route} se(trials)", f"{route} sd(rounds)"]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for summary, game in zip(summaries, games):
            row: list[object] = [summary.label, game, summary.n_trials, summary.n_failures]
            for route in routes:
                stat = summary.route_stats.get(route)
                if stat is None:
                    row += ["", "", ""]
                else:
                    row += [f"{stat.mean:.4f}", f"{stat.se_trials:.4f}", f"{stat.sd_rounds:.4f}"]
            writer.writerow(row)


def write_trajectories_csv(path, summaries, games) -> None:
    """Per-round cross-trial mean and standard error for all four metrics."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["label", "game", "metric", "round", "mean", "se"])
        for summary, game in zip(summaries, games):
            for metric in METRIC_NAMES:
                series = summary.series[metric]
                for t in range(len(series.round_mean)):
                    writer.writerow(
                        [
                            summary.label,
                            game,
                            metric,
                            t + 1,
                            f"{series.round_mean[t]:.6f}",
                            f"{series.round_se[t]:.6f}",
                        ]
                    )


def write_trial_rounds_csv(path, summaries, games) -> None:
    """Long-format per-trial trajectories: label, trial, round, metric, value."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["label", "game", "trial", "round", "metric", "value"])
        for summary, game in zip(summaries, games):
            for metric in METRIC_NAMES:
                matrix = summary.series[metric].per_round
                for i in range(matrix.shape[0]):
                    for t in range(matrix.shape[1]):
                        writer.writerow(
                            [summary.label, game, i, t + 1, metric, f"{matrix[i, t]:.6f}"]
                        )


def write_tau_csv(path, summaries, games) -> None:
    """Per-trial Kendall tau between round number and deviation score;
    undefined taus (constant deviation) are marked, not silently dropped."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["label", "game", "trial", "tau", "status"])
        for summary, game in zip(summaries, games):
            for i, tau in enumerate(summary.deviation.taus):
                if tau is None:
                    writer.writerow([summary.label, game, i, "", "undefined"])
                else:
                    writer.writerow([summary.label, game, i, f"{tau:.6f}", "defined"])


def write_summary_json(path, summaries, games) -> None:
    payload = []
    for summary, game in zip(summaries, games):
        payload.append(
            {
                "label": summary.label,
                "game": game,
                "trials": summary.n_trials,
                "failures": summary.n_failures,
                "routes": {
                    name: {
                        "mean": stat.mean,
                        "se_trials": stat.se_trials,
                        "sd_rounds": stat.sd_rounds,
                    }
                    for name, stat in summary.route_stats.items()
                },
                "metrics": {
                    name: {"mean": series.mean, "se": series.se}
                    for name, series in summary.series.items()
                },
                "switches_per_agent": {
                    "mean": summary.switches_per_agent_mean,
                    "se": summary.switches_per_agent_se,
                },
                "tau": {
                    "mean": summary.deviation.mean_tau,
                    "undefined_count": summary.deviation.undefined_count,
                    "per_trial": list(summary.deviation.taus),
                },
            }
        )
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


def write_line_chart_svg(
    path,
    title: str,
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    *,
    x_label: str = "round",
    y_label: str = "",
    width: int = 640,
    height: int = 400,
) -> None:
    """Minimal standalone SVG line chart: one polyline per named series."""
    margin = 56
    plot_w, plot_h = width - 2 * margin, height - 2 * margin
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1

    def sx(x: float) -> float:
        return margin + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return height - margin - (y - y_lo) / (y_hi - y_lo) * plot_h

    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
               "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="11" '
        f'font-family="sans-serif">{x_label}</text>',
        f'<text x="16" y="{height / 2}" text-anchor="middle" font-size="11" '
        f'font-family="sans-serif" transform="rotate(-90 16 {height / 2})">{y_label}</text>',
        f'<text x="{margin}" y="{height - margin + 16}" text-anchor="middle" '
        f'font-size="10" font-family="sans-serif">{x_lo:g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 16}" text-anchor="middle" '
        f'font-size="10" font-family="sans-serif">{x_hi:g}</text>',
        f'<text x="{margin - 6}" y="{height - margin}" text-anchor="end" font-size="10" '
        f'font-family="sans-serif">{y_lo:g}</text>',
        f'<text x="{margin - 6}" y="{margin + 4}" text-anchor="end" font-size="10" '
        f'font-family="sans-serif">{y_hi:g}</text>',
    ]
    for i, (name, xs, ys) in enumerate(series):
        color = palette[i % len(palette)]
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        legend_y = margin + 14 * i
        parts.append(
            f'<line x1="{width - margin - 110}" y1="{legend_y}" x2="{width - margin - 90}" '
            f'y2="{legend_y}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{width - margin - 84}" y="{legend_y + 4}" font-size="10" '
            f'font-family="sans-serif">{name}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts), encoding="utf-8")


def write_trajectory_charts(out_dir, summaries, games) -> list[Path]:
    """One SVG per metric per game, with one line per label."""
    out_dir = Path(out_dir)
    written = []
    for game in sorted(set(games)):
        for metric in METRIC_NAMES:
            series = []
            for summary, summary_game in zip(summaries, games):
                if summary_game != game:
                    continue
                values = summary.series[metric].round_mean
                series.append((summary.label, list(range(1, len(values) + 1)), list(values)))
            if not series:
                continue
            path = out_dir / f"{metric}_game{game}.svg"
            write_line_chart_svg(
                path, f"{metric} per round (Game {game})", series, y_label=metric
            )
            written.append(path)
    return written
