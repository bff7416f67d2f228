"""Figure and delimited-output rendering for evaluation reports.

This is the display boundary: derived numbers are rounded to two decimals
here and nowhere else. Figures are written as PNG files next to the matrix
CSV so a report directory is self-contained for committee circulation.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Mapping, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_CLASS_COLORS = {"pass": "#2a9d8f", "borderline": "#e9c46a", "exclude": "#e76f51"}
_SCORE_COLUMNS = (
    "npv",
    "market_risk",
    "operational_risk",
    "technical_complexity",
    "managerial_complexity",
    "time_to_income",
)


def write_matrix_csv(report: Mapping[str, Any], path: Path) -> Path:
    """Flatten the report into one delimited row per alternative, rank order."""
    scores = report["scores"]
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["use_id", "label", *_SCORE_COLUMNS,
             "overall_risk", "overall_complexity", "attractiveness",
             "classification", "rank", "exclusion_reasons"]
        )
        for result in report["results"]:
            uid = result["use_id"]
            writer.writerow(
                [
                    uid,
                    result["label"],
                    *[round(scores[uid][column], 2) for column in _SCORE_COLUMNS],
                    round(result["overall_risk"], 2),
                    round(result["overall_complexity"], 2),
                    round(result["attractiveness"], 2),
                    result["classification"],
                    result["rank"],
                    "; ".join(r["code"] for r in result["exclusion_reasons"]),
                ]
            )
    return path


def render_attractiveness(report: Mapping[str, Any], path: Path) -> Path:
    """Horizontal bars of the attractiveness index, coloured by verdict,
    with the borderline band shaded around zero."""
    results = report["results"]
    labels = [r["label"] for r in results][::-1]
    values = [r["attractiveness"] for r in results][::-1]
    colors = [_CLASS_COLORS[r["classification"]] for r in results][::-1]
    epsilon = report["worksheet"]["profile"]["borderline_epsilon"]

    fig, ax = plt.subplots(figsize=(7.0, 0.6 * len(results) + 1.6))
    ax.barh(labels, values, color=colors)
    ax.axvspan(-epsilon, epsilon, color="#bbbbbb", alpha=0.3, zorder=0)
    ax.axvline(0.0, color="#444444", linewidth=0.8)
    for i, value in enumerate(values):
        ax.annotate(
            f"{value:.2f}",
            xy=(value, i),
            xytext=(4 if value >= 0 else -4, 0),
            textcoords="offset points",
            va="center",
            ha="left" if value >= 0 else "right",
            fontsize=9,
        )
    ax.set_xlabel("attractiveness index")
    ax.set_title("Screening verdict by alternative")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_risk_complexity(report: Mapping[str, Any], path: Path) -> Path:
    """Risk vs complexity scatter; marker size tracks the value score."""
    results = report["results"]
    scores = report["scores"]
    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    for result in results:
        uid = result["use_id"]
        ax.scatter(
            result["overall_complexity"],
            result["overall_risk"],
            s=60 + 40 * scores[uid]["npv"],
            color=_CLASS_COLORS[result["classification"]],
            edgecolor="#333333",
            zorder=3,
        )
        ax.annotate(
            result["label"],
            xy=(result["overall_complexity"], result["overall_risk"]),
            xytext=(6, 6),
            textcoords="offset points",
            fontsize=8,
        )
    ax.set_xlim(0.8, 5.2)
    ax.set_ylim(0.8, 5.2)
    ax.set_xlabel("overall complexity (1-5, higher is worse)")
    ax.set_ylabel("overall risk (1-5, higher is worse)")
    ax.set_title("Risk and complexity positioning (marker size: value score)")
    ax.grid(True, linewidth=0.4, alpha=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_stress(report: Mapping[str, Any], path: Path) -> Optional[Path]:
    """Grouped bars of base vs scenario NPV per alternative with cash flows.

    Returns None when no alternative carries a cash-flow model.
    """
    stress = {uid: entry for uid, entry in report["stress"].items() if entry is not None}
    if not stress:
        return None
    labels_by_id = {r["use_id"]: r["label"] for r in report["results"]}
    kinds = ["rent_minus_10pct", "occupancy_minus_10pct", "delay_12_months"]
    names = ["base"] + kinds
    width = 1.0 / (len(names) + 1)

    fig, ax = plt.subplots(figsize=(7.2, 4.6))
    for offset, name in enumerate(names):
        xs = [i + offset * width for i in range(len(stress))]
        ys = [
            entry["base_npv"] if name == "base" else entry["scenario_npvs"][name]
            for entry in stress.values()
        ]
        ax.bar(xs, ys, width=width, label=name.replace("_", " "))
    ax.axhline(0.0, color="#444444", linewidth=0.8)
    ax.set_xticks([i + width * (len(names) - 1) / 2 for i in range(len(stress))])
    ax.set_xticklabels([labels_by_id.get(uid, uid) for uid in stress], fontsize=8)
    ax.set_ylabel("NPV")
    ax.set_title("Stress scenarios (negative under all three: structural fragility)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_stability(stability: Mapping[str, Any], path: Path) -> Path:
    """Stacked classification fractions per alternative across a sweep."""
    fractions = stability["fractions"]
    uids = list(fractions)
    fig, ax = plt.subplots(figsize=(7.0, 0.5 * len(uids) + 1.8))
    left = [0.0] * len(uids)
    for name in ("pass", "borderline", "exclude"):
        widths = [fractions[uid][name] for uid in uids]
        ax.barh(uids, widths, left=left, color=_CLASS_COLORS[name], label=name)
        left = [a + b for a, b in zip(left, widths)]
    ax.set_xlim(0, 1)
    ax.set_xlabel(
        f"fraction of {stability['evaluated_points']} evaluated weightings"
    )
    ax.set_title("Classification stability across the sweep")
    ax.legend(fontsize=8, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_directory(
    report: Mapping[str, Any],
    out_dir: Path,
    stability: Optional[Mapping[str, Any]] = None,
) -> list[Path]:
    """Write the CSV matrix and every applicable figure into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        write_matrix_csv(report, out_dir / "matrix.csv"),
        render_attractiveness(report, out_dir / "attractiveness.png"),
        render_risk_complexity(report, out_dir / "risk_complexity.png"),
    ]
    stress_path = render_stress(report, out_dir / "stress.png")
    if stress_path is not None:
        written.append(stress_path)
    if stability is not None:
        written.append(render_stability(stability, out_dir / "stability.png"))
    return written
