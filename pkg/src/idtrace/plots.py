"""Figure rendering for benchmark reports.

One SVG per experiment, written alongside the CSVs. Axes mirror the
result tables: core-set counts per group, discriminability spreads and
sorted profiles, and the per-missing-rate strategy comparison.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

# stable glyph ids keep rerendered SVGs diff-friendly
matplotlib.rcParams["svg.hashsalt"] = "idtrace"


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_coreset_counts(rows: list[dict], path: Path) -> None:
    """Core-set count per group, one line per probe."""
    by_probe: dict[str, list[tuple[int, int]]] = defaultdict(list)
    for row in rows:
        if row["censored"] or row["indistinguishable"]:
            continue
        by_probe[row["probe_id"]].append((row["group_index"], row["core_set_count"]))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for probe, points in sorted(by_probe.items()):
        points.sort()
        ax.plot(
            [g for g, _ in points],
            [c for _, c in points],
            marker="o",
            linewidth=1,
            markersize=3,
            label=probe,
        )
    ax.set_xlabel("observation space (group)")
    ax.set_ylabel("core identification sets")
    ax.set_title("Core-set multiplicity per observation space")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    _save(fig, path)


def plot_discriminability_spread(rows: list[dict], path: Path) -> None:
    """Distribution of per-object discriminability for each attribute
    (group 0 members)."""
    by_attr: dict[str, list[float]] = defaultdict(list)
    for row in rows:
        if row["group_index"] != 0 or row["undefined"]:
            continue
        by_attr[row["attribute"]].append(row["bits"])
    names = sorted(by_attr)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.boxplot([by_attr[n] for n in names], tick_labels=names)
    ax.set_xlabel("attribute")
    ax.set_ylabel("discriminability (bits)")
    ax.set_title("Per-object discriminability spread within one space")
    ax.tick_params(axis="x", rotation=60, labelsize=7)
    fig.tight_layout()
    _save(fig, path)


def plot_sorted_profiles(rows: list[dict], path: Path) -> None:
    """Descending discriminability profile per sampled object."""
    by_obj: dict[str, list[tuple[int, float]]] = defaultdict(list)
    for row in rows:
        if row["group_index"] != 0:
            continue
        by_obj[row["object_id"]].append((row["rank"], row["bits"]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for obj, points in sorted(by_obj.items()):
        points.sort()
        ax.plot(
            [r for r, _ in points],
            [b for _, b in points],
            marker="s",
            markersize=3,
            label=obj,
        )
    ax.set_xlabel("attribute rank")
    ax.set_ylabel("discriminability (bits)")
    ax.set_title("Sorted attribute profiles of sampled objects")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_probe_across_spaces(rows: list[dict], path: Path) -> None:
    """The probe's discriminability per attribute, one line per group."""
    by_group: dict[int, list[tuple[str, float]]] = defaultdict(list)
    for row in rows:
        if row["infinite"] or row["undefined"]:
            continue
        by_group[row["group_index"]].append((row["attribute"], row["bits"]))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for g, points in sorted(by_group.items()):
        points.sort()
        ax.plot(
            [a for a, _ in points],
            [b for _, b in points],
            marker="o",
            markersize=3,
            linewidth=1,
            label=f"group {g}",
        )
    ax.set_xlabel("attribute")
    ax.set_ylabel("discriminability (bits)")
    ax.set_title("One probe across observation spaces")
    ax.tick_params(axis="x", rotation=60, labelsize=7)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    _save(fig, path)


def plot_strategy_comparison(rows: list[dict], path: Path) -> None:
    """Mean simulated trace time per missing rate, both strategies."""
    rates = [row["missing_rate"] for row in rows]
    xs = range(len(rates))
    width = 0.38
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(
        [x - width / 2 for x in xs],
        [row["random_mean_time_ms"] for row in rows],
        width,
        label="random",
    )
    ax.bar(
        [x + width / 2 for x in xs],
        [row["titf_mean_time_ms"] for row in rows],
        width,
        label="greedy",
    )
    ax.set_xticks(list(xs), [f"{int(r * 100)}%" for r in rates])
    ax.set_xlabel("attributes hidden")
    ax.set_ylabel("mean trace time (ms, simulated)")
    ax.set_title("Greedy vs random acquisition cost")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


_RENDERERS = {
    "q1": plot_coreset_counts,
    "q2": plot_discriminability_spread,
    "q2_profile": plot_sorted_profiles,
    "q3": plot_probe_across_spaces,
    "q4": plot_strategy_comparison,
}


def render_figures(figures: dict[str, list[dict]], out_dir) -> list[str]:
    """Render an SVG for each known result table; returns file names."""
    out = Path(out_dir)
    written = []
    for name, rows in figures.items():
        renderer = _RENDERERS.get(name)
        if renderer is None or not rows:
            continue
        fname = f"{name}.svg"
        renderer(rows, out / fname)
        written.append(fname)
    return sorted(written)
