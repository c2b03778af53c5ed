"""Render benchmark run directories into PNG figures.

Reads the delimited files a run directory already contains (it never
re-simulates) and draws RMSE curves, residual histograms, and Borda
bars. The Agg backend keeps rendering headless.
"""
from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .support import support_risky_threshold  # noqa: E402

_PNG_META = {"Software": None}  # keep PNG bytes stable across re-renders


def _family_label(family: str, params: str) -> str:
    if params and params != "{}":
        inner = ", ".join(f"{k}={v}" for k, v in sorted(json.loads(params).items()))
        return f"{family} ({inner})"
    return family


def _read_rows(path: Path) -> list[dict[str, str]]:
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def plot_rmse_by_support(rows: list[dict[str, str]], out_path: Path) -> None:
    """One panel per family: RMSE vs support size, one line per estimator."""
    panels: dict[str, list[dict[str, str]]] = defaultdict(list)
    for row in rows:
        panels[_family_label(row["family"], row["params"])].append(row)
    names = sorted(panels)
    ncols = min(3, len(names))
    nrows = (len(names) + ncols - 1) // ncols
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.2 * ncols, 3.2 * nrows), squeeze=False, sharey=False
    )
    n = int(rows[0]["n"])
    gamma = support_risky_threshold(n)
    for ax, name in zip(axes.flat, names):
        by_est: dict[str, list[tuple[int, float, float, float]]] = defaultdict(list)
        for row in panels[name]:
            by_est[row["estimator"]].append(
                (
                    int(row["support_size"]),
                    float(row["rmse"]),
                    float(row["ci_low"]),
                    float(row["ci_high"]),
                )
            )
        panel_max = max(int(row["support_size"]) for row in panels[name])
        for tag in sorted(by_est):
            pts = sorted(by_est[tag])
            xs = [p[0] for p in pts]
            ax.plot(xs, [p[1] for p in pts], marker="o", markersize=3, label=tag)
            ax.fill_between(xs, [p[2] for p in pts], [p[3] for p in pts], alpha=0.15)
        ax.axvline(n, color="grey", linestyle=":", linewidth=1)
        if gamma is not None and gamma < panel_max:
            ax.axvspan(gamma, panel_max + 1, color="red", alpha=0.06)
        ax.set_title(name, fontsize=9)
        ax.set_xlabel("support size")
        ax.set_ylabel("RMSE (nats)")
    for ax in axes.flat[len(names):]:
        ax.set_visible(False)
    handles, labels = axes.flat[0].get_legend_handles_labels()
    fig.legend(handles, labels, loc="lower center", ncol=min(7, len(labels)), fontsize=8)
    fig.tight_layout(rect=(0, 0.06, 1, 1))
    fig.savefig(out_path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def plot_residuals(rows: list[dict[str, str]], out_path: Path) -> None:
    """Overlaid residual histograms, one per diagnostic mode."""
    by_mode: dict[str, list[float]] = defaultdict(list)
    for row in rows:
        by_mode[row["mode"]].append(float(row["residual"]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for mode in sorted(by_mode):
        ax.hist(by_mode[mode], bins=60, alpha=0.5, density=True, label=mode)
    ax.axvline(0.0, color="grey", linestyle=":", linewidth=1)
    ax.set_xlabel("missing-mass residual")
    ax.set_ylabel("density")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def plot_borda(totals: dict[str, float], out_path: Path) -> None:
    """Bar chart of Borda totals, best first."""
    tags = sorted(totals, key=lambda t: -totals[t])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(range(len(tags)), [totals[t] for t in tags])
    ax.set_xticks(range(len(tags)))
    ax.set_xticklabels(tags, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("Borda points")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def render_report(run_dir: Path) -> list[Path]:
    """Render every figure the run directory has data for.

    Returns the list of written image paths; empty when the directory
    holds none of the recognized outputs.
    """
    run_dir = Path(run_dir)
    written: list[Path] = []
    summaries = run_dir / "summaries.csv"
    if summaries.exists():
        rows = _read_rows(summaries)
        if rows and "support_size" in rows[0]:
            out = run_dir / "rmse_by_support.png"
            plot_rmse_by_support(rows, out)
            written.append(out)
    residuals = run_dir / "residuals.csv"
    if residuals.exists():
        rows = _read_rows(residuals)
        if rows:
            out = run_dir / "residuals.png"
            plot_residuals(rows, out)
            written.append(out)
    borda_file = run_dir / "borda.json"
    if borda_file.exists():
        doc = json.loads(borda_file.read_text())
        totals = doc.get("totals", {})
        if totals:
            out = run_dir / "borda.png"
            plot_borda(totals, out)
            written.append(out)
    return written
