"""Static SVG figures for the three analyses.

Plots are conveniences; the CSV/JSON reports are the contract. Figures are
written with a fixed hash salt and no date metadata so that re-running a
command reproduces byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "treegaze"

import matplotlib.pyplot as plt
import numpy as np

from .transitions import TRANSITION_TYPES, TransitionAnalysis

_SVG_META = {"Date": None}


def _mean_sd(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return 0.0, 0.0
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


def save_transition_bars(
    analysis: TransitionAnalysis,
    alpha: float,
    path,
) -> None:
    """Grouped bars (baseline vs gaze) per transition type, +/- 1 sd whiskers.

    Types whose Welch comparison is significant at ``alpha`` get an asterisk.
    """
    tests = analysis.tests
    x = np.arange(len(TRANSITION_TYPES))
    width = 0.38
    base_stats = [_mean_sd(analysis.baseline_values[t]) for t in TRANSITION_TYPES]
    gaze_stats = [_mean_sd(analysis.gaze_values[t]) for t in TRANSITION_TYPES]
    base_means = [m for m, _ in base_stats]
    base_sds = [s for _, s in base_stats]
    gaze_means = [m for m, _ in gaze_stats]
    gaze_sds = [s for _, s in gaze_stats]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(x - width / 2, base_means, width, yerr=base_sds, capsize=3,
           label="text baseline", color="#7f7f7f")
    ax.bar(x + width / 2, gaze_means, width, yerr=gaze_sds, capsize=3,
           label="gaze-derived", color="#1f77b4")
    for i, t in enumerate(TRANSITION_TYPES):
        if tests.get(t) is not None and tests[t].p_two_tailed < alpha:
            top = max(base_means[i] + base_sds[i], gaze_means[i] + gaze_sds[i])
            ax.text(x[i], top + 0.02, "*", ha="center", va="bottom", fontsize=14)
    ax.set_xticks(x)
    ax.set_xticklabels([f"{t[0]}→{t[1]}" for t in TRANSITION_TYPES])
    ax.set_ylabel("transition probability")
    ax.set_xlabel("transition type")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def save_frp_timecourse(
    times_ms: np.ndarray,
    panels: dict[str, dict],
    path,
) -> None:
    """One panel per ROI; per predictor: mean slope, CI band, significance dots.

    ``panels`` maps ROI name -> predictor -> {"mean", "lo", "hi", "sig"}.
    """
    n = max(1, len(panels))
    fig, axes = plt.subplots(n, 1, figsize=(7.0, 3.0 * n), squeeze=False)
    colors = {"syntactic": "#d62728", "lexical": "#1f77b4"}
    for ax, (roi_name, by_predictor) in zip(axes[:, 0], panels.items()):
        for predictor, series in by_predictor.items():
            color = colors.get(predictor, "#2ca02c")
            ax.plot(times_ms, series["mean"], color=color, label=f"{predictor} surprisal")
            ax.fill_between(times_ms, series["lo"], series["hi"], color=color, alpha=0.2)
            sig = np.asarray(series["sig"], dtype=bool)
            if sig.any():
                y = np.min(series["lo"]) - 0.05 * (np.max(series["hi"]) - np.min(series["lo"]) + 1e-12)
                ax.plot(times_ms[sig], np.full(sig.sum(), y), ".", color=color, markersize=3)
        ax.axhline(0.0, color="black", linewidth=0.8)
        ax.axvline(0.0, color="black", linewidth=0.8, linestyle="--")
        ax.set_title(roi_name)
        ax.set_xlabel("time from fixation onset (ms)")
        ax.set_ylabel("regression slope")
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
