"""Figure rendering for report outputs.

Every plotting command writes straight to a file (Agg backend); nothing
here is interactive.  Figures accompany the delimited outputs, they do
not replace them.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_spectrum", "plot_bound", "plot_fer", "plot_sa_trace"]


def _new_axes(xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _finish(fig, ax, path: str | Path) -> None:
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_spectrum(series, path: str | Path) -> None:
    """Weight spectra on a log count axis.

    series: iterable of (label, counts array indexed by weight).
    """
    fig, ax = _new_axes("Hamming weight d", "codeword count A_d")
    for label, counts in series:
        counts = np.asarray(counts, dtype=float)
        d = np.flatnonzero(counts > 0.5)
        ax.semilogy(d, counts[d], marker="o", linestyle="-", label=label)
    _finish(fig, ax, path)


def plot_bound(snr_db, values, path: str | Path, label: str = "union bound",
               snr_label: str = "Es/N0 (dB)") -> None:
    fig, ax = _new_axes(snr_label, "ML error probability bound")
    ax.semilogy(snr_db, values, marker="s", label=label)
    _finish(fig, ax, path)


def plot_fer(results, path: str | Path, bound=None,
             snr_label: str = "Es/N0 (dB)") -> None:
    """FER curve with Wilson error bars; optional bound overlay."""
    fig, ax = _new_axes(snr_label, "frame error rate")
    snr = [r.snr_db for r in results]
    fer = [max(r.fer, 1e-12) for r in results]
    lo = [max(r.fer - r.wilson_ci[0], 0.0) for r in results]
    hi = [max(r.wilson_ci[1] - r.fer, 0.0) for r in results]
    ax.errorbar(snr, fer, yerr=[lo, hi], marker="o", capsize=3, label="simulated")
    ax.set_yscale("log")
    if bound is not None:
        bsnr, bval = bound
        ax.semilogy(bsnr, bval, linestyle="--", label="union bound")
    _finish(fig, ax, path)


def plot_sa_trace(trace, path: str | Path) -> None:
    """Accepted-cost sequence of an annealing run."""
    fig, ax = _new_axes("acceptance count", "accepted cost")
    if trace:
        ax.semilogy([row[0] for row in trace], [max(row[1], 1e-300) for row in trace],
                    marker=".", linestyle="-")
    _finish(fig, ax, path)
