"""Figures for CLI reports (matplotlib, Agg backend)."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def write_csv(path: Path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)
    return path


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def histogram_figure(points, path: Path, bins: int = 50, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.hist(np.asarray(points, dtype=float), bins=bins, range=(0, 1), density=True, color="#4477aa")
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    ax.set_xlabel("fractional part")
    ax.set_ylabel("density")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def discrepancy_figure(series: Sequence[tuple], path: Path, title: str = "") -> Path:
    """log-log plot of (N, D*_N) with the 1/N reference slope."""
    Ns = np.array([s[0] for s in series], dtype=float)
    D = np.array([s[1] for s in series], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.loglog(Ns, D, "o-", label="D*")
    ax.loglog(Ns, D[0] * Ns[0] / Ns, "k--", lw=0.8, label="1/N")
    ax.set_xlabel("N")
    ax.set_ylabel("star discrepancy")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def window_figure(starts: Sequence[int], values: Sequence[float], path: Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(starts, values, ".-", ms=3)
    ax.set_xlabel("window start")
    ax.set_ylabel("window discrepancy")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def witness_figure(ns: Sequence[int], N: int, path: Path, title: str = "") -> Path:
    """Cumulative count of witnesses up to N."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ns = sorted(ns)
    ax.step([0] + list(ns) + [N], [0] + list(range(1, len(ns) + 1)) + [len(ns)], where="post")
    ax.set_xlabel("n")
    ax.set_ylabel("witnesses up to n")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def bar_figure(labels: Sequence[str], values: Sequence[float], path: Path, title: str = "", ylabel: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(values)), values, color="#66aa55")
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
