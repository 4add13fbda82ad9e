"""Report figures. Rendered headless with the Agg backend."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)
    return path


def bar_rates(rates: Mapping[str, float], path: Path, title: str, ylabel: str = "share",
              reference: Mapping[str, float] | None = None) -> Path:
    labels = list(rates)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.bar(labels, [rates[k] for k in labels], color="#4C72B0", label="observed")
    if reference:
        ax.plot(labels, [reference.get(k, float("nan")) for k in labels], "o", color="#C44E52", label="target")
        ax.legend(loc="lower left", fontsize=8)
    ax.set_ylim(0, 1)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return _save(fig, path)


def grouped_means(table: Mapping[str, Mapping[str, Mapping]], path: Path, title: str) -> Path:
    """Mean scale and opacity side by side for each group, with SD whiskers."""
    groups = [g for g in table if table[g]["scale"]["n"]]
    fig, ax = plt.subplots(figsize=(max(5, 0.8 * len(groups) + 2), 3.4))
    xs = range(len(groups))
    for offset, dim, color in ((-0.2, "scale", "#55A868"), (0.2, "opacity", "#8172B2")):
        means = [table[g][dim]["mean"] for g in groups]
        sds = [table[g][dim]["sd"] for g in groups]
        ax.bar([x + offset for x in xs], means, width=0.4, yerr=sds, capsize=2, color=color, label=dim)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(groups, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0, 1.6)
    ax.legend(fontsize=8)
    ax.set_title(title)
    return _save(fig, path)
