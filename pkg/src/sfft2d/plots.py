"""Figure rendering for benchmark summaries (written to files, never shown)."""

from __future__ import annotations

import os

__all__ = ["runtime_figure", "error_figure", "save_all_figures"]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


_STYLES = {"dense": "o-", "sfft": "s-", "atsfft": "^-"}


def runtime_figure(summary, k: int, path) -> None:
    """Log-log mean runtime vs size, one line per algorithm."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    sizes = summary.sizes()
    for algo in summary.algorithms():
        pts = [(n, summary.cell(algo, n, k)) for n in sizes]
        pts = [(n, c.mean_time) for n, c in pts if c is not None and c.trials > 0]
        if pts:
            ax.loglog(*zip(*pts), _STYLES.get(algo, "-"), base=2, label=algo)
    ax.set_xlabel("matrix side n")
    ax.set_ylabel("mean runtime [s]")
    ax.set_title(f"runtime vs size, k={k}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def error_figure(summary, k: int, path) -> None:
    """Mean spectral error vs size on a log axis."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    sizes = summary.sizes()
    for algo in summary.algorithms():
        pts = [(n, summary.cell(algo, n, k)) for n in sizes]
        pts = [(n, max(c.mean_error, 1e-18)) for n, c in pts if c is not None and c.trials > 0]
        if pts:
            ax.semilogy(*zip(*pts), _STYLES.get(algo, "-"), label=algo)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("matrix side n")
    ax.set_ylabel("mean average-L1 error")
    ax.set_title(f"error vs size, k={k}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_all_figures(summary, outdir, stem: str = "bench") -> list[str]:
    """Render runtime and error figures per sparsity; returns written paths."""
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for k in summary.sparsities():
        rt = os.path.join(outdir, f"{stem}_runtime_k{k}.png")
        runtime_figure(summary, k, rt)
        paths.append(rt)
        er = os.path.join(outdir, f"{stem}_error_k{k}.png")
        error_figure(summary, k, er)
        paths.append(er)
    return paths
