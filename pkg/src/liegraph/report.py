"""Optional figures for CLI outputs. matplotlib is imported only when a figure is requested."""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigurationError


def _pyplot():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise ConfigurationError("--plot needs matplotlib; install the 'plot' extra") from exc
    return plt


def _bar(rows, xkey, ykey, path: Path, title: str, logy: bool = False):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [str(r[xkey]) for r in rows]
    ys = [float(r[ykey]) for r in rows]
    ax.bar(range(len(xs)), ys)
    ax.set_xticks(range(len(xs)))
    ax.set_xticklabels(xs, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel(ykey)
    ax.set_title(title)
    if logy:
        ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _line(rows, xkey, ykeys, path: Path, title: str):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [float(r[xkey]) for r in rows]
    for key in ykeys:
        ax.plot(xs, [float(r[key]) for r in rows], marker="o", label=key)
    ax.set_xlabel(xkey)
    ax.legend()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


_PLOTS = {
    "limit-spectrum": lambda rows, p: _bar(rows, "lambda_coords", "c", p, "limiting eigenvalues"),
    "rankone-table": lambda rows, p: _bar(rows, "k", "c", p, "rank-one limiting eigenvalues"),
    "simulate-gaussian": lambda rows, p: _line(rows, "trial", ["top_ratio", "gk_delta"], p, "Gaussian regime"),
    "simulate-poisson": lambda rows, p: _bar(rows, "s", "empirical", p, "empirical moments", logy=True),
    "circuit-table": lambda rows, p: _bar(rows, "reduced", "multiplicity", p, "circuit expansion"),
    "moments": lambda rows, p: _bar(rows, "s", "M", p, "limit moments", logy=True),
    "lr": lambda rows, p: _bar(rows, "nu", "c", p, "Littlewood-Richardson coefficients"),
    "volumes": lambda rows, p: _bar(rows, "group", "vol_G_kp", p, "group volumes", logy=True),
}


def render(command: str, rows: list[dict], path: Path) -> Path:
    """Draw the figure for a command's rows into ``path`` (PNG)."""
    if command not in _PLOTS:
        raise ConfigurationError(f"no figure defined for {command}")
    if not rows:
        raise ConfigurationError("nothing to plot")
    _PLOTS[command](rows, path)
    return path
