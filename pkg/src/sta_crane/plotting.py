"""Static figures for CLI reports.

The two drawing functions only depend on numpy and matplotlib so their
source can be copied verbatim into a standalone script (``--plot-script``).
"""
from __future__ import annotations

import inspect
from dataclasses import dataclass, field


@dataclass(frozen=True)
class PlotSpec:
    kind: str  # "line" or "contour"
    x: str
    ys: tuple[str, ...]
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    group: str | None = None  # column whose distinct values become separate curves
    logy: bool = False
    extra: dict = field(default_factory=dict)


def line_figure(csv_path, png_path, x, ys, xlabel="", ylabel="", title="", group=None, logy=False):
    import numpy as np
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = np.genfromtxt(csv_path, delimiter=",", names=True)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    groups = [None] if group is None else sorted(set(data[group].tolist()))
    for value in groups:
        rows = data if value is None else data[data[group] == value]
        for y in ys:
            label = y if value is None else f"{y}, {group}={value:g}"
            ax.plot(rows[x], rows[y], label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel or x)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def contour_figure(csv_path, png_path, x, y, z, xlabel="", ylabel="", title=""):
    import numpy as np
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = np.genfromtxt(csv_path, delimiter=",", names=True)
    xs = np.unique(data[x])
    ys = np.unique(data[y])
    grid = np.full((ys.size, xs.size), np.nan)
    for row in data:
        grid[np.searchsorted(ys, row[y]), np.searchsorted(xs, row[x])] = row[z]
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    cs = ax.contourf(xs, ys, grid, levels=20)
    fig.colorbar(cs, ax=ax, label=z)
    ax.set_xlabel(xlabel or x)
    ax.set_ylabel(ylabel or y)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def _call_args(spec: PlotSpec):
    if spec.kind == "line":
        return line_figure, dict(x=spec.x, ys=list(spec.ys), xlabel=spec.xlabel, ylabel=spec.ylabel,
                                 title=spec.title, group=spec.group, logy=spec.logy)
    if spec.kind == "contour":
        return contour_figure, dict(x=spec.x, y=spec.extra["y"], z=spec.ys[0], xlabel=spec.xlabel,
                                    ylabel=spec.ylabel, title=spec.title)
    raise ValueError(f"unknown plot kind {spec.kind!r}")


def render(spec: PlotSpec, csv_path, png_path) -> None:
    func, kwargs = _call_args(spec)
    func(str(csv_path), str(png_path), **kwargs)


def script_source(spec: PlotSpec, csv_path, png_path) -> str:
    """Standalone Python script that redraws the figure from the CSV."""
    func, kwargs = _call_args(spec)
    args = ", ".join(f"{k}={v!r}" for k, v in kwargs.items())
    return (
        "#!/usr/bin/env python3\n"
        f'"""Redraw {png_path} from {csv_path}."""\n\n\n'
        f"{inspect.getsource(func)}\n\n"
        'if __name__ == "__main__":\n'
        f"    {func.__name__}({str(csv_path)!r}, {str(png_path)!r}, {args})\n"
    )
