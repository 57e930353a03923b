"""Render simulation CSV outputs into raster figures.

Five figure kinds cover the benchmark plots: the rate-function panels,
short and long well-mixed time series, one field snapshot heatmap, and
the midpoint probe series. Stem cells are always drawn blue and
chondrocytes red. Layout and dpi are fixed so identical inputs render
identical images.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import (RATES_COLUMNS, SNAPSHOT_COLUMNS, STATE_COLUMNS,
                      SchemaError, load_columns)

FIGURE_KINDS = ("alpha", "ode-short", "ode-long", "pde-snapshot", "pde-probe")

HMSC_COLOR = "tab:blue"
CHONDRO_COLOR = "tab:red"
DPI = 150


@dataclass(frozen=True)
class FigureSpec:
    figure: str        # one of FIGURE_KINDS
    input: str         # source CSV
    output: str        # raster image path

    def __post_init__(self):
        if self.figure not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.figure!r} "
                              f"(have {FIGURE_KINDS})")


def render(spec: FigureSpec) -> str:
    fig = _RENDERERS[spec.figure](spec.input)
    fig.savefig(spec.output, dpi=DPI)
    plt.close(fig)
    return spec.output


def _render_alpha(path: str):
    cols = load_columns(path, RATES_COLUMNS)
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), constrained_layout=True)
    panels = [
        (axes[0, 0], cols["S"], cols["alpha1_S"], "S", r"$\alpha_{1,S}$"),
        (axes[0, 1], cols["chi"], cols["alpha1_chi"], r"$\chi$ [mol/$\mu m^2$]",
         r"$\alpha_{1,\chi}$"),
        (axes[1, 0], cols["S"], cols["alpha2_S"], "S", r"$\alpha_{2,S}$"),
        (axes[1, 1], cols["chi"], cols["alpha2_chi"], r"$\chi$ [mol/$\mu m^2$]",
         r"$\alpha_{2,\chi}$"),
    ]
    for ax, x, y, xlab, ylab in panels:
        ax.plot(x, y, color="tab:green")
        ax.set_xlabel(xlab)
        ax.set_ylabel(ylab)
        ax.grid(True, alpha=0.3)
    fig.suptitle("Rate function factors")
    return fig


def _series_panels(path: str, fields, title: str):
    cols = load_columns(path, STATE_COLUMNS)
    t = cols["t"]
    n = len(fields)
    ncols = 2 if n > 3 else n
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.5 * ncols, 3.2 * nrows),
                             constrained_layout=True, squeeze=False)
    flat = axes.ravel()
    for ax in flat[n:]:
        ax.set_visible(False)
    for ax, field in zip(flat, fields):
        if field == "cells":
            ax.plot(t, cols["c1"], color=HMSC_COLOR, label="hMSCs")
            ax.plot(t, cols["c2"], color=CHONDRO_COLOR, label="chondrocytes")
            ax.set_ylabel(r"density [1/$\mu m^2$]")
            ax.legend()
        else:
            labels = {"chi": (r"$\chi$ [mol/$\mu m^2$]", "tab:purple"),
                      "h": (r"$h$ [mol/$\mu m^2$]", "tab:olive"),
                      "tau": (r"$\tau$ [mol/$\mu m^2$]", "tab:brown")}
            ylab, color = labels[field]
            ax.plot(t, cols[field], color=color)
            ax.set_ylabel(ylab)
        ax.set_xlabel("t [h]")
        ax.grid(True, alpha=0.3)
    fig.suptitle(title)
    return fig


def _render_ode_short(path: str):
    return _series_panels(path, ("cells", "chi", "h", "tau"),
                          "Well-mixed run")


def _render_ode_long(path: str):
    return _series_panels(path, ("cells", "chi", "tau"),
                          "Well-mixed run with medium renewal")


def _render_pde_probe(path: str):
    return _series_panels(path, ("cells", "chi", "h", "tau"),
                          "Field run, midpoint probe")


def _render_pde_snapshot(path: str):
    cols = load_columns(path, SNAPSHOT_COLUMNS)
    xi = cols["x_index"].astype(int)
    yi = cols["y_index"].astype(int)
    nx, ny = xi.max() + 1, yi.max() + 1
    field = np.full((nx, ny), np.nan)
    field[xi, yi] = cols["value"]
    dx_vals = np.unique(np.diff(np.unique(cols["x_um"])))
    fig, ax = plt.subplots(figsize=(6.4, 5.4), constrained_layout=True)
    extent = (cols["x_um"].min(), cols["x_um"].max(),
              cols["y_um"].min(), cols["y_um"].max())
    im = ax.imshow(field.T, origin="lower", extent=extent, cmap="viridis",
                   interpolation="nearest")
    ax.set_xlabel(r"x [$\mu m$]")
    ax.set_ylabel(r"y [$\mu m$]")
    ax.set_aspect("equal")
    fig.colorbar(im, ax=ax, label="value")
    fig.suptitle("Field snapshot")
    return fig


_RENDERERS = {
    "alpha": _render_alpha,
    "ode-short": _render_ode_short,
    "ode-long": _render_ode_long,
    "pde-snapshot": _render_pde_snapshot,
    "pde-probe": _render_pde_probe,
}
