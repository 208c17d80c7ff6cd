"""Figure construction: plate carree point maps and P(theta) curves."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import MapDataset, rotate_coloured_to_north

_CMAP = "viridis"  # one colourmap for every figure
_DPI = 150
# constant PNG metadata so identical inputs give identical bytes
_METADATA = {"Software": "plotview"}


def build_map_figure(dataset: MapDataset, rotate_north: bool = False):
    if rotate_north:
        dataset = rotate_coloured_to_north(dataset)
    fig, ax = plt.subplots(figsize=(9, 4.5))
    sc = ax.scatter(dataset.lon, dataset.lat, c=dataset.p_i, cmap=_CMAP,
                    vmin=0.0, vmax=1.0, s=4, linewidths=0)
    ax.set_xlim(-180, 180)
    ax.set_ylim(-90, 90)
    ax.set_xlabel("longitude [deg]")
    ax.set_ylabel("latitude [deg]")
    fig.colorbar(sc, ax=ax, label="success probability per point")
    return fig, ax


def render_map(csv_dataset: MapDataset, out_image: str,
               rotate_north: bool = False) -> str:
    fig, _ = build_map_figure(csv_dataset, rotate_north)
    fig.savefig(out_image, dpi=_DPI, metadata=_METADATA)
    plt.close(fig)
    return out_image


def _integer_guides(theta_min: float, theta_max: float) -> list[float]:
    """Angles 2*pi/n, n integer, inside the plotted range."""
    guides = []
    n = 2
    while 2 * math.pi / n >= theta_min:
        value = 2 * math.pi / n
        if value <= theta_max:
            guides.append(value)
        n += 1
        if n > 720:
            break
    return guides


def build_curve_figure(columns: dict[str, np.ndarray], relative: bool = False):
    theta = columns["theta"]
    order = np.argsort(theta)
    fig, ax = plt.subplots(figsize=(8, 5))
    if relative:
        ax.plot(theta[order], columns["p_minus_hem"][order], "o-",
                label="P - P_hem")
        ax.axhline(0.0, linestyle=":", color="black", label="hemisphere")
        ax.set_ylabel("success probability above hemisphere")
    else:
        ax.plot(theta[order], columns["p"][order], "o-", label="P")
        ax.plot(theta[order], columns["p_hem"][order], ":", color="black",
                label="hemisphere 1 - theta/pi")
        ax.set_ylabel("success probability")
    lo = float(theta.min())
    hi = float(theta.max())
    for guide in _integer_guides(lo, hi):
        ax.axvline(guide, color="grey", alpha=0.4, linewidth=0.8)
    ax.set_xlabel("jumping angle theta [rad]")
    ax.legend()
    return fig, ax


def render_success_curve(columns: dict[str, np.ndarray], out_image: str,
                         relative: bool = False) -> str:
    fig, _ = build_curve_figure(columns, relative)
    fig.savefig(out_image, dpi=_DPI, metadata=_METADATA)
    plt.close(fig)
    return out_image
