"""Matplotlib renderings of the report artifacts (written next to the CSVs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .curves import RegionLabel, SynthesisDiagram
from .model import DerivedModel

_REGION_ORDER = [
    RegionLabel.THETA, RegionLabel.THETA_COMPLEMENT, RegionLabel.SSET,
    RegionLabel.TSET, RegionLabel.V, RegionLabel.S_CURVE,
    RegionLabel.SIGMA_CURVE, RegionLabel.GAMMA_CURVE,
]


def plot_diagram(model: DerivedModel, diagram: SynthesisDiagram, path: str) -> None:
    """Switching curves over the shaded region partition."""
    fig, ax = plt.subplots(figsize=(7, 5))
    codes = {lab: i for i, lab in enumerate(_REGION_ORDER)}
    grid = np.vectorize(lambda l: codes[l])(diagram.labels)
    ax.pcolormesh(diagram.x_grid, diagram.t_grid, grid.T, cmap="Pastel1",
                  vmin=0, vmax=len(_REGION_ORDER) - 1, shading="auto")
    styles = {"S": ("k-", "S (last switch)"), "sigma": ("b--", "sigma (first switch)"),
              "Gamma": ("r-.", "Gamma")}
    for name, (xs, ts) in diagram.curve_samples.items():
        style, label = styles.get(name, ("g:", name))
        keep = (ts > -0.05 * model.horizon) & (ts <= model.horizon) & (xs >= 0) & (xs <= 1)
        ax.plot(xs[keep], ts[keep], style, label=label)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, model.horizon)
    ax.set_xlabel("infected proportion x")
    ax.set_ylabel("time t")
    ax.set_title(f"regime: {model.regime.branch.value} / {model.regime.sub_case.value}")
    ax.legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_trajectory(times, states, controls, path: str, title: str = "") -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5),
                                   height_ratios=[3, 1])
    ax1.plot(times, states, "k-")
    ax1.set_ylabel("x(t)")
    if title:
        ax1.set_title(title)
    ax2.step(times, controls, "b-", where="post")
    ax2.set_ylabel("w(t)")
    ax2.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_value_surface(x_nodes, t_nodes, values, path: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 5))
    pc = ax.pcolormesh(x_nodes, t_nodes, np.asarray(values).T, shading="auto",
                       cmap="viridis")
    fig.colorbar(pc, ax=ax, label="W(x0, t0)")
    ax.set_xlabel("x0")
    ax.set_ylabel("t0")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_extremal_field(extremals, path: str) -> None:
    """State arcs in the (x, t) plane, screening intervals highlighted."""
    fig, ax = plt.subplots(figsize=(7, 5))
    for ext in extremals:
        on = ext.controls > 0
        ax.plot(ext.states, ext.times, "-", color="0.6", lw=0.6)
        if on.any():
            ax.plot(ext.states[on], ext.times[on], "b.", ms=1)
        if ext.switch_states.size:
            ax.plot(ext.switch_states, ext.switch_times, "r.", ms=4)
    ax.set_xlim(-0.02, 1.02)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title("backward extremal field (switches in red)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
