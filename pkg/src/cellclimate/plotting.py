"""Figures written next to the CSV outputs (Agg backend, PNG)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from .integrator import QUARTER, YEAR  # noqa: E402
from .simulate import ScenarioReport  # noqa: E402
from .synthesis import DocTable, controllable_region  # noqa: E402

mm = 0.0393701
FULL_WIDTH = 180 * mm


def configure_matplotlib() -> None:
    plt.rc("font", size=8)
    plt.rc("axes", titlesize=9, labelsize=8)
    plt.rc("legend", fontsize=7, frameon=False)


def save_fig(fig, path: str | Path, dpi: int = 150) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
    return path


def _extent(doc: DocTable):
    r = doc.grid.region
    return (r.t_a_min, r.t_a_max, r.t_s_min, r.t_s_max)


def plot_doc(doc: DocTable, path: str | Path, title: str = "") -> Path:
    """Controllable region (left) and chosen control level per cell (right)."""
    configure_matplotlib()
    _, mask = controllable_region(doc)
    u = doc.chosen_u().reshape(doc.grid.n_a, doc.grid.n_s)
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(FULL_WIDTH, FULL_WIDTH * 0.42), constrained_layout=True)
    ext = _extent(doc)

    # arrays are indexed [i (t_a), j (t_s)]; transpose so t_a runs along x
    ax0.imshow(mask.T, origin="lower", extent=ext, aspect="auto",
               cmap=ListedColormap(["#dddddd", "#3b6ea8"]), vmin=0, vmax=1, interpolation="nearest")
    ax0.set_title(f"controllable cells: {int(mask.sum())} / {mask.size}")

    n_lev = len(doc.levels)
    half = 50 * doc.levels[-1] / (n_lev - 1) if n_lev > 1 else 0.5
    cmap = plt.get_cmap("viridis", n_lev).copy()
    cmap.set_bad("#ffffff")
    im = ax1.imshow(np.ma.masked_invalid(u.T * 100), origin="lower", extent=ext, aspect="auto",
                    cmap=cmap, vmin=-half, vmax=100 * doc.levels[-1] + half, interpolation="nearest")
    fig.colorbar(im, ax=ax1, label="blocked insolation u (%)")
    ax1.set_title("optimal control table")

    for c in doc.targets:
        x = doc.grid.center(c)
        for ax in (ax0, ax1):
            ax.plot(x.t_a, x.t_s, marker="s", ms=3, mfc="none", mec="red", mew=0.8)
    for ax in (ax0, ax1):
        ax.set_xlabel("$T_A$ (K)")
        ax.set_ylabel("$T_s$ (K)")
    if title:
        fig.suptitle(title)
    return save_fig(fig, path)


def plot_response(report: ScenarioReport, path: str | Path) -> Path:
    """Closed-loop vs. uncontrolled temperatures, and the applied control."""
    configure_matplotlib()
    traj, base = report.trajectory, report.uncontrolled
    unit = {QUARTER: "quarters", YEAR: "years"}.get(report.config.tau, "intervals")
    xs, xb = traj.as_array(), base.as_array()
    kt, kb = np.arange(len(xs)), np.arange(len(xb))

    fig, axes = plt.subplots(3, 1, figsize=(FULL_WIDTH * 0.6, FULL_WIDTH * 0.75),
                             sharex=True, constrained_layout=True)
    for ax, col, name in ((axes[0], 0, "$T_A$"), (axes[1], 1, "$T_s$")):
        ax.plot(kb, xb[:, col], color="0.55", lw=1, label="no control")
        ax.plot(kt, xs[:, col], color="C3", lw=1.2, label="DOC feedback")
        ax.axhline(report.config.target[col], color="k", lw=0.6, ls=":", label="target")
        ax.set_ylabel(f"{name} (K)")
    axes[0].legend(loc="upper right")
    if report.steps_to_target is not None:
        for ax in axes[:2]:
            ax.axvline(report.steps_to_target, color="C3", lw=0.6, ls="--")
    if traj.controls:
        axes[2].step(np.arange(len(traj.controls)), np.asarray(traj.controls) * 100,
                     where="post", color="C0", lw=1.2)
    axes[2].set_ylim(-0.1 * report.config.u_max * 100, 1.1 * max(report.config.u_max, 1e-9) * 100)
    axes[2].set_ylabel("u (%)")
    axes[2].set_xlabel(unit)
    axes[0].set_title(f"{report.name}: response of system and control input")
    return save_fig(fig, path)
