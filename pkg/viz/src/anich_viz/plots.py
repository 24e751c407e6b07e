"""The three figure kinds: error curves, mass/energy traces, filmstrips."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import FormatError, list_snapshots, read_log, read_meta, read_report, read_snapshot

#: shared symmetric color range for phase-field snapshots
FIELD_RANGE = (-1.1, 1.1)


def fit_slope(taus, errors) -> float:
    """Least-squares slope of log(error) against log(tau), finite points only."""
    taus = np.asarray(taus, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = np.isfinite(errors) & (errors > 0)
    if keep.sum() < 2:
        raise FormatError("need at least two finite error points to fit a slope")
    return float(np.polyfit(np.log(taus[keep]), np.log(errors[keep]), 1)[0])


def _run_label(run_dir) -> str:
    try:
        return str(read_meta(run_dir).get("name", Path(run_dir).name))
    except OSError:
        return Path(run_dir).name


def plot_error_curves(run_dirs, output, title="temporal convergence"):
    """Log-log final-time errors per run directory plus a slope-2 guide."""
    if len(run_dirs) < 2:
        raise FormatError("error curves need at least two run directories")
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    all_taus = []
    for run_dir in run_dirs:
        table = read_report(Path(run_dir) / "report.txt")
        keep = table.finite
        ax.loglog(table.taus[keep], table.errors[keep], "o-",
                  label=f"{_run_label(run_dir)} (slope {fit_slope(table.taus, table.errors):.2f})")
        if (~keep).any():
            ax.plot(table.taus[~keep], np.full((~keep).sum(), np.nan), "x")
        all_taus.extend(table.taus[keep])
    ref = np.array([min(all_taus), max(all_taus)])
    anchor = read_report(Path(run_dirs[0]) / "report.txt")
    scale = anchor.errors[anchor.finite][-1] / anchor.taus[anchor.finite][-1] ** 2
    ax.loglog(ref, scale * ref**2, "k--", linewidth=1, label="slope 2")
    ax.set_xlabel("time step")
    ax.set_ylabel("final-time L2 error")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(output, dpi=150)
    plt.close(fig)
    return Path(output)


def plot_mass_energy(run_dirs, output, title="mass and energy"):
    """Two panels: relative mass drift and the two energy traces."""
    fig, (ax_mass, ax_energy) = plt.subplots(1, 2, figsize=(9.5, 3.8))
    for run_dir in run_dirs:
        log = read_log(Path(run_dir) / "log.csv")
        label = _run_label(run_dir)
        ax_mass.plot(log.t, log.rel_mass_err, label=label)
        ax_energy.plot(log.t, log.energy_modified, label=f"{label} (modified)")
        ax_energy.plot(log.t, log.energy_original, "--", label=f"{label} (original)")
    ax_mass.set_xlabel("t")
    ax_mass.set_ylabel("relative mass error")
    ax_mass.ticklabel_format(axis="y", style="sci", scilimits=(-2, 2))
    ax_energy.set_xlabel("t")
    ax_energy.set_ylabel("energy")
    ax_energy.legend(fontsize=7)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(output, dpi=150)
    plt.close(fig)
    return Path(output)


def plot_filmstrip(run_dirs, output, title=None):
    """Snapshots of one run side by side on the shared symmetric scale."""
    if len(run_dirs) != 1:
        raise FormatError("a filmstrip renders exactly one run directory")
    run_dir = Path(run_dirs[0])
    snaps = [read_snapshot(p) for p in list_snapshots(run_dir)]
    if not snaps:
        raise FormatError(f"{run_dir}: no snapshots to render")
    fig, axes = plt.subplots(1, len(snaps), figsize=(3.0 * len(snaps), 3.2))
    axes = np.atleast_1d(axes)
    vmin, vmax = FIELD_RANGE
    mappable = None
    for ax, snap in zip(axes, snaps):
        if snap.dim == 2:
            mappable = ax.imshow(snap.values, origin="lower", vmin=vmin, vmax=vmax,
                                 extent=(0, snap.length[0], 0, snap.length[1]),
                                 cmap="RdBu_r")
        else:
            x = np.arange(snap.n[0]) * snap.length[0] / snap.n[0]
            ax.plot(x, snap.values)
            ax.set_ylim(vmin, vmax)
        ax.set_title(f"t = {snap.time:.4g}", fontsize=9)
    if mappable is not None:
        fig.colorbar(mappable, ax=list(axes), shrink=0.8)
    fig.suptitle(title or _run_label(run_dir))
    fig.savefig(output, dpi=150)
    plt.close(fig)
    return Path(output)


PLOT_KINDS = {
    "errors": plot_error_curves,
    "massenergy": plot_mass_energy,
    "filmstrip": plot_filmstrip,
}
