"""Matplotlib renderers for range-Doppler maps and comparison panels.

Figures mirror the delimited exports: velocity on the x axis, range on the
y axis, power in dB relative to the map maximum.  Ground-truth scatterers
are drawn as open black circles and CFAR detections as red crosses.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .specest import RangeDopplerMap, to_db

DISPLAY_FLOOR_DB = -60.0


def _extent(rd_map: RangeDopplerMap):
    half = rd_map.n_doppler // 2
    v_lo = -half * rd_map.velocity_bin_mps
    v_hi = (rd_map.n_doppler - half) * rd_map.velocity_bin_mps
    r_hi = rd_map.n_range * rd_map.range_bin_m
    return (v_lo, v_hi, 0.0, r_hi)


def _draw_map(ax, rd_map: RangeDopplerMap, title: str, truths=None, detections=None,
              floor_db: float = DISPLAY_FLOOR_DB, max_range_m: float | None = None):
    db = np.clip(to_db(rd_map), floor_db, 0.0)
    im = ax.imshow(
        db,
        origin="lower",
        aspect="auto",
        extent=_extent(rd_map),
        cmap="viridis",
        vmin=floor_db,
        vmax=0.0,
        interpolation="nearest",
    )
    if truths:
        tr = np.asarray([(v, r) for r, v in truths])
        ax.scatter(tr[:, 0], tr[:, 1], s=70, facecolors="none", edgecolors="black",
                   linewidths=1.2, label="truth")
    if detections:
        de = np.asarray([(d.velocity_mps, d.range_m) for d in detections])
        ax.scatter(de[:, 0], de[:, 1], s=45, marker="x", color="red",
                   linewidths=1.0, label="detection")
    if max_range_m is not None:
        ax.set_ylim(0.0, max_range_m)
    ax.set_xlabel("velocity (m/s)")
    ax.set_ylabel("range (m)")
    ax.set_title(title)
    if truths or detections:
        ax.legend(loc="upper right", fontsize=8)
    return im


def save_map_png(rd_map: RangeDopplerMap, path, title: str = "range-Doppler map",
                 truths=None, detections=None, floor_db: float = DISPLAY_FLOOR_DB,
                 max_range_m: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    im = _draw_map(ax, rd_map, title, truths, detections, floor_db, max_range_m)
    fig.colorbar(im, ax=ax, label="relative power (dB)")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_compare_png(map_a: RangeDopplerMap, map_b: RangeDopplerMap, path,
                     title_a: str = "periodogram", title_b: str = "sparse recovery",
                     truths=None, dets_a=None, dets_b=None,
                     floor_db: float = DISPLAY_FLOOR_DB,
                     max_range_m: float | None = None) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(11.0, 4.5), sharey=True)
    im = _draw_map(axes[0], map_a, title_a, truths, dets_a, floor_db, max_range_m)
    _draw_map(axes[1], map_b, title_b, truths, dets_b, floor_db, max_range_m)
    axes[1].set_ylabel("")
    fig.colorbar(im, ax=list(axes), label="relative power (dB)", fraction=0.03)
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_sweep_png(maps_by_comb: dict, path, truths=None,
                   floor_db: float = DISPLAY_FLOOR_DB,
                   max_range_m: float | None = None) -> None:
    """Panel of maps per comb size (2x2 for the standard four sizes)."""
    items = sorted(maps_by_comb.items())
    n = len(items)
    cols = 2 if n > 1 else 1
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(5.5 * cols, 4.0 * rows),
                             sharex=True, sharey=True, squeeze=False)
    im = None
    for ax, (kc, rd_map) in zip(axes.ravel(), items):
        im = _draw_map(ax, rd_map, f"comb size {kc}", truths, None, floor_db, max_range_m)
    for ax in axes.ravel()[n:]:
        ax.set_visible(False)
    if im is not None:
        fig.colorbar(im, ax=[a for a in axes.ravel()[:n]], label="relative power (dB)",
                     fraction=0.03)
    fig.savefig(path, dpi=130)
    plt.close(fig)
