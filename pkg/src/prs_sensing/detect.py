"""Two-dimensional cell-averaging CFAR and detection scoring.

The detector compares every cell against a threshold multiple of the mean
power in a rectangular training ring (guard band excluded).  The Doppler
axis is periodic, so training windows wrap there; the range axis is
truncated at the edges and the threshold multiplier is recomputed from the
number of training cells actually available.  A relative floor keeps the
reference level positive on mostly-zero maps (sparse solver output).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .specest import RangeDopplerMap, bin_to_physical, physical_to_bin


@dataclass(frozen=True)
class CfarConfig:
    """Window geometry and operating point.

    ``guard`` and ``train`` are (range, doppler) cell counts per side; the
    training ring is everything inside guard+train but outside the guard
    rectangle.  ``floor`` is the minimum training mean, as a fraction of
    the map maximum.
    """

    guard: tuple = (2, 2)
    train: tuple = (8, 4)
    p_fa: float = 1e-7
    floor: float = 1e-8

    def __post_init__(self) -> None:
        g_r, g_d = self.guard
        t_r, t_d = self.train
        if min(g_r, g_d, t_r, t_d) < 0:
            raise ValueError("guard and train cell counts must be >= 0")
        n_train = self.n_train()
        if n_train <= 0:
            raise ValueError("training window is empty; increase train cell counts")
        if not 0.0 < self.p_fa < 1.0:
            raise ValueError(f"p_fa must lie in (0, 1), got {self.p_fa}")
        if self.floor < 0:
            raise ValueError(f"floor must be >= 0, got {self.floor}")

    def n_train(self) -> int:
        """Training cells of an untruncated window."""
        g_r, g_d = self.guard
        t_r, t_d = self.train
        outer = (2 * (g_r + t_r) + 1) * (2 * (g_d + t_d) + 1)
        inner = (2 * g_r + 1) * (2 * g_d + 1)
        return outer - inner


@dataclass(frozen=True)
class Detection:
    range_bin: int
    doppler_bin: int
    power: float
    range_m: float
    velocity_mps: float


@dataclass
class MatchReport:
    """Detections scored against ground-truth scatterers.

    ``truth_distances_bins`` holds, per truth, the Chebyshev bin distance
    to the nearest detection (``inf`` when there are no detections).
    """

    n_truth: int
    n_detected_truth: int
    n_false: int
    truth_distances_bins: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_truth": self.n_truth,
            "n_detected_truth": self.n_detected_truth,
            "n_false": self.n_false,
            "truth_distances_bins": [
                None if not np.isfinite(d) else float(d) for d in self.truth_distances_bins
            ],
        }


def cfar_alpha(n_train: int, p_fa: float) -> float:
    """Cell-averaging threshold multiplier N*(p_fa^(-1/N) - 1), exact for
    exponentially distributed cell powers."""
    if n_train < 1:
        raise ValueError(f"n_train must be >= 1, got {n_train}")
    if not 0.0 < p_fa < 1.0:
        raise ValueError(f"p_fa must lie in (0, 1), got {p_fa}")
    return n_train * (p_fa ** (-1.0 / n_train) - 1.0)


def _integral(arr: np.ndarray) -> np.ndarray:
    out = np.zeros((arr.shape[0] + 1, arr.shape[1] + 1), dtype=np.float64)
    np.cumsum(arr, axis=0, out=out[1:, 1:])
    np.cumsum(out[1:, 1:], axis=1, out=out[1:, 1:])
    return out


def _window_sums(integral: np.ndarray, n_r: int, n_d: int, pad_r: int, pad_d: int, half_r: int, half_d: int) -> np.ndarray:
    """Sum over a (2*half_r+1, 2*half_d+1) window centered at every original
    cell, given the integral image of the padded array."""
    r0 = pad_r - half_r
    c0 = pad_d - half_d
    r1 = r0 + 2 * half_r + 1
    c1 = c0 + 2 * half_d + 1
    return (
        integral[r1:r1 + n_r, c1:c1 + n_d]
        - integral[r0:r0 + n_r, c1:c1 + n_d]
        - integral[r1:r1 + n_r, c0:c0 + n_d]
        + integral[r0:r0 + n_r, c0:c0 + n_d]
    )


def cfar_detect(rd_map: RangeDopplerMap, cfg: CfarConfig) -> list:
    """All cells whose power exceeds the adaptive threshold.

    Detections come back in row-major (range, then doppler) order with
    physical coordinates attached.
    """
    power = rd_map.power
    n_r, n_d = power.shape
    g_r, g_d = cfg.guard
    t_r, t_d = cfg.train
    w_r, w_d = g_r + t_r, g_d + t_d
    if n_r <= 2 * w_r + 1 or n_d <= 2 * w_d + 1:
        raise ValueError(
            f"map {n_r}x{n_d} too small for CFAR window "
            f"{2 * w_r + 1}x{2 * w_d + 1} (need strictly larger dimensions)"
        )

    # Doppler is a DFT axis: wrap. Range: zero-pad and track cell validity.
    wrapped = np.concatenate([power[:, n_d - w_d:], power, power[:, :w_d]], axis=1) if w_d else power
    valid = np.ones_like(wrapped)
    padded = np.pad(wrapped, ((w_r, w_r), (0, 0))) if w_r else wrapped
    valid = np.pad(valid, ((w_r, w_r), (0, 0))) if w_r else valid

    s_int = _integral(padded)
    c_int = _integral(valid)
    outer_sum = _window_sums(s_int, n_r, n_d, w_r, w_d, w_r, w_d)
    inner_sum = _window_sums(s_int, n_r, n_d, w_r, w_d, g_r, g_d)
    outer_cnt = _window_sums(c_int, n_r, n_d, w_r, w_d, w_r, w_d)
    inner_cnt = _window_sums(c_int, n_r, n_d, w_r, w_d, g_r, g_d)

    train_sum = outer_sum - inner_sum
    train_cnt = np.rint(outer_cnt - inner_cnt)
    train_cnt = np.maximum(train_cnt, 1.0)
    alpha = train_cnt * (cfg.p_fa ** (-1.0 / train_cnt) - 1.0)
    reference = np.maximum(train_sum / train_cnt, cfg.floor * float(power.max()))
    hits = power > alpha * reference

    detections = []
    for i, j in np.argwhere(hits):
        range_m, velocity = bin_to_physical(rd_map, int(i), int(j))
        detections.append(
            Detection(
                range_bin=int(i),
                doppler_bin=int(j),
                power=float(power[i, j]),
                range_m=range_m,
                velocity_mps=velocity,
            )
        )
    return detections


def match_detections(
    detections,
    truths,
    rd_map: RangeDopplerMap,
    tol_bins: float = 2.0,
) -> MatchReport:
    """Score detections against (range_m, velocity_mps) ground truths.

    A truth counts as detected when a detection lies within ``tol_bins`` in
    both axes; each detection is assigned only to its nearest truth
    (Chebyshev distance), and detections matching no truth are false alarms.
    """
    if tol_bins < 0:
        raise ValueError(f"tol_bins must be >= 0, got {tol_bins}")
    truths = list(truths)
    detections = list(detections)
    n_truth = len(truths)
    truth_bins = np.array(
        [physical_to_bin(rd_map, r, v) for r, v in truths], dtype=float
    ).reshape(-1, 2)

    detected = np.zeros(n_truth, dtype=bool)
    nearest = np.full(n_truth, np.inf)
    n_false = 0
    for det in detections:
        if n_truth == 0:
            n_false += 1
            continue
        d_r = np.abs(truth_bins[:, 0] - det.range_bin)
        d_d = np.abs(truth_bins[:, 1] - det.doppler_bin)
        dist = np.maximum(d_r, d_d)
        k = int(np.argmin(dist))
        nearest = np.minimum(nearest, dist)
        if dist[k] <= tol_bins:
            detected[k] = True
        else:
            n_false += 1

    return MatchReport(
        n_truth=n_truth,
        n_detected_truth=int(detected.sum()),
        n_false=n_false,
        truth_distances_bins=list(nearest),
    )
