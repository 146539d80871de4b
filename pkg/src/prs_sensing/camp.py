"""Complex approximate message passing for sparse range-Doppler recovery.

The solver iterates between the range-Doppler domain and the measurement
(resource-element) domain:

1. form a noisy full-grid estimate from the running residual,
2. estimate the noise scale from the median magnitude,
3. shrink every cell with complex soft thresholding,
4. rebuild the residual from the masked re-projection plus an Onsager
   correction proportional to the support fraction of the estimate.

Soft thresholding produces exact zeros, so the output support is
well-defined without an epsilon and the returned map is genuinely sparse.
The transforms share the unitary convention of :mod:`prs_sensing.specest`,
making the masked operator and its adjoint an exact pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .prs_grid import ResourceSet
from .specest import (
    ChannelEstimate,
    RangeDopplerMap,
    from_range_doppler,
    map_calibration,
    to_range_doppler,
)

RESIDUAL_VARIANTS = ("current_estimate", "literal_previous")


class CampDivergenceError(RuntimeError):
    """Raised when non-finite values appear mid-iteration."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite values in CAMP iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class CampConfig:
    """Solver knobs.

    ``tau`` scales the per-iteration threshold; ``residual_variant`` selects
    whether the data-fidelity re-projection uses the current estimate
    (default, the standard recursion) or the previous one (the literal
    published form, kept for fidelity experiments).  ``stop_tol`` > 0
    enables early stopping on the relative change of the estimate.
    """

    tau: float
    n_iter: int = 50
    residual_variant: str = "current_estimate"
    stop_tol: float = 0.0

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.n_iter < 1:
            raise ValueError(f"n_iter must be >= 1, got {self.n_iter}")
        if self.residual_variant not in RESIDUAL_VARIANTS:
            raise ValueError(
                f"residual_variant must be one of {RESIDUAL_VARIANTS}, got {self.residual_variant!r}"
            )
        if self.stop_tol < 0:
            raise ValueError(f"stop_tol must be >= 0, got {self.stop_tol}")


@dataclass(frozen=True)
class CampIterationStats:
    iteration: int
    sigma: float
    support_size: int
    residual_energy: float


@dataclass
class SparseMap:
    """Sparse complex range-Doppler estimate plus solver diagnostics."""

    values: np.ndarray
    iterations_run: int
    final_sigma: float
    support_size: int
    history: list = field(default_factory=list)
    delta_f_hz: float = 1.0
    t_sym_s: float = 2.0
    f_c_hz: float = 1.0


def soft_threshold(x, threshold: float):
    """Shrink complex magnitudes by ``threshold``, zeroing anything at or
    below it; phase is preserved.  Works elementwise on arrays."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    x = np.asarray(x, dtype=np.complex128)
    mag = np.abs(x)
    keep = mag > threshold
    scale = np.zeros_like(mag)
    np.divide(mag - threshold, mag, out=scale, where=keep)
    out = x * scale
    if out.ndim == 0:
        return complex(out)
    return out


def tau_from_pfa(p_fa: float) -> float:
    """Threshold multiplier for a desired false-alarm probability,
    sqrt(-ln p_fa)."""
    if not 0.0 < p_fa < 1.0:
        raise ValueError(f"p_fa must lie in (0, 1), got {p_fa}")
    return math.sqrt(-math.log(p_fa))


def lower_median(values: np.ndarray) -> float:
    """Median with deterministic tie-breaking: for even counts, the lower
    of the two middle order statistics."""
    flat = np.asarray(values).ravel()
    if flat.size == 0:
        raise ValueError("cannot take the median of an empty array")
    k = (flat.size - 1) // 2
    return float(np.partition(flat, k)[k])


def _shrink(values: np.ndarray, magnitudes: np.ndarray, threshold: float) -> np.ndarray:
    """soft_threshold with the magnitudes already in hand."""
    keep = magnitudes > threshold
    scale = np.zeros_like(magnitudes)
    np.divide(magnitudes - threshold, magnitudes, out=scale, where=keep)
    return values * scale


def camp_run(est: ChannelEstimate, alloc: ResourceSet, cfg: CampConfig) -> SparseMap:
    """Run the iterative solver on a (possibly incomplete) channel estimate.

    Returns the final sparse estimate along with per-iteration diagnostics
    (noise scale, support size, residual energy).
    """
    measurements = est.values
    n_sc, n_sy = measurements.shape
    if (alloc.n_sc, alloc.n_sy) != (n_sc, n_sy):
        raise ValueError("allocation grid does not match the channel estimate")
    mask = alloc.mask().astype(np.float64)
    n_cells = n_sc * n_sy

    estimate = np.zeros_like(measurements)
    residual = measurements.copy()
    history: list = []
    sigma = 0.0
    support = 0
    iterations = 0

    for t in range(1, cfg.n_iter + 1):
        noisy = to_range_doppler(residual) + estimate
        magnitudes = np.abs(noisy)
        if not np.all(np.isfinite(magnitudes)):
            raise CampDivergenceError(t)
        sigma = lower_median(magnitudes) / math.sqrt(2.0)
        new_estimate = _shrink(noisy, magnitudes, cfg.tau * sigma)
        support = int(np.count_nonzero(new_estimate))
        reproject = new_estimate if cfg.residual_variant == "current_estimate" else estimate
        residual = (
            measurements
            - mask * from_range_doppler(reproject)
            + (support / n_cells) * residual
        )
        # any inf/nan in the residual lands in the energy scalar
        energy = float(np.vdot(residual, residual).real)
        if not math.isfinite(energy):
            raise CampDivergenceError(t)
        history.append(
            CampIterationStats(
                iteration=t,
                sigma=float(sigma),
                support_size=support,
                residual_energy=energy,
            )
        )
        iterations = t
        if cfg.stop_tol > 0.0:
            change = float(np.linalg.norm(new_estimate - estimate))
            estimate = new_estimate
            scale = float(np.linalg.norm(estimate))
            if scale > 0.0 and change <= cfg.stop_tol * scale:
                break
        else:
            estimate = new_estimate

    return SparseMap(
        values=estimate,
        iterations_run=iterations,
        final_sigma=float(sigma),
        support_size=support,
        history=history,
        delta_f_hz=est.delta_f_hz,
        t_sym_s=est.t_sym_s,
        f_c_hz=est.f_c_hz,
    )


def camp_to_map(sparse: SparseMap, normalized: bool = False) -> RangeDopplerMap:
    """Squared-magnitude power map of the sparse estimate, with the same
    calibration and Doppler centering as the periodogram."""
    power = np.abs(sparse.values) ** 2
    power = np.fft.fftshift(power, axes=1)
    range_bin, velocity_bin = map_calibration(
        sparse.delta_f_hz, sparse.t_sym_s, sparse.f_c_hz, power.shape[0], power.shape[1]
    )
    rd_map = RangeDopplerMap(power=power, range_bin_m=range_bin, velocity_bin_mps=velocity_bin)
    if normalized:
        from .specest import normalize

        rd_map = normalize(rd_map)
    return rd_map
