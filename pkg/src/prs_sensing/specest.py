"""Channel estimation and periodogram range-Doppler maps.

Axis conventions used throughout the package: axis 0 of every grid is the
subcarrier/range direction, axis 1 is the symbol/Doppler direction.  The
range-Doppler transform is a unitary inverse DFT along subcarriers followed
by a unitary forward DFT along symbols, so a delay ramp lands on a positive
range bin and a closing target (positive Doppler) lands on a positive
velocity bin.  Stored maps have the Doppler axis fft-shifted so zero
velocity sits at column ``n_doppler // 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channel import SPEED_OF_LIGHT
from .prs_grid import OfdmGrid, ResourceSet

#: dB value exported for exactly-zero map cells.
ZERO_FLOOR_DB = -100.0


@dataclass
class ChannelEstimate:
    """Per-RE channel estimate, exactly zero outside the PRS allocation."""

    values: np.ndarray
    alloc: ResourceSet
    delta_f_hz: float
    t_sym_s: float
    f_c_hz: float

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.alloc.n_sc, self.alloc.n_sy):
            raise ValueError(
                f"estimate shape {self.values.shape} does not match allocation grid "
                f"{(self.alloc.n_sc, self.alloc.n_sy)}"
            )
        if np.any(self.values[~self.alloc.mask()] != 0):
            raise ValueError("channel estimate must be exactly zero outside the allocation")

    @property
    def n_sc(self) -> int:
        return self.values.shape[0]

    @property
    def n_sy(self) -> int:
        return self.values.shape[1]


@dataclass
class RangeDopplerMap:
    """Real power map with axis calibration.

    ``power[i, j]`` is the power at range ``i * range_bin_m`` and velocity
    ``(j - n_doppler//2) * velocity_bin_mps`` (Doppler axis fft-shifted).
    """

    power: np.ndarray
    range_bin_m: float
    velocity_bin_mps: float
    normalized: bool = False
    floor_db: float = ZERO_FLOOR_DB

    def __post_init__(self) -> None:
        self.power = np.asarray(self.power, dtype=np.float64)
        if self.power.ndim != 2:
            raise ValueError("power map must be 2-D")
        if np.any(self.power < 0):
            raise ValueError("power map must be nonnegative")

    @property
    def n_range(self) -> int:
        return self.power.shape[0]

    @property
    def n_doppler(self) -> int:
        return self.power.shape[1]


def estimate_channel(rx: OfdmGrid, tx: OfdmGrid, alloc: ResourceSet) -> ChannelEstimate:
    """Divide out the known transmit symbols on the allocation; zero elsewhere."""
    if rx.values.shape != tx.values.shape:
        raise ValueError(
            f"received grid {rx.values.shape} and transmit grid {tx.values.shape} differ"
        )
    if rx.values.shape != (alloc.n_sc, alloc.n_sy):
        raise ValueError("allocation grid size does not match the signal grids")
    mask = alloc.mask()
    if np.any(tx.values[mask] == 0):
        raise ValueError("transmit grid has zero symbols inside the allocation")
    values = np.zeros_like(rx.values)
    np.divide(rx.values, tx.values, out=values, where=mask)
    return ChannelEstimate(
        values=values,
        alloc=alloc,
        delta_f_hz=rx.delta_f_hz,
        t_sym_s=rx.t_sym_s,
        f_c_hz=rx.f_c_hz,
    )


def to_range_doppler(values: np.ndarray, n_range: int | None = None, n_doppler: int | None = None) -> np.ndarray:
    """Unitary IDFT along subcarriers then unitary DFT along symbols,
    optionally zero-padded.  Output is NOT fft-shifted."""
    n_sc, n_sy = values.shape
    n_range = n_sc if n_range is None else n_range
    n_doppler = n_sy if n_doppler is None else n_doppler
    if n_range < n_sc or n_doppler < n_sy:
        raise ValueError(
            f"transform sizes ({n_range}, {n_doppler}) must be at least the grid size "
            f"({n_sc}, {n_sy})"
        )
    out = np.fft.ifft(values, n=n_range, axis=0, norm="ortho")
    return np.fft.fft(out, n=n_doppler, axis=1, norm="ortho")


def from_range_doppler(values: np.ndarray) -> np.ndarray:
    """Inverse of `to_range_doppler` at equal sizes (unitary pair)."""
    out = np.fft.fft(values, axis=0, norm="ortho")
    return np.fft.ifft(out, axis=1, norm="ortho")


def map_calibration(delta_f_hz: float, t_sym_s: float, f_c_hz: float, n_range: int, n_doppler: int) -> tuple:
    """(range bin, velocity bin) sizes for given transform lengths."""
    range_bin = SPEED_OF_LIGHT / (2.0 * delta_f_hz * n_range)
    wavelength = SPEED_OF_LIGHT / f_c_hz
    velocity_bin = wavelength / (2.0 * t_sym_s * n_doppler)
    return range_bin, velocity_bin


def periodogram(
    est: ChannelEstimate, n_range: int | None = None, n_doppler: int | None = None
) -> RangeDopplerMap:
    """Squared magnitude of the 2-D transform of the channel estimate.

    ``n_range``/``n_doppler`` zero-pad the transforms for finer bin spacing
    (they must be at least the grid dimensions).
    """
    spectrum = to_range_doppler(est.values, n_range, n_doppler)
    power = np.abs(spectrum) ** 2
    power = np.fft.fftshift(power, axes=1)
    range_bin, velocity_bin = map_calibration(
        est.delta_f_hz, est.t_sym_s, est.f_c_hz, power.shape[0], power.shape[1]
    )
    return RangeDopplerMap(power=power, range_bin_m=range_bin, velocity_bin_mps=velocity_bin)


def normalize(rd_map: RangeDopplerMap) -> RangeDopplerMap:
    """Scale so the global maximum is exactly 1."""
    peak = float(rd_map.power.max())
    if peak <= 0.0:
        raise ValueError("cannot normalize an all-zero map")
    return replace(rd_map, power=rd_map.power / peak, normalized=True)


def bin_to_physical(rd_map: RangeDopplerMap, range_bin_idx: int, doppler_bin_idx: int) -> tuple:
    """(range in meters, velocity in m/s) of a map cell."""
    if not (0 <= range_bin_idx < rd_map.n_range):
        raise IndexError(f"range bin {range_bin_idx} outside 0..{rd_map.n_range - 1}")
    if not (0 <= doppler_bin_idx < rd_map.n_doppler):
        raise IndexError(f"doppler bin {doppler_bin_idx} outside 0..{rd_map.n_doppler - 1}")
    range_m = range_bin_idx * rd_map.range_bin_m
    velocity = (doppler_bin_idx - rd_map.n_doppler // 2) * rd_map.velocity_bin_mps
    return range_m, velocity


def physical_to_bin(rd_map: RangeDopplerMap, range_m: float, velocity_mps: float) -> tuple:
    """Fractional (range bin, doppler bin) of physical coordinates."""
    return (
        range_m / rd_map.range_bin_m,
        velocity_mps / rd_map.velocity_bin_mps + rd_map.n_doppler // 2,
    )


def to_db(rd_map: RangeDopplerMap) -> np.ndarray:
    """Power in dB relative to the map's own units; exact zeros map to the
    configured floor."""
    db = np.full_like(rd_map.power, rd_map.floor_db)
    positive = rd_map.power > 0
    db[positive] = 10.0 * np.log10(rd_map.power[positive])
    return np.maximum(db, rd_map.floor_db)
