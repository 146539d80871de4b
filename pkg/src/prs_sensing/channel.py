"""Monostatic echo synthesis: reflection centers, path parameters, and the
noisy received grid.

Targets are modelled as point reflection centers attached to vehicles.  A
center at distance ``R`` with radial closing speed ``v`` and cross-section
``sigma`` produces an echo with

    delay        tau   = 2 R / c
    Doppler      f_D   = 2 v / lambda          (v > 0 means closing)
    amplitude    alpha = sqrt(G_t G_r lambda^2 sigma / ((4 pi)^3 R^4))

and the per-resource-element channel is separable in subcarrier and symbol
index, so a full coherent processing interval has constant Doppler (no
range migration).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .prs_grid import OfdmGrid

SPEED_OF_LIGHT = 3.0e8  # m/s
BOLTZMANN = 1.380649e-23  # J/K


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class RadarParams:
    """Link-budget parameters of the sensing base station."""

    f_c_hz: float
    tx_power_dbm: float = 30.0
    tx_gain_db: float = 18.0
    rx_gain_db: float = 18.0
    noise_power_w: float = 0.0  # per-RE complex noise variance

    def __post_init__(self) -> None:
        if self.f_c_hz <= 0:
            raise ValueError(f"carrier frequency must be positive, got {self.f_c_hz}")
        if self.noise_power_w < 0:
            raise ValueError(f"noise power must be >= 0, got {self.noise_power_w}")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.f_c_hz


@dataclass(frozen=True)
class EchoPath:
    """One echo: attenuation, round-trip delay, Doppler, and the carrier
    phase term -2*pi*f_c*tau folded into (-pi, pi]."""

    alpha: float
    tau_s: float
    doppler_hz: float
    carrier_phase_rad: float = 0.0

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError(f"path amplitude must be positive, got {self.alpha}")
        if self.tau_s <= 0:
            raise ValueError(f"path delay must be positive, got {self.tau_s}")


@dataclass(frozen=True)
class ReflectionCenter:
    """Point scatterer in the vehicle frame with an angular visibility arc.

    ``offset_m`` is (forward, left) relative to the vehicle reference point;
    ``visibility_center_rad`` is the arc axis in the vehicle frame and the
    center reflects toward the base station only when the outbound
    BS-to-center direction lies within ``visibility_halfwidth_rad`` of that
    axis (rotated into the world by the vehicle heading).
    """

    offset_m: tuple
    rcs_m2: float
    visibility_center_rad: float = 0.0
    visibility_halfwidth_rad: float = math.pi

    def __post_init__(self) -> None:
        if self.rcs_m2 <= 0:
            raise ValueError(f"rcs must be positive, got {self.rcs_m2}")
        if not 0.0 <= self.visibility_halfwidth_rad <= math.pi:
            raise ValueError("visibility halfwidth must lie in [0, pi]")


@dataclass(frozen=True)
class Vehicle:
    vehicle_id: str
    position_m: tuple
    velocity_mps: tuple
    heading_rad: float
    centers: tuple

    def __post_init__(self) -> None:
        if not self.centers:
            raise ValueError(f"vehicle {self.vehicle_id!r} needs at least one reflection center")


@dataclass(frozen=True)
class ClutterPoint:
    """Static scatterer (zero Doppler)."""

    position_m: tuple
    rcs_m2: float

    def __post_init__(self) -> None:
        if self.rcs_m2 <= 0:
            raise ValueError(f"clutter rcs must be positive, got {self.rcs_m2}")


@dataclass(frozen=True)
class PointScatterer:
    """World-frame scatterer ready for path-parameter computation."""

    position_m: tuple
    velocity_mps: tuple
    rcs_m2: float


def noise_power_from_nf(
    delta_f_hz: float, noise_figure_db: float = 8.0, temperature_k: float = 290.0
) -> float:
    """Per-RE thermal noise power: k_B * T * delta_f scaled by the receiver
    noise figure (full-band noise split evenly across subcarriers)."""
    return BOLTZMANN * temperature_k * delta_f_hz * db_to_linear(noise_figure_db)


def transmit_scale(radar: RadarParams, n_active_subcarriers: int) -> float:
    """Per-RE transmit amplitude: total power split over the active
    subcarriers of the PRS band."""
    if n_active_subcarriers < 1:
        raise ValueError("need at least one active subcarrier")
    return math.sqrt(dbm_to_watts(radar.tx_power_dbm) / n_active_subcarriers)


def _rotate(vec, angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    x, y = vec
    return np.array([c * x - s * y, s * x + c * y])


def path_params(
    position_m,
    velocity_mps,
    rcs_m2: float,
    bs_position_m,
    radar: RadarParams,
) -> EchoPath:
    """Echo parameters of a scatterer seen from the base station.

    The radial speed is the projection of the scatterer velocity on the
    line of sight, with closing (range decreasing) counted positive, so an
    approaching target gets a positive Doppler shift.
    """
    position_m = np.asarray(position_m, dtype=float)
    bs_position_m = np.asarray(bs_position_m, dtype=float)
    los = position_m - bs_position_m
    distance = float(np.linalg.norm(los))
    if distance <= 0.0:
        raise ValueError("scatterer is co-located with the base station (R = 0)")
    unit_out = los / distance
    v_closing = -float(np.dot(np.asarray(velocity_mps, dtype=float), unit_out))
    if rcs_m2 <= 0:
        raise ValueError(f"rcs must be positive, got {rcs_m2}")

    lam = radar.wavelength_m
    tau = 2.0 * distance / SPEED_OF_LIGHT
    doppler = 2.0 * v_closing / lam
    gain = db_to_linear(radar.tx_gain_db) * db_to_linear(radar.rx_gain_db)
    alpha = math.sqrt(gain * lam**2 * rcs_m2 / ((4.0 * math.pi) ** 3 * distance**4))
    phase = -2.0 * math.pi * radar.f_c_hz * tau
    phase = math.remainder(phase, 2.0 * math.pi)
    return EchoPath(alpha=alpha, tau_s=tau, doppler_hz=doppler, carrier_phase_rad=phase)


def effective_channel(path: EchoPath, n: int, m: int, delta_f_hz: float, t_sym_s: float) -> complex:
    """Channel coefficient of one path on subcarrier ``n``, symbol ``m``:
    carrier phase times a delay ramp in frequency and a Doppler ramp in time.
    """
    phase = (
        path.carrier_phase_rad
        - 2.0 * math.pi * n * delta_f_hz * path.tau_s
        + 2.0 * math.pi * m * t_sym_s * path.doppler_hz
    )
    return path.alpha * complex(math.cos(phase), math.sin(phase))


def path_channel_grid(path: EchoPath, n_sc: int, n_sy: int, delta_f_hz: float, t_sym_s: float) -> np.ndarray:
    """Vectorized `effective_channel` over a full grid (rank-1 outer product)."""
    n = np.arange(n_sc)
    m = np.arange(n_sy)
    freq_ramp = np.exp(-2j * np.pi * delta_f_hz * path.tau_s * n)
    time_ramp = np.exp(2j * np.pi * t_sym_s * path.doppler_hz * m)
    carrier = path.alpha * np.exp(1j * path.carrier_phase_rad)
    return carrier * np.outer(freq_ramp, time_ramp)


def visible_centers(vehicle: Vehicle, bs_position_m) -> list:
    """Reflection centers of a vehicle that face the base station.

    A center is visible when the angle between the outbound BS-to-center
    direction and its visibility axis (rotated by the vehicle heading) is
    at most the arc halfwidth, boundary inclusive.  Returns world-frame
    scatterers carrying the vehicle velocity.
    """
    bs_position_m = np.asarray(bs_position_m, dtype=float)
    pos = np.asarray(vehicle.position_m, dtype=float)
    if np.allclose(pos, bs_position_m):
        raise ValueError(f"vehicle {vehicle.vehicle_id!r} is at the base station position")
    out = []
    for center in vehicle.centers:
        world = pos + _rotate(center.offset_m, vehicle.heading_rad)
        los = world - bs_position_m
        dist = float(np.linalg.norm(los))
        if dist <= 0.0:
            raise ValueError(
                f"reflection center of vehicle {vehicle.vehicle_id!r} coincides with the BS"
            )
        axis = _rotate((1.0, 0.0), vehicle.heading_rad + center.visibility_center_rad)
        cos_angle = float(np.dot(los / dist, axis))
        angle = math.acos(min(1.0, max(-1.0, cos_angle)))
        if angle <= center.visibility_halfwidth_rad:
            out.append(
                PointScatterer(
                    position_m=tuple(world),
                    velocity_mps=tuple(vehicle.velocity_mps),
                    rcs_m2=center.rcs_m2,
                )
            )
    return out


def synthesize_rx(
    tx: OfdmGrid,
    paths,
    clutter,
    radar: RadarParams,
    noise_seed: int,
) -> OfdmGrid:
    """Received grid: scaled transmit symbols through the superposed target
    and clutter channels, plus white complex Gaussian noise.

    The transmit grid is assumed unit-magnitude on its allocation; it is
    scaled here so the configured total power is split evenly over the
    distinct active subcarriers.  Noise is drawn over the whole grid in a
    fixed order, so the output is deterministic given ``noise_seed``.
    """
    if abs(radar.f_c_hz - tx.f_c_hz) > 1e-6 * radar.f_c_hz:
        raise ValueError(
            f"radar carrier {radar.f_c_hz} Hz does not match grid carrier {tx.f_c_hz} Hz"
        )
    active_rows = np.flatnonzero(np.any(tx.values != 0, axis=1))
    n_active = max(len(active_rows), 1)
    scale = transmit_scale(radar, n_active)

    channel = np.zeros_like(tx.values)
    for path in list(paths) + list(clutter):
        channel += path_channel_grid(path, tx.n_sc, tx.n_sy, tx.delta_f_hz, tx.t_sym_s)

    rng = np.random.default_rng(noise_seed)
    sigma = math.sqrt(radar.noise_power_w / 2.0)
    noise = sigma * (
        rng.standard_normal(tx.values.shape) + 1j * rng.standard_normal(tx.values.shape)
    )
    rx = scale * tx.values * channel + noise
    return OfdmGrid(values=rx, delta_f_hz=tx.delta_f_hz, t_sym_s=tx.t_sym_s, f_c_hz=tx.f_c_hz)
