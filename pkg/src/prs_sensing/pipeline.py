"""End-to-end sensing runs: grid -> echo -> estimate -> maps -> CFAR -> score.

`simulate_estimate` produces the channel estimate for a configured scene;
`run_estimator` turns it into a normalized map with detections and a match
report; `run_pipeline` writes the full artifact set for both estimators;
`compare_estimators` and `sweep_comb` build the side-by-side comparison and
comb-size studies.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fileio, plots
from .camp import SparseMap, camp_run, camp_to_map
from .channel import synthesize_rx, transmit_scale
from .config import RunConfig
from .detect import MatchReport, cfar_detect, match_detections
from .prs_grid import OfdmGrid, PrsConfig, ResourceSet, generate_allocation, generate_prs_symbols
from .scenario import load_scenario, scene_paths
from .specest import (
    ChannelEstimate,
    RangeDopplerMap,
    normalize,
    periodogram,
    physical_to_bin,
)

#: matching tolerance used throughout the pipeline, in bins per axis
MATCH_TOL_BINS = 2.0


@dataclass
class SimulationProducts:
    estimate: ChannelEstimate
    alloc: ResourceSet
    truths: list
    tx: OfdmGrid


@dataclass
class EstimatorResult:
    name: str
    rd_map: RangeDopplerMap
    detections: list
    match: MatchReport
    truth_powers: list
    noise_floor_rel: float
    sparse: SparseMap | None = None

    def summary(self) -> dict:
        return {
            "estimator": self.name,
            "n_truth": self.match.n_truth,
            "n_detected_truth": self.match.n_detected_truth,
            "n_false": self.match.n_false,
            "truth_powers_rel": self.truth_powers,
            "noise_floor_rel": self.noise_floor_rel,
        }


@dataclass
class ComparisonReport:
    periodogram: EstimatorResult
    camp: EstimatorResult
    truths: list

    def to_dict(self) -> dict:
        return {
            "truths": [{"range_m": r, "velocity_mps": v} for r, v in self.truths],
            "periodogram": self.periodogram.summary(),
            "camp": self.camp.summary(),
        }


def build_transmit(cfg: RunConfig) -> tuple:
    """(unit-QPSK transmit grid, allocation) for the configured PRS."""
    alloc = generate_allocation(cfg.prs, cfg.waveform.n_subcarriers, cfg.waveform.n_symbols)
    tx = generate_prs_symbols(cfg.prs.sequence_seed, alloc, cfg.waveform)
    return tx, alloc


def simulate_estimate(cfg: RunConfig, noise_seed: int | None = None) -> SimulationProducts:
    """Run the forward model and channel estimation for the configured scene."""
    tx, alloc = build_transmit(cfg)
    scene = load_scenario(cfg.scenario)
    targets, clutter, truths = scene_paths(scene, cfg.radar)
    seed = cfg.noise_seed if noise_seed is None else noise_seed
    rx = synthesize_rx(tx, targets, clutter, cfg.radar, seed)
    scale = transmit_scale(cfg.radar, cfg.prs.n_active_subcarriers)
    tx_scaled = OfdmGrid(
        values=scale * tx.values,
        delta_f_hz=tx.delta_f_hz,
        t_sym_s=tx.t_sym_s,
        f_c_hz=tx.f_c_hz,
    )
    from .specest import estimate_channel

    est = estimate_channel(rx, tx_scaled, alloc)
    return SimulationProducts(estimate=est, alloc=alloc, truths=truths, tx=tx)


def truth_window_power(rd_map: RangeDopplerMap, truth, tol_bins: int = 2) -> float:
    """Peak map power inside the +-tol window around a truth's bin."""
    rb, db = physical_to_bin(rd_map, truth[0], truth[1])
    r0 = max(0, int(round(rb)) - tol_bins)
    r1 = min(rd_map.n_range, int(round(rb)) + tol_bins + 1)
    d0 = max(0, int(round(db)) - tol_bins)
    d1 = min(rd_map.n_doppler, int(round(db)) + tol_bins + 1)
    if r0 >= r1 or d0 >= d1:
        return 0.0
    return float(rd_map.power[r0:r1, d0:d1].max())


def noise_floor_rel(rd_map: RangeDopplerMap) -> float:
    """Median of the nonzero cells (relative units for a normalized map)."""
    nz = rd_map.power[rd_map.power > 0]
    if nz.size == 0:
        return 0.0
    return float(np.median(nz))


def run_estimator(
    products: SimulationProducts, cfg: RunConfig, which: str
) -> EstimatorResult:
    """One estimator path on an existing simulation: map, CFAR, scoring."""
    sparse = None
    if which == "periodogram":
        rd_map = periodogram(
            products.estimate,
            cfg.pad_range * products.estimate.n_sc,
            cfg.pad_doppler * products.estimate.n_sy,
        )
    elif which == "camp":
        sparse = camp_run(products.estimate, products.alloc, cfg.camp)
        rd_map = camp_to_map(sparse)
    else:
        raise ValueError(f"unknown estimator {which!r}")
    if rd_map.power.max() > 0:
        rd_map = normalize(rd_map)
    detections = cfar_detect(rd_map, cfg.cfar)
    match = match_detections(detections, products.truths, rd_map, MATCH_TOL_BINS)
    powers = [truth_window_power(rd_map, t) for t in products.truths]
    return EstimatorResult(
        name=which,
        rd_map=rd_map,
        detections=detections,
        match=match,
        truth_powers=powers,
        noise_floor_rel=noise_floor_rel(rd_map),
        sparse=sparse,
    )


def compare_estimators(cfg: RunConfig, noise_seed: int | None = None) -> ComparisonReport:
    """Both estimators on identical input, with per-truth relative powers
    and a noise-floor statistic per map."""
    products = simulate_estimate(cfg, noise_seed)
    per = run_estimator(products, cfg, "periodogram")
    camp = run_estimator(products, cfg, "camp")
    return ComparisonReport(periodogram=per, camp=camp, truths=products.truths)


def _max_plot_range(truths) -> float | None:
    if not truths:
        return None
    return 1.25 * max(r for r, _ in truths)


def run_pipeline(cfg: RunConfig, out_dir=None) -> ComparisonReport:
    """Full run with artifacts on disk: normalized maps (CSV + PGM + PNG)
    for both estimators, detection and match JSON, solver diagnostics."""
    out = Path(cfg.output_dir if out_dir is None else out_dir)
    out.mkdir(parents=True, exist_ok=True)
    products = simulate_estimate(cfg)
    report = ComparisonReport(
        periodogram=run_estimator(products, cfg, "periodogram"),
        camp=run_estimator(products, cfg, "camp"),
        truths=products.truths,
    )
    fileio.write_resource_csv(products.alloc, out / "resource_set.csv")
    fileio.write_truths_json(products.truths, out / "truths.json")
    rmax = _max_plot_range(products.truths)
    for result in (report.periodogram, report.camp):
        stem = result.name
        fileio.write_map_csv(result.rd_map, out / f"{stem}_map.csv")
        fileio.write_map_pgm(result.rd_map, out / f"{stem}_map.pgm")
        plots.save_map_png(
            result.rd_map,
            out / f"{stem}_map.png",
            title=f"{stem} range-Doppler map",
            truths=products.truths,
            detections=result.detections,
            max_range_m=rmax,
        )
        fileio.write_detections_json(result.detections, out / f"{stem}_detections.json")
        fileio.write_match_json(result.match, out / f"{stem}_match.json")
    if report.camp.sparse is not None:
        fileio.write_camp_diagnostics_csv(report.camp.sparse, out / "camp_diagnostics.csv")
    (out / "summary.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return report


@dataclass
class SweepEntry:
    comb_size: int
    repetition_factor: int
    n_detected_by_seed: list
    weakest_power_by_seed: list

    @property
    def mean_detected(self) -> float:
        return float(np.mean(self.n_detected_by_seed))

    @property
    def mean_weakest_power(self) -> float:
        return float(np.mean(self.weakest_power_by_seed))


@dataclass
class SweepReport:
    entries: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "entries": [
                {
                    "comb_size": e.comb_size,
                    "repetition_factor": e.repetition_factor,
                    "mean_detected_truth": e.mean_detected,
                    "mean_weakest_power_rel": e.mean_weakest_power,
                    "n_detected_by_seed": e.n_detected_by_seed,
                    "weakest_power_by_seed": e.weakest_power_by_seed,
                }
                for e in self.entries
            ]
        }


def prs_config_for_comb(cfg: RunConfig, comb_size: int) -> PrsConfig:
    """Same bandwidth and time span with a different comb size: num_rb is
    kept and the repetition factor refit to the available symbols."""
    available = cfg.waveform.n_symbols - cfg.prs.start_symbol
    period = comb_size * cfg.prs.time_gap
    full = available - comb_size + period
    reps = max(1, full // period)
    return PrsConfig(
        comb_size=comb_size,
        num_rb=cfg.prs.num_rb,
        time_gap=cfg.prs.time_gap,
        repetition_factor=reps,
        start_symbol=cfg.prs.start_symbol,
        sequence_seed=cfg.prs.sequence_seed,
    )


def sweep_comb(cfg: RunConfig, comb_sizes, seeds=None, out_dir=None) -> SweepReport:
    """Sparse-recovery map and match report per comb size, constant
    bandwidth.  With several seeds the per-comb statistics are averaged;
    artifacts are written for the first seed only."""
    seeds = [cfg.noise_seed] if seeds is None else list(seeds)
    scene = load_scenario(cfg.scenario)
    targets, clutter, truths = scene_paths(scene, cfg.radar)
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
    report = SweepReport()
    first_maps = {}
    for comb in comb_sizes:
        prs = prs_config_for_comb(cfg, comb)
        alloc = generate_allocation(prs, cfg.waveform.n_subcarriers, cfg.waveform.n_symbols)
        tx = generate_prs_symbols(prs.sequence_seed, alloc, cfg.waveform)
        scale = transmit_scale(cfg.radar, prs.n_active_subcarriers)
        tx_scaled = OfdmGrid(
            values=scale * tx.values,
            delta_f_hz=tx.delta_f_hz,
            t_sym_s=tx.t_sym_s,
            f_c_hz=tx.f_c_hz,
        )
        from .specest import estimate_channel

        detected = []
        weakest = []
        for i, seed in enumerate(seeds):
            rx = synthesize_rx(tx, targets, clutter, cfg.radar, seed)
            est = estimate_channel(rx, tx_scaled, alloc)
            sparse = camp_run(est, alloc, cfg.camp)
            rd_map = camp_to_map(sparse)
            if rd_map.power.max() > 0:
                rd_map = normalize(rd_map)
            dets = cfar_detect(rd_map, cfg.cfar)
            match = match_detections(dets, truths, rd_map, MATCH_TOL_BINS)
            detected.append(match.n_detected_truth)
            weakest.append(min(truth_window_power(rd_map, t, 1) for t in truths))
            if i == 0:
                first_maps[comb] = rd_map
                if out is not None:
                    fileio.write_map_csv(rd_map, out / f"camp_map_comb{comb}.csv")
                    fileio.write_map_pgm(rd_map, out / f"camp_map_comb{comb}.pgm")
                    fileio.write_match_json(match, out / f"camp_match_comb{comb}.json")
        report.entries.append(
            SweepEntry(
                comb_size=comb,
                repetition_factor=prs.repetition_factor,
                n_detected_by_seed=detected,
                weakest_power_by_seed=weakest,
            )
        )
    if out is not None:
        plots.save_sweep_png(
            first_maps, out / "sweep_comb.png", truths=truths, max_range_m=_max_plot_range(truths)
        )
        (out / "sweep_summary.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return report
