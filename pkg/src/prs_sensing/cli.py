"""Command-line driver.

Subcommands:
    simulate     build the PRS grid, synthesize the echo, write the channel
                 estimate (npz), the resource set (csv) and truths (json)
    periodogram  2D-FFT map + CFAR + scoring from a config (or a saved
                 estimate), maps as CSV/PGM/PNG
    camp         sparse-recovery map + CFAR + scoring, plus per-iteration
                 diagnostics CSV
    detect       run CFAR on a previously written map CSV
    compare      both estimators side by side with a comparison report
    sweep-comb   one sparse-recovery map and score per comb size
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import fileio, plots
from .config import ConfigError, RunConfig, load_config, save_config
from .detect import cfar_detect, match_detections
from .pipeline import (
    MATCH_TOL_BINS,
    run_estimator,
    run_pipeline,
    simulate_estimate,
    sweep_comb,
)
from .scenario import ScenarioError


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-c", "--config", default="builtin:quick",
                        help="config YAML path or builtin:<name> (default builtin:quick)")
    parser.add_argument("-o", "--output-dir", default=None,
                        help="output directory (default from config)")
    parser.add_argument("--seed", type=int, default=None, help="noise seed override")
    parser.add_argument("--pad", type=int, default=None,
                        help="periodogram padding factor for both axes")
    parser.add_argument("--tau", type=float, default=None,
                        help="sparse-recovery threshold multiplier override")
    parser.add_argument("--p-fa", type=float, default=None,
                        help="detector false-alarm probability override")


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, noise_seed=args.seed)
    if args.output_dir is not None:
        cfg = dataclasses.replace(cfg, output_dir=args.output_dir)
    if args.pad is not None:
        cfg = dataclasses.replace(cfg, pad_range=args.pad, pad_doppler=args.pad)
    if args.tau is not None:
        cfg = dataclasses.replace(cfg, camp=dataclasses.replace(cfg.camp, tau=args.tau))
    if args.p_fa is not None:
        cfg = dataclasses.replace(cfg, cfar=dataclasses.replace(cfg.cfar, p_fa=args.p_fa))
    return cfg


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg)
    products = simulate_estimate(cfg)
    fileio.write_estimate_npz(products.estimate, out / "estimate.npz")
    fileio.write_resource_csv(products.alloc, out / "resource_set.csv")
    fileio.write_truths_json(products.truths, out / "truths.json")
    save_config(cfg, out / "run_config.yaml")
    print(f"wrote estimate for {len(products.alloc)} PRS resource elements to {out}")
    return 0


def _single_estimator(args, which: str) -> int:
    cfg = _load(args)
    out = _outdir(cfg)
    if getattr(args, "estimate", None):
        est = fileio.read_estimate_npz(args.estimate)
        truths = fileio.read_truths_json(args.truths) if args.truths else []
        products_truths = truths
        from .pipeline import SimulationProducts

        products = SimulationProducts(estimate=est, alloc=est.alloc, truths=products_truths, tx=None)
    else:
        products = simulate_estimate(cfg)
    result = run_estimator(products, cfg, which)
    fileio.write_map_csv(result.rd_map, out / f"{which}_map.csv")
    fileio.write_map_pgm(result.rd_map, out / f"{which}_map.pgm")
    plots.save_map_png(result.rd_map, out / f"{which}_map.png",
                       title=f"{which} range-Doppler map",
                       truths=products.truths, detections=result.detections,
                       max_range_m=1.25 * max((r for r, _ in products.truths), default=0) or None)
    fileio.write_detections_json(result.detections, out / f"{which}_detections.json")
    fileio.write_match_json(result.match, out / f"{which}_match.json")
    if result.sparse is not None:
        fileio.write_camp_diagnostics_csv(result.sparse, out / "camp_diagnostics.csv")
    print(
        f"{which}: {result.match.n_detected_truth}/{result.match.n_truth} truths detected, "
        f"{result.match.n_false} false alarms -> {out}"
    )
    return 0


def cmd_periodogram(args) -> int:
    return _single_estimator(args, "periodogram")


def cmd_camp(args) -> int:
    return _single_estimator(args, "camp")


def cmd_detect(args) -> int:
    cfg = _load(args)
    rd_map = fileio.read_map_csv(args.map)
    detections = cfar_detect(rd_map, cfg.cfar)
    out = _outdir(cfg)
    fileio.write_detections_json(detections, out / "detections.json")
    msg = f"{len(detections)} detections -> {out / 'detections.json'}"
    if args.truths:
        truths = fileio.read_truths_json(args.truths)
        report = match_detections(detections, truths, rd_map, MATCH_TOL_BINS)
        fileio.write_match_json(report, out / "match.json")
        msg += f"; {report.n_detected_truth}/{report.n_truth} truths matched"
    print(msg)
    return 0


def cmd_compare(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg)
    report = run_pipeline(cfg, out)
    plots.save_compare_png(
        report.periodogram.rd_map,
        report.camp.rd_map,
        out / "compare.png",
        truths=report.truths,
        dets_a=report.periodogram.detections,
        dets_b=report.camp.detections,
        max_range_m=1.25 * max((r for r, _ in report.truths), default=0) or None,
    )
    (out / "comparison.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    print(
        "periodogram: "
        f"{report.periodogram.match.n_detected_truth}/{report.periodogram.match.n_truth} "
        f"detected (noise floor {report.periodogram.noise_floor_rel:.2e}); "
        "camp: "
        f"{report.camp.match.n_detected_truth}/{report.camp.match.n_truth} detected "
        f"(noise floor {report.camp.noise_floor_rel:.2e}) -> {out}"
    )
    return 0


def cmd_sweep_comb(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg)
    combs = [int(x) for x in args.comb_sizes.split(",")]
    seeds = [cfg.noise_seed + i for i in range(args.seeds)]
    report = sweep_comb(cfg, combs, seeds=seeds, out_dir=out)
    print(f"{'comb':>5} {'F':>4} {'detected':>9} {'weakest rel power':>18}")
    for e in report.entries:
        print(f"{e.comb_size:>5} {e.repetition_factor:>4} {e.mean_detected:>9.2f} "
              f"{e.mean_weakest_power:>18.3e}")
    print(f"artifacts -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prs-sensing",
        description="Monostatic OFDM radar sensing on PRS grids: simulation, "
                    "range-Doppler estimation, CFAR detection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize the echo and write the channel estimate")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("periodogram", help="2D-FFT map, CFAR, scoring")
    _add_common(p)
    p.add_argument("-i", "--estimate", default=None, help="estimate .npz from 'simulate'")
    p.add_argument("--truths", default=None, help="truths JSON (with --estimate)")
    p.set_defaults(func=cmd_periodogram)

    p = sub.add_parser("camp", help="sparse-recovery map, CFAR, scoring")
    _add_common(p)
    p.add_argument("-i", "--estimate", default=None, help="estimate .npz from 'simulate'")
    p.add_argument("--truths", default=None, help="truths JSON (with --estimate)")
    p.set_defaults(func=cmd_camp)

    p = sub.add_parser("detect", help="CFAR on an existing map CSV")
    _add_common(p)
    p.add_argument("-m", "--map", required=True, help="map CSV from a previous run")
    p.add_argument("--truths", default=None, help="truths JSON to score against")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("compare", help="periodogram vs sparse recovery on identical input")
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep-comb", help="comb-size study at constant bandwidth")
    _add_common(p)
    p.add_argument("--comb-sizes", default="2,4,6,12", help="comma list (default 2,4,6,12)")
    p.add_argument("--seeds", type=int, default=1, help="number of noise seeds to average")
    p.set_defaults(func=cmd_sweep_comb)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
