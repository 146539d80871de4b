"""File exporters: delimited maps, PGM images, JSON reports.

Map CSV layout: one header line with the axis names, one line with their
values, then the power matrix row-major (one range bin per line).  All
floats use a fixed ``%.17g`` format so repeated runs with the same seeds
produce byte-identical files.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .camp import SparseMap
from .detect import Detection, MatchReport
from .prs_grid import ResourceSet
from .specest import RangeDopplerMap, to_db

_FMT = "%.17g"


def write_map_csv(rd_map: RangeDopplerMap, path) -> None:
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        fh.write("n_range,n_doppler,range_bin_m,velocity_bin_mps,normalized,floor_db\n")
        fh.write(
            f"{rd_map.n_range},{rd_map.n_doppler},{_FMT % rd_map.range_bin_m},"
            f"{_FMT % rd_map.velocity_bin_mps},{int(rd_map.normalized)},"
            f"{_FMT % rd_map.floor_db}\n"
        )
        for row in rd_map.power:
            fh.write(",".join(_FMT % v for v in row))
            fh.write("\n")


def read_map_csv(path) -> RangeDopplerMap:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
        values = fh.readline().strip().split(",")
        meta = dict(zip(header, values))
        power = np.loadtxt(fh, delimiter=",", ndmin=2)
    rd_map = RangeDopplerMap(
        power=power,
        range_bin_m=float(meta["range_bin_m"]),
        velocity_bin_mps=float(meta["velocity_bin_mps"]),
        normalized=bool(int(meta["normalized"])),
        floor_db=float(meta["floor_db"]),
    )
    if rd_map.power.shape != (int(meta["n_range"]), int(meta["n_doppler"])):
        raise ValueError(f"map file {path} is inconsistent with its header")
    return rd_map


def write_map_pgm(rd_map: RangeDopplerMap, path) -> None:
    """16-bit binary PGM of the dB-scaled map, clipped to [floor_db, 0].

    Intended for normalized maps (values <= 1); rows are range bins.
    """
    db = to_db(rd_map)
    db = np.clip(db, rd_map.floor_db, 0.0)
    scaled = np.round((db - rd_map.floor_db) / (0.0 - rd_map.floor_db) * 65535.0)
    pixels = scaled.astype(">u2")
    with Path(path).open("wb") as fh:
        fh.write(f"P5\n{rd_map.n_doppler} {rd_map.n_range}\n65535\n".encode("ascii"))
        fh.write(pixels.tobytes())


def write_resource_csv(alloc: ResourceSet, path) -> None:
    pairs = sorted(alloc.entries)
    with Path(path).open("w", newline="\n") as fh:
        fh.write("subcarrier,symbol\n")
        for n, m in pairs:
            fh.write(f"{n},{m}\n")


def detection_to_dict(det: Detection) -> dict:
    return {
        "range_bin": det.range_bin,
        "doppler_bin": det.doppler_bin,
        "power_rel": det.power,
        "range_m": det.range_m,
        "velocity_mps": det.velocity_mps,
    }


def write_detections_json(detections, path) -> None:
    doc = {"detections": [detection_to_dict(d) for d in detections]}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_match_json(report: MatchReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n")


def write_camp_diagnostics_csv(sparse: SparseMap, path) -> None:
    with Path(path).open("w", newline="\n") as fh:
        fh.write("iteration,sigma,support_size,residual_energy\n")
        for row in sparse.history:
            fh.write(
                f"{row.iteration},{_FMT % row.sigma},{row.support_size},"
                f"{_FMT % row.residual_energy}\n"
            )


def write_truths_json(truths, path) -> None:
    doc = {
        "truths": [
            {"range_m": float(r), "velocity_mps": float(v)} for r, v in truths
        ]
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_truths_json(path) -> list:
    doc = json.loads(Path(path).read_text())
    return [(t["range_m"], t["velocity_mps"]) for t in doc["truths"]]


def write_estimate_npz(est, path) -> None:
    """Channel estimate plus allocation and metadata, for pipeline handoff."""
    np.savez_compressed(
        Path(path),
        values=est.values,
        pairs=est.alloc.sorted_pairs(),
        n_sc=est.alloc.n_sc,
        n_sy=est.alloc.n_sy,
        delta_f_hz=est.delta_f_hz,
        t_sym_s=est.t_sym_s,
        f_c_hz=est.f_c_hz,
    )


def read_estimate_npz(path):
    from .specest import ChannelEstimate

    data = np.load(Path(path))
    pairs = data["pairs"]
    alloc = ResourceSet(
        entries=frozenset((int(n), int(m)) for n, m in pairs),
        n_sc=int(data["n_sc"]),
        n_sy=int(data["n_sy"]),
    )
    return ChannelEstimate(
        values=data["values"],
        alloc=alloc,
        delta_f_hz=float(data["delta_f_hz"]),
        t_sym_s=float(data["t_sym_s"]),
        f_c_hz=float(data["f_c_hz"]),
    )
