"""Scenario files: base station, vehicles with reflection centers, clutter.

A scenario is a YAML document listing the BS position, the vehicles (each
with position, velocity, heading, and reflection centers carrying RCS and
visibility arcs), and static clutter points.  ``builtin:<name>`` resolves
to a scenario bundled with the package; the default ``builtin:street``
scene has five vehicles in lane with nine reflection centers visible from
the BS.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .channel import (
    ClutterPoint,
    RadarParams,
    ReflectionCenter,
    Vehicle,
    path_params,
    visible_centers,
)

BUILTIN_PREFIX = "builtin:"


@dataclass
class Scene:
    bs_position_m: tuple
    vehicles: list
    clutter: list


class ScenarioError(ValueError):
    pass


def _pair(node, key: str) -> tuple:
    try:
        x, y = node[key]
        return (float(x), float(y))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"scenario field {key!r} must be a pair of numbers") from exc


def _parse_center(node: dict) -> ReflectionCenter:
    return ReflectionCenter(
        offset_m=_pair(node, "offset_m"),
        rcs_m2=float(node["rcs_m2"]),
        visibility_center_rad=float(node.get("visibility_center_rad", 0.0)),
        visibility_halfwidth_rad=float(node.get("visibility_halfwidth_rad", math.pi)),
    )


def parse_scenario(doc: dict) -> Scene:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    try:
        bs = _pair(doc, "bs_position_m")
        vehicles = []
        for vnode in doc.get("vehicles", []):
            centers = tuple(_parse_center(c) for c in vnode["reflection_centers"])
            vehicles.append(
                Vehicle(
                    vehicle_id=str(vnode["id"]),
                    position_m=_pair(vnode, "position_m"),
                    velocity_mps=_pair(vnode, "velocity_mps"),
                    heading_rad=float(vnode["heading_rad"]),
                    centers=centers,
                )
            )
        clutter = [
            ClutterPoint(position_m=_pair(c, "position_m"), rcs_m2=float(c["rcs_m2"]))
            for c in doc.get("clutter", [])
        ]
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc
    return Scene(bs_position_m=bs, vehicles=vehicles, clutter=clutter)


def load_scenario(source) -> Scene:
    """Load a scenario from a path or a ``builtin:<name>`` reference."""
    text = _read_scenario_text(source)
    return parse_scenario(yaml.safe_load(text))


def _read_scenario_text(source) -> str:
    source = str(source)
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX):]
        ref = resources.files("prs_sensing.data").joinpath(f"scenario_{name}.yaml")
        try:
            return ref.read_text()
        except FileNotFoundError:
            raise ScenarioError(f"no builtin scenario named {name!r}") from None
    path = Path(source)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    return path.read_text()


def scene_scatterers(scene: Scene) -> list:
    """Visible reflection centers of all vehicles, world frame."""
    out = []
    for vehicle in scene.vehicles:
        out.extend(visible_centers(vehicle, scene.bs_position_m))
    return out


def scene_paths(scene: Scene, radar: RadarParams) -> tuple:
    """(target paths, clutter paths, truths) for the visible scene.

    Truths are (range_m, radial_velocity_mps) per visible center, with
    closing speed positive, ready for detection matching.
    """
    bs = np.asarray(scene.bs_position_m, dtype=float)
    targets = []
    truths = []
    for scat in scene_scatterers(scene):
        path = path_params(scat.position_m, scat.velocity_mps, scat.rcs_m2, bs, radar)
        targets.append(path)
        distance = float(np.linalg.norm(np.asarray(scat.position_m) - bs))
        v_closing = path.doppler_hz * radar.wavelength_m / 2.0
        truths.append((distance, v_closing))
    clutter = [
        path_params(c.position_m, (0.0, 0.0), c.rcs_m2, bs, radar) for c in scene.clutter
    ]
    return targets, clutter, truths
