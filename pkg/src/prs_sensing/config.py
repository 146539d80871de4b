"""Run configuration: YAML parsing, validation, and round-trip serialization.

Keys carry explicit units (``*_hz``, ``*_dbm``, ``*_m``...).  The radar
section accepts either ``noise_power_w`` directly or ``noise_figure_db``,
from which the per-RE thermal noise power is derived; the parsed config
always stores the resolved ``noise_power_w`` so parse -> serialize ->
parse is the identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from .camp import CampConfig
from .channel import RadarParams, noise_power_from_nf
from .detect import CfarConfig
from .prs_grid import PrsConfig, Waveform


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    waveform: Waveform
    prs: PrsConfig
    radar: RadarParams
    camp: CampConfig
    cfar: CfarConfig
    scenario: str = "builtin:street"
    pad_range: int = 1
    pad_doppler: int = 1
    noise_seed: int = 1
    output_dir: str = "out"

    def __post_init__(self) -> None:
        if self.pad_range < 1 or self.pad_doppler < 1:
            raise ConfigError("periodogram padding factors must be >= 1")
        if 12 * self.prs.num_rb > self.waveform.n_subcarriers:
            raise ConfigError(
                f"prs.num_rb: allocation needs {12 * self.prs.num_rb} subcarriers but the "
                f"grid has {self.waveform.n_subcarriers}"
            )
        span = self.prs.start_symbol + self.prs.symbol_span
        if span > self.waveform.n_symbols:
            raise ConfigError(
                f"prs: time span {span} symbols exceeds the grid's {self.waveform.n_symbols}"
            )
        if abs(self.radar.f_c_hz - self.waveform.f_c_hz) > 1e-6 * self.waveform.f_c_hz:
            raise ConfigError("radar carrier must match waveform f_c_hz")


def _section(doc: dict, name: str) -> dict:
    node = doc.get(name, {})
    if not isinstance(node, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    return node


def _get(node: dict, section: str, key: str, cast, default=None):
    if key not in node:
        if default is not None:
            return default
        raise ConfigError(f"missing config field {section}.{key}")
    try:
        return cast(node[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config field {section}.{key}: {exc}") from exc


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    w = _section(doc, "waveform")
    try:
        waveform = Waveform(
            f_c_hz=_get(w, "waveform", "f_c_hz", float),
            delta_f_hz=_get(w, "waveform", "delta_f_hz", float),
            n_subcarriers=_get(w, "waveform", "n_subcarriers", int),
            n_symbols=_get(w, "waveform", "n_symbols", int),
            cp_ratio=_get(w, "waveform", "cp_ratio", float, 0.0703),
        )
    except ValueError as exc:
        raise ConfigError(f"waveform: {exc}") from exc

    p = _section(doc, "prs")
    try:
        prs = PrsConfig(
            comb_size=_get(p, "prs", "comb_size", int),
            num_rb=_get(p, "prs", "num_rb", int),
            time_gap=_get(p, "prs", "time_gap", int, 1),
            repetition_factor=_get(p, "prs", "repetition_factor", int, 1),
            start_symbol=_get(p, "prs", "start_symbol", int, 0),
            sequence_seed=_get(p, "prs", "sequence_seed", int, 0),
        )
    except ValueError as exc:
        raise ConfigError(f"prs: {exc}") from exc

    r = _section(doc, "radar")
    if "noise_power_w" in r:
        noise_power = _get(r, "radar", "noise_power_w", float)
    elif "noise_figure_db" in r:
        noise_power = noise_power_from_nf(
            waveform.delta_f_hz, _get(r, "radar", "noise_figure_db", float)
        )
    else:
        raise ConfigError("radar: set either noise_power_w or noise_figure_db")
    try:
        radar = RadarParams(
            f_c_hz=waveform.f_c_hz,
            tx_power_dbm=_get(r, "radar", "tx_power_dbm", float, 30.0),
            tx_gain_db=_get(r, "radar", "tx_gain_db", float, 18.0),
            rx_gain_db=_get(r, "radar", "rx_gain_db", float, 18.0),
            noise_power_w=noise_power,
        )
    except ValueError as exc:
        raise ConfigError(f"radar: {exc}") from exc

    c = _section(doc, "camp")
    try:
        camp = CampConfig(
            tau=_get(c, "camp", "tau", float, 3.4),
            n_iter=_get(c, "camp", "n_iter", int, 50),
            residual_variant=_get(c, "camp", "residual_variant", str, "current_estimate"),
            stop_tol=_get(c, "camp", "stop_tol", float, 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"camp: {exc}") from exc

    f = _section(doc, "cfar")
    try:
        cfar = CfarConfig(
            guard=tuple(_get(f, "cfar", "guard", lambda v: [int(x) for x in v], [2, 2])),
            train=tuple(_get(f, "cfar", "train", lambda v: [int(x) for x in v], [8, 4])),
            p_fa=_get(f, "cfar", "p_fa", float, 1e-7),
            floor=_get(f, "cfar", "floor", float, 1e-8),
        )
    except ValueError as exc:
        raise ConfigError(f"cfar: {exc}") from exc

    g = _section(doc, "periodogram")
    return RunConfig(
        waveform=waveform,
        prs=prs,
        radar=radar,
        camp=camp,
        cfar=cfar,
        scenario=str(doc.get("scenario", "builtin:street")),
        pad_range=_get(g, "periodogram", "pad_range", int, 1),
        pad_doppler=_get(g, "periodogram", "pad_doppler", int, 1),
        noise_seed=int(doc.get("noise_seed", 1)),
        output_dir=str(doc.get("output_dir", "out")),
    )


def config_to_dict(cfg: RunConfig) -> dict:
    return {
        "waveform": {
            "f_c_hz": cfg.waveform.f_c_hz,
            "delta_f_hz": cfg.waveform.delta_f_hz,
            "n_subcarriers": cfg.waveform.n_subcarriers,
            "n_symbols": cfg.waveform.n_symbols,
            "cp_ratio": cfg.waveform.cp_ratio,
        },
        "prs": {
            "comb_size": cfg.prs.comb_size,
            "num_rb": cfg.prs.num_rb,
            "time_gap": cfg.prs.time_gap,
            "repetition_factor": cfg.prs.repetition_factor,
            "start_symbol": cfg.prs.start_symbol,
            "sequence_seed": cfg.prs.sequence_seed,
        },
        "radar": {
            "tx_power_dbm": cfg.radar.tx_power_dbm,
            "tx_gain_db": cfg.radar.tx_gain_db,
            "rx_gain_db": cfg.radar.rx_gain_db,
            "noise_power_w": cfg.radar.noise_power_w,
        },
        "camp": {
            "tau": cfg.camp.tau,
            "n_iter": cfg.camp.n_iter,
            "residual_variant": cfg.camp.residual_variant,
            "stop_tol": cfg.camp.stop_tol,
        },
        "cfar": {
            "guard": list(cfg.cfar.guard),
            "train": list(cfg.cfar.train),
            "p_fa": cfg.cfar.p_fa,
            "floor": cfg.cfar.floor,
        },
        "periodogram": {"pad_range": cfg.pad_range, "pad_doppler": cfg.pad_doppler},
        "scenario": cfg.scenario,
        "noise_seed": cfg.noise_seed,
        "output_dir": cfg.output_dir,
    }


def load_config(source) -> RunConfig:
    """Load a RunConfig from a path or a ``builtin:<name>`` reference."""
    source = str(source)
    if source.startswith("builtin:"):
        name = source[len("builtin:"):]
        ref = resources.files("prs_sensing.data").joinpath(f"config_{name}.yaml")
        try:
            text = ref.read_text()
        except FileNotFoundError:
            raise ConfigError(f"no builtin config named {name!r}") from None
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    return parse_config(doc)


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(cfg), sort_keys=False))
