"""Scenario configuration: JSON in, validated dataclasses out.

A scenario file may give any subset of the keys in `default_scenario_dict()`;
missing keys take the defaults. See `scenarios/default.json` for the full
layout.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .channel import Radiometry, Scene
from .colorimetry import ANSI_QUADRANGLES, QuadrangleConstraint
from .optics import GnpCell, GnpPlate, Resonance
from .precoder import NoiseModel
from .spectral import (LedSpdModel, SpectralFunction, SpectralGrid, led_spds, load_csv_spectrum, make_grid,
                       pd_responsivity, reflectance)

MODES = ("multiple-access", "wiretap")


class ConfigError(ValueError):
    pass


# Synthetic plate, one cell per LED. A shared broad red dip keeps the warm end
# dim; the blue/green dips differ per cell and carry most of the azimuth spread.
DEFAULT_CELLS = [
    {"id": "cell-A", "resonances": [
        {"center_nm": 649.9, "width_nm": 105.3, "depth_L": 0.92, "depth_R": 0.86, "azimuth_phase_deg": 0.0, "azimuth_sensitivity": 0.6},
        {"center_nm": 510.5, "width_nm": 68.3, "depth_L": 0.616, "depth_R": 0.74, "azimuth_phase_deg": -45.0, "azimuth_sensitivity": 0.94},
    ]},
    {"id": "cell-B", "resonances": [
        {"center_nm": 649.9, "width_nm": 105.3, "depth_L": 0.86, "depth_R": 0.92, "azimuth_phase_deg": 0.0, "azimuth_sensitivity": 0.6},
        {"center_nm": 471.1, "width_nm": 45.4, "depth_L": 0.817, "depth_R": 0.972, "azimuth_phase_deg": 60.0, "azimuth_sensitivity": 0.78},
    ]},
    {"id": "cell-C", "resonances": [
        {"center_nm": 649.9, "width_nm": 105.3, "depth_L": 0.92, "depth_R": 0.86, "azimuth_phase_deg": 0.0, "azimuth_sensitivity": 0.6},
        {"center_nm": 531.9, "width_nm": 67.8, "depth_L": 0.513, "depth_R": 0.602, "azimuth_phase_deg": 30.0, "azimuth_sensitivity": 0.78},
    ]},
    {"id": "cell-D", "resonances": [
        {"center_nm": 649.9, "width_nm": 105.3, "depth_L": 0.86, "depth_R": 0.92, "azimuth_phase_deg": 0.0, "azimuth_sensitivity": 0.6},
        {"center_nm": 499.2, "width_nm": 66.5, "depth_L": 0.699, "depth_R": 0.751, "azimuth_phase_deg": -45.0, "azimuth_sensitivity": 0.9},
    ]},
]


def default_scenario_dict() -> dict:
    return {
        "mode": "multiple-access",
        "seed": 0,
        "synthetic_plate": True,
        "grid": {"min_nm": 380.0, "max_nm": 780.0, "step_nm": 5.0},
        "spectral": {
            "led_centers_nm": [630.0, 521.0, 450.0],
            "led_fwhm_nm": [25.0, 25.0, 25.0],
            "responsivity_a_per_w": [0.1, 0.5],
            "reflectance_mean": 0.91,
            "reflectance_tilt": 0.0,
            "responsivity_csv": None,
            "reflectance_csv": None,
        },
        "scene": {
            "headlights": [[-1.0, 0.0, 1.1], [1.0, 0.0, 1.1]],
            "users": [[-3.0, 20.0, 0.9], [0.0, 23.0, 0.9], [3.0, 19.0, 0.9]],
            "led_grid": [2, 2],
            "pd_grid": [2, 2],
            "d_led_m": 0.04,
            "d_pd_m": 0.01,
            "reflectors": None,
        },
        "radiometry": {
            "half_power_deg": 20.0,
            "pd_area_m2": 1e-4,
            "reflector_area_m2": 0.04,
            "zeta_w_per_a": 0.44,
            "alpha": 0.5,
        },
        "noise": {"thermal_dbm": -128.76, "bandwidth_hz": 1e8},
        "plate": {"led_to_cell": [0, 1, 2, 3], "cells": copy.deepcopy(DEFAULT_CELLS)},
        "temperatures_k": [2700, 3000, 3500, 4000, 4500, 5000, 5700, 6500],
        "quadrangles": {str(k): [list(v) for v in verts] for k, verts in ANSI_QUADRANGLES.items()},
        "optimizer": {
            "epsilon": 1e-4,
            "outer_epsilon": 1e-4,
            "max_outer": 50,
            "max_inner": 100,
            "qp_max_iter": 500,
            "nu_refresh": "inner",
            "shot_surrogate": "quadratic",
        },
        "baselines": {"fixed_kelvin": 4000},
        "sweep": {
            "ptx_dbm": [float(v) for v in range(0, 65, 5)],
            "operating_ptx_dbm": 30.0,
            "distance_m": [float(v) for v in range(2, 41, 2)],
            "target_ber": [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 1e-5, 1e-6],
            "ber_ptx_dbm": [30.0, 40.0, 50.0, 60.0],
        },
    }


def wiretap_scenario_dict() -> dict:
    d = default_scenario_dict()
    d["mode"] = "wiretap"
    d["scene"]["users"] = [[-3.0, 20.0, 0.9], [0.0, 23.0, 0.9]]  # Bob, Eve
    return d


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if k not in out:
            raise ConfigError(f"unknown config key {k!r}")
        if isinstance(out[k], dict) and isinstance(v, dict) and k != "quadrangles":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class OptimizerSettings:
    epsilon: float = 1e-4
    outer_epsilon: float = 1e-4
    max_outer: int = 50
    max_inner: int = 100
    qp_max_iter: int = 500
    nu_refresh: str = "inner"
    shot_surrogate: str = "quadratic"


@dataclass(eq=False)
class ScenarioConfig:
    raw: dict
    mode: str
    seed: int
    grid: SpectralGrid
    spds: list
    responsivity: SpectralFunction
    reflectance: SpectralFunction
    scene: Scene
    radiometry: Radiometry
    noise: NoiseModel
    plate: GnpPlate
    temperatures: tuple
    quadrangles: dict
    optimizer: OptimizerSettings
    fixed_kelvin: int
    sweep: dict
    base_dir: Path | None = None

    @property
    def n_streams(self) -> int:
        """Users that receive their own stream: all of them, or only Bob when wiretapping."""
        return 1 if self.mode == "wiretap" else self.scene.n_users

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def replace(self, **changes) -> "ScenarioConfig":
        """Re-parse with top-level sections overridden."""
        return from_dict(_merge(self.raw, changes), self.base_dir)


def _plate(d: dict) -> GnpPlate:
    cells = []
    for c in d["cells"]:
        res = tuple(Resonance(**r) for r in c.get("resonances", []))
        cells.append(GnpCell(res, c.get("id", "")))
    return GnpPlate(tuple(cells), tuple(int(k) for k in d["led_to_cell"]))


def from_dict(d: dict, base_dir: Path | None = None) -> ScenarioConfig:
    """Merge `d` over the defaults and validate. Any bad value surfaces as ConfigError."""
    try:
        return _from_dict(d, base_dir)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def _from_dict(d: dict, base_dir: Path | None = None) -> ScenarioConfig:
    raw = _merge(default_scenario_dict(), d)
    if raw["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {raw['mode']!r}")
    g = raw["grid"]
    grid = make_grid(g["min_nm"], g["max_nm"], g["step_nm"])
    sp = raw["spectral"]
    spds = led_spds(LedSpdModel(tuple(sp["led_centers_nm"]), tuple(sp["led_fwhm_nm"])), grid)

    def _path(p):
        p = Path(p)
        return p if p.is_absolute() or base_dir is None else base_dir / p

    if sp["responsivity_csv"]:
        resp = load_csv_spectrum(_path(sp["responsivity_csv"]), grid)
    else:
        resp = pd_responsivity(grid, *sp["responsivity_a_per_w"])
    if sp["reflectance_csv"]:
        rho = load_csv_spectrum(_path(sp["reflectance_csv"]), grid)
    else:
        rho = reflectance(grid, sp["reflectance_mean"], sp["reflectance_tilt"])

    sc = raw["scene"]
    scene = Scene(
        headlights=tuple(tuple(map(float, h)) for h in sc["headlights"]),
        users=tuple(tuple(map(float, u)) for u in sc["users"]),
        led_grid=tuple(sc["led_grid"]),
        pd_grid=tuple(sc["pd_grid"]),
        d_led_m=float(sc["d_led_m"]),
        d_pd_m=float(sc["d_pd_m"]),
        reflectors=None if sc["reflectors"] is None else tuple(tuple(map(float, r)) for r in sc["reflectors"]),
    )
    plate = _plate(raw["plate"])
    if raw["mode"] == "wiretap" and scene.n_users != 2:
        raise ConfigError("wiretap mode needs exactly two users: Bob then Eve")
    plate.check_users(scene.n_users)
    if len(plate.led_to_cell) != scene.n_t:
        raise ConfigError(f"plate maps {len(plate.led_to_cell)} LEDs but each headlight has {scene.n_t}")

    quads = {int(k): QuadrangleConstraint.from_vertices(int(k), v) for k, v in raw["quadrangles"].items()}
    temps = tuple(int(k) for k in raw["temperatures_k"])
    if not temps:
        raise ConfigError("temperature set is empty")
    missing = [k for k in temps if k not in quads]
    if missing:
        raise ConfigError(f"no quadrangle vertices for {missing} K")
    if not raw["sweep"]["ptx_dbm"]:
        raise ConfigError("Tx power grid is empty")
    opt = OptimizerSettings(**raw["optimizer"])
    if opt.nu_refresh not in ("inner", "outer") or opt.shot_surrogate not in ("linear", "quadratic"):
        raise ConfigError(f"bad optimizer switches: {opt}")
    return ScenarioConfig(
        raw=raw, mode=raw["mode"], seed=int(raw["seed"]), grid=grid, spds=spds, responsivity=resp,
        reflectance=rho, scene=scene, radiometry=Radiometry(**raw["radiometry"]), noise=NoiseModel(**raw["noise"]),
        plate=plate, temperatures=temps, quadrangles=quads, optimizer=opt,
        fixed_kelvin=int(raw["baselines"]["fixed_kelvin"]), sweep=raw["sweep"], base_dir=base_dir,
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return from_dict(data, path.parent)


def default_scenario() -> ScenarioConfig:
    return from_dict({})


def wiretap_scenario() -> ScenarioConfig:
    return from_dict(wiretap_scenario_dict())
