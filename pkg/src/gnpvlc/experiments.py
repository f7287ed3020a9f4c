"""Sweeps behind each CLI command. Every command writes one CSV (and optionally an SVG)."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ao import ao_over_temperatures
from .colorimetry import chromaticity_of_ratios
from .config import ScenarioConfig
from .metrics import boresight_factor, comm_distance, condition_sweep, kappa, kappa_for_ber, mean_los_gain
from .optics import gain_matrix
from .precoder import dbm_to_watts, shot_noise_jensen
from .variants import VARIANTS, SystemCache, design, evaluate_rates, evaluate_secrecy

COMMANDS = ("sumrate", "secrecy", "ber-distance", "condnum", "chromaticity", "ao-trace")


class ExperimentError(ValueError):
    pass


@dataclass
class Table:
    name: str
    header: list
    rows: list

    def to_csv(self, config_hash: str) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header + ["config_hash"])
        for r in self.rows:
            w.writerow([_fmt(v) for v in r] + [config_hash])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".10g")
    return str(v)


def _variants(selected: str | None, allowed=VARIANTS) -> tuple:
    if selected is None:
        return tuple(allowed)
    if selected not in allowed:
        raise ExperimentError(f"unknown variant {selected!r}; choose from {', '.join(allowed)}")
    return (selected,)


def sumrate_table(config: ScenarioConfig, cache: SystemCache, variant: str | None = None) -> Table:
    if config.mode != "multiple-access":
        raise ExperimentError("sumrate needs a multiple-access scenario")
    n_u = config.scene.n_users
    header = ["ptx_dbm", "variant", "sum_rate_bpshz", "kelvin"] + [f"rate_u{u + 1}" for u in range(n_u)]
    rows = []
    for dbm in config.sweep["ptx_dbm"]:
        ptx = float(dbm_to_watts(dbm))
        memo = {}
        for v in _variants(variant):
            d = design(v, cache, ptx, memo)
            r = evaluate_rates(cache, d, ptx)
            rows.append([float(dbm), v, float(r.sum()), d.kelvin] + [float(x) for x in r])
    return Table("sumrate", header, rows)


def secrecy_table(config: ScenarioConfig, cache: SystemCache, variant: str | None = None) -> Table:
    if config.mode != "wiretap":
        raise ExperimentError("secrecy needs a wiretap scenario (mode: wiretap, users: [Bob, Eve])")
    rows = []
    for dbm in config.sweep["ptx_dbm"]:
        ptx = float(dbm_to_watts(dbm))
        memo = {}
        for v in _variants(variant):
            d = design(v, cache, ptx, memo)
            rb, re, rs = evaluate_secrecy(cache, d, ptx)
            rows.append([float(dbm), v, rs, rb, re, d.kelvin])
    return Table("secrecy", ["ptx_dbm", "variant", "secrecy_rate_bpshz", "rate_bob", "rate_eve", "kelvin"], rows)


@dataclass(frozen=True)
class LinkBudget:
    """Rank-one link from headlight 1 to user 2 at the operating point."""

    h_los: float
    factor: float
    sigma2: float
    g_p: np.ndarray
    f: np.ndarray
    n_r: int


def link_budget(config: ScenarioConfig, cache: SystemCache, u: int = 1, i: int = 0) -> LinkBudget:
    if config.scene.n_users <= u:
        raise ExperimentError(f"link budget needs at least {u + 1} users")
    ptx0 = float(dbm_to_watts(config.sweep["operating_ptx_dbm"]))
    d = design("slnr_gnp_ao", cache, ptx0)
    system = cache.get(True, "los")
    head = system.headlights[i]
    stream = min(u, d.precoders[i].shape[0] - 1)
    Ht = head.effective(d.ratios[i], true=True)[u]
    shot = shot_noise_jensen(Ht, d.precoders[i], config.noise.gamma, config.radiometry.alpha, ptx0)
    sigma2 = math.sqrt(config.noise.sigma_th2 + shot)
    scene = config.scene
    return LinkBudget(
        h_los=mean_los_gain(scene, config.radiometry, u, i),
        factor=boresight_factor(scene.headlights[i], scene.users[u], config.radiometry),
        sigma2=sigma2,
        g_p=head.G[u] @ d.ratios[i],
        f=d.precoders[i][stream],
        n_r=scene.n_r,
    )


def ber_distance_table(config: ScenarioConfig, cache: SystemCache) -> Table:
    lb = link_budget(config, cache)
    rows = []
    for dbm in config.sweep["ber_ptx_dbm"]:
        ptx = float(dbm_to_watts(dbm))
        k_here = kappa(lb.h_los, ptx, lb.sigma2, lb.g_p, lb.f, lb.n_r)
        for target in config.sweep["target_ber"]:
            k = kappa_for_ber(float(target))
            rows.append([float(dbm), float(target), k, comm_distance(k, lb.factor, ptx, lb.sigma2, lb.g_p, lb.f, lb.n_r),
                         k_here])
    return Table("ber_distance", ["ptx_dbm", "target_ber", "kappa", "distance_m", "kappa_at_scene"], rows)


def condnum_table(config: ScenarioConfig) -> Table:
    scene, rad = config.scene, config.radiometry
    p = np.full(3 * scene.n_t, 1 / 3)
    with_gnp = condition_sweep(scene, rad, config.sweep["distance_m"],
                               lambda az: gain_matrix(config.plate, config.spds, config.responsivity, az), p)
    clear = config.plate.transparent_copy()
    without = condition_sweep(scene, rad, config.sweep["distance_m"],
                              lambda az: gain_matrix(clear, config.spds, config.responsivity, az), p)
    rows = [[r, c1, c2] for (r, c1), (_, c2) in zip(with_gnp, without)]
    return Table("condnum", ["distance_m", "cond_gnp", "cond_nognp"], rows)


def chromaticity_table(config: ScenarioConfig, cache: SystemCache) -> Table:
    ptx = float(dbm_to_watts(config.sweep["operating_ptx_dbm"]))
    d = design("slnr_gnp_ao", cache, ptx)
    system = cache.get(True, "los")
    rows = []
    for i, (head, p) in enumerate(zip(system.headlights, d.ratios)):
        xy = chromaticity_of_ratios(head.colors, p)
        for u in range(xy.shape[0]):
            rows.append([u + 1, i + 1, d.kelvin, float(xy[u, 0]), float(xy[u, 1])])
    rows.sort(key=lambda r: (r[0], r[1]))
    return Table("chromaticity", ["u", "i", "K_selected", "x", "y"], rows)


def ao_trace_table(config: ScenarioConfig, cache: SystemCache) -> Table:
    ptx = float(dbm_to_watts(config.sweep["operating_ptx_dbm"]))
    sweep = ao_over_temperatures(cache.get(True, "los"), ptx)
    rows = []
    for k in sorted(sweep.results):
        for t in sweep.results[k].trace:
            rows.append([t.kelvin, t.outer, t.sum_slnr, t.inner_iterations])
    return Table("ao_trace", ["K", "outer", "sum_slnr", "inner_iterations"], rows)


def run_experiment(config: ScenarioConfig, command: str, variant: str | None = None,
                   physical_nlos: bool = True) -> Table:
    if command not in COMMANDS:
        raise ExperimentError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    cache = SystemCache(config, physical_nlos)
    if command == "sumrate":
        return sumrate_table(config, cache, variant)
    if command == "secrecy":
        return secrecy_table(config, cache, variant)
    if command == "ber-distance":
        return ber_distance_table(config, cache)
    if command == "condnum":
        return condnum_table(config)
    if command == "chromaticity":
        return chromaticity_table(config, cache)
    return ao_trace_table(config, cache)


def write_outputs(table: Table, config: ScenarioConfig, out_dir: Path, svg: bool = False) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{table.name}.csv"
    path.write_text(table.to_csv(config.config_hash()), encoding="utf-8")
    written = [path]
    if svg:
        from .plots import plot_table

        note = "synthetic GNP plate" if config.raw.get("synthetic_plate") else None
        written.append(plot_table(table, out_dir / f"{table.name}.svg", note))
    return written
