"""Precoding schemes compared in the sweeps, all scored on the true channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ao import ao_over_temperatures, design_precoders, initial_ratios
from .config import ScenarioConfig
from .metrics import secrecy_rate, user_rates
from .model import SystemModel, build_system

VARIANTS = ("slnr_gnp_ao", "slnr_gnp_ao_nl", "slnr_gnp_noao", "slnr_nognp", "mrt_gnp")


class VariantError(ValueError):
    pass


@dataclass
class Design:
    variant: str
    kelvin: int
    precoders: list
    ratios: list
    sum_slnr: float | None = None
    ao_iterations: int | None = None


class SystemCache:
    """Builds each (plate, csi, nlos) system once per configuration."""

    def __init__(self, config: ScenarioConfig, physical_nlos: bool = True):
        self.config = config
        self.physical_nlos = physical_nlos
        self._systems = {}

    def get(self, gnp: bool = True, csi: str = "los") -> SystemModel:
        key = (gnp, csi)
        if key not in self._systems:
            plate = self.config.plate if gnp else self.config.plate.transparent_copy()
            self._systems[key] = build_system(self.config, plate, csi, self.physical_nlos)
        return self._systems[key]


def _ao_design(name: str, system: SystemModel, ptx: float) -> Design:
    sweep = ao_over_temperatures(system, ptx)
    b = sweep.best
    return Design(name, b.kelvin, b.precoders, b.ratios, b.sum_slnr, b.iterations)


def design(variant: str, cache: SystemCache, ptx: float, memo: dict | None = None) -> Design:
    """Precoders and ratios for `variant` at power `ptx` (watts per LED)."""
    memo = {} if memo is None else memo
    key = (variant, ptx)
    if key in memo:
        return memo[key]
    if variant == "slnr_gnp_ao":
        out = _ao_design(variant, cache.get(True, "los"), ptx)
    elif variant == "slnr_gnp_ao_nl":
        out = _ao_design(variant, cache.get(True, "full"), ptx)
    elif variant == "slnr_nognp":
        out = _ao_design(variant, cache.get(False, "los"), ptx)
    elif variant == "slnr_gnp_noao":
        system = cache.get(True, "los")
        k = cache.config.fixed_kelvin
        ratios = [r.p for r in initial_ratios(system, k)]
        precoders = [design_precoders(h, p, system, ptx) for h, p in zip(system.headlights, ratios)]
        out = Design(variant, k, precoders, ratios)
    elif variant == "mrt_gnp":
        base = design("slnr_gnp_ao", cache, ptx, memo)
        system = cache.get(True, "los")
        precoders = [design_precoders(h, p, system, ptx, method="mrt") for h, p in zip(system.headlights, base.ratios)]
        out = Design(variant, base.kelvin, precoders, base.ratios)
    else:
        raise VariantError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    memo[key] = out
    return out


def true_channels(cache: SystemCache, d: Design) -> list:
    system = cache.get(d.variant != "slnr_nognp", "los")
    return [h.effective(p, true=True) for h, p in zip(system.headlights, d.ratios)]


def evaluate_rates(cache: SystemCache, d: Design, ptx: float) -> np.ndarray:
    cfg = cache.config
    return user_rates(true_channels(cache, d), d.precoders, cfg.noise.sigma_th2, cfg.noise.gamma,
                      cfg.radiometry.alpha, ptx)


def evaluate_secrecy(cache: SystemCache, d: Design, ptx: float) -> tuple[float, float, float]:
    cfg = cache.config
    return secrecy_rate(true_channels(cache, d), d.precoders, cfg.noise.sigma_th2, cfg.noise.gamma,
                        cfg.radiometry.alpha, ptx)
