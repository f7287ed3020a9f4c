"""Wavelength grid and sampled spectral quantities.

Every spectral curve in a scenario (LED spectra, photodiode responsivity,
reflectance, GNP transmittance, colour-matching functions) lives on one
shared uniform grid and is integrated with the trapezoidal rule.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

COLORS = ("R", "G", "B")


class SpectralError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralGrid:
    lambda_min_nm: float = 380.0
    lambda_max_nm: float = 780.0
    step_nm: float = 5.0

    @property
    def size(self) -> int:
        return int(round((self.lambda_max_nm - self.lambda_min_nm) / self.step_nm)) + 1

    @property
    def wavelengths(self) -> np.ndarray:
        return self.lambda_min_nm + self.step_nm * np.arange(self.size)


def make_grid(min_nm: float = 380.0, max_nm: float = 780.0, step_nm: float = 5.0) -> SpectralGrid:
    """Build a uniform grid that includes both endpoints.

    Raises `SpectralError` when the span is not an integer multiple of the step.
    """
    if not min_nm < max_nm:
        raise SpectralError(f"grid bounds must satisfy min < max, got {min_nm} >= {max_nm}")
    if step_nm <= 0:
        raise SpectralError(f"grid step must be positive, got {step_nm}")
    n = (max_nm - min_nm) / step_nm
    if abs(n - round(n)) > 1e-9:
        raise SpectralError(
            f"span {max_nm - min_nm} nm is not an integer multiple of step {step_nm} nm"
        )
    return SpectralGrid(float(min_nm), float(max_nm), float(step_nm))


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    grid: SpectralGrid
    values: np.ndarray
    signed: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise SpectralError(
                f"expected {self.grid.size} samples for {self.grid}, got shape {values.shape}"
            )
        if not self.signed and np.any(values < 0):
            raise SpectralError("negative sample in a nonnegative spectral function")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def wavelengths(self) -> np.ndarray:
        return self.grid.wavelengths

    def _check(self, other: "SpectralFunction"):
        if other.grid != self.grid:
            raise SpectralError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        self._check(other)
        return SpectralFunction(self.grid, self.values + other.values, self.signed or other.signed)

    def __mul__(self, other):
        if isinstance(other, SpectralFunction):
            self._check(other)
            return SpectralFunction(self.grid, self.values * other.values, self.signed or other.signed)
        other = float(other)
        return SpectralFunction(self.grid, self.values * other, self.signed or other < 0)

    __rmul__ = __mul__


def constant(grid: SpectralGrid, value: float) -> SpectralFunction:
    return SpectralFunction(grid, np.full(grid.size, float(value)))


def integrate(f: SpectralFunction | np.ndarray, grid: SpectralGrid | None = None) -> float:
    """Trapezoidal integral over the grid, in value x nm."""
    if isinstance(f, SpectralFunction):
        grid, values = f.grid, f.values
    else:
        values = np.asarray(f, dtype=float)
    return float(np.trapezoid(values, dx=grid.step_nm))


@dataclass(frozen=True)
class LedSpdModel:
    """Gaussian RGB emitters; `peaks` only matter before normalisation."""

    centers_nm: tuple[float, float, float] = (630.0, 521.0, 450.0)
    fwhm_nm: tuple[float, float, float] = (25.0, 25.0, 25.0)
    peaks: tuple[float, float, float] = (1.0, 1.0, 1.0)


def gaussian_profile(wavelengths, center_nm: float, fwhm_nm: float, peak: float = 1.0) -> np.ndarray:
    if fwhm_nm <= 0:
        raise SpectralError(f"fwhm must be positive, got {fwhm_nm}")
    wl = np.asarray(wavelengths, dtype=float)
    return peak * np.exp(-4.0 * math.log(2.0) * (wl - center_nm) ** 2 / fwhm_nm**2)


def gaussian_spd(model: LedSpdModel, c: int | str, grid: SpectralGrid) -> SpectralFunction:
    """SPD of source `c` (index 0..2 or 'R'/'G'/'B') with unit trapezoidal integral."""
    idx = COLORS.index(c) if isinstance(c, str) else int(c)
    raw = gaussian_profile(grid.wavelengths, model.centers_nm[idx], model.fwhm_nm[idx], model.peaks[idx])
    total = integrate(raw, grid)
    if not total > 0:
        raise SpectralError(f"SPD for color {COLORS[idx]} vanishes on the grid")
    return SpectralFunction(grid, raw / total)


def led_spds(model: LedSpdModel, grid: SpectralGrid) -> list[SpectralFunction]:
    return [gaussian_spd(model, c, grid) for c in range(3)]


def linear_ramp(grid: SpectralGrid, start: float, end: float) -> SpectralFunction:
    """Straight line from `start` at the first grid point to `end` at the last."""
    wl = grid.wavelengths
    t = (wl - wl[0]) / (wl[-1] - wl[0])
    return SpectralFunction(grid, start + (end - start) * t)


def pd_responsivity(grid: SpectralGrid, at_min: float = 0.1, at_max: float = 0.5) -> SpectralFunction:
    """Photodiode responsivity in A/W, linear across the grid."""
    return linear_ramp(grid, at_min, at_max)


def reflectance(grid: SpectralGrid, mean: float = 0.91, tilt: float = 0.0) -> SpectralFunction:
    """Aluminium-like reflectance: `mean` at mid-band, +/- `tilt`/2 at the edges."""
    return linear_ramp(grid, mean - tilt / 2, mean + tilt / 2)


def average_reflectance(rho: SpectralFunction, spds) -> float:
    """SPD-weighted mean reflectance over the summed RGB spectrum."""
    total = spds[0]
    for s in spds[1:]:
        total = total + s
    denom = integrate(total)
    if denom <= 0:
        raise SpectralError("total SPD is identically zero")
    return integrate(total * rho) / denom


def load_csv_spectrum(path: str | Path, grid: SpectralGrid) -> SpectralFunction:
    """Two-column CSV (wavelength_nm, value), linearly resampled onto `grid`.

    Lines that do not parse as two numbers (e.g. a header) are skipped. Values
    outside the tabulated range are held at the end samples.
    """
    wl, val = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            try:
                w, v = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                continue
            wl.append(w)
            val.append(v)
    if len(wl) < 2:
        raise SpectralError(f"{path}: need at least two numeric rows")
    order = np.argsort(wl)
    values = np.interp(grid.wavelengths, np.asarray(wl)[order], np.asarray(val)[order])
    return SpectralFunction(grid, values)
