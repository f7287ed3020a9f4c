"""CIE 1931 colorimetry for multi-LED RGB headlights.

Covers tristimulus integration, Planckian white points, the ANSI nominal-CCT
quadrangles (as inward half-planes), and the colour-mapping vectors that turn
chromaticity targets into linear constraints on the RGB ratio vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _cie1931
from .spectral import SpectralFunction, SpectralGrid, integrate, make_grid

H_PLANCK = 6.62607015e-34  # J s
C_LIGHT = 2.99792458e8  # m / s
K_BOLTZMANN = 1.380649e-23  # J / K

TARGET_TOLERANCE = 1e-4  # Euclidean xy distance counted as "on target"


class ColorimetryError(ValueError):
    pass


class TriStimulus(NamedTuple):
    X: float
    Y: float
    Z: float


class Chromaticity(NamedTuple):
    x: float
    y: float


def cmfs(grid: SpectralGrid) -> np.ndarray:
    """x̄, ȳ, z̄ on `grid` as a (3, n) array, linearly interpolated from the 5 nm table."""
    wl = grid.wavelengths
    return np.vstack([
        np.interp(wl, _cie1931.WAVELENGTHS_NM, _cie1931.XBAR, left=0.0, right=0.0),
        np.interp(wl, _cie1931.WAVELENGTHS_NM, _cie1931.YBAR, left=0.0, right=0.0),
        np.interp(wl, _cie1931.WAVELENGTHS_NM, _cie1931.ZBAR, left=0.0, right=0.0),
    ])


def chromaticity_of(t) -> Chromaticity:
    X, Y, Z = (float(v) for v in t)
    s = X + Y + Z
    if not s > 0:
        raise ColorimetryError(f"tristimulus sum must be positive, got {s}")
    return Chromaticity(X / s, Y / s)


def tristimulus_of_spectrum(f: SpectralFunction) -> TriStimulus:
    cm = cmfs(f.grid)
    return TriStimulus(*(integrate(f.values * row, f.grid) for row in cm))


def planck_spd(kelvin: float, grid: SpectralGrid) -> SpectralFunction:
    """Black-body spectral radiance at `kelvin`, scaled to unit integral on `grid`."""
    if kelvin <= 0:
        raise ColorimetryError(f"temperature must be positive, got {kelvin}")
    lam = grid.wavelengths * 1e-9
    radiance = 2 * H_PLANCK * C_LIGHT**2 / (lam**5 * np.expm1(H_PLANCK * C_LIGHT / (lam * K_BOLTZMANN * kelvin)))
    return SpectralFunction(grid, radiance / integrate(radiance, grid))


def white_point(kelvin: float, grid: SpectralGrid | None = None) -> Chromaticity:
    grid = grid or make_grid()
    return chromaticity_of(tristimulus_of_spectrum(planck_spd(kelvin, grid)))


# ANSI C78.377 nominal CCT quadrangles, corner chromaticities.
ANSI_QUADRANGLES: dict[int, tuple[tuple[float, float], ...]] = {
    2700: ((0.4813, 0.4319), (0.4562, 0.4260), (0.4373, 0.3893), (0.4593, 0.3944)),
    3000: ((0.4562, 0.4260), (0.4299, 0.4165), (0.4147, 0.3814), (0.4373, 0.3893)),
    3500: ((0.4299, 0.4165), (0.3996, 0.4015), (0.3889, 0.3690), (0.4147, 0.3814)),
    4000: ((0.4006, 0.4044), (0.3736, 0.3874), (0.3670, 0.3578), (0.3898, 0.3716)),
    4500: ((0.3736, 0.3874), (0.3548, 0.3736), (0.3512, 0.3465), (0.3670, 0.3578)),
    5000: ((0.3551, 0.3760), (0.3376, 0.3616), (0.3366, 0.3369), (0.3515, 0.3487)),
    5700: ((0.3376, 0.3616), (0.3207, 0.3462), (0.3222, 0.3243), (0.3366, 0.3369)),
    6500: ((0.3205, 0.3481), (0.3028, 0.3304), (0.3068, 0.3113), (0.3221, 0.3261)),
}


@dataclass(frozen=True, eq=False)
class QuadrangleConstraint:
    """Four half-planes a*x + b*y + c <= 0; rows of `coefficients` are (a, b, c).

    (a, b) has unit norm, so a row value is the signed distance outside that edge.
    """

    kelvin: int
    vertices: np.ndarray
    coefficients: np.ndarray

    @classmethod
    def from_vertices(cls, kelvin, vertices) -> "QuadrangleConstraint":
        v = np.asarray(vertices, dtype=float)
        if v.shape != (4, 2):
            raise ColorimetryError(f"quadrangle for {kelvin} K needs 4 (x, y) vertices, got {v.shape}")
        center = v.mean(axis=0)
        v = v[np.argsort(np.arctan2(v[:, 1] - center[1], v[:, 0] - center[0]))]  # counter-clockwise
        rows = []
        for j in range(4):
            e = v[(j + 1) % 4] - v[j]
            a, b = e[1], -e[0]
            c = e[0] * v[j, 1] - e[1] * v[j, 0]
            n = np.hypot(a, b)
            if n == 0:
                raise ColorimetryError(f"degenerate quadrangle edge for {kelvin} K")
            rows.append((a / n, b / n, c / n))
        coef = np.array(rows)
        if np.any(coef[:, :2] @ center + coef[:, 2] >= 0):
            raise ColorimetryError(f"quadrangle for {kelvin} K is not convex")
        return cls(int(kelvin), v, coef)

    def residuals(self, xy) -> np.ndarray:
        x, y = xy
        return self.coefficients[:, 0] * x + self.coefficients[:, 1] * y + self.coefficients[:, 2]

    def contains(self, xy, tol: float = 0.0) -> bool:
        return bool(np.all(self.residuals(xy) <= tol))


def default_quadrangles() -> dict[int, QuadrangleConstraint]:
    return {k: QuadrangleConstraint.from_vertices(k, v) for k, v in ANSI_QUADRANGLES.items()}


@dataclass(frozen=True, eq=False)
class ColorMapVectors:
    """Per-user tristimulus weights of every (LED, source) pair for one headlight.

    Arrays have shape (U, N_t, 3); `x`, `y`, `t` give the (U, 3 N_t)
    concatenations matching the ratio vector layout [p_1; ...; p_Nt].
    """

    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray

    @property
    def n_users(self) -> int:
        return self.X.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.X.reshape(self.n_users, -1)

    @property
    def y(self) -> np.ndarray:
        return self.Y.reshape(self.n_users, -1)

    @property
    def t(self) -> np.ndarray:
        return (self.X + self.Y + self.Z).reshape(self.n_users, -1)


def build_color_map_vectors(transmittance, spds, grid: SpectralGrid) -> ColorMapVectors:
    """Tristimulus of each source filtered by each LED's GNP cell, per user.

    `transmittance` has shape (U, N_t, n_grid) with values in [0, 1].
    """
    a = np.asarray(transmittance, dtype=float)
    if a.ndim != 3 or a.shape[2] != grid.size:
        raise ColorimetryError(f"transmittance must be (U, N_t, {grid.size}), got {a.shape}")
    if np.any(a < 0) or np.any(a > 1):
        raise ColorimetryError("transmittance outside [0, 1]")
    S = np.vstack([s.values for s in spds])  # (3, n)
    cm = cmfs(grid)  # (3, n)
    # out[k, u, m, c] = ∫ S_c a_um cmf_k
    weighted = a[None, :, :, None, :] * S[None, None, None, :, :] * cm[:, None, None, None, :]
    out = np.trapezoid(weighted, dx=grid.step_nm, axis=-1)
    return ColorMapVectors(out[0], out[1], out[2])


def chromaticity_of_ratios(v: ColorMapVectors, p) -> np.ndarray:
    """(U, 2) array of chromaticities seen by each user for ratio vector `p`."""
    p = np.asarray(p, dtype=float)
    den = v.t @ p
    if np.any(den <= 0):
        raise ColorimetryError("ratio vector produces zero tristimulus sum")
    return np.column_stack([v.x @ p / den, v.y @ p / den])


def strict_white_matrix(v: ColorMapVectors, target) -> np.ndarray:
    """T_w with T_w p = 0 iff every user sees chromaticity `target`.

    Rows come in (x, y) pairs, one pair per user.
    """
    xw, yw = target
    pairs = np.stack([v.x - xw * v.t, v.y - yw * v.t], axis=1)
    return pairs.reshape(-1, v.t.shape[1])


def quadrangle_matrix(quad: QuadrangleConstraint, v: ColorMapVectors, u: int) -> np.ndarray:
    """4 x 3N_t matrix whose rows are <= 0 iff user `u`'s chromaticity is in `quad`."""
    a, b, c = quad.coefficients.T
    return np.outer(a, v.x[u]) + np.outer(b, v.y[u]) + np.outer(c, v.t[u])


def quadrangle_for(kelvin, quadrangles: dict, v: ColorMapVectors, u: int) -> np.ndarray:
    try:
        quad = quadrangles[int(kelvin)]
    except KeyError:
        raise ColorimetryError(f"no quadrangle defined for {kelvin} K") from None
    return quadrangle_matrix(quad, v, u)
