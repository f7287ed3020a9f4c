"""Chiroptical transmittance of gold-nanoparticle (GNP) plate cells.

A cell is described by a few Lorentzian absorption bands whose depth for
left/right circular polarisation is modulated by the azimuth angle of the
incident light. Only the unpolarised transmittance (aL + aR) / 2 reaches
the photodiodes; the differential phase is kept for the Mueller algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .spectral import SpectralFunction, SpectralGrid, integrate


class OpticsError(ValueError):
    pass


class ChiralResponse(NamedTuple):
    aL: np.ndarray | float
    aR: np.ndarray | float
    dphi: np.ndarray | float


# Coherency <-> Stokes change of basis for the circular-polarisation Jones frame.
T_STOKES = np.array([
    [1, 0, 0, 1],
    [1, 0, 0, -1],
    [0, 1, 1, 0],
    [0, 1j, -1j, 0],
])
T_STOKES_INV = np.linalg.inv(T_STOKES)


def jones_matrix(aL, aR, dphi) -> np.ndarray:
    """Diagonal Jones matrix in the circular basis; array inputs give a stack of shape (..., 2, 2)."""
    aL, aR, dphi = np.broadcast_arrays(*(np.asarray(v, float) for v in (aL, aR, dphi)))
    J = np.zeros(aL.shape + (2, 2), complex)
    J[..., 0, 0] = np.sqrt(aL)
    J[..., 1, 1] = np.sqrt(aR) * np.exp(1j * dphi)
    return J


def mueller_from_jones(r: ChiralResponse) -> np.ndarray:
    """Closed-form Mueller matrix of a cell: achiral block plus phase rotation block.

    Works elementwise on array fields, returning shape (..., 4, 4).
    """
    aL, aR, dphi = np.broadcast_arrays(*(np.asarray(v, float) for v in r))
    if np.any((aL < 0) | (aL > 1) | (aR < 0) | (aR > 1)) or np.any(np.isnan(aL) | np.isnan(aR)):
        raise OpticsError(f"transmittances must lie in [0, 1], got aL={aL}, aR={aR}")
    g = np.sqrt(aL * aR)
    M = np.zeros(aL.shape + (4, 4))
    M[..., 0, 0] = M[..., 1, 1] = (aL + aR) / 2
    M[..., 0, 1] = M[..., 1, 0] = (aL - aR) / 2
    M[..., 2, 2] = M[..., 3, 3] = g * np.cos(dphi)
    M[..., 3, 2] = g * np.sin(dphi)
    M[..., 2, 3] = -M[..., 3, 2]
    return M


def mueller_numeric(jones: np.ndarray) -> np.ndarray:
    """T (J ⊗ J*) T^-1 evaluated directly; the imaginary part is round-off."""
    jones = np.asarray(jones)
    kron = np.einsum("...ij,...kl->...ikjl", jones, jones.conj()).reshape(jones.shape[:-2] + (4, 4))
    return (T_STOKES @ kron @ T_STOKES_INV).real


def unpolarized_transmittance(r: ChiralResponse):
    return (np.asarray(r.aL) + np.asarray(r.aR)) / 2


@dataclass(frozen=True)
class Resonance:
    center_nm: float
    width_nm: float
    depth_L: float
    depth_R: float
    azimuth_phase_deg: float = 0.0
    azimuth_sensitivity: float = 0.0


@dataclass(frozen=True)
class GnpCell:
    resonances: tuple[Resonance, ...] = ()
    cell_id: str = ""

    @classmethod
    def transparent(cls, cell_id: str = "clear") -> "GnpCell":
        return cls((), cell_id)


def lorentzian(wavelengths, center_nm: float, width_nm: float) -> np.ndarray:
    x = (np.asarray(wavelengths, dtype=float) - center_nm) / (width_nm / 2)
    return 1.0 / (1.0 + x**2)


def cell_response(cell: GnpCell, wavelengths, azimuth_deg: float) -> ChiralResponse:
    """Synthetic left/right transmittance and phase of `cell` at one azimuth."""
    if not -90.0 <= azimuth_deg <= 90.0:
        raise OpticsError(f"azimuth {azimuth_deg} deg outside [-90, 90]")
    wl = np.asarray(wavelengths, dtype=float)
    absorb_L = np.zeros_like(wl)
    absorb_R = np.zeros_like(wl)
    dphi = np.zeros_like(wl)
    for res in cell.resonances:
        shape = lorentzian(wl, res.center_nm, res.width_nm)
        ang = np.deg2rad(2 * (azimuth_deg - res.azimuth_phase_deg))
        mod = 0.5 + 0.5 * np.cos(ang) * res.azimuth_sensitivity
        absorb_L += res.depth_L * shape * mod
        absorb_R += res.depth_R * shape * mod
        # dispersive partner of the absorption band
        x = (wl - res.center_nm) / (res.width_nm / 2)
        dphi += np.pi * (res.depth_L - res.depth_R) * x * shape * mod
    return ChiralResponse(np.clip(1 - absorb_L, 0, 1), np.clip(1 - absorb_R, 0, 1), dphi)


def cell_transmittance(cell: GnpCell, grid: SpectralGrid, azimuth_deg: float) -> SpectralFunction:
    return SpectralFunction(grid, unpolarized_transmittance(cell_response(cell, grid.wavelengths, azimuth_deg)))


@dataclass(frozen=True)
class GnpPlate:
    cells: tuple[GnpCell, ...]
    led_to_cell: tuple[int, ...]

    def __post_init__(self):
        n = len(self.cells)
        for m, k in enumerate(self.led_to_cell):
            if not 0 <= k < n:
                raise OpticsError(f"LED {m} maps to missing cell {k} (plate has {n} cells)")

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def cell_for(self, m: int) -> GnpCell:
        try:
            return self.cells[self.led_to_cell[m]]
        except IndexError:
            raise OpticsError(f"LED {m} has no cell mapping") from None

    def check_users(self, n_users: int):
        if self.n_cells < n_users:
            raise OpticsError(f"plate has {self.n_cells} cells but {n_users} users; need N >= U")

    def transparent_copy(self) -> "GnpPlate":
        """Same layout with every cell replaced by unit transmittance."""
        return GnpPlate(tuple(GnpCell.transparent(c.cell_id) for c in self.cells), self.led_to_cell)


def gnp_gain_vector(cell: GnpCell, spds, responsivity: SpectralFunction, azimuth_deg: float) -> np.ndarray:
    """Photocurrent per unit flux of each RGB source through `cell`: ∫ R_PD S_c ā dλ."""
    a = cell_transmittance(cell, responsivity.grid, azimuth_deg)
    return np.array([integrate(responsivity * s * a) for s in spds])


def gain_matrix(plate: GnpPlate, spds, responsivity: SpectralFunction, azimuths_deg) -> np.ndarray:
    """Block-diagonal N_t x 3N_t matrix with row m holding g_m^T in columns 3m..3m+2.

    `azimuths_deg[m]` is the azimuth of LED m toward the user.
    """
    nt = len(azimuths_deg)
    if len(plate.led_to_cell) < nt:
        raise OpticsError(f"plate maps {len(plate.led_to_cell)} LEDs, headlight has {nt}")
    G = np.zeros((nt, 3 * nt))
    for m, phi in enumerate(azimuths_deg):
        G[m, 3 * m:3 * m + 3] = gnp_gain_vector(plate.cell_for(m), spds, responsivity, phi)
    return G
