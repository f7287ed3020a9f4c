"""Assemble per-headlight channel, gain and colour data from a scenario."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import azimuth_of, path_loss_matrix
from .colorimetry import ColorMapVectors, build_color_map_vectors
from .config import ScenarioConfig
from .optics import GnpPlate, cell_transmittance, gain_matrix
from .spectral import average_reflectance

CSI_MODES = ("los", "full")


@dataclass(frozen=True, eq=False)
class HeadlightModel:
    """Everything one headlight needs, stacked over receivers.

    `H_design` is what the transmitter designs with (LOS only unless full
    CSI is assumed); `H_true` is what the receivers actually see. Both have
    shape (U, N_r, N_t); `G` has shape (U, N_t, 3 N_t).
    """

    H_design: np.ndarray
    H_true: np.ndarray
    G: np.ndarray
    azimuths: np.ndarray
    colors: ColorMapVectors

    @property
    def n_t(self) -> int:
        return self.G.shape[1]

    @property
    def Hbar_design(self) -> np.ndarray:
        return self.H_design @ self.G

    @property
    def Hbar_true(self) -> np.ndarray:
        return self.H_true @ self.G

    def effective(self, p, true: bool = False) -> np.ndarray:
        """H̃ for every receiver at ratio vector `p`, shape (U, N_r, N_t)."""
        H = self.H_true if true else self.H_design
        return H * (self.G @ np.asarray(p, float))[:, None, :]


@dataclass(frozen=True, eq=False)
class SystemModel:
    config: ScenarioConfig
    plate: GnpPlate
    headlights: tuple
    rho_bar: float
    csi: str
    physical_nlos: bool

    @property
    def n_users(self) -> int:
        return self.config.scene.n_users

    @property
    def n_streams(self) -> int:
        return self.config.n_streams


def build_system(config: ScenarioConfig, plate: GnpPlate | None = None, csi: str = "los",
                 physical_nlos: bool = True) -> SystemModel:
    """Channels for every (headlight, user) pair.

    `physical_nlos=False` removes the road bounce from the world itself, so
    design and truth are both LOS only.
    """
    if csi not in CSI_MODES:
        raise ValueError(f"csi must be one of {CSI_MODES}, got {csi!r}")
    plate = config.plate if plate is None else plate
    scene, rad = config.scene, config.radiometry
    rho_bar = average_reflectance(config.reflectance, config.spds)
    heads = []
    for i in range(len(scene.headlights)):
        H_d, H_t, G, az, trans = [], [], [], [], []
        for u in range(scene.n_users):
            pl = path_loss_matrix(scene, rad, u, i, rho_bar, include_nlos=physical_nlos)
            H_t.append(pl.total)
            H_d.append(pl.total if csi == "full" else pl.los)
            phis = [azimuth_of(scene, u, i, m) for m in range(scene.n_t)]
            az.append(phis)
            G.append(gain_matrix(plate, config.spds, config.responsivity, phis))
            trans.append([cell_transmittance(plate.cell_for(m), config.grid, phi).values for m, phi in enumerate(phis)])
        heads.append(HeadlightModel(np.array(H_d), np.array(H_t), np.array(G), np.array(az),
                                    build_color_map_vectors(np.array(trans), config.spds, config.grid)))
    return SystemModel(config, plate, tuple(heads), rho_bar, csi, physical_nlos)
