"""Headlight-to-vehicle geometry and Lambertian path loss.

Coordinates are metres with +y pointing down the road from the Tx vehicle
and z up. LED arrays face +y, PD arrays face -y, and the single-bounce
reflector is a road patch facing +z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._linalg import dominant_eigh

LED_NORMAL = np.array([0.0, 1.0, 0.0])
PD_NORMAL = np.array([0.0, -1.0, 0.0])
ROAD_NORMAL = np.array([0.0, 0.0, 1.0])


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Radiometry:
    half_power_deg: float = 20.0
    pd_area_m2: float = 1e-4
    reflector_area_m2: float = 0.04
    zeta_w_per_a: float = 0.44
    alpha: float = 0.5

    def __post_init__(self):
        if not 0 < self.half_power_deg < 90:
            raise GeometryError(f"half-power angle must be in (0, 90) deg, got {self.half_power_deg}")
        if not 0 <= self.alpha <= 1:
            raise GeometryError(f"modulation index must be in [0, 1], got {self.alpha}")

    @property
    def lambertian_order(self) -> float:
        return lambertian_order(self.half_power_deg)


def lambertian_order(half_power_deg: float) -> float:
    if not 0 < half_power_deg < 90:
        raise GeometryError(f"half-power angle must be in (0, 90) deg, got {half_power_deg}")
    return -math.log(2) / math.log(math.cos(math.radians(half_power_deg)))


def grid_offsets(rows: int, cols: int, spacing: float) -> np.ndarray:
    """Element offsets in the x-z plane, row-major, centred on the array centre."""
    xs = (np.arange(cols) - (cols - 1) / 2) * spacing
    zs = ((rows - 1) / 2 - np.arange(rows)) * spacing
    return np.array([[x, 0.0, z] for z in zs for x in xs])


@dataclass(frozen=True)
class Scene:
    headlights: tuple[tuple[float, float, float], ...] = ((-1.0, 0.0, 1.1), (1.0, 0.0, 1.1))
    users: tuple[tuple[float, float, float], ...] = ((-3.0, 20.0, 0.9), (0.0, 23.0, 0.9), (3.0, 19.0, 0.9))
    led_grid: tuple[int, int] = (2, 2)
    pd_grid: tuple[int, int] = (2, 2)
    d_led_m: float = 0.04
    d_pd_m: float = 0.01
    # explicit road reflector per user; None puts one midway between headlight and user
    reflectors: tuple[tuple[float, float, float], ...] | None = None

    def __post_init__(self):
        pts = list(self.headlights) + list(self.users)
        if any(p[2] < 0 for p in pts):
            raise GeometryError("all heights must be >= 0")
        if not self.headlights or not self.users:
            raise GeometryError("scene needs at least one headlight and one user")
        if len(set(map(tuple, self.users))) != len(self.users):
            raise GeometryError("user positions must be distinct")
        if min(self.led_grid) < 1 or min(self.pd_grid) < 1:
            raise GeometryError("LED and PD arrays need at least one element")
        if self.reflectors is not None and len(self.reflectors) != len(self.users):
            raise GeometryError("one reflector per user is required when reflectors are given")

    @property
    def n_t(self) -> int:
        return self.led_grid[0] * self.led_grid[1]

    @property
    def n_r(self) -> int:
        return self.pd_grid[0] * self.pd_grid[1]

    @property
    def n_users(self) -> int:
        return len(self.users)

    def led_positions(self, i: int) -> np.ndarray:
        return np.asarray(self.headlights[i]) + grid_offsets(*self.led_grid, self.d_led_m)

    def pd_positions(self, u: int) -> np.ndarray:
        return np.asarray(self.users[u]) + grid_offsets(*self.pd_grid, self.d_pd_m)

    def reflector_position(self, u: int, i: int) -> np.ndarray:
        if self.reflectors is not None:
            return np.asarray(self.reflectors[u], dtype=float)
        mid = (np.asarray(self.headlights[i]) + np.asarray(self.users[u])) / 2
        return np.array([mid[0], mid[1], 0.0])

    def with_users(self, users) -> "Scene":
        return Scene(self.headlights, tuple(map(tuple, users)), self.led_grid, self.pd_grid,
                     self.d_led_m, self.d_pd_m, None)


def _cosines(src, src_normal, dst, dst_normal):
    ray = np.asarray(dst, dtype=float) - np.asarray(src, dtype=float)
    dist = float(np.linalg.norm(ray))
    if dist == 0:
        raise GeometryError("coincident transmitter and receiver")
    unit = ray / dist
    return dist, float(unit @ src_normal), float(-unit @ dst_normal)


def los_gain(tx, rx, radiometry: Radiometry, tx_normal=LED_NORMAL, rx_normal=PD_NORMAL) -> float:
    """Lambertian LOS gain; zero when either end faces away."""
    dist, cos_phi, cos_theta = _cosines(tx, tx_normal, rx, rx_normal)
    if cos_phi <= 0 or cos_theta <= 0:
        return 0.0
    n = radiometry.lambertian_order
    return (n + 1) * radiometry.pd_area_m2 / (2 * math.pi * dist**2) * cos_phi**n * cos_theta


def nlos_gain(tx, reflector, rx, radiometry: Radiometry, rho_bar: float,
              tx_normal=LED_NORMAL, reflector_normal=ROAD_NORMAL, rx_normal=PD_NORMAL) -> float:
    """Single-bounce gain: LED -> diffuse patch of area A_ref -> PD."""
    d1, cos_phi_m, cos_theta_m = _cosines(tx, tx_normal, reflector, reflector_normal)
    d2, cos_phi_n, cos_theta_n = _cosines(reflector, reflector_normal, rx, rx_normal)
    if min(cos_phi_m, cos_theta_m, cos_phi_n, cos_theta_n) <= 0:
        return 0.0
    n = radiometry.lambertian_order
    first = (n + 1) * radiometry.reflector_area_m2 * cos_phi_m**n * cos_theta_m / (2 * math.pi * d1**2)
    second = radiometry.pd_area_m2 * cos_phi_n * cos_theta_n / (math.pi * d2**2) * rho_bar
    return first * second


@dataclass(frozen=True)
class PathLossMatrix:
    los: np.ndarray
    nlos: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.los + self.nlos


def path_loss_matrix(scene: Scene, radiometry: Radiometry, u: int, i: int, rho_bar: float = 0.0,
                     include_nlos: bool = True) -> PathLossMatrix:
    """N_r x N_t gains from headlight `i` to user `u`, LOS and NLOS parts."""
    leds, pds = scene.led_positions(i), scene.pd_positions(u)
    los = np.array([[los_gain(led, pd, radiometry) for led in leds] for pd in pds])
    nlos = np.zeros_like(los)
    if include_nlos:
        refl = scene.reflector_position(u, i)
        nlos = np.array([[nlos_gain(led, refl, pd, radiometry, rho_bar) for led in leds] for pd in pds])
    return PathLossMatrix(los, nlos)


def azimuth_of(scene: Scene, u: int, i: int, led: int | None = None) -> float:
    """Signed horizontal angle (deg) from +y to the ray toward user `u`'s PD centre.

    The ray starts at the headlight centre, or at LED `led` when given.
    """
    src = scene.headlights[i] if led is None else scene.led_positions(i)[led]
    dx = scene.users[u][0] - src[0]
    dy = scene.users[u][1] - src[1]
    if dy <= 0:
        raise GeometryError(f"user {u} is not ahead of headlight {i}")
    return math.degrees(math.atan2(dx, dy))


def effective_channel(H, G, p) -> np.ndarray:
    H, G, p = np.asarray(H, float), np.asarray(G, float), np.asarray(p, float)
    if H.shape[1] != G.shape[0] or G.shape[1] != p.shape[0]:
        raise GeometryError(f"dimension mismatch: H {H.shape}, G {G.shape}, p {p.shape}")
    return H * (G @ p)[None, :]


def rank1_approx(Ht) -> tuple[float, np.ndarray]:
    """Dominant eigenpair (λ, q) of Ht^T Ht, sign fixed."""
    Ht = np.asarray(Ht, float)
    if not np.any(Ht):
        raise GeometryError("rank-1 approximation of a zero channel")
    return dominant_eigh(Ht.T @ Ht)


def condition_number(Ht) -> float:
    s = np.linalg.svd(np.asarray(Ht, float), compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else math.inf
