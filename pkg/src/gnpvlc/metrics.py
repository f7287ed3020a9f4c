"""Rates, secrecy, 4-PAM error rates, link distance and conditioning."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .channel import LED_NORMAL, PD_NORMAL, Radiometry, azimuth_of, condition_number, path_loss_matrix
from .precoder import shot_noise_jensen

D_4PAM = 2 / math.sqrt(5)  # adjacent spacing of {-3,-1,1,3}/sqrt(5)
E_OVER_2PI = math.e / (2 * math.pi)


def _as_list(heff):
    return [np.asarray(h, float) for h in heff]


def link_rate(heff, precoders, receiver: int, stream: int, sigma_th2: float, gamma: float, alpha: float,
              ptx: float) -> float:
    """Rate (bits/s/Hz) of `stream` decoded at `receiver`, other streams counted as interference.

    `heff[i]` holds headlight i's effective channels, shape (U, N_r, N_t);
    `precoders[i]` holds its unit-norm precoders, one per stream.
    """
    k = alpha**2 * ptx**2
    signal, noise = 0.0, sigma_th2
    for H, F in zip(_as_list(heff), precoders):
        F = np.atleast_2d(np.asarray(F, float))
        Hr = H[receiver]
        powers = np.sum((Hr @ F.T) ** 2, axis=0)
        signal += k * powers[stream]
        noise += k * (powers.sum() - powers[stream]) + shot_noise_jensen(Hr, F, gamma, alpha, ptx)
    if signal <= 0:
        return 0.0
    return 0.5 * math.log2(1 + E_OVER_2PI * signal / noise)


def user_rates(heff, precoders, sigma_th2: float, gamma: float, alpha: float, ptx: float) -> np.ndarray:
    n_streams = np.atleast_2d(precoders[0]).shape[0]
    return np.array([link_rate(heff, precoders, u, u, sigma_th2, gamma, alpha, ptx) for u in range(n_streams)])


def sum_rate(heff, precoders, sigma_th2: float, gamma: float, alpha: float, ptx: float) -> float:
    return float(np.sum(user_rates(heff, precoders, sigma_th2, gamma, alpha, ptx)))


def secrecy_from_rates(rate_bob: float, rate_eve: float) -> float:
    return max(rate_bob - rate_eve, 0.0)


def secrecy_rate(heff, precoders, sigma_th2: float, gamma: float, alpha: float, ptx: float,
                 bob: int = 0, eve: int = 1) -> tuple[float, float, float]:
    """(R_B, R_E, R_s) for the single stream aimed at `bob`."""
    rb = link_rate(heff, precoders, bob, 0, sigma_th2, gamma, alpha, ptx)
    re = link_rate(heff, precoders, eve, 0, sigma_th2, gamma, alpha, ptx)
    return rb, re, secrecy_from_rates(rb, re)


def q_function(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2))


def ber_4pam(kappa: float) -> float:
    """Union-bound BER of Gray-coded 4-PAM at normalised half-spacing `kappa`."""
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    return 0.75 * q_function(kappa) + q_function(2 * kappa) + 0.25 * q_function(3 * kappa)


def kappa_for_ber(target: float, upper: float = 60.0) -> float:
    """Smallest kappa whose 4-PAM bound meets `target` (ber_4pam is decreasing)."""
    if not 0 < target < 1:
        raise ValueError(f"target BER must be in (0, 1), got {target}")
    return brentq(lambda k: ber_4pam(k) - target, 0.0, upper, xtol=1e-14, rtol=1e-14)


def beam_norm(g_p, f, n_r: int) -> float:
    """|| 1_{N_r x N_t} diag(G p) f || = sqrt(N_r) |sum_m (Gp)_m f_m|."""
    return math.sqrt(n_r) * abs(float(np.dot(np.asarray(g_p, float), np.asarray(f, float))))


def kappa(h_los_mean: float, ptx: float, sigma2: float, g_p, f, n_r: int, d: float = D_4PAM) -> float:
    """kappa of the rank-one channel (h)_L 1 diag(Gp)."""
    return h_los_mean * ptx * d / (2 * sigma2) * beam_norm(g_p, f, n_r)


def boresight_factor(tx, rx, radiometry: Radiometry) -> float:
    """(n+1) A_PD / (2 pi) cos^n(phi) cos(theta) for the headlight-centre to PD-centre ray."""
    ray = np.asarray(rx, float) - np.asarray(tx, float)
    unit = ray / np.linalg.norm(ray)
    cos_phi, cos_theta = float(unit @ LED_NORMAL), float(-unit @ PD_NORMAL)
    n = radiometry.lambertian_order
    return (n + 1) * radiometry.pd_area_m2 / (2 * math.pi) * max(cos_phi, 0.0) ** n * max(cos_theta, 0.0)


def comm_distance(target_kappa: float, factor: float, ptx: float, sigma2: float, g_p, f, n_r: int,
                  d: float = D_4PAM) -> float:
    """Distance at which the rank-one link just reaches `target_kappa`."""
    if target_kappa <= 0:
        raise ValueError("target kappa must be positive")
    return math.sqrt(factor * ptx * d / (2 * sigma2 * target_kappa) * beam_norm(g_p, f, n_r))


def mean_los_gain(scene, radiometry: Radiometry, u: int, i: int) -> float:
    return float(path_loss_matrix(scene, radiometry, u, i, include_nlos=False).los.mean())


def condition_sweep(scene, radiometry: Radiometry, distances, gain_of_azimuths, p, i: int = 0, height: float = 0.9):
    """(r, cond(H̃)) for a single user at (0, r, height) in front of headlight `i`.

    `gain_of_azimuths(list_of_deg)` returns the N_t x 3N_t gain matrix.
    """
    rows = []
    for r in distances:
        s = scene.with_users([(0.0, float(r), height)])
        H = path_loss_matrix(s, radiometry, 0, i, include_nlos=False).los
        G = gain_of_azimuths([azimuth_of(s, 0, i, m) for m in range(s.n_t)])
        rows.append((float(r), condition_number(H * (G @ np.asarray(p, float))[None, :])))
    return rows
