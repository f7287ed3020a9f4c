"""Noise model and SLNR / MRT precoders for one headlight."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from ._linalg import sign_normalize

ELECTRON_CHARGE = 1.602176634e-19


class PrecoderError(ValueError):
    pass


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True)
class NoiseModel:
    thermal_dbm: float = -128.76
    bandwidth_hz: float = 1e8
    charge: float = ELECTRON_CHARGE

    @property
    def sigma_th2(self) -> float:
        return float(dbm_to_watts(self.thermal_dbm))

    @property
    def gamma(self) -> float:
        return 2 * self.charge * self.bandwidth_hz


def shot_noise_jensen(Ht, precoders, gamma: float, alpha: float, ptx: float) -> float:
    """Jensen upper bound of the shot-noise variance at one user from one headlight.

    `precoders` holds one f_v per row (all streams sent by the headlight).
    """
    Ht = np.asarray(Ht, float)
    F = np.atleast_2d(np.asarray(precoders, float))
    dc = Ht @ np.ones(Ht.shape[1])
    ac = Ht @ F.T
    return gamma * ptx * math.sqrt(dc @ dc + alpha**2 * np.sum(ac * ac))


def shot_noise_constant(lam: float, n_t: int, n_streams: int, alpha: float, gamma: float, ptx: float) -> float:
    """Precoder-independent bound γ P (√N_t + αU) √λ̃ of the Jensen bound."""
    if lam < 0:
        raise PrecoderError(f"eigenvalue must be nonnegative, got {lam}")
    return gamma * ptx * (math.sqrt(n_t) + alpha * n_streams) * math.sqrt(lam)


def leakage_matrix(others, alpha: float, ptx: float, n_t: int) -> np.ndarray:
    L = np.zeros((n_t, n_t))
    for Hv in others:
        Hv = np.asarray(Hv, float)
        L += Hv.T @ Hv
    return alpha**2 * ptx**2 * L


def slnr(Ht_u, others, f, sigma2: float, alpha: float, ptx: float) -> float:
    """Rayleigh ratio of the SLNR problem for precoder `f` (not necessarily unit norm)."""
    f = np.asarray(f, float)
    Ht_u = np.asarray(Ht_u, float)
    num = alpha**2 * ptx**2 * np.sum((Ht_u @ f) ** 2)
    leak = alpha**2 * ptx**2 * sum(np.sum((np.asarray(Hv) @ f) ** 2) for Hv in others)
    return float(num / (leak + sigma2 * (f @ f)))


@dataclass(frozen=True)
class SlnrSolution:
    f: np.ndarray
    eigenvalue: float


def solve_slnr(Ht_u, others, sigma2: float, alpha: float, ptx: float) -> SlnrSolution:
    """Unit-norm maximiser of the SLNR Rayleigh ratio.

    The denominator L + σ² I is SPD, so it is Cholesky-whitened and the
    top eigenvector of the whitened numerator is mapped back. Ties inside a
    degenerate top eigenspace are broken by the exact ratio, then
    lexicographically on the sign-normalised vector.
    """
    Ht_u = np.asarray(Ht_u, float)
    n_t = Ht_u.shape[1]
    A = alpha**2 * ptx**2 * (Ht_u.T @ Ht_u)
    B = leakage_matrix(others, alpha, ptx, n_t) + sigma2 * np.eye(n_t)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise PrecoderError("non-finite channel or noise input")
    if not sigma2 > 0:
        raise PrecoderError("noise regulariser must be positive")
    scale = np.trace(B) / n_t
    A, B = A / scale, B / scale
    Lc = np.linalg.cholesky(B)
    W = solve_triangular(Lc, solve_triangular(Lc, A, lower=True).T, lower=True)  # L^-1 A L^-T
    w, V = np.linalg.eigh((W + W.T) / 2)
    top = w[-1]
    tol = 1e-12 * max(abs(top), 1.0)
    cands = []
    for k in np.flatnonzero(w >= top - tol):
        f = solve_triangular(Lc.T, V[:, k], lower=False)
        f = sign_normalize(f / np.linalg.norm(f))
        cands.append((f @ A @ f / (f @ B @ f), f))
    best = max(c[0] for c in cands)
    tied = [f for r, f in cands if r >= best - 1e-12 * max(abs(best), 1.0)]
    f = min(tied, key=lambda v: tuple(np.round(v, 12)))
    return SlnrSolution(f, float(top))


def mrt_precoder(Ht_u) -> np.ndarray:
    """Dominant right singular vector of the user's channel."""
    Ht_u = np.asarray(Ht_u, float)
    if not np.any(Ht_u):
        raise PrecoderError("MRT precoder of a zero channel")
    _, _, Vt = np.linalg.svd(Ht_u)
    return sign_normalize(Vt[0])
