"""RGB-ratio optimisation for one headlight.

The ratio vector p stacks one (R, G, B) flux triple per LED. With the
precoders fixed, each user's SLNR is a ratio of quadratic forms in p:

    r_u(p) = mu_S(p) / (mu_L(p) + mu_u(p) + sigma_th^2)

`sca_loop` raises the sum of these ratios with the quadratic transform and
successive convex approximation, one dense QP per step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .qp import QpProblem, solve_qp

log = logging.getLogger(__name__)


class RatioError(ValueError):
    pass


def sum_matrix(n_t: int) -> np.ndarray:
    """Ĩ: row m sums the three ratios of LED m."""
    return np.kron(np.eye(n_t), np.ones((1, 3)))


def precoder_expansion(f) -> np.ndarray:
    """F = blockdiag(f_1 I_3, ..., f_Nt I_3), so that H diag(G p) f = H G F p."""
    return np.kron(np.diag(np.asarray(f, float)), np.eye(3))


@dataclass(frozen=True)
class StrictInit:
    p: np.ndarray
    residual: float
    scaled: bool

    @property
    def exact(self) -> bool:
        return self.residual <= 1e-9


def init_ratios_strict(T_w, n_t: int, max_iter: int = 500) -> StrictInit:
    """Ratios closest to unit sum per LED that hit the target chromaticity exactly.

    Solves min ||Ĩp - 1||^2 s.t. T_w p = 0, p >= 0. If some LED ends above
    unit sum the whole vector is scaled down (chromaticity is scale free).
    """
    I = sum_matrix(n_t)
    T_w = np.asarray(T_w, float)
    res = solve_qp(QpProblem(2 * I.T @ I, -2 * I.T @ np.ones(n_t), A_eq=T_w, b_eq=np.zeros(T_w.shape[0])),
                   max_iter=max_iter)
    p = np.maximum(res.x, 0.0)
    residual = float(np.linalg.norm(I @ p - 1))
    top = float(np.max(I @ p))
    if top <= 1e-12:
        raise RatioError("strict white constraint only admits p = 0")
    scaled = top > 1 + 1e-12
    if scaled:
        p = p / top
    return StrictInit(p, residual, scaled)


def init_ratios_relaxed(quad_rows, n_t: int, max_iter: int = 500) -> StrictInit:
    """Fallback start when exact white for every user is out of reach.

    Same objective as the strict problem, but only the quadrangle rows and
    Ĩp <= 1 are imposed. The result is flagged through `residual`, which is
    never zero unless every LED ends at unit sum.
    """
    I = sum_matrix(n_t)
    A, b = constraint_rows(n_t, quad_rows)
    res = solve_qp(QpProblem(2 * I.T @ I, -2 * I.T @ np.ones(n_t), A, b), max_iter=max_iter)
    p = np.maximum(res.x, 0.0)
    if float(np.max(I @ p)) <= 1e-12:
        raise RatioError("quadrangle constraints only admit p = 0")
    return StrictInit(p, float(np.linalg.norm(I @ p - 1)), False)


@dataclass(frozen=True)
class HeadlightTerms:
    """Quadratic forms of the per-user SLNR terms in p for one headlight.

    `Hbar[v]` is H_v G_v (N_r x 3N_t) for every receiver v; the first
    `len(precoders)` receivers are the intended ones.
    """

    Hbar: np.ndarray
    precoders: np.ndarray
    alpha: float
    ptx: float
    gamma: float
    sigma_th2: float
    A: np.ndarray = field(init=False)
    M: np.ndarray = field(init=False)
    B: np.ndarray = field(init=False)

    def __post_init__(self):
        Hbar = np.asarray(self.Hbar, float)
        F = np.atleast_2d(np.asarray(self.precoders, float))
        object.__setattr__(self, "Hbar", Hbar)
        object.__setattr__(self, "precoders", F)
        grams = np.einsum("vri,vrj->vij", Hbar, Hbar)
        total = grams.sum(axis=0)
        Fx = [precoder_expansion(f) for f in F]
        A, M, B = [], [], []
        for u, Fu in enumerate(Fx):
            A.append(Fu @ grams[u] @ Fu)
            M.append(Fu @ (total - grams[u]) @ Fu)
            B.append(grams[u] + self.alpha**2 * sum(Fv @ grams[u] @ Fv for Fv in Fx))
        object.__setattr__(self, "A", np.array(A))
        object.__setattr__(self, "M", np.array(M))
        object.__setattr__(self, "B", np.array(B))

    @property
    def n_streams(self) -> int:
        return self.precoders.shape[0]

    @property
    def n_t(self) -> int:
        return self.precoders.shape[1]

    def terms(self, p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(mu_S, mu_L, mu_u) per intended user."""
        p = np.asarray(p, float)
        k = self.alpha**2 * self.ptx**2
        mu_s = k * np.einsum("i,uij,j->u", p, self.A, p)
        mu_l = k * np.einsum("i,uij,j->u", p, self.M, p)
        quad_b = np.einsum("i,uij,j->u", p, self.B, p)
        mu_u = self.gamma * self.ptx * np.sqrt(np.maximum(quad_b, 0.0))
        return np.maximum(mu_s, 0.0), np.maximum(mu_l, 0.0), mu_u

    def ratios(self, p) -> np.ndarray:
        mu_s, mu_l, mu_u = self.terms(p)
        return mu_s / (mu_l + mu_u + self.sigma_th2)

    def sum_slnr(self, p) -> float:
        return float(np.sum(self.ratios(p)))


def slnr_terms_of_p(Hbar, precoders, p, alpha, ptx, gamma, sigma_th2=0.0):
    return HeadlightTerms(Hbar, precoders, alpha, ptx, gamma, sigma_th2).terms(p)


def quadratic_transform(mu_s, mu_l, mu_u, sigma_th2, nu):
    den = mu_l + mu_u + sigma_th2
    if np.any(np.asarray(den) <= 0):
        raise RatioError("quadratic transform needs a positive denominator")
    return 2 * nu * np.sqrt(mu_s) - nu**2 * den


def optimal_nu(mu_s, mu_l, mu_u, sigma_th2):
    return np.sqrt(mu_s) / (mu_l + mu_u + sigma_th2)


@dataclass(frozen=True)
class Affine:
    value: float
    grad: np.ndarray
    at: np.ndarray

    def __call__(self, p) -> float:
        return float(self.value + self.grad @ (np.asarray(p, float) - self.at))


def linearize(terms: HeadlightTerms, u: int, p_l) -> tuple[Affine, Affine]:
    """First-order expansions of sqrt(mu_S) and mu_u for user `u` around `p_l`."""
    p_l = np.asarray(p_l, float)
    mu_s, _, mu_u = terms.terms(p_l)
    if mu_s[u] <= 0 or mu_u[u] <= 0:
        raise RatioError(f"degenerate linearisation point for user {u}: mu_S={mu_s[u]}, mu_u={mu_u[u]}")
    root = math.sqrt(mu_s[u])
    g_s = terms.alpha**2 * terms.ptx**2 * (terms.A[u] @ p_l) / root
    g_u = terms.gamma**2 * terms.ptx**2 * (terms.B[u] @ p_l) / mu_u[u]
    return Affine(root, g_s, p_l), Affine(float(mu_u[u]), g_u, p_l)


@dataclass
class Surrogate:
    """Concave surrogate sum_u xi_u built at `p_l`, stored as -(1/2 p^T Q p + c^T p) + const."""

    Q: np.ndarray
    c: np.ndarray
    const: float

    def value(self, p) -> float:
        p = np.asarray(p, float)
        return float(-(0.5 * p @ self.Q @ p + self.c @ p) + self.const)


def build_surrogate(terms: HeadlightTerms, p_l, nu, shot: str = "quadratic") -> Surrogate:
    """Sum of quadratic-transform surrogates with sqrt(mu_S) linearised.

    `shot='linear'` also linearises mu_u. `shot='quadratic'` replaces mu_u
    by its tangent upper bound gamma P (q/(2 r) + r/2), q = p^T B p,
    r = sqrt(q_l), which keeps the surrogate a global minorant.
    """
    n = 3 * terms.n_t
    k = terms.alpha**2 * terms.ptx**2
    Q = np.zeros((n, n))
    c = np.zeros(n)
    const = 0.0
    for u in range(terms.n_streams):
        lin_s, lin_u = linearize(terms, u, p_l)
        nu_u = float(nu[u])
        # 2 nu (s0 + g.(p - p_l))
        c -= 2 * nu_u * lin_s.grad
        const += 2 * nu_u * (lin_s.value - lin_s.grad @ p_l)
        # -nu^2 mu_L
        Q += 2 * nu_u**2 * k * terms.M[u]
        const -= nu_u**2 * terms.sigma_th2
        if shot == "linear":
            c += nu_u**2 * lin_u.grad
            const -= nu_u**2 * (lin_u.value - lin_u.grad @ p_l)
        elif shot == "quadratic":
            r = lin_u.value / (terms.gamma * terms.ptx)
            Q += nu_u**2 * terms.gamma * terms.ptx / r * terms.B[u]
            const -= nu_u**2 * terms.gamma * terms.ptx * r / 2
        else:
            raise RatioError(f"unknown shot-noise surrogate {shot!r}")
    return Surrogate((Q + Q.T) / 2, c, const)


def _project_psd(Q, tol=1e-10):
    w, V = np.linalg.eigh(Q)
    floor = -tol * max(1.0, np.max(np.abs(w)))
    if w.min() < floor:
        raise RatioError(f"surrogate quadratic is indefinite (min eigenvalue {w.min():.3e})")
    if w.min() < 0:
        return (V * np.maximum(w, 0)) @ V.T
    return Q


def constraint_rows(n_t: int, quad_rows) -> tuple[np.ndarray, np.ndarray]:
    """Stack the per-LED sum constraint and the quadrangle rows as A p <= b."""
    I = sum_matrix(n_t)
    Aq = np.asarray(quad_rows, float).reshape(-1, 3 * n_t) if quad_rows is not None else np.zeros((0, 3 * n_t))
    return np.vstack([I, Aq]), np.concatenate([np.ones(n_t), np.zeros(Aq.shape[0])])


def is_feasible(p, n_t: int, quad_rows, tol: float = 1e-9) -> bool:
    A, b = constraint_rows(n_t, quad_rows)
    scale = np.linalg.norm(A, axis=1)
    scale[scale == 0] = 1
    return bool(np.all(p >= -tol) and np.all((A @ p - b) / scale <= tol))


@dataclass
class ScaResult:
    p: np.ndarray
    surrogate_trace: list
    objective_trace: list
    iterations: int
    converged: bool
    backtracks: int = 0


def sca_loop(terms: HeadlightTerms, p_init, quad_rows, epsilon: float = 1e-4, max_iter: int = 100,
             nu_refresh: str = "inner", shot: str = "quadratic", qp_max_iter: int = 500) -> ScaResult:
    """Raise the headlight's sum SLNR over feasible ratio vectors.

    Each step solves the QP that maximises the surrogate built at the
    current point. The loop stops when successive surrogate values differ by
    less than `epsilon` relative. The exact objective never decreases: a
    step that would lower it is halved until it does not.
    """
    n_t = terms.n_t
    A, b = constraint_rows(n_t, quad_rows)
    p = np.asarray(p_init, float).copy()
    if not is_feasible(p, n_t, quad_rows):
        raise RatioError("initial ratio vector violates the ratio constraints")
    mu_s, mu_l, mu_u = terms.terms(p)
    if np.any(mu_s <= 0) or np.any(mu_u <= 0):
        p = p + 1e-6
        if not is_feasible(p, n_t, quad_rows):
            raise RatioError("degenerate start and the perturbed point is infeasible")
        mu_s, mu_l, mu_u = terms.terms(p)
    nu = optimal_nu(mu_s, mu_l, mu_u, terms.sigma_th2)

    objective = terms.sum_slnr(p)
    prev = objective  # surrogate at its own expansion point equals the exact sum
    surrogate_trace, objective_trace = [prev], [objective]
    backtracks = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if nu_refresh == "inner":
            nu = optimal_nu(*terms.terms(p), terms.sigma_th2)
        sur = build_surrogate(terms, p, nu, shot)
        res = solve_qp(QpProblem(_project_psd(sur.Q), sur.c, A, b), x0=p, max_iter=qp_max_iter)
        if not res.converged:
            log.warning("QP hit its iteration limit at SCA step %d", it)
        cand = np.maximum(res.x, 0.0)
        cand_obj = terms.sum_slnr(cand)
        step = 1.0
        while cand_obj < objective and step > 1e-9:
            step /= 2
            backtracks += 1
            cand = p + step * (np.maximum(res.x, 0.0) - p)
            cand_obj = terms.sum_slnr(cand)
        if cand_obj < objective:
            converged = True
            break
        value = sur.value(cand)
        p, objective = cand, cand_obj
        surrogate_trace.append(value)
        objective_trace.append(objective)
        if abs(value - prev) < epsilon * max(abs(value), 1e-300):
            converged = True
            break
        prev = value
    return ScaResult(p, surrogate_trace, objective_trace, it, converged, backtracks)
