"""Primal active-set solver for small dense convex QPs.

    minimize    1/2 x^T Q x + c^T x
    subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0 (optional)

Q only needs to be positive semidefinite: when the reduced Hessian is
singular along a descent direction the solver follows that ray to the next
blocking constraint. Rows are scaled to unit norm and the objective to unit
magnitude before solving; KKT residuals are reported on that scaled problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-10
MULT_TOL = 1e-11


class QpError(ValueError):
    pass


class QpInfeasibleError(QpError):
    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class QpUnboundedError(QpError):
    pass


@dataclass
class QpProblem:
    Q: np.ndarray
    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    nonneg: bool = True

    def __post_init__(self):
        self.Q = np.atleast_2d(np.asarray(self.Q, float))
        self.c = np.asarray(self.c, float).ravel()
        n = self.c.size
        if self.Q.shape != (n, n):
            raise QpError(f"Q has shape {self.Q.shape}, expected {(n, n)}")
        self.A_ub, self.b_ub = _pair(self.A_ub, self.b_ub, n)
        self.A_eq, self.b_eq = _pair(self.A_eq, self.b_eq, n)

    @property
    def n(self) -> int:
        return self.c.size

    def objective(self, x) -> float:
        x = np.asarray(x, float)
        return float(0.5 * x @ self.Q @ x + self.c @ x)

    def inequality_rows(self) -> tuple[np.ndarray, np.ndarray]:
        G, h = self.A_ub, self.b_ub
        if self.nonneg:
            G = np.vstack([G, -np.eye(self.n)])
            h = np.concatenate([h, np.zeros(self.n)])
        return G, h

    def max_violation(self, x) -> float:
        G, h = self.inequality_rows()
        v = [0.0]
        if G.size:
            v.append(float(np.max(G @ x - h)))
        if self.A_eq.size:
            v.append(float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        return max(v)


def _pair(A, b, n):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, float))
    b = np.asarray(b, float).ravel()
    if A.shape[1] != n or A.shape[0] != b.size:
        raise QpError(f"constraint block {A.shape} does not match rhs {b.shape} and n={n}")
    return A, b


@dataclass
class QpResult:
    x: np.ndarray
    objective: float
    lambda_ub: np.ndarray
    lambda_eq: np.ndarray
    lambda_bounds: np.ndarray
    iterations: int
    converged: bool
    stationarity: float
    primal_residual: float
    complementarity: float
    active: list = field(default_factory=list)


def _normalize_rows(A, b):
    if A.shape[0] == 0:
        return A, b, np.ones(0)
    norms = np.linalg.norm(A, axis=1)
    norms[norms == 0] = 1.0
    return A / norms[:, None], b / norms, norms


def _reduce_equalities(E, e):
    """Replace E x = e by an equivalent full-row-rank system; raise if inconsistent."""
    if E.shape[0] == 0:
        return E, e
    U, s, Vt = np.linalg.svd(E, full_matrices=True)
    rank = int(np.sum(s > 1e-10 * max(s[0], 1.0)))
    proj = U.T @ e
    if rank < E.shape[0] and np.max(np.abs(proj[rank:])) > 1e-9 * max(1.0, np.max(np.abs(e))):
        raise QpInfeasibleError("equality constraints are inconsistent", float(np.max(np.abs(proj[rank:]))))
    return s[:rank, None] * Vt[:rank], proj[:rank]


def _null_space(A, n):
    if A.shape[0] == 0:
        return np.eye(n)
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > 1e-12 * max(s[0], 1.0)))
    return Vt[rank:].T


def _independent(rows, candidate):
    if not rows:
        return True
    M = np.vstack(rows + [candidate])
    return np.linalg.matrix_rank(M, tol=1e-9) == len(rows) + 1


def _active_set_core(Q, c, G, h, E, e, x, max_iter):
    """Minimise from a feasible `x`. Returns (x, working set, multipliers, iterations, converged)."""
    n = c.size
    eq_rows = [E[k] for k in range(E.shape[0])]
    W = []
    for i in np.flatnonzero(np.abs(G @ x - h) <= FEAS_TOL):
        if _independent(eq_rows + [G[j] for j in W], G[i]):
            W.append(int(i))

    # After an unblocked Newton step x already minimises over the current
    # subspace; recomputing the step there only returns round-off, which on
    # ill-conditioned Q never passes the zero test.
    at_subspace_min = False
    for it in range(1, max_iter + 1):
        g = Q @ x + c
        A_W = np.vstack(eq_rows + [G[j] for j in W]) if (eq_rows or W) else np.zeros((0, n))
        Z = _null_space(A_W, n)
        d = np.zeros(n)
        ray = False
        if Z.shape[1] and not at_subspace_min:
            Hr = Z.T @ Q @ Z
            lam, V = np.linalg.eigh((Hr + Hr.T) / 2)
            r = V.T @ (Z.T @ g)
            pos = lam > 1e-10 * max(1.0, np.max(np.abs(lam)))
            flat = r[~pos]
            if flat.size and np.max(np.abs(flat)) > 1e-13 * (1.0 + np.linalg.norm(g)):
                d = -Z @ (V[:, ~pos] @ flat)
                ray = True
            else:
                d = -Z @ (V[:, pos] @ (r[pos] / lam[pos]))

        if np.linalg.norm(d) <= 1e-13 * (1.0 + np.linalg.norm(x)):
            if A_W.shape[0] == 0:
                return x, W, np.zeros(0), it, True
            mult = np.linalg.lstsq(A_W.T, -g, rcond=None)[0]
            ineq = mult[len(eq_rows):]
            if ineq.size == 0 or ineq.min() >= -MULT_TOL:
                return x, W, mult, it, True
            W.pop(int(np.argmin(ineq)))
            at_subspace_min = False
            continue

        Gd = G @ d
        slack = h - G @ x
        step = np.inf if ray else 1.0
        block = None
        for i in range(G.shape[0]):
            if i in W or Gd[i] <= 1e-14 * np.linalg.norm(d):
                continue
            a = max(slack[i], 0.0) / Gd[i]
            if a < step:
                step, block = a, i
        if not np.isfinite(step):
            raise QpUnboundedError("objective is unbounded below on the feasible set")
        x = x + step * d
        at_subspace_min = block is None and not ray
        if block is not None:
            W.append(block)
    return x, W, None, max_iter, False


def _phase_one(G, h, E, e, max_iter):
    """Find a feasible point by minimising the largest violation t >= 0."""
    n = G.shape[1]
    x0 = np.linalg.lstsq(E, e, rcond=None)[0] if E.shape[0] else np.zeros(n)
    viol = float(np.max(G @ x0 - h)) if G.shape[0] else 0.0
    if viol <= FEAS_TOL:
        return x0
    Gt = np.vstack([np.hstack([G, -np.ones((G.shape[0], 1))]), np.hstack([np.zeros(n), -1.0])])
    ht = np.concatenate([h, [0.0]])
    Et = np.hstack([E, np.zeros((E.shape[0], 1))])
    ct = np.zeros(n + 1)
    ct[-1] = 1.0
    z, _, _, _, _ = _active_set_core(np.zeros((n + 1, n + 1)), ct, Gt, ht, Et, e,
                                     np.concatenate([x0, [viol]]), max_iter)
    if z[-1] > 1e-9:
        raise QpInfeasibleError(f"no feasible point: smallest achievable violation {z[-1]:.3e}", float(z[-1]))
    return z[:-1]


def solve_qp(problem: QpProblem, x0=None, max_iter: int = 500) -> QpResult:
    """Solve `problem`, warm-starting from `x0` when it is feasible.

    Raises `QpInfeasibleError` when the constraints admit no point. If the
    iteration limit is reached the last iterate is returned with
    `converged=False`.
    """
    G_raw, h_raw = problem.inequality_rows()
    G, h, g_norm = _normalize_rows(G_raw, h_raw)
    E0, e0, e_norm = _normalize_rows(problem.A_eq, problem.b_eq)
    E, e = _reduce_equalities(E0, e0)
    scale = max(np.max(np.abs(problem.Q), initial=0.0), np.max(np.abs(problem.c), initial=0.0))
    scale = scale if scale > 0 else 1.0
    Q, c = problem.Q / scale, problem.c / scale
    Q = (Q + Q.T) / 2

    x = None
    if x0 is not None:
        x0 = np.asarray(x0, float)
        ok = (not G.size or np.max(G @ x0 - h) <= FEAS_TOL) and (not E.size or np.max(np.abs(E @ x0 - e)) <= FEAS_TOL)
        x = x0.copy() if ok else None
    if x is None:
        x = _phase_one(G, h, E, e, max_iter)

    x, W, mult, iters, converged = _active_set_core(Q, c, G, h, E, e, x, max_iter)

    lam_ineq = np.zeros(G.shape[0])
    lam_eq_red = np.zeros(E.shape[0])
    if mult is not None and mult.size:
        lam_eq_red = mult[:E.shape[0]]
        lam_ineq[W] = mult[E.shape[0]:]
    grad = Q @ x + c
    stat = grad + G.T @ lam_ineq + E.T @ lam_eq_red
    slack = G @ x - h if G.size else np.zeros(0)
    primal = max(float(np.max(slack, initial=0.0)),
                  float(np.max(np.abs(E @ x - e), initial=0.0)))
    comp = float(np.max(np.abs(lam_ineq * slack), initial=0.0))

    # multipliers back in the caller's units
    lam_orig = lam_ineq * scale / g_norm if G.size else lam_ineq
    m_ub = problem.A_ub.shape[0]
    lam_eq = np.zeros(problem.A_eq.shape[0])
    if E0.size and lam_eq_red.size:
        lam_eq = np.linalg.lstsq(E0.T, E.T @ lam_eq_red, rcond=None)[0] * scale / e_norm
    return QpResult(
        x=x,
        objective=problem.objective(x),
        lambda_ub=lam_orig[:m_ub],
        lambda_eq=lam_eq,
        lambda_bounds=lam_orig[m_ub:],
        iterations=iters,
        converged=converged,
        stationarity=float(np.max(np.abs(stat), initial=0.0)),
        primal_residual=primal,
        complementarity=comp,
        active=list(W),
    )
