import numpy as np


def sign_normalize(v, tol: float = 1e-12) -> np.ndarray:
    """Flip `v` so its first non-negligible component is positive."""
    v = np.asarray(v, dtype=float)
    scale = np.max(np.abs(v)) if v.size else 0.0
    if scale == 0:
        return v.copy()
    idx = np.flatnonzero(np.abs(v) > tol * scale)[0]
    return -v if v[idx] < 0 else v.copy()


def dominant_eigh(M) -> tuple[float, np.ndarray]:
    """Largest eigenpair of a symmetric matrix with a deterministic sign."""
    w, V = np.linalg.eigh((M + M.T) / 2)
    return float(w[-1]), sign_normalize(V[:, -1])
