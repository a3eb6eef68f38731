"""Least squares via normal equations with a ridge fallback."""

from __future__ import annotations

import numpy as np

RIDGE = 1e-8


def least_squares(A: np.ndarray, b: np.ndarray, ridge: float = RIDGE
                  ) -> tuple[np.ndarray, bool]:
    """Minimize ``||A x - b||``; returns ``(x, used_ridge)``.

    Singular normal equations are retried with ``ridge`` added to the
    diagonal, so a rank-deficient design degrades gracefully instead of
    failing.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    G = A.T @ A
    c = A.T @ b
    try:
        x = np.linalg.solve(G, c)
        if np.all(np.isfinite(x)):
            return x, False
    except np.linalg.LinAlgError:
        pass
    x = np.linalg.solve(G + ridge * np.eye(G.shape[0]), c)
    if not np.all(np.isfinite(x)):
        raise np.linalg.LinAlgError("least squares failed even with ridge")
    return x, True
