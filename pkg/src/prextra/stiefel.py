"""Geometry of the compact Stiefel manifold St(d, r).

Points are d x r matrices with orthonormal columns; tangent vectors at x are
the matrices u with x^T u + u^T x = 0.  Everything here is plain numpy on
dense arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import RankDeficientError, ZeroDirectionError

# Below this smallest singular value the nearest orthonormal factor is no
# longer unique and the projection refuses to pick one.
RANK_TOL = 1e-8


def sym(a: np.ndarray) -> np.ndarray:
    """Symmetric part (a + a^T) / 2."""
    return 0.5 * (a + a.T)


class Stiefel:
    """St(d, r) with 1 <= r <= d.  Instances hold only the dimensions."""

    def __init__(self, d: int, r: int):
        d, r = int(d), int(r)
        if not 1 <= r <= d:
            raise ValueError(f"need 1 <= r <= d, got (d, r) = ({d}, {r})")
        self.d = d
        self.r = r

    @property
    def shape(self) -> tuple[int, int]:
        return (self.d, self.r)

    def __repr__(self) -> str:
        return f"Stiefel(d={self.d}, r={self.r})"

    def _check_shape(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if a.shape != (self.d, self.r):
            raise ValueError(f"expected shape {(self.d, self.r)}, got {a.shape}")
        return a

    def project(self, v: np.ndarray) -> np.ndarray:
        """Nearest point on the manifold: the orthogonal polar factor u vt of
        a thin SVD of v.  Unique (and returned) only when v has full column
        rank; otherwise RankDeficientError."""
        v = self._check_shape(v)
        u, s, vt = np.linalg.svd(v, full_matrices=False)
        if s[-1] < RANK_TOL:
            raise RankDeficientError(
                f"nearest-point projection not unique: smallest singular value "
                f"{s[-1]:.3e} < {RANK_TOL:.0e}")
        return u @ vt

    def tangent_project(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Orthogonal projection of u onto the tangent space at x:
        u - x sym(x^T u)."""
        return u - x @ sym(x.T @ u)

    def orthonormality_residual(self, v: np.ndarray) -> float:
        """Frobenius norm of v^T v - I; zero exactly on the manifold."""
        v = np.asarray(v, dtype=float)
        return float(np.linalg.norm(v.T @ v - np.eye(v.shape[1])))

    def tangency_residual(self, x: np.ndarray, u: np.ndarray) -> float:
        """Frobenius norm of x^T u + u^T x; zero exactly on tangency."""
        xtu = x.T @ u
        return float(np.linalg.norm(xtu + xtu.T))

    def is_feasible(self, v: np.ndarray, tol: float = 1e-10) -> bool:
        return self.orthonormality_residual(v) <= tol

    def projection_curvature_ratio(self, x: np.ndarray, u: np.ndarray) -> float:
        """Second-order defect of linearizing the projection at a feasible x:

            || project(x + u) - x - tangent_project(x, u) || / ||u||^2

        Bounded for small ||u||; quantifies how fast the manifold curves away
        from its tangent plane along u."""
        nu = float(np.linalg.norm(u))
        if nu == 0.0:
            raise ZeroDirectionError("curvature ratio undefined for u = 0")
        defect = self.project(x + u) - x - self.tangent_project(x, u)
        return float(np.linalg.norm(defect)) / nu**2

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        return self.project(rng.standard_normal((self.d, self.r)))

    def random_tangent(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.tangent_project(x, rng.standard_normal((self.d, self.r)))
