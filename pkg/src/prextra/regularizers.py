"""Convex nonsmooth penalties on d x r matrices.

Three kinds ship: entrywise l1 (lam * sum |x_ij|), row-wise l2,1
(lam * sum_i ||x_i.||_2), and the zero penalty.  Each provides its value,
Euclidean proximal map, a global Lipschitz constant on R^{d x r}, and the
subdifferential at a point described as a box: a fixed part (entries or rows
where the subgradient is unique) plus a free set where it ranges over a ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

L1 = "l1"
L21 = "l21"
ZERO = "zero"

DEFAULT_ZERO_TOL = 1e-10


@dataclass
class SubdifferentialBox:
    """Description of the subdifferential of a penalty at a point.

    fixed      d x r array, the unique subgradient on the non-free set and
               zero on the free set
    free_mask  d x r boolean array; True entries may vary (for the row norm
               whole rows are marked)
    radius     bound for the free part: per-entry absolute bound for "entry"
               geometry, per-row l2 bound for "row" geometry
    geometry   "entry" | "row" | "none"
    """

    fixed: np.ndarray
    free_mask: np.ndarray
    radius: float
    geometry: str

    @property
    def has_free(self) -> bool:
        return bool(self.free_mask.any())

    def clip(self, g: np.ndarray) -> np.ndarray:
        """Nearest member of the box to a candidate subgradient g."""
        out = np.where(self.free_mask, g, self.fixed)
        if self.geometry == "entry":
            out = np.where(self.free_mask,
                           np.clip(out, -self.radius, self.radius), out)
        elif self.geometry == "row":
            free_rows = self.free_mask.any(axis=1)
            for i in np.flatnonzero(free_rows):
                nrm = np.linalg.norm(out[i])
                if nrm > self.radius:
                    out[i] *= self.radius / nrm
        return out

    def contains(self, g: np.ndarray, tol: float = 1e-10) -> bool:
        """Whether g is a valid subgradient, up to tol."""
        if np.any(np.abs(np.where(self.free_mask, 0.0, g - self.fixed)) > tol):
            return False
        if self.geometry == "entry":
            return bool(np.all(np.abs(g[self.free_mask]) <= self.radius + tol))
        if self.geometry == "row":
            for i in np.flatnonzero(self.free_mask.any(axis=1)):
                if np.linalg.norm(g[i]) > self.radius + tol:
                    return False
        return True


@dataclass(frozen=True)
class Regularizer:
    kind: str
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in (L1, L21, ZERO):
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.kind == ZERO and self.lam != 0.0:
            raise ValueError("zero penalty requires lam = 0")

    @classmethod
    def l1(cls, lam: float) -> "Regularizer":
        return cls(L1, float(lam))

    @classmethod
    def l21(cls, lam: float) -> "Regularizer":
        return cls(L21, float(lam))

    @classmethod
    def none(cls) -> "Regularizer":
        return cls(ZERO, 0.0)

    def value(self, x: np.ndarray) -> float:
        if self.kind == L1:
            return float(self.lam * np.abs(x).sum())
        if self.kind == L21:
            return float(self.lam * np.linalg.norm(x, axis=1).sum())
        return 0.0

    def prox(self, v: np.ndarray, t: float) -> np.ndarray:
        """Proximal map argmin_z value(z) + ||z - v||^2 / (2 t), t >= 0."""
        if t < 0:
            raise ValueError("prox stepsize must be nonnegative")
        v = np.asarray(v, dtype=float)
        if self.kind == ZERO or t == 0.0 or self.lam == 0.0:
            return v.copy()
        c = t * self.lam
        if self.kind == L1:
            return np.sign(v) * np.maximum(np.abs(v) - c, 0.0)
        # row shrinkage; rows below threshold collapse to zero exactly
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        scale = np.zeros_like(norms)
        alive = norms[:, 0] > 0.0
        scale[alive] = np.maximum(0.0, 1.0 - c / norms[alive])
        return v * scale

    def lipschitz_constant(self, d: int, r: int) -> float:
        """Smallest L with |value(x) - value(y)| <= L ||x - y||_F globally."""
        if self.kind == L1:
            return self.lam * float(np.sqrt(d * r))
        if self.kind == L21:
            return self.lam * float(np.sqrt(d))
        return 0.0

    def subdifferential_at(self, x: np.ndarray,
                           zero_tol: float = DEFAULT_ZERO_TOL) -> SubdifferentialBox:
        """Subdifferential at x as a fixed part plus free set.

        Entries (rows) within zero_tol of zero are treated as exactly zero,
        where the subgradient is set-valued."""
        x = np.asarray(x, dtype=float)
        if self.kind == L1:
            free = np.abs(x) <= zero_tol
            fixed = np.where(free, 0.0, self.lam * np.sign(x))
            return SubdifferentialBox(fixed, free, self.lam, "entry")
        if self.kind == L21:
            norms = np.linalg.norm(x, axis=1)
            free_rows = norms <= zero_tol
            fixed = np.zeros_like(x)
            for i in np.flatnonzero(~free_rows):
                fixed[i] = self.lam * x[i] / norms[i]
            free = np.repeat(free_rows[:, None], x.shape[1], axis=1)
            return SubdifferentialBox(fixed, free, self.lam, "row")
        return SubdifferentialBox(np.zeros_like(x),
                                  np.zeros(x.shape, dtype=bool), 0.0, "none")
