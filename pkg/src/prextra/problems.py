"""Synthetic data, problem instances, and matrix file formats.

A data matrix A (m x d) is synthesized with a prescribed singular spectrum:
draw a Gaussian B, take its thin SVD B = U S V^T, and replace S with
diag(xi^j) ("geometric", the sparse-PCA setting) or diag(xi^(j/2))
("half-geometric", the feature-selection setting), j = 0..d-1.  Rows are
split contiguously across nodes; node i keeps only the Gram matrix
A_i^T A_i, so per-iteration work is independent of m.

The smooth losses are f_i(x) = -tr(x^T A_i^T A_i x) / 2 with the 1/n
average applied at the global level only.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, IndivisibleRowsError
from .regularizers import Regularizer

GEOMETRIC = "geometric"
HALF_GEOMETRIC = "half-geometric"

SPCA = "spca"
CISE = "cise"

MAGIC = b"MXA1"


@dataclass(frozen=True)
class SpectralRecipe:
    m: int
    d: int
    xi: float
    exponent: str  # "geometric" | "half-geometric"
    seed: int

    def __post_init__(self):
        if self.m < self.d:
            raise ValueError("need m >= d")
        if not 0.0 < self.xi <= 1.0:
            raise ValueError("xi must lie in (0, 1]")
        if self.exponent not in (GEOMETRIC, HALF_GEOMETRIC):
            raise ValueError(f"unknown exponent kind {self.exponent!r}")

    def singular_values(self) -> np.ndarray:
        j = np.arange(self.d, dtype=float)
        power = j if self.exponent == GEOMETRIC else 0.5 * j
        return self.xi ** power


def synthesize(recipe: SpectralRecipe) -> np.ndarray:
    """Draw A (m x d) with the recipe's exact singular spectrum."""
    for attempt in range(16):
        rng = np.random.default_rng(recipe.seed + attempt)
        b = rng.standard_normal((recipe.m, recipe.d))
        u, s, vt = np.linalg.svd(b, full_matrices=False)
        if s[-1] > 1e-12 * s[0]:
            return (u * recipe.singular_values()) @ vt
    raise DegenerateSampleError(
        f"could not draw a full-rank {recipe.m} x {recipe.d} sample")


def partition(a: np.ndarray, n: int) -> list[np.ndarray]:
    """Split rows of a into n equal contiguous blocks."""
    m = a.shape[0]
    if n < 1:
        raise ValueError("need at least one block")
    if m % n != 0:
        raise IndivisibleRowsError(f"{m} rows do not split over {n} nodes")
    rows = m // n
    return [a[i * rows:(i + 1) * rows].copy() for i in range(n)]


class ProblemInstance:
    """Distributed composite problem over St(d, r): per-node smooth losses
    f_i(x) = -tr(x^T A_i^T A_i x) / 2 plus a shared penalty."""

    def __init__(self, blocks: list[np.ndarray], reg: Regularizer, r: int,
                 kind: str = SPCA):
        if not blocks:
            raise ValueError("need at least one data block")
        self.kind = kind
        self.reg = reg
        self.d = blocks[0].shape[1]
        self.r = int(r)
        self.grams = [b.T @ b for b in blocks]
        self.mean_gram = sum(self.grams) / len(self.grams)

    @property
    def n(self) -> int:
        return len(self.grams)

    @classmethod
    def synthesized(cls, kind: str, n: int, d: int, r: int, m: int,
                    xi: float, lam: float, seed: int) -> "ProblemInstance":
        if kind == SPCA:
            exponent, reg = GEOMETRIC, Regularizer.l1(lam)
        elif kind == CISE:
            exponent, reg = HALF_GEOMETRIC, Regularizer.l21(lam)
        else:
            raise ValueError(f"unknown problem kind {kind!r}")
        a = synthesize(SpectralRecipe(m, d, xi, exponent, seed))
        return cls(partition(a, n), reg, r, kind)

    @classmethod
    def from_matrix(cls, a: np.ndarray, kind: str, n: int, r: int,
                    lam: float) -> "ProblemInstance":
        reg = Regularizer.l21(lam) if kind == CISE else Regularizer.l1(lam)
        return cls(partition(a, n), reg, r, kind)

    def local_gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        return -(self.grams[i] @ x)

    def local_objective(self, i: int, x: np.ndarray) -> float:
        return float(-0.5 * np.sum(x * (self.grams[i] @ x)))

    def global_smooth_objective(self, x: np.ndarray) -> float:
        """(1/n) sum_i f_i(x); the penalty is added by the metrics layer."""
        return float(-0.5 * np.sum(x * (self.mean_gram @ x)))

    def global_euclidean_gradient(self, x: np.ndarray) -> np.ndarray:
        return -(self.mean_gram @ x)

    def smooth_operator_norms(self) -> np.ndarray:
        """||A_i^T A_i||_2 per node, the per-node gradient Lipschitz bounds."""
        return np.array([np.linalg.norm(g, 2) for g in self.grams])


class QuadraticComposite:
    """Euclidean composite reference problem: per-node strongly convex
    quadratics f_i(x) = <x - c_i, H_i (x - c_i)> / 2 plus a shared penalty.
    Iterates live in flat R^{d x r}; no manifold is involved."""

    def __init__(self, hessians: list[np.ndarray], centers: list[np.ndarray],
                 reg: Regularizer):
        if len(hessians) != len(centers):
            raise ValueError("need one center per hessian")
        self.hessians = [np.asarray(h, dtype=float) for h in hessians]
        self.centers = [np.asarray(c, dtype=float) for c in centers]
        self.reg = reg
        self.d, self.r = self.centers[0].shape
        self.mean_hessian = sum(self.hessians) / len(self.hessians)

    @property
    def n(self) -> int:
        return len(self.hessians)

    def local_gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        return self.hessians[i] @ (x - self.centers[i])

    def local_objective(self, i: int, x: np.ndarray) -> float:
        dx = x - self.centers[i]
        return float(0.5 * np.sum(dx * (self.hessians[i] @ dx)))

    def global_smooth_objective(self, x: np.ndarray) -> float:
        return sum(self.local_objective(i, x) for i in range(self.n)) / self.n

    def global_euclidean_gradient(self, x: np.ndarray) -> np.ndarray:
        grads = sum(self.local_gradient(i, x) for i in range(self.n))
        return grads / self.n


def save_matrix(path, a: np.ndarray) -> None:
    """Binary matrix file: magic "MXA1", u64 rows, u64 cols (little endian),
    then row-major float64 payload."""
    a = np.ascontiguousarray(a, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", a.shape[0], a.shape[1]))
        fh.write(a.tobytes(order="C"))


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
        rows, cols = struct.unpack("<QQ", fh.read(16))
        payload = fh.read()
    expect = rows * cols * 8
    if len(payload) != expect:
        raise ValueError(f"payload holds {len(payload)} bytes, "
                         f"expected {expect}")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()


def load_matrix_csv(path) -> np.ndarray:
    """CSV import: header line "rows,cols" with the two dimensions, then one
    comma-separated line per matrix row."""
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    rows, cols = (int(tok) for tok in lines[0].split(","))
    if len(lines) - 1 != rows:
        raise ValueError(f"expected {rows} data rows, found {len(lines) - 1}")
    a = np.array([[float(tok) for tok in line.split(",")]
                  for line in lines[1:]])
    if a.shape != (rows, cols):
        raise ValueError(f"expected shape {(rows, cols)}, got {a.shape}")
    return a
