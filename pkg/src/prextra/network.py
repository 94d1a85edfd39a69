"""Communication graphs and symmetric doubly stochastic mixing matrices.

Graphs are sampled from the Erdos-Renyi ensemble and resampled (seed + 1,
seed + 2, ...) until connected, so generation is a pure function of
(n, p, seed).  Mixing weights follow the Metropolis rule
w_ij = 1 / (max(deg_i, deg_j) + 1) with the diagonal absorbing the slack.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_RESAMPLES = 10_000


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]  # sorted (i, j) with i < j

    @property
    def neighbor_lists(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs

    def degree_sequence(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def average_degree(self) -> float:
        return 2.0 * len(self.edges) / self.n

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        nbrs = self.neighbor_lists
        seen = {0}
        stack = [0]
        while stack:
            for j in nbrs[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == self.n


@dataclass
class MixingMatrix:
    w: np.ndarray
    w_tilde: np.ndarray = field(init=False)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        n = self.w.shape[0]
        self.w_tilde = 0.5 * (np.eye(n) + self.w)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def validate(self, tol: float = 1e-14) -> None:
        """Raise ValueError unless w is symmetric, doubly stochastic,
        nonnegative with positive diagonal, and contractive off consensus."""
        w, n = self.w, self.n
        if w.shape != (n, n):
            raise ValueError("mixing matrix must be square")
        if np.abs(w - w.T).max() > tol:
            raise ValueError("mixing matrix must be symmetric")
        if np.abs(w.sum(axis=1) - 1.0).max() > tol:
            raise ValueError("row sums must equal 1")
        if np.abs(w.sum(axis=0) - 1.0).max() > tol:
            raise ValueError("column sums must equal 1")
        if w.min() < -tol:
            raise ValueError("weights must be nonnegative")
        if np.diagonal(w).min() <= 0:
            raise ValueError("diagonal weights must be positive")
        if spectral_gap(self) >= 1.0:
            raise ValueError("spectral gap must be below 1")


def _sample_edges(n: int, p: float, rng: np.random.Generator) -> tuple[tuple[int, int], ...]:
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j))
    return tuple(edges)


def generate_er_graph(n: int, p: float, seed: int) -> Graph:
    """Connected Erdos-Renyi graph; deterministic in (n, p, seed)."""
    if n < 1:
        raise ValueError("need at least one node")
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    for attempt in range(MAX_RESAMPLES):
        rng = np.random.default_rng(seed + attempt)
        g = Graph(n, _sample_edges(n, p, rng))
        if g.is_connected():
            return g
    raise ValueError(f"no connected sample after {MAX_RESAMPLES} attempts "
                     f"(n={n}, p={p})")


def _fill_diagonal(w: np.ndarray) -> np.ndarray:
    """Set w_ii = 1 - sum_{j != i} w_ij.  Shared by the generator and the
    text-format loader so round-trips reproduce the diagonal bit for bit."""
    np.fill_diagonal(w, 0.0)
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return w


def metropolis_weights(g: Graph) -> MixingMatrix:
    deg = g.degree_sequence()
    w = np.zeros((g.n, g.n))
    for i, j in g.edges:
        w_ij = 1.0 / (max(deg[i], deg[j]) + 1.0)
        w[i, j] = w_ij
        w[j, i] = w_ij
    return MixingMatrix(_fill_diagonal(w))


def spectral_gap(m: MixingMatrix) -> float:
    """Operator norm of w - (1/n) 1 1^T; below 1 for connected graphs."""
    n = m.n
    return float(np.linalg.norm(m.w - np.full((n, n), 1.0 / n), 2))


def save_mixing(m: MixingMatrix, path) -> None:
    """Text export: first line n, then one "i j w_ij" per upper-triangle
    nonzero; the diagonal is implied.  Weights carry 17 significant digits
    so float64 values round-trip exactly."""
    lines = [str(m.n)]
    for i in range(m.n):
        for j in range(i + 1, m.n):
            if m.w[i, j] != 0.0:
                lines.append(f"{i} {j} {m.w[i, j]:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mixing(path) -> MixingMatrix:
    with open(path) as fh:
        tokens = [line.split() for line in fh if line.strip()]
    n = int(tokens[0][0])
    w = np.zeros((n, n))
    for i_s, j_s, w_s in tokens[1:]:
        i, j = int(i_s), int(j_s)
        w[i, j] = w[j, i] = float(w_s)
    return MixingMatrix(_fill_diagonal(w))
