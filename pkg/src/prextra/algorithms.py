"""Distributed first-order methods.

PrExtra      manifold method: bias-corrected consensus with gradient
             difference tracking, manifold projection, a tangent-space
             proximal step for the penalty, and a final projection.
PgExtraCoupled / PgExtraDecoupled
             the Euclidean reference method in its two algebraically
             equivalent forms (used for cross-validation and convex
             baselines); no manifold involved.
Drsm         reconstructed diminishing-stepsize projected Riemannian
             subgradient baseline.

All methods run synchronous rounds: every node uses the same snapshot of its
neighbors' iterates, which a derived class of experiments relies on for
bitwise reproducibility.  PrExtra exchanges x once per round; the correction
term reuses the previous round's snapshot instead of a second exchange.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import MixingMatrix
from .stiefel import Stiefel
from .tangent_prox import solve_subproblem


@dataclass
class NodeState:
    x: np.ndarray        # current iterate
    s: np.ndarray        # bias-correction accumulator
    g_prev: np.ndarray   # Riemannian gradient at x, cached for the s-update


@dataclass
class StepInfo:
    eta_norms: np.ndarray          # per-node prox step norms this round
    feasibility_residual: float    # max orthonormality residual among the
                                   # round's intermediate and new iterates
    subproblem_iterations: int     # total inner iterations this round


def _stack(xs: list[np.ndarray]) -> np.ndarray:
    return np.stack(xs, axis=0)


def _mix(weights: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """Row i of the result is sum_j weights[i, j] * stack[j]."""
    return np.tensordot(weights, stack, axes=(1, 0))


def _per_node(x0, n: int) -> list[np.ndarray]:
    """Normalize an initial point spec: one array broadcasts to all nodes,
    a list/tuple must supply exactly one array per node."""
    xs = [np.asarray(x, dtype=float).copy() for x in
          (x0 if isinstance(x0, (list, tuple)) else [x0] * n)]
    if len(xs) != n:
        raise ValueError("need one initial point per node")
    return xs


class PrExtra:
    """Proximal Riemannian EXTRA-type method on St(d, r).

    One round, per node i, with round counter k starting at 0:

        s_i <- s_i + sum_j (w_ij - wt_ij) x_j^{prev}
                   - alpha (grad_i(x_i) - grad_i(x_i^{prev}))   [skipped at k=0]
        y_i  = project(sum_j w_ij x_j + s_i)
        eta_i = argmin_{eta in T_{y_i}} ||eta||^2/(2 tau) + r(y_i + eta)
        x_i <- project(y_i + eta_i)

    with s_i initialized to -alpha grad_i(x_0).  grad_i denotes the
    Riemannian gradient of the local smooth loss.
    """

    def __init__(self, inst, mixing: MixingMatrix, manifold: Stiefel,
                 alpha: float, tau: float, subproblem_tol: float = 1e-10,
                 warm_start: bool = False):
        if mixing.n != inst.n:
            raise ValueError("mixing matrix size must match the node count")
        self.inst = inst
        self.mixing = mixing
        self.manifold = manifold
        self.alpha = float(alpha)
        self.tau = float(tau)
        self.subproblem_tol = float(subproblem_tol)
        self.warm_start = warm_start
        self.states: list[NodeState] = []
        self._prev_xs: np.ndarray | None = None
        self._multipliers: list[np.ndarray | None] = []

    def _rgrad(self, i: int, x: np.ndarray) -> np.ndarray:
        return self.manifold.tangent_project(x, self.inst.local_gradient(i, x))

    def setup(self, x0) -> None:
        """Accepts a single point (broadcast to all nodes) or one per node."""
        xs = _per_node(x0, self.inst.n)
        for x in xs:
            if not self.manifold.is_feasible(x):
                raise ValueError("initial points must lie on the manifold")
        self.states = []
        for i, x in enumerate(xs):
            g = self._rgrad(i, x)
            self.states.append(NodeState(x=x, s=-self.alpha * g, g_prev=g))
        self._prev_xs = None
        self._multipliers = [None] * self.inst.n

    @property
    def xs(self) -> list[np.ndarray]:
        return [st.x for st in self.states]

    def step(self, k: int) -> StepInfo:
        w = self.mixing.w
        curr = _stack(self.xs)
        mixed = _mix(w, curr)

        if k > 0:
            if self._prev_xs is None:
                raise RuntimeError("missing previous-round snapshot")
            # w - wt = (w - I)/2; applied to the previous round's snapshot
            corr = _mix(w - self.mixing.w_tilde, self._prev_xs)
            for i, st in enumerate(self.states):
                g_now = self._rgrad(i, st.x)
                st.s = st.s + corr[i] - self.alpha * (g_now - st.g_prev)
                st.g_prev = g_now

        eta_norms = np.zeros(self.inst.n)
        feas = 0.0
        inner = 0
        new_xs = []
        for i, st in enumerate(self.states):
            y = self.manifold.project(mixed[i] + st.s)
            res = solve_subproblem(
                y, self.inst.reg, self.tau, self.subproblem_tol,
                multiplier0=self._multipliers[i] if self.warm_start else None)
            if self.warm_start:
                self._multipliers[i] = res.multiplier
            x_next = self.manifold.project(y + res.eta)
            eta_norms[i] = np.linalg.norm(res.eta)
            inner += res.inner_iterations
            feas = max(feas,
                       self.manifold.orthonormality_residual(y),
                       self.manifold.orthonormality_residual(x_next))
            new_xs.append(x_next)

        self._prev_xs = curr
        for st, x_next in zip(self.states, new_xs):
            st.x = x_next
        return StepInfo(eta_norms, feas, inner)


class Drsm:
    """Reconstructed baseline: consensus mixing followed by a diminishing
    projected subgradient step,

        x_i <- project(sum_j w_ij x_j - beta_k P_{T_{x_i}}(grad f_i(x_i) + g_i))

    with beta_k = beta0 / sqrt(k + 1) and g_i the fixed part of the penalty's
    subdifferential at x_i (the zero choice on the free set)."""

    def __init__(self, inst, mixing: MixingMatrix, manifold: Stiefel,
                 beta0: float = 1.0, zero_tol: float = 1e-10):
        if mixing.n != inst.n:
            raise ValueError("mixing matrix size must match the node count")
        self.inst = inst
        self.mixing = mixing
        self.manifold = manifold
        self.beta0 = float(beta0)
        self.zero_tol = float(zero_tol)
        self.xs: list[np.ndarray] = []

    def setup(self, x0) -> None:
        xs = _per_node(x0, self.inst.n)
        for x in xs:
            if not self.manifold.is_feasible(x):
                raise ValueError("initial points must lie on the manifold")
        self.xs = xs

    def step(self, k: int) -> StepInfo:
        beta = self.beta0 / np.sqrt(k + 1.0)
        mixed = _mix(self.mixing.w, _stack(self.xs))
        feas = 0.0
        new_xs = []
        for i, x in enumerate(self.xs):
            sub = self.inst.reg.subdifferential_at(x, self.zero_tol).fixed
            direction = self.manifold.tangent_project(
                x, self.inst.local_gradient(i, x) + sub)
            x_next = self.manifold.project(mixed[i] - beta * direction)
            feas = max(feas, self.manifold.orthonormality_residual(x_next))
            new_xs.append(x_next)
        self.xs = new_xs
        return StepInfo(np.zeros(self.inst.n), feas, 0)


class PgExtraDecoupled:
    """Euclidean reference method, decoupled form.  Round k computes

        x_i <- prox_{alpha r}(y_i)
        s_i <- s_i + sum_j (w_ij - wt_ij) x_j^{old} - alpha (grad_i(x_i^{new})
                                                     - grad_i(x_i^{old}))
        y_i <- sum_j w_ij x_j^{new} + s_i

    from s_i = -alpha grad_i(x_0) and y_i = sum_j w_ij x_j + s_i."""

    def __init__(self, inst, mixing: MixingMatrix, alpha: float):
        if mixing.n != inst.n:
            raise ValueError("mixing matrix size must match the node count")
        self.inst = inst
        self.mixing = mixing
        self.alpha = float(alpha)
        self.xs: list[np.ndarray] = []
        self._s: list[np.ndarray] = []
        self._y: list[np.ndarray] = []

    def setup(self, x0) -> None:
        xs = _per_node(x0, self.inst.n)
        self.xs = xs
        self._s = [-self.alpha * self.inst.local_gradient(i, xs[i])
                   for i in range(self.inst.n)]
        mixed = _mix(self.mixing.w, _stack(xs))
        self._y = [mixed[i] + self._s[i] for i in range(self.inst.n)]

    def step(self, k: int) -> StepInfo:
        old_xs = self.xs
        new_xs = [self.inst.reg.prox(y, self.alpha) for y in self._y]
        corr = _mix(self.mixing.w - self.mixing.w_tilde, _stack(old_xs))
        for i in range(self.inst.n):
            gdiff = (self.inst.local_gradient(i, new_xs[i])
                     - self.inst.local_gradient(i, old_xs[i]))
            self._s[i] = self._s[i] + corr[i] - self.alpha * gdiff
        mixed = _mix(self.mixing.w, _stack(new_xs))
        disp = np.array([np.linalg.norm(new_xs[i] - self._y[i])
                         for i in range(self.inst.n)])
        self._y = [mixed[i] + self._s[i] for i in range(self.inst.n)]
        self.xs = new_xs
        return StepInfo(disp, 0.0, 0)


class PgExtraCoupled:
    """Euclidean reference method, coupled form.  Round k >= 1 computes

        y_i <- y_i - alpha (grad_i(x_i^{curr}) - grad_i(x_i^{prev}))
                   + sum_j w_ij x_j^{curr} - sum_j wt_ij x_j^{prev}
        x_i <- prox_{alpha r}(y_i)

    while round 0 takes the first prox step from the consistent start
    y_i = sum_j w_ij x_j - alpha grad_i(x_0).  Produces the same iterate
    sequence as the decoupled form."""

    def __init__(self, inst, mixing: MixingMatrix, alpha: float):
        if mixing.n != inst.n:
            raise ValueError("mixing matrix size must match the node count")
        self.inst = inst
        self.mixing = mixing
        self.alpha = float(alpha)
        self.xs: list[np.ndarray] = []
        self._x_prev: list[np.ndarray] = []
        self._y: list[np.ndarray] = []

    def setup(self, x0) -> None:
        self.xs = _per_node(x0, self.inst.n)
        self._x_prev = []
        mixed = _mix(self.mixing.w, _stack(self.xs))
        self._y = [mixed[i] - self.alpha * self.inst.local_gradient(i, self.xs[i])
                   for i in range(self.inst.n)]

    def step(self, k: int) -> StepInfo:
        if self._x_prev:  # any round after the genesis prox step
            mixed = _mix(self.mixing.w, _stack(self.xs))
            mixed_prev = _mix(self.mixing.w_tilde, _stack(self._x_prev))
            for i in range(self.inst.n):
                gdiff = (self.inst.local_gradient(i, self.xs[i])
                         - self.inst.local_gradient(i, self._x_prev[i]))
                self._y[i] = (self._y[i] - self.alpha * gdiff
                              + mixed[i] - mixed_prev[i])
        new_xs = [self.inst.reg.prox(y, self.alpha) for y in self._y]
        disp = np.array([np.linalg.norm(new_xs[i] - self._y[i])
                         for i in range(self.inst.n)])
        self._x_prev = self.xs
        self.xs = new_xs
        return StepInfo(disp, 0.0, 0)
