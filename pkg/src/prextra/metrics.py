"""Optimality and consensus diagnostics for distributed manifold runs.

The reported stationarity measure at a point x is

    min_{g in subdifferential of r at x} || P_{T_x}(grad f(x) + g) ||_F,

computed exactly when the subdifferential is a singleton and otherwise by
projected gradient descent over the free entries/rows of the subdifferential
box (the objective is a convex quadratic in g).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError
from .network import MixingMatrix
from .stiefel import Stiefel

KKT_INNER_TOL = 1e-8
KKT_MAX_ITERS = 100_000


@dataclass
class TrajectoryRecord:
    k: int
    kkt: float
    consensus: float
    objective: float
    grad_norm: float
    eta_max: float
    phi: float
    wall_ms: float


@dataclass
class StationarityResult:
    value: float
    converged: bool      # False only when the inner solver hit its cap
    iterations: int


def manifold_mean(manifold: Stiefel, xs: Sequence[np.ndarray]) -> np.ndarray:
    """Projection of the Euclidean average back onto the manifold.
    Propagates RankDeficientError when the average loses rank."""
    return manifold.project(sum(xs) / len(xs))


def consensus_error(xs: Sequence[np.ndarray], xbar: np.ndarray) -> float:
    """(1/n) sum_i ||x_i - xbar||_F^2."""
    return float(sum(np.linalg.norm(x - xbar) ** 2 for x in xs) / len(xs))


def consensus_potential(xs: Sequence[np.ndarray], mixing: MixingMatrix) -> float:
    """(1/4) sum_ij w_ij ||x_i - x_j||_F^2."""
    flat = np.stack([np.ravel(x) for x in xs], axis=0)
    diffs = flat[:, None, :] - flat[None, :, :]
    pairwise = np.sum(diffs * diffs, axis=2)
    return float(0.25 * np.sum(mixing.w * pairwise))


def riemannian_grad_norm(inst, x: np.ndarray) -> float:
    """|| P_{T_x}(grad f(x)) ||_F for the global smooth loss."""
    manifold = Stiefel(*x.shape)
    return float(np.linalg.norm(
        manifold.tangent_project(x, inst.global_euclidean_gradient(x))))


def _project_box(v: np.ndarray, box) -> np.ndarray:
    """Project a free-set candidate onto the box constraint."""
    if box.geometry == "entry":
        return np.clip(v, -box.radius, box.radius)
    out = v.copy()
    for i in np.flatnonzero(box.free_mask.any(axis=1)):
        nrm = np.linalg.norm(out[i])
        if nrm > box.radius:
            out[i] *= box.radius / nrm
    return out


def kkt_violation_detailed(inst, xbar: np.ndarray,
                           zero_tol: float = 1e-10,
                           tol: float = KKT_INNER_TOL,
                           max_iters: int = KKT_MAX_ITERS) -> StationarityResult:
    """Stationarity measure at xbar with inner-solver diagnostics."""
    manifold = Stiefel(*xbar.shape)
    box = inst.reg.subdifferential_at(xbar, zero_tol)
    base = inst.global_euclidean_gradient(xbar) + box.fixed

    def residual(v: np.ndarray) -> np.ndarray:
        return manifold.tangent_project(xbar, base + v)

    if not box.has_free or box.radius == 0.0:
        return StationarityResult(float(np.linalg.norm(residual(
            np.zeros_like(xbar)))), True, 0)

    mask = box.free_mask

    def grad(v: np.ndarray) -> np.ndarray:
        return 2.0 * np.where(mask, manifold.tangent_project(xbar, residual(v)),
                              0.0)

    # stepsize 1 / (largest eigenvalue of the masked projected quadratic),
    # estimated by power iteration
    rng = np.random.default_rng(0)
    z = np.where(mask, rng.standard_normal(xbar.shape), 0.0)
    lip = 0.0
    for _ in range(100):
        nz = np.linalg.norm(z)
        if nz == 0.0:
            break
        z = z / nz
        hz = 2.0 * np.where(
            mask, manifold.tangent_project(
                xbar, manifold.tangent_project(xbar, np.where(mask, z, 0.0))),
            0.0)
        lip = float(np.sum(z * hz))
        z = hz
    step = 1.0 / lip if lip > 1e-12 else 1.0

    v = np.zeros_like(xbar)
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        v_next = _project_box(v - step * grad(v), box)
        v_next = np.where(mask, v_next, 0.0)
        mapping = np.linalg.norm(v - v_next) / step
        v = v_next
        if mapping <= tol:
            converged = True
            break
    return StationarityResult(float(np.linalg.norm(residual(v))),
                              converged, iters)


def kkt_violation(inst, xbar: np.ndarray, zero_tol: float = 1e-10) -> float:
    return kkt_violation_detailed(inst, xbar, zero_tol).value


def euclidean_kkt_violation(inst, xhat: np.ndarray,
                            zero_tol: float = 1e-10) -> float:
    """dist(0, grad f(xhat) + subdifferential of r at xhat) for flat
    (manifold-free) problems; closed form per entry/row."""
    box = inst.reg.subdifferential_at(xhat, zero_tol)
    g = inst.global_euclidean_gradient(xhat)
    fixed_part = np.where(box.free_mask, 0.0, g + box.fixed)
    total = float(np.sum(fixed_part ** 2))
    if box.geometry == "entry":
        free = np.where(box.free_mask,
                        np.maximum(np.abs(g) - box.radius, 0.0), 0.0)
        total += float(np.sum(free ** 2))
    elif box.geometry == "row":
        for i in np.flatnonzero(box.free_mask.any(axis=1)):
            total += max(np.linalg.norm(g[i]) - box.radius, 0.0) ** 2
    return float(np.sqrt(total))


def eps_stationarity(inst, xs: Sequence[np.ndarray], eps: float,
                     zero_tol: float = 1e-10) -> tuple[bool, float, float]:
    """Distributed eps-stationarity: every node within eps of the projected
    mean and every per-node stationarity residual at most eps.  Returns
    (verdict, max distance to mean, max per-node residual)."""
    manifold = Stiefel(*xs[0].shape)
    xbar = manifold_mean(manifold, xs)
    max_dist = max(float(np.linalg.norm(x - xbar)) for x in xs)
    max_kkt = max(kkt_violation_detailed(inst, x, zero_tol).value for x in xs)
    return (max_dist <= eps and max_kkt <= eps, max_dist, max_kkt)


def rate_slope(records: Sequence[TrajectoryRecord], k_min: int,
               k_max: int) -> float:
    """Least-squares slope of log(M_K) against log(K) over the window, where
    M_K is the running minimum of max(kkt^2, consensus, eta_max^2).  A value
    near -1 reflects a 1/K decay of the best composite measure so far."""
    running = np.inf
    ks, ms = [], []
    for rec in records:
        comp = max(rec.kkt ** 2, rec.consensus, rec.eta_max ** 2)
        if np.isfinite(comp):
            running = min(running, comp)
        if rec.k < 1 or not (k_min <= rec.k <= k_max) or not np.isfinite(running):
            continue
        ks.append(rec.k)
        ms.append(max(running, 1e-300))
    if len(ks) < 10:
        raise InsufficientDataError(
            f"need at least 10 points in [{k_min}, {k_max}], have {len(ks)}")
    slope = np.polyfit(np.log(np.array(ks, dtype=float)),
                       np.log(np.array(ms)), 1)[0]
    return float(slope)
