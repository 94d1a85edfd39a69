"""Tangent-space proximal subproblem on the Stiefel manifold.

Solves, for a feasible point y and a convex penalty r,

    minimize_{eta in T_y}  ||eta||_F^2 / (2 tau) + r(y + eta).

The tangency constraint y^T eta + eta^T y = 0 is dualized with a symmetric
multiplier L, which closes the primal minimization in one prox evaluation:

    eta(L) = prox_{tau r}(y - 2 tau y L) - y.

Optimality reduces to the r x r symmetric root-finding problem
E(L) := y^T eta(L) + eta(L)^T y = 0, solved by a damped semismooth Newton
method (generalized Jacobian assembled densely over the r(r+1)/2 symmetric
basis directions, which is cheap for small r) with a contractive fixed-point
fallback L <- L + E(L) / (4 tau).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergenceError
from .regularizers import L1, L21, Regularizer

DEFAULT_TOL = 1e-10
SSN_MAX_ITERS = 100
FIXED_POINT_MAX_ITERS = 10_000
STEP_BOUND_SLACK = 1e-9


@dataclass
class SubproblemResult:
    eta: np.ndarray
    kkt_residual: float       # ||E(L)||_F at exit, the tangency defect
    inner_iterations: int
    method_used: str          # "semismooth-newton" | "fixed-point"
    multiplier: np.ndarray    # final symmetric L, reusable as a warm start


def dual_residual(y: np.ndarray, reg: Regularizer, tau: float,
                  multiplier: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Primal candidate eta(L) and its tangency defect E(L) for symmetric L."""
    u = y - (2.0 * tau) * (y @ multiplier)
    eta = reg.prox(u, tau) - y
    yeta = y.T @ eta
    return eta, yeta + yeta.T


def _prox_jacobian_apply(reg: Regularizer, u: np.ndarray, tau: float,
                         du: np.ndarray) -> np.ndarray:
    """One Clarke-derivative of prox_{tau r} at u applied to du."""
    c = tau * reg.lam
    if reg.kind == L1 and c > 0.0:
        return np.where(np.abs(u) > c, du, 0.0)
    if reg.kind == L21 and c > 0.0:
        out = np.zeros_like(du)
        norms = np.linalg.norm(u, axis=1)
        for i in np.flatnonzero(norms > c):
            ubar = u[i] / norms[i]
            frac = c / norms[i]
            out[i] = (1.0 - frac) * du[i] + frac * ubar * (ubar @ du[i])
        return out
    return du.copy()


def _sym_basis(r: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(r) for j in range(i, r)]


def _svec(s: np.ndarray, pairs: list[tuple[int, int]]) -> np.ndarray:
    return np.array([s[i, j] for i, j in pairs])


def _sunvec(c: np.ndarray, pairs: list[tuple[int, int]], r: int) -> np.ndarray:
    s = np.zeros((r, r))
    for val, (i, j) in zip(c, pairs):
        s[i, j] = val
        s[j, i] = val
    return s


def _assemble_jacobian(y: np.ndarray, reg: Regularizer, tau: float,
                       u: np.ndarray, pairs: list[tuple[int, int]]) -> np.ndarray:
    """Dense generalized Jacobian of svec(E) with respect to svec(L)."""
    r = y.shape[1]
    jac = np.empty((len(pairs), len(pairs)))
    for col, (i, j) in enumerate(pairs):
        basis = np.zeros((r, r))
        basis[i, j] = 1.0
        basis[j, i] = 1.0
        du = (-2.0 * tau) * (y @ basis)
        deta = _prox_jacobian_apply(reg, u, tau, du)
        de = y.T @ deta
        jac[:, col] = _svec(de + de.T, pairs)
    return jac


def solve_subproblem(y: np.ndarray, reg: Regularizer, tau: float,
                     tol: float = DEFAULT_TOL,
                     multiplier0: np.ndarray | None = None) -> SubproblemResult:
    """Solve the tangent-space proximal subproblem at y.

    Parameters
    ----------
    y : feasible d x r point (orthonormal columns).
    reg : penalty defining r.
    tau : positive prox stepsize.
    tol : accepted Frobenius norm of the tangency defect E(L).
    multiplier0 : optional symmetric warm start for the multiplier; the
        default is zero.

    Returns a SubproblemResult.  Raises NoConvergenceError when both the
    Newton phase and the fixed-point fallback exhaust their budgets.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    y = np.asarray(y, dtype=float)
    d, r = y.shape
    pairs = _sym_basis(r)

    lam_sym = np.zeros((r, r)) if multiplier0 is None else \
        0.5 * (np.asarray(multiplier0, dtype=float) +
               np.asarray(multiplier0, dtype=float).T)
    eta, resid = dual_residual(y, reg, tau, lam_sym)
    res_norm = float(np.linalg.norm(resid))
    iters = 0
    method = "semismooth-newton"

    for _ in range(SSN_MAX_ITERS):
        if res_norm <= tol:
            break
        u = y - (2.0 * tau) * (y @ lam_sym)
        jac = _assemble_jacobian(y, reg, tau, u, pairs)
        rhs = -_svec(resid, pairs)
        try:
            delta_c = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError:
            delta_c, *_ = np.linalg.lstsq(jac, rhs, rcond=None)
        delta = _sunvec(delta_c, pairs, r)

        # damp on the residual norm; bail to the fallback if no step helps
        step, accepted = 1.0, False
        while step >= 1.0 / 1024:
            cand = lam_sym + step * delta
            eta_c, resid_c = dual_residual(y, reg, tau, cand)
            res_c = float(np.linalg.norm(resid_c))
            if res_c <= tol or res_c < res_norm * (1.0 - 1e-4 * step):
                lam_sym, eta, resid, res_norm = cand, eta_c, resid_c, res_c
                accepted = True
                break
            step *= 0.5
        iters += 1
        if not accepted:
            break

    if res_norm > tol:
        method = "fixed-point"
        beta = 1.0 / (4.0 * tau)
        for _ in range(FIXED_POINT_MAX_ITERS):
            iters += 1
            lam_sym = lam_sym + beta * resid
            eta, resid = dual_residual(y, reg, tau, lam_sym)
            res_norm = float(np.linalg.norm(resid))
            if res_norm <= tol:
                break
        if res_norm > tol:
            raise NoConvergenceError(
                f"tangent prox solve stalled at residual {res_norm:.3e} "
                f"(tol {tol:.0e}, tau {tau:.3e}, reg {reg.kind}/{reg.lam})")

    _check_solution(y, reg, tau, eta, d, r)
    return SubproblemResult(eta=eta, kkt_residual=res_norm,
                            inner_iterations=iters, method_used=method,
                            multiplier=lam_sym)


def subgradient_reference(ys: np.ndarray, reg: Regularizer, tau: float,
                          iters: int = 100_000) -> np.ndarray:
    """Brute-force cross-check for solve_subproblem: batched projected
    subgradient descent on the same objective with the classical
    2 tau / (t + 2) schedule.  ys stacks feasible points along axis 0;
    returns the matching stack of eta solutions.  Slow by design; only
    meant for validation."""
    b, d, r = ys.shape
    yt = np.transpose(ys, (0, 2, 1))

    def tangent(v):
        a = np.matmul(yt, v)
        return v - np.matmul(ys, 0.5 * (a + np.transpose(a, (0, 2, 1))))

    def subgrad_r(z):
        if reg.kind == L1:
            return reg.lam * np.sign(z)
        if reg.kind == L21:
            norms = np.linalg.norm(z, axis=2, keepdims=True)
            safe = np.where(norms > 0, norms, 1.0)
            return reg.lam * np.where(norms > 0, z / safe, 0.0)
        return np.zeros_like(z)

    eta = np.zeros_like(ys)
    for t in range(iters):
        gamma = 2.0 * tau / (t + 2.0)
        g = eta / tau + subgrad_r(ys + eta)
        eta = tangent(eta - gamma * tangent(g))
    return eta


def _check_solution(y: np.ndarray, reg: Regularizer, tau: float,
                    eta: np.ndarray, d: int, r: int) -> None:
    """Hard checks every accepted solution must pass."""
    eta_norm = float(np.linalg.norm(eta))
    bound = 2.0 * tau * reg.lipschitz_constant(d, r)
    if eta_norm > bound + STEP_BOUND_SLACK:
        raise AssertionError(
            f"prox step norm {eta_norm:.6e} exceeds 2*tau*L_r = {bound:.6e}")
    # strong convexity of the objective around the minimizer over the
    # feasible subspace: g(0) - g(eta) >= ||eta||^2 / (2 tau)
    quad = eta_norm**2 / (2.0 * tau)
    descent = reg.value(y) - (quad + reg.value(y + eta))
    slack = 1e-9 * max(1.0, abs(reg.value(y)))
    if descent < quad - slack:
        raise AssertionError(
            f"prox step violates the strong-convexity descent bound: "
            f"descent {descent:.6e} < {quad:.6e}")
