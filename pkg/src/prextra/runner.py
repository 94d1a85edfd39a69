"""Experiment harness: seeded end-to-end runs, config validation suites,
and multi-config comparisons sharing one problem instance.

A run builds the graph, weights, data, and initial point from derived seeds,
iterates the selected algorithm, records one TrajectoryRecord per cadence
point, and stops at max_iters or when the consensus error of the freshly
produced iterates falls below eps_cons.  Outputs are a CSV trajectory
(columns algorithm,k,kkt,consensus,objective,grad_norm,eta_max,phi,wall_ms,
floats at 17 significant digits) and a JSON summary.  Bodies of two CSVs
from the same config are byte-identical except for the wall_ms column.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import metrics
from .algorithms import Drsm, PgExtraDecoupled, PrExtra
from .config import DRSM, INIT_BROADCAST, PG_EXTRA, PR_EXTRA, RunConfig
from .errors import MismatchedInstancesError, RankDeficientError, SimulationError
from .network import MixingMatrix, generate_er_graph, metropolis_weights, spectral_gap
from .problems import (ProblemInstance, QuadraticComposite, load_matrix,
                       load_matrix_csv)
from .regularizers import Regularizer
from .stiefel import Stiefel
from .tangent_prox import solve_subproblem, subgradient_reference

CSV_HEADER = "algorithm,k,kkt,consensus,objective,grad_norm,eta_max,phi,wall_ms"

RNG_NAME = "numpy-default-pcg64"


@dataclass
class RunResult:
    records: list
    summary: dict
    csv_path: str | None
    summary_path: str | None

    @property
    def termination(self) -> str:
        return self.summary["termination"]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _record_line(label: str, rec: metrics.TrajectoryRecord) -> str:
    return ",".join([
        label, str(rec.k), _fmt(rec.kkt), _fmt(rec.consensus),
        _fmt(rec.objective), _fmt(rec.grad_norm), _fmt(rec.eta_max),
        _fmt(rec.phi), _fmt(rec.wall_ms),
    ])


def write_trajectory_csv(path, labeled_records) -> None:
    lines = [CSV_HEADER]
    lines.extend(_record_line(label, rec) for label, rec in labeled_records)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_data_matrix(path: str) -> np.ndarray:
    if str(path).endswith(".csv"):
        return load_matrix_csv(path)
    return load_matrix(path)


def build_instance(cfg: RunConfig):
    if cfg.data_path is not None:
        a = _load_data_matrix(cfg.data_path)
        return ProblemInstance.from_matrix(a, cfg.problem, cfg.n, cfg.r,
                                           cfg.effective_lam)
    return ProblemInstance.synthesized(cfg.problem, cfg.n, cfg.d, cfg.r,
                                       cfg.m, cfg.xi, cfg.effective_lam,
                                       cfg.data_seed)


def build_mixing(cfg: RunConfig):
    graph = generate_er_graph(cfg.n, cfg.graph_p, cfg.derived_graph_seed)
    mixing = metropolis_weights(graph)
    mixing.validate()
    return graph, mixing


def initial_points(cfg: RunConfig, manifold: Stiefel) -> list[np.ndarray]:
    """Starting iterates, drawn from the init seed stream.

    Per-node mode (the default) gives every node its own random manifold
    point, so the logged initial consensus error is O(1) and both its decay
    and the eps_cons stop are informative.  Broadcast mode hands the first
    draw to every node; the consensus error then starts at exactly zero and
    only measures how far the penalty steps pull nodes apart."""
    rng = np.random.default_rng(cfg.init_seed)
    if cfg.init == INIT_BROADCAST:
        x0 = manifold.random_point(rng)
        return [x0.copy() for _ in range(cfg.n)]
    return [manifold.random_point(rng) for _ in range(cfg.n)]


class _Execution:
    """One in-memory run of a config; file writing is layered on top."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.records: list[metrics.TrajectoryRecord] = []
        self.termination = "max-iterations"
        self.error: str | None = None
        self.max_feas = 0.0
        self.max_eta = 0.0
        self.steps_done = 0
        self.kkt_inner_converged = True
        self.graph = None
        self.wall_s = 0.0
        self.initial_consensus: float | None = None

    def execute(self) -> "_Execution":
        cfg = self.cfg
        t0 = time.perf_counter()
        try:
            self.graph, mixing = build_mixing(cfg)
            inst = build_instance(cfg)
            manifold = Stiefel(inst.d, cfg.r)
            x0s = initial_points(cfg, manifold)
            if cfg.algorithm == PG_EXTRA:
                algo = PgExtraDecoupled(
                    QuadraticComposite(inst.grams, x0s, inst.reg),
                    mixing, cfg.effective_alpha)
                measure = self._measure_euclidean
            elif cfg.algorithm == DRSM:
                algo = Drsm(inst, mixing, manifold, cfg.beta0)
                measure = self._measure_manifold
            else:
                algo = PrExtra(inst, mixing, manifold, cfg.effective_alpha,
                               cfg.effective_tau, cfg.subproblem_tol,
                               cfg.warm_start)
                measure = self._measure_manifold
            algo.setup(x0s)
            # algo.inst is the Euclidean reference instance for pg-extra
            self._inst, self._manifold, self._mixing = algo.inst, manifold, mixing
            self.initial_consensus = self._consensus_at(cfg, manifold, x0s)

            for k in range(cfg.max_iters):
                info = algo.step(k)
                self.steps_done = k + 1
                self.max_feas = max(self.max_feas, info.feasibility_residual)
                if info.eta_norms.size:
                    self.max_eta = max(self.max_eta,
                                       float(info.eta_norms.max()))
                if k % cfg.cadence != 0:
                    continue
                wall_ms = (time.perf_counter() - t0) * 1000.0
                rec = measure(k, algo.xs, info, wall_ms)
                self.records.append(rec)
                if rec.consensus < cfg.eps_cons:
                    self.termination = "consensus-threshold"
                    break
        except SimulationError as exc:
            self.termination = "error"
            self.error = f"{type(exc).__name__}: {exc}"
        self.wall_s = time.perf_counter() - t0
        return self

    @staticmethod
    def _consensus_at(cfg, manifold, xs) -> float:
        # terms of reference: the k-th record already holds post-step
        # metrics, so the pre-step spread is only visible here
        if cfg.algorithm == PG_EXTRA:
            return metrics.consensus_error(xs, sum(xs) / len(xs))
        try:
            return metrics.consensus_error(xs, metrics.manifold_mean(manifold, xs))
        except RankDeficientError:
            return float("nan")

    def _measure_manifold(self, k, xs, info, wall_ms):
        inst, manifold = self._inst, self._manifold
        try:
            xbar = metrics.manifold_mean(manifold, xs)
        except RankDeficientError:
            nan = float("nan")
            return metrics.TrajectoryRecord(
                k=k, kkt=nan, consensus=nan, objective=nan, grad_norm=nan,
                eta_max=float(info.eta_norms.max(initial=0.0)),
                phi=metrics.consensus_potential(xs, self._mixing),
                wall_ms=wall_ms)
        kkt = metrics.kkt_violation_detailed(inst, xbar)
        if not kkt.converged:
            self.kkt_inner_converged = False
        return metrics.TrajectoryRecord(
            k=k,
            kkt=kkt.value,
            consensus=metrics.consensus_error(xs, xbar),
            objective=inst.global_smooth_objective(xbar)
            + inst.reg.value(xbar),
            grad_norm=metrics.riemannian_grad_norm(inst, xbar),
            eta_max=float(info.eta_norms.max(initial=0.0)),
            phi=metrics.consensus_potential(xs, self._mixing),
            wall_ms=wall_ms)

    def _measure_euclidean(self, k, xs, info, wall_ms):
        inst = self._inst
        xhat = sum(xs) / len(xs)
        return metrics.TrajectoryRecord(
            k=k,
            kkt=metrics.euclidean_kkt_violation(inst, xhat),
            consensus=metrics.consensus_error(xs, xhat),
            objective=inst.global_smooth_objective(xhat)
            + inst.reg.value(xhat),
            grad_norm=float(np.linalg.norm(
                inst.global_euclidean_gradient(xhat))),
            eta_max=float(info.eta_norms.max(initial=0.0)),
            phi=metrics.consensus_potential(xs, self._mixing),
            wall_ms=wall_ms)

    def summary(self) -> dict:
        cfg = self.cfg
        if cfg.algorithm == PG_EXTRA:
            eta_bound = None  # eta_max logs prox displacements instead
        else:
            reg = Regularizer.l21(cfg.effective_lam) if cfg.problem == "cise" \
                else Regularizer.l1(cfg.effective_lam)
            eta_bound = 2.0 * cfg.effective_tau * reg.lipschitz_constant(
                cfg.d, cfg.r)
        final = self.records[-1].__dict__ if self.records else None
        return {
            "config": cfg.to_dict(),
            "seeds": {"master": cfg.seed, "graph": cfg.derived_graph_seed,
                      "data": cfg.data_seed, "init": cfg.init_seed},
            "rng": RNG_NAME,
            "graph": None if self.graph is None else {
                "edges": len(self.graph.edges),
                "average_degree": self.graph.average_degree(),
            },
            "termination": self.termination,
            "error": self.error,
            "initial_consensus_error": self.initial_consensus,
            "iterations_run": self.steps_done,
            "records_written": len(self.records),
            "final_record": final,
            "max_orthonormality_residual": self.max_feas,
            "max_eta_norm": self.max_eta,
            "eta_norm_bound": eta_bound,
            "kkt_inner_converged": self.kkt_inner_converged,
            "wall_time_s": self.wall_s,
        }


def run(cfg: RunConfig) -> RunResult:
    """Execute one config and write its trajectory CSV and summary JSON
    under cfg.out_dir.  Errors raised by components abort the loop and are
    recorded in the summary instead of propagating."""
    ex = _Execution(cfg).execute()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{cfg.problem}_{cfg.algorithm}"
    csv_path = out / f"{stem}.csv"
    summary_path = out / f"{stem}_summary.json"
    write_trajectory_csv(csv_path, [(cfg.algorithm, r) for r in ex.records])
    summary = ex.summary()
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return RunResult(ex.records, summary, str(csv_path), str(summary_path))


def _instance_signature(cfg: RunConfig) -> tuple:
    return (cfg.problem, cfg.d, cfg.r, cfg.m, cfg.xi, cfg.n,
            cfg.data_seed, cfg.data_path)


def compare(cfgs: list[RunConfig], out_dir) -> RunResult:
    """Run several configs against the same problem instance and merge their
    trajectories into one CSV keyed by the algorithm column."""
    if not cfgs:
        raise MismatchedInstancesError("compare needs at least one config")
    sig = _instance_signature(cfgs[0])
    for cfg in cfgs[1:]:
        if _instance_signature(cfg) != sig:
            raise MismatchedInstancesError(
                f"configs describe different instances: {sig} vs "
                f"{_instance_signature(cfg)}")

    labels = []
    seen: dict[str, int] = {}
    for cfg in cfgs:
        seen[cfg.algorithm] = seen.get(cfg.algorithm, 0) + 1
        labels.append(cfg.algorithm if seen[cfg.algorithm] == 1
                      else f"{cfg.algorithm}-{seen[cfg.algorithm]}")

    executions = [_Execution(cfg).execute() for cfg in cfgs]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "compare.csv"
    labeled = [(label, rec) for label, ex in zip(labels, executions)
               for rec in ex.records]
    write_trajectory_csv(csv_path, labeled)
    summary = {"runs": [dict(label=label, **ex.summary())
                        for label, ex in zip(labels, executions)]}
    summary_path = out / "compare_summary.json"
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    records = [rec for _, rec in labeled]
    return RunResult(records, summary, str(csv_path), str(summary_path))


# ---------------------------------------------------------------------------
# validation suites


@dataclass
class GroupResult:
    name: str
    passed: bool
    details: str


@dataclass
class ValidationReport:
    groups: list[GroupResult]

    @property
    def passed(self) -> bool:
        return all(g.passed for g in self.groups)

    def render(self) -> str:
        lines = []
        for g in self.groups:
            lines.append(f"[{'PASS' if g.passed else 'FAIL'}] {g.name}: "
                         f"{g.details}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def validate(cfg: RunConfig | None = None,
             mixing: MixingMatrix | None = None) -> ValidationReport:
    """Diagnostic invariant suites for a config (default config when None).
    An explicit mixing matrix can be injected to audit externally supplied
    weights."""
    cfg = cfg or RunConfig()
    groups = [
        _check_mixing(cfg, mixing),
        _check_gradients(cfg),
        _check_curvature(cfg),
        _check_prox_step(cfg),
    ]
    return ValidationReport(groups)


def _check_mixing(cfg: RunConfig, mixing: MixingMatrix | None) -> GroupResult:
    if mixing is None:
        graph = generate_er_graph(cfg.n, cfg.graph_p, cfg.derived_graph_seed)
        mixing = metropolis_weights(graph)
    w = mixing.w
    sym_err = float(np.abs(w - w.T).max())
    row_err = float(np.abs(w.sum(axis=1) - 1.0).max())
    col_err = float(np.abs(w.sum(axis=0) - 1.0).max())
    min_w = float(w.min())
    min_diag = float(np.diagonal(w).min())
    gap = spectral_gap(mixing)
    wt_eigs = np.linalg.eigvalsh(mixing.w_tilde)
    passed = (sym_err <= 1e-14 and row_err <= 1e-14 and col_err <= 1e-14
              and min_w >= -1e-14 and min_diag > 0 and gap < 1.0
              and wt_eigs[0] >= -1e-12)
    details = (f"sym={sym_err:.2e} row={row_err:.2e} col={col_err:.2e} "
               f"min={min_w:.2e} diag={min_diag:.3f} gap={gap:.6f} "
               f"wt_min_eig={wt_eigs[0]:.2e}")
    return GroupResult("mixing-matrix", passed, details)


def _check_gradients(cfg: RunConfig) -> GroupResult:
    inst = build_instance(cfg)
    manifold = Stiefel(inst.d, cfg.r)
    rng = np.random.default_rng(cfg.init_seed)
    h = 1e-6
    worst = 0.0
    for i in range(min(3, inst.n)):
        x = manifold.random_point(rng)
        g = inst.local_gradient(i, x)
        fd = np.zeros_like(g)
        for a in range(x.shape[0]):
            for b in range(x.shape[1]):
                e = np.zeros_like(x)
                e[a, b] = h
                fd[a, b] = (inst.local_objective(i, x + e)
                            - inst.local_objective(i, x - e)) / (2 * h)
        scale = max(1.0, float(np.linalg.norm(g)))
        worst = max(worst, float(np.linalg.norm(fd - g)) / scale)
    passed = worst <= 1e-5
    return GroupResult("gradient-finite-difference", passed,
                       f"max relative error {worst:.2e} (tol 1e-5)")


def _check_curvature(cfg: RunConfig) -> GroupResult:
    manifold = Stiefel(cfg.d, cfg.r)
    rng = np.random.default_rng(cfg.init_seed)
    maxima = []
    for scale in (1e-2, 5e-3):
        worst = 0.0
        for _ in range(200):
            x = manifold.random_point(rng)
            u = rng.standard_normal(manifold.shape)
            u *= scale / np.linalg.norm(u)
            ratio = manifold.projection_curvature_ratio(x, u)
            if not np.isfinite(ratio):
                return GroupResult("projection-curvature", False,
                                   f"non-finite ratio at scale {scale}")
            worst = max(worst, ratio)
        maxima.append(worst)
    stability = maxima[0] / maxima[1]
    passed = 0.25 <= stability <= 4.0
    return GroupResult(
        "projection-curvature", passed,
        f"max ratio {maxima[0]:.3f} @1e-2, {maxima[1]:.3f} @5e-3, "
        f"scale stability {stability:.3f} (expect within [0.25, 4])")


def _check_prox_step(cfg: RunConfig) -> GroupResult:
    # canonical small instances for the oracle cross-check
    small = Stiefel(4, 2)
    reg_small = Regularizer.l1(0.1)
    tau_small = 0.05
    rng = np.random.default_rng(1234)
    ys = np.stack([small.random_point(rng) for _ in range(20)])
    ref = subgradient_reference(ys, reg_small, tau_small)
    worst = 0.0
    for i in range(ys.shape[0]):
        res = solve_subproblem(ys[i], reg_small, tau_small)
        worst = max(worst, float(np.linalg.norm(res.eta - ref[i])))

    # the configured problem's step-norm bound
    reg = Regularizer.l21(cfg.effective_lam) if cfg.problem == "cise" \
        else Regularizer.l1(cfg.effective_lam)
    manifold = Stiefel(cfg.d, cfg.r)
    tau = cfg.effective_tau
    bound = 2.0 * tau * reg.lipschitz_constant(cfg.d, cfg.r)
    max_eta = 0.0
    for _ in range(20):
        y = manifold.random_point(rng)
        res = solve_subproblem(y, reg, tau, cfg.subproblem_tol)
        max_eta = max(max_eta, float(np.linalg.norm(res.eta)))
    passed = worst <= 1e-5 and max_eta <= bound + 1e-9
    return GroupResult(
        "prox-step", passed,
        f"oracle max diff {worst:.2e} (tol 1e-5); step bound {bound:.3e}, "
        f"max step {max_eta:.3e}")
