"""Two-panel convergence figures from the simulator's trajectory CSVs.

Input files must carry the exact header
algorithm,k,kkt,consensus,objective,grad_norm,eta_max,phi,wall_ms.
The renderer draws the two standard panels (KKT violation vs iteration,
consensus error vs iteration) with one curve per algorithm and a log
y-axis by default.  Non-finite metric values (e.g. rank-deficient means)
stay NaN and show up as gaps in the curve, never as zeros.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import EmptyInput, SchemaMismatch

REQUIRED_HEADER = ["algorithm", "k", "kkt", "consensus", "objective",
                   "grad_norm", "eta_max", "phi", "wall_ms"]

# panel key -> (CSV column, y label, output filename)
PANELS = {
    "kkt": ("kkt", "KKT violation", "kkt_violation.png"),
    "consensus": ("consensus", "consensus error", "consensus_error.png"),
}

PANEL_CHOICES = ("kkt", "consensus", "both")


@dataclass
class PlotSpec:
    """What to render: inputs, output directory, panel and curve selection.

    labels maps algorithm name -> legend label and doubles as the requested
    curve set; None plots every algorithm found in the inputs."""

    csv_paths: list = field(default_factory=list)
    out_dir: str = "figures"
    panels: str = "both"
    log_y: bool = True
    labels: dict | None = None


@dataclass
class RenderResult:
    files: list
    plotted: list
    missing: list


def load_trajectories(paths) -> dict:
    """Parse one or more trajectory CSVs into per-algorithm column arrays,
    in first-appearance order.  Raises SchemaMismatch on a wrong header or
    ragged row, EmptyInput when no data rows exist at all."""
    if not paths:
        raise EmptyInput("no input files given")
    rows_by_algo: dict[str, list] = {}
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != REQUIRED_HEADER:
                raise SchemaMismatch(
                    f"{path}: header {header} does not match the trajectory "
                    f"contract {REQUIRED_HEADER}")
            for row in reader:
                if not row:
                    continue
                if len(row) != len(REQUIRED_HEADER):
                    raise SchemaMismatch(
                        f"{path}: row has {len(row)} fields, "
                        f"expected {len(REQUIRED_HEADER)}")
                rows_by_algo.setdefault(row[0], []).append(row)
    if not rows_by_algo:
        raise EmptyInput(f"no data rows in {[str(p) for p in paths]}")
    groups = {}
    for algo, rows in rows_by_algo.items():
        cols = {"k": np.array([int(r[1]) for r in rows])}
        for j, name in enumerate(REQUIRED_HEADER[2:], start=2):
            cols[name] = np.array([float(r[j]) for r in rows])
        groups[algo] = cols
    return groups


def draw_panel(ax, groups: dict, plotted: list, spec: PlotSpec,
               key: str) -> None:
    """Draw one panel onto an existing Axes: one curve per plotted
    algorithm, legend from the spec labels, log y when requested."""
    column, ylabel, _ = PANELS[key]
    for algo in plotted:
        label = algo if spec.labels is None else spec.labels.get(algo, algo)
        g = groups[algo]
        ax.plot(g["k"], g[column], label=label, linewidth=1.2)
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel("iteration k")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    if plotted:
        ax.legend()


def render(spec: PlotSpec) -> RenderResult:
    """Render the selected panels to PNG files under spec.out_dir.

    Requested algorithms absent from the inputs are skipped; a warning
    lists what was actually plotted."""
    if spec.panels not in PANEL_CHOICES:
        raise ValueError(f"panels must be one of {PANEL_CHOICES}, "
                         f"got {spec.panels!r}")
    groups = load_trajectories(spec.csv_paths)
    requested = list(spec.labels) if spec.labels is not None else list(groups)
    plotted = [a for a in requested if a in groups]
    missing = [a for a in requested if a not in groups]
    if missing:
        warnings.warn(f"requested algorithms not in the input: {missing}; "
                      f"plotted: {plotted}", stacklevel=2)

    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    keys = ("kkt", "consensus") if spec.panels == "both" else (spec.panels,)
    files = []
    for key in keys:
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        draw_panel(ax, groups, plotted, spec, key)
        fig.tight_layout()
        path = out / PANELS[key][2]
        fig.savefig(path, dpi=150)
        plt.close(fig)
        files.append(str(path))
    return RenderResult(files, plotted, missing)


def render_files(csv_paths, out_dir) -> list:
    """Default two-panel rendering of one or more CSVs; the simulator's
    --render hook calls this."""
    return render(PlotSpec(list(csv_paths), str(out_dir))).files
