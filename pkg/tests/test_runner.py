"""End-to-end harness tests: run outputs, config parsing, compare, validate,
and the command-line entry points."""

import json
from pathlib import Path

import numpy as np
import pytest

from prextra.cli import main
from prextra.config import RunConfig
from prextra.errors import ConfigError, MismatchedInstancesError
from prextra.network import MixingMatrix
from prextra.problems import SpectralRecipe, load_matrix, save_matrix, synthesize
from prextra.runner import CSV_HEADER, compare, run, validate


def _small(**kw):
    base = dict(n=4, d=6, r=2, m=80, max_iters=40, seed=11)
    base.update(kw)
    return RunConfig(**base)


def _body_no_wall(path):
    # strip the wall_ms column (last field) from every line
    lines = Path(path).read_text().splitlines()
    return [",".join(ln.split(",")[:-1]) for ln in lines]


def test_run_outputs_and_csv_schema(tmp_path):
    cfg = _small(out_dir=str(tmp_path))
    result = run(cfg)
    assert Path(result.csv_path).name == "spca_pr-extra.csv"
    lines = Path(result.csv_path).read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + cfg.max_iters
    ks = []
    for ln in lines[1:]:
        fields = ln.split(",")
        assert len(fields) == 9
        assert fields[0] == "pr-extra"
        ks.append(int(fields[1]))
        for v in fields[2:]:
            assert np.isfinite(float(v))
    assert ks == list(range(cfg.max_iters))

    summary = json.loads(Path(result.summary_path).read_text())
    assert summary["termination"] == "max-iterations"
    assert summary["error"] is None
    assert summary["iterations_run"] == cfg.max_iters
    assert summary["records_written"] == cfg.max_iters
    assert summary["seeds"] == {"master": 11, "graph": 12, "data": 13,
                                "init": 14}
    assert summary["max_orthonormality_residual"] <= 1e-10
    assert summary["max_eta_norm"] <= summary["eta_norm_bound"] + 1e-9
    assert summary["graph"]["edges"] >= cfg.n - 1
    assert summary["initial_consensus_error"] > 0.1
    assert summary["config"]["alpha"] == 0.6
    assert summary["config"]["tau"] == 0.6
    assert summary["config"]["lambda"] == 0.001


def test_zero_iteration_run(tmp_path):
    cfg = _small(max_iters=0, out_dir=str(tmp_path))
    result = run(cfg)
    assert result.records == []
    assert result.termination == "max-iterations"
    assert result.summary["iterations_run"] == 0
    assert result.summary["final_record"] is None
    assert Path(result.csv_path).read_text() == CSV_HEADER + "\n"


def test_symmetric_broadcast_run_hits_consensus_stop(tmp_path):
    # identical data blocks + identical inits keep the nodes in lockstep,
    # so the very first record trips the consensus threshold
    block = synthesize(SpectralRecipe(20, 6, 0.8, "geometric", 3))
    data = tmp_path / "tiled.mxa"
    save_matrix(data, np.vstack([block] * 4))
    cfg = _small(data_path=str(data), init="broadcast", max_iters=50,
                 out_dir=str(tmp_path))
    result = run(cfg)
    assert result.termination == "consensus-threshold"
    assert result.summary["records_written"] == 1
    assert result.records[0].k == 0
    assert result.summary["initial_consensus_error"] <= 1e-20


def test_initial_consensus_error_by_init_mode(tmp_path):
    per_node = run(_small(max_iters=1, out_dir=str(tmp_path / "a")))
    broadcast = run(_small(max_iters=1, init="broadcast",
                           out_dir=str(tmp_path / "b")))
    assert per_node.summary["initial_consensus_error"] > 0.1
    assert broadcast.summary["initial_consensus_error"] <= 1e-20


def test_rerun_bodies_byte_identical(tmp_path):
    cfg_a = _small(out_dir=str(tmp_path / "a"))
    cfg_b = _small(out_dir=str(tmp_path / "b"))
    res_a, res_b = run(cfg_a), run(cfg_b)
    assert _body_no_wall(res_a.csv_path) == _body_no_wall(res_b.csv_path)
    other = run(_small(seed=12, out_dir=str(tmp_path / "c")))
    assert _body_no_wall(other.csv_path) != _body_no_wall(res_a.csv_path)


def test_cadence_subsamples_records(tmp_path):
    cfg = _small(cadence=7, max_iters=30, out_dir=str(tmp_path))
    result = run(cfg)
    assert [rec.k for rec in result.records] == [0, 7, 14, 21, 28]
    # the loop still runs every iteration
    assert result.summary["iterations_run"] == 30


def test_run_every_algorithm(tmp_path):
    for algorithm in ("pr-extra", "pg-extra", "drsm"):
        cfg = _small(algorithm=algorithm, max_iters=10,
                     out_dir=str(tmp_path / algorithm))
        result = run(cfg)
        assert result.termination == "max-iterations"
        lines = Path(result.csv_path).read_text().splitlines()
        assert all(ln.split(",")[0] == algorithm for ln in lines[1:])
        if algorithm == "pg-extra":
            assert result.summary["eta_norm_bound"] is None
        else:
            assert result.summary["eta_norm_bound"] > 0


def test_error_termination_is_recorded_not_raised(tmp_path):
    # 18 rows cannot split over 4 nodes
    data = tmp_path / "bad.mxa"
    save_matrix(data, np.random.default_rng(0).standard_normal((18, 6)))
    cfg = _small(data_path=str(data), out_dir=str(tmp_path))
    result = run(cfg)
    assert result.termination == "error"
    assert "IndivisibleRowsError" in result.summary["error"]
    assert result.records == []


def test_effective_defaults_per_problem():
    spca = RunConfig(problem="spca")
    cise = RunConfig(problem="cise", lam=None)
    assert (spca.effective_alpha, spca.effective_tau) == (0.6, 0.6)
    assert (cise.effective_alpha, cise.effective_tau) == (0.1, 0.1)
    assert spca.effective_lam == 0.001
    assert cise.effective_lam == 0.01
    tied = RunConfig(alpha=0.2)
    assert tied.effective_tau == 0.2
    split = RunConfig(alpha=0.2, tau=0.05)
    assert split.effective_tau == 0.05
    assert RunConfig(lam=0.05).effective_lam == 0.05
    assert RunConfig().init == "per-node"


def test_seed_fanout_and_graph_override():
    cfg = RunConfig(seed=100)
    assert (cfg.derived_graph_seed, cfg.data_seed, cfg.init_seed) == (101, 102, 103)
    pinned = RunConfig(seed=100, graph_seed=7)
    assert pinned.derived_graph_seed == 7


def test_from_dict_strictness():
    ok = RunConfig.from_dict({"problem": "cise", "lambda": 0.02,
                              "graph": {"p": 0.5, "seed": 9}, "alpha": 0.3})
    assert ok.problem == "cise" and ok.lam == 0.02
    assert ok.graph_p == 0.5 and ok.derived_graph_seed == 9
    assert ok.effective_tau == 0.3

    with pytest.raises(ConfigError):
        RunConfig.from_dict({"stepsize": 0.1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"graph": {"nodes": 8}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"graph": [0.6]})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"init": "both"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"lambda": -0.1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"alpha": -1.0})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"tau": -0.5})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"problem": "pca"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"algorithm": "admm"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"d": 5, "r": 6})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"warm_start": 1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"max_iters": -1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"cadence": 0})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"n": 2.5})


def test_from_json_and_to_dict(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"problem": "spca", "n": 4, "d": 6, "r": 2,
                                "m": 80, "seed": 5}))
    cfg = RunConfig.from_json(path)
    assert cfg.n == 4 and cfg.seed == 5
    d = cfg.to_dict()
    assert d["lambda"] == 0.001 and d["alpha"] == 0.6 and d["tau"] == 0.6
    assert d["graph"] == {"p": 0.6, "seed": 6}

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.from_json(bad)


def test_compare_merges_and_labels(tmp_path):
    cfgs = [_small(max_iters=5),
            _small(max_iters=5, algorithm="drsm"),
            _small(max_iters=5, alpha=0.3)]
    result = compare(cfgs, tmp_path)
    lines = Path(result.csv_path).read_text().splitlines()
    assert lines[0] == CSV_HEADER
    labels = {ln.split(",")[0] for ln in lines[1:]}
    assert labels == {"pr-extra", "drsm", "pr-extra-2"}
    assert [r["label"] for r in result.summary["runs"]] == \
        ["pr-extra", "drsm", "pr-extra-2"]
    assert len(lines) == 1 + 15


def test_compare_rejects_mismatched_instances(tmp_path):
    with pytest.raises(MismatchedInstancesError):
        compare([_small(), _small(d=8)], tmp_path)
    with pytest.raises(MismatchedInstancesError):
        compare([_small(), _small(seed=99)], tmp_path)  # data seed differs
    with pytest.raises(MismatchedInstancesError):
        compare([], tmp_path)


def test_validate_default_config_passes():
    report = validate(_small())
    assert report.passed
    names = [g.name for g in report.groups]
    assert names == ["mixing-matrix", "gradient-finite-difference",
                     "projection-curvature", "prox-step"]
    rendered = report.render()
    assert rendered.count("[PASS]") == 4
    assert rendered.endswith("overall: PASS")


def test_validate_flags_corrupt_mixing():
    w = np.full((4, 4), 0.25)
    w[0, 0] += 0.1  # breaks row sums
    report = validate(_small(), mixing=MixingMatrix(w))
    assert not report.passed
    assert "[FAIL] mixing-matrix" in report.render()


def test_cli_run_validate_compare(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"n": 4, "d": 6, "r": 2, "m": 80,
                                    "max_iters": 5, "seed": 11,
                                    "out_dir": str(tmp_path / "runs")}))
    assert main(["run", "--config", str(cfg_path)]) == 0
    assert (tmp_path / "runs" / "spca_pr-extra.csv").exists()
    out = capsys.readouterr().out
    assert "termination: max-iterations" in out

    assert main(["validate", "--config", str(cfg_path)]) == 0
    assert "overall: PASS" in capsys.readouterr().out

    other = tmp_path / "drsm.json"
    other.write_text(json.dumps({"n": 4, "d": 6, "r": 2, "m": 80,
                                 "max_iters": 5, "seed": 11,
                                 "algorithm": "drsm"}))
    assert main(["compare", "--configs", str(cfg_path), str(other),
                 "--out-dir", str(tmp_path / "cmp")]) == 0
    assert (tmp_path / "cmp" / "compare.csv").exists()


def test_cli_error_exit_codes(tmp_path, capsys):
    bad_cfg = tmp_path / "bad.json"
    bad_cfg.write_text(json.dumps({"stepsize": 0.1}))
    assert main(["run", "--config", str(bad_cfg)]) == 1
    assert "ConfigError" in capsys.readouterr().err

    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text(json.dumps({"n": 4, "d": 6, "r": 2, "m": 80, "max_iters": 2}))
    b.write_text(json.dumps({"n": 4, "d": 8, "r": 2, "m": 80, "max_iters": 2}))
    assert main(["compare", "--configs", str(a), str(b),
                 "--out-dir", str(tmp_path / "cmp")]) == 1
    assert "MismatchedInstancesError" in capsys.readouterr().err

    bad_recipe = tmp_path / "recipe.json"
    bad_recipe.write_text(json.dumps({"m": 20, "d": 4, "xi": 0.8,
                                      "exponent": "geometric"}))
    assert main(["gen-data", "--recipe", str(bad_recipe),
                 "--out", str(tmp_path / "x.mxa")]) == 1
    assert "missing recipe keys" in capsys.readouterr().err

    # a run whose instance construction fails exits 1 but still writes files
    data = tmp_path / "bad.mxa"
    save_matrix(data, np.random.default_rng(0).standard_normal((18, 6)))
    err_cfg = tmp_path / "err.json"
    err_cfg.write_text(json.dumps({"n": 4, "d": 6, "r": 2, "m": 80,
                                   "data_path": str(data),
                                   "out_dir": str(tmp_path / "runs_err")}))
    assert main(["run", "--config", str(err_cfg)]) == 1
    assert "IndivisibleRowsError" in capsys.readouterr().err
    assert (tmp_path / "runs_err" / "spca_pr-extra_summary.json").exists()


def test_cli_gen_data_round_trip(tmp_path, capsys):
    recipe = {"m": 24, "d": 5, "xi": 0.7, "exponent": "half-geometric",
              "seed": 42}
    rp = tmp_path / "recipe.json"
    rp.write_text(json.dumps(recipe))
    out = tmp_path / "data.mxa"
    assert main(["gen-data", "--recipe", str(rp), "--out", str(out)]) == 0
    assert "data written" in capsys.readouterr().out
    want = synthesize(SpectralRecipe(**recipe))
    assert np.array_equal(load_matrix(out), want)
