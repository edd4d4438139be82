import json

import pytest

from nleach.cli import main

SCENARIOS = """
[[scenario]]
label = "A"
policy = "tax"
target_cost_increase = 28.9

[[scenario]]
label = "B"
policy = "efficiency"

[[scenario]]
label = "C"
policy = "cd"

[[scenario]]
label = "D"
policy = "wetland"
variant = "D"
"""


def tree(root):
    """Relative path -> bytes for every file except manifests."""
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and p.name != "manifest.json"}


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    monkeypatch.setenv("NLEACH_OUTPUT_ROOT", str(tmp_path / "root"))
    cfg = tmp_path / "run.toml"
    cfg.write_text(SCENARIOS)
    return tmp_path, cfg


def run_pipeline(base, cfg, cells=60, seed=3):
    assert main(["generate", "--cells", str(cells), "--seed", str(seed), "--out", str(base / "b")]) == 0
    assert main(["run", "--baseline", str(base / "b" / "baseline.csv"), "--config", str(cfg),
                 "--out", str(base / "runs"), "--no-figures"]) == 0
    dirs = [str(base / "runs" / d) for d in ("A", "B", "C", "D")]
    assert main(["analyze", *dirs, "--out", str(base / "analysis"), "--no-figures"]) == 0


def test_generate_twice_identical(tmp_path):
    for d in ("x", "y"):
        assert main(["generate", "--cells", "50", "--seed", "7", "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "x" / "baseline.csv").read_bytes() == (tmp_path / "y" / "baseline.csv").read_bytes()
    m = json.loads((tmp_path / "x" / "manifest.json").read_text())
    assert m["seed"] == 7


def test_generate_rejects_one_cell(tmp_path, capsys):
    assert main(["generate", "--cells", "1", "--out", str(tmp_path)]) == 2
    assert "2" in capsys.readouterr().err


def test_env_var_sets_output_root(workspace):
    tmp, _ = workspace
    assert main(["generate", "--cells", "20", "--seed", "1"]) == 0
    assert (tmp / "root" / "baseline" / "baseline.csv").exists()


def test_null_run_reproduces_baseline(workspace):
    tmp, _ = workspace
    assert main(["generate", "--cells", "30", "--seed", "2"]) == 0
    assert main(["run", "--scenario", "null", "--no-figures"]) == 0
    summary = json.loads((tmp / "root" / "runs" / "null" / "summary.json").read_text())
    for q in ("leaching", "n_use", "output", "land"):
        assert abs(summary["national"][f"pct_{q}"]) < 1e-8
    assert summary["diagnostics"]["converged"]


def test_pipeline_outputs_and_determinism(workspace):
    tmp, cfg = workspace
    run_pipeline(tmp / "one", cfg)
    run_pipeline(tmp / "two", cfg)
    assert tree(tmp / "one") == tree(tmp / "two")
    for d in ("A", "B", "C", "D"):
        files = {p.name for p in (tmp / "one" / "runs" / d).iterdir()}
        assert {"cells.csv", "units.csv", "prices.csv", "states.csv", "d_leaching.asc", "summary.json",
                "manifest.json"} <= files
    out = {p.name for p in (tmp / "one" / "analysis").iterdir()}
    assert {"best_policy.csv", "best_policy.asc", "states.csv", "reduction_ratio.csv", "national.csv",
            "cumulative_summary.csv", "manifest.json"} <= out


def test_threads_do_not_change_bytes(workspace):
    tmp, cfg = workspace
    assert main(["generate", "--cells", "40", "--seed", "5", "--out", str(tmp / "b")]) == 0
    for n in (1, 3):
        assert main(["run", "--baseline", str(tmp / "b" / "baseline.csv"), "--config", str(cfg),
                     "--scenario", "A", "--threads", str(n), "--out", str(tmp / f"t{n}"), "--no-figures"]) == 0
    assert tree(tmp / "t1") == tree(tmp / "t3")


def test_figures_rendered(workspace):
    tmp, cfg = workspace
    assert main(["generate", "--cells", "40", "--seed", "5", "--out", str(tmp / "b")]) == 0
    assert main(["run", "--baseline", str(tmp / "b" / "baseline.csv"), "--config", str(cfg),
                 "--scenario", "C", "--scenario", "A", "--out", str(tmp / "r")]) == 0
    assert (tmp / "r" / "C" / "leaching_change.png").stat().st_size > 0
    assert main(["analyze", str(tmp / "r" / "A"), str(tmp / "r" / "C"), "--out", str(tmp / "an")]) == 0
    for f in ("best_policy.png", "cumulative.png", "reduction_ratio.png", "state_reduction.png"):
        assert (tmp / "an" / f).exists()


def test_invalid_scenario_key_names_key(workspace, capsys):
    tmp, _ = workspace
    bad = tmp / "bad.toml"
    bad.write_text('[[scenario]]\nlabel = "A"\npolicy = "tax"\ntarget_cost = 28.9\n')
    assert main(["generate", "--cells", "20", "--seed", "1"]) == 0
    assert main(["run", "--config", str(bad)]) == 2
    assert "target_cost" in capsys.readouterr().err


def test_unknown_label_is_config_error(workspace):
    assert main(["generate", "--cells", "20", "--seed", "1"]) == 0
    assert main(["run", "--scenario", "Z", "--no-figures"]) == 2


def test_nonconvergence_exit_code(workspace):
    tmp, _ = workspace
    cfg = tmp / "tight.toml"
    cfg.write_text('[solver]\nmax_iter = 1\n\n[[scenario]]\nlabel = "A"\npolicy = "tax"\nrate = 300.0\n')
    assert main(["generate", "--cells", "30", "--seed", "2"]) == 0
    assert main(["run", "--config", str(cfg), "--no-figures"]) == 3
    diag = json.loads((tmp / "root" / "runs" / "A" / "diagnostics.json").read_text())
    assert diag["diagnostics"]["converged"] is False


def test_grid_mismatch_exit_code(workspace):
    tmp, cfg = workspace
    for seed in (3, 4):
        b = tmp / f"b{seed}"
        assert main(["generate", "--cells", "30", "--seed", str(seed), "--out", str(b)]) == 0
        assert main(["run", "--baseline", str(b / "baseline.csv"), "--config", str(cfg), "--scenario", "C",
                     "--out", str(tmp / f"r{seed}"), "--no-figures"]) == 0
    assert main(["analyze", str(tmp / "r3" / "C"), str(tmp / "r4" / "C"), "--no-figures"]) == 4


def test_missing_baseline_is_data_error(workspace):
    tmp, _ = workspace
    assert main(["run", "--baseline", str(tmp / "nope.csv")]) == 4


def test_calibrate_tax_and_validate(workspace, capsys):
    tmp, _ = workspace
    assert main(["generate", "--cells", "30", "--seed", "2"]) == 0
    capsys.readouterr()
    assert main(["calibrate-tax", "--target", "28.9", "--out", str(tmp / "tax.json")]) == 0
    res = json.loads((tmp / "tax.json").read_text())
    assert abs(res["achieved_cost_increase"] - 28.9) < 0.01
    assert main(["validate", "--target-change", "10", "--out", str(tmp / "v.json")]) == 0
    v = json.loads((tmp / "v.json").read_text())
    assert v["productivity_shift"] < 0 and abs(v["solved_price"] / v["target_price"] - 1) < 1e-6
