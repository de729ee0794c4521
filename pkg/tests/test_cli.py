import json
import subprocess
import sys

import numpy as np
import pytest

from dcann import cli, harness, synthgen


def _run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def quick_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("quick")
    assert _run("run", "--profile", "quick", "--out", out, "--quiet") == 0
    return out


def test_help_exits_zero():
    for argv in (["--help"], ["run", "--help"], ["report", "--help"]):
        proc = subprocess.run([sys.executable, "-m", "dcann.cli", *argv], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "usage:" in proc.stdout


def test_unknown_flag_exits_nonzero_with_usage():
    proc = subprocess.run([sys.executable, "-m", "dcann.cli", "run", "--frobnicate"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "usage:" in proc.stderr


def test_bad_argument_values(capsys):
    for argv in (["run", "--jobs", "0"], ["run", "--seed", "-3"], ["run", "--profile", "huge"], []):
        with pytest.raises(SystemExit) as exc:
            _run(*argv)
        assert exc.value.code == 1


def test_generate_default_dataset(tmp_path, capsys):
    assert _run("generate", "--out", tmp_path) == 0
    csv_path = tmp_path / "dataset_p0.50_seed0.csv"
    d = synthgen.read_csv(csv_path)
    assert d.features.shape == (5000, 100)
    meta = json.loads(synthgen.metadata_path(csv_path).read_text())
    assert meta["feature_kind"] == "continuous" and meta["generator_seed"] == 0


def test_generate_imbalanced_and_discrete(tmp_path):
    assert _run("generate", "--out", tmp_path, "--discrete", "--seed", "4",
                "--set", "generator.p_true=0.9", "--set", "generator.n_observations=1000",
                "--set", "generator.n_features=5") == 0
    meta = json.loads((tmp_path / "dataset_p0.90_seed4.json").read_text())
    cfg = synthgen.GeneratorConfig(**meta["generator"])
    assert cfg.class_counts == (100, 900)
    disc = synthgen.read_csv(tmp_path / "dataset_p0.90_seed4_discrete.csv")
    assert disc.feature_kind == "discrete" and disc.features.dtype == np.int64


def test_generate_is_idempotent(tmp_path):
    args = ("generate", "--set", "generator.n_observations=300", "--set", "generator.n_features=4")
    _run(*args, "--out", tmp_path / "a")
    _run(*args, "--out", tmp_path / "b")
    for name in ("dataset_p0.50_seed0.csv", "dataset_p0.50_seed0.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_invalid_config_value_is_a_config_error(tmp_path, capsys):
    assert _run("generate", "--out", tmp_path, "--set", "generator.p_true=1.2") == 1
    assert "p_true" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert _run("run", "--config", tmp_path / "nope.toml", "--out", tmp_path) == 1


def test_run_quick_profile(quick_run):
    recs = harness.read_results_csv(quick_run / "results.csv")
    assert len(recs) == 36
    summary = json.loads((quick_run / "summary.json").read_text())
    assert summary["n_records"] == 36 and summary["n_failed"] == 0
    assert len(harness.read_aggregate_csv(quick_run / "aggregate.csv")) == 12


def test_run_is_idempotent(quick_run, tmp_path):
    assert _run("run", "--profile", "quick", "--out", tmp_path, "--quiet", "--jobs", "2") == 0
    for name in ("results.csv", "aggregate.csv"):
        assert (tmp_path / name).read_bytes() == (quick_run / name).read_bytes()


def test_run_failures_exit_2_unless_keep_going(tmp_path, monkeypatch):
    from dcann import logit

    def boom(*a, **k):
        raise logit.LogitFitError("forced")

    monkeypatch.setattr(logit, "fit", boom)
    small = ("--set", "sweep.v_grid=[1]", "--set", "sweep.repetitions=1", "--set", "sweep.p_true_grid=[0.5]",
             "--set", "generator.n_observations=200", "--set", "generator.n_features=3", "--quiet")
    assert _run("run", *small, "--out", tmp_path / "a") == 2
    assert _run("run", *small, "--out", tmp_path / "b", "--keep-going") == 0
    assert json.loads((tmp_path / "b" / "summary.json").read_text())["n_failed"] == 2


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env-out"))
    assert _run("generate", "--set", "generator.n_observations=100", "--set", "generator.n_features=2") == 0
    assert (tmp_path / "env-out" / "dataset_p0.50_seed0.csv").exists()


def test_plot_from_quick_run(quick_run, tmp_path, capsys):
    assert _run("plot", quick_run / "aggregate.csv", "--out", tmp_path / "a") == 0
    files = sorted((tmp_path / "a" / "plots").iterdir())
    # per feature kind: four score charts and one probability chart
    assert len(files) == 10
    _run("plot", quick_run / "aggregate.csv", "--out", tmp_path / "b")
    assert [f.read_bytes() for f in files] == [f.read_bytes() for f in sorted((tmp_path / "b" / "plots").iterdir())]


def test_plot_rejects_empty_and_malformed(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(harness.aggregate_columns()) + "\n")
    assert _run("plot", empty, "--out", tmp_path) == 2
    junk = tmp_path / "junk.csv"
    junk.write_text("hello\n1\n")
    assert _run("plot", junk, "--out", tmp_path) == 2
    assert _run("plot", tmp_path / "missing.csv", "--out", tmp_path) == 1


def test_report_on_quick_run(quick_run, capsys):
    code = _run("report", quick_run / "results.csv", "--skip-selfcheck")
    out = capsys.readouterr().out
    assert "[NOT EVALUABLE] check 4" in out
    assert "[NOT EVALUABLE] check 5" in out
    assert "[NOT EVALUABLE] check 6" in out
    hard_fail = any(ln.startswith("[FAIL]") and "(hard)" in ln for ln in out.splitlines())
    assert code == (2 if hard_fail else 0)


def test_report_rejects_corrupted_csv(quick_run, tmp_path, capsys):
    text = (quick_run / "results.csv").read_text().splitlines()
    text[3] = text[3].replace("continuous", "cont", 1).replace(",", ";", 3)
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(text) + "\n")
    assert _run("report", bad, "--skip-selfcheck") == 2
    assert "bad.csv" in capsys.readouterr().err


def test_report_exit_code_follows_hard_checks(quick_run, tmp_path, capsys):
    recs = harness.read_results_csv(quick_run / "results.csv")
    # make the network lose to the logit everywhere in the middle range
    from dataclasses import replace

    worse = [replace(r, accuracy=0.0) if (r.method == "mlp" and r.n_vars == 10) else r for r in recs]
    path = harness.write_results_csv(worse, tmp_path / "worse.csv")
    assert _run("report", path, "--skip-selfcheck") == 2
    assert "[FAIL] check 3" in capsys.readouterr().out
