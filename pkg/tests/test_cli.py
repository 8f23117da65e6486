import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from binco.cli import main
from binco.simgen import EMPTY, POWER_LAW, gen_precision, gen_topology, sample_mvn
from binco.space import lambda_max


def write_table(path, data):
    header = "\t".join(data.column_names)
    body = "\n".join("\t".join(f"{v:.10g}" for v in row) for row in data.values)
    path.write_text(header + "\n" + body + "\n")


@pytest.fixture(scope="module")
def strong_table(tmp_path_factory):
    adj = gen_topology(POWER_LAW, 30, 1, seed=0)
    model = gen_precision(adj, "STRONG", seed=0)
    data = sample_mvn(model, 150, seed=0)
    path = tmp_path_factory.mktemp("data") / "strong.tsv"
    write_table(path, data)
    return path, data


def grid_arg(data):
    lm = lambda_max(data)
    return ",".join(f"{f * lm:.8g}" for f in (0.3, 0.4, 0.5))


def run(*args, env=None):
    return CliRunner().invoke(main, list(args), env=env, catch_exceptions=False)


def test_standardize_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    raw = tmp_path / "raw.csv"
    raw.write_text(
        "a,b,c\n"
        + "\n".join(",".join(f"{v:.6g}" for v in row) for row in rng.normal(5, 3, (40, 3)))
        + "\n"
    )
    out = tmp_path / "std.tsv"
    res = run("standardize", str(raw), str(out))
    assert res.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "a\tb\tc"
    vals = np.loadtxt(lines[1:], delimiter="\t")
    np.testing.assert_allclose(vals.mean(axis=0), 0, atol=1e-9)
    np.testing.assert_allclose(vals.std(axis=0, ddof=1), 1, atol=1e-9)


def test_standardize_missing_file(tmp_path):
    res = run("standardize", str(tmp_path / "nope.tsv"), str(tmp_path / "o.tsv"))
    assert res.exit_code == 3


def test_standardize_constant_column(tmp_path):
    raw = tmp_path / "raw.tsv"
    raw.write_text("a\tb\n1\t7\n2\t7\n3\t7\n")
    res = run("standardize", str(raw), str(tmp_path / "o.tsv"))
    assert res.exit_code == 4


def test_binco_run_and_report(tmp_path, strong_table):
    path, data = strong_table
    out = tmp_path / "run"
    res = run("binco", str(path), "--lambda", grid_arg(data),
              "--alpha", "0.1", "--B", "25", "--seed", "0",
              "--workers", "4", "--out", str(out))
    assert res.exit_code == 0, res.output
    assert "selected" in res.output
    summary = json.loads((out / "summary.json").read_text())
    assert summary["no_signal"] is False
    assert summary["fdr_hat"] <= 0.1
    edges = (out / "edges.tsv").read_text().splitlines()
    n_pass = sum(1 for ln in edges[1:] if ln.endswith("\t1"))
    assert n_pass == summary["n_edges"] > 0
    assert (out / "plot.svg").exists()
    cfg = json.loads((out / "resolved_config.json").read_text())
    assert cfg["alpha"] == 0.1 and cfg["B"] == 25


def test_binco_no_signal_exit_zero(tmp_path):
    model = gen_precision(set(), "STRONG", seed=2, p=30, topology=EMPTY)
    data = sample_mvn(model, 150, seed=2)
    path = tmp_path / "noise.tsv"
    write_table(path, data)
    out = tmp_path / "run"
    res = run("binco", str(path), "--lambda", grid_arg(data),
              "--B", "25", "--seed", "2", "--workers", "4", "--out", str(out))
    assert res.exit_code == 0, res.output
    assert "NO_SIGNAL" in res.output
    summary = json.loads((out / "summary.json").read_text())
    assert summary["no_signal"] is True


def test_config_file_and_overrides(tmp_path, strong_table):
    path, data = strong_table
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# analysis settings\n"
        f"lambda_grid = {grid_arg(data).replace(',', ' ')}\n"
        "alpha = 0.2\nB = 25\nseed = 0\nworkers = 4\n"
    )
    out = tmp_path / "run"
    res = run("binco", str(path), "--config", str(cfg),
              "--alpha", "0.1", "--out", str(out))
    assert res.exit_code == 0, res.output
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["alpha"] == 0.1  # CLI wins over file
    assert resolved["B"] == 25


def test_bad_config_key_exits_2(tmp_path, strong_table):
    path, _ = strong_table
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n")
    res = run("binco", str(path), "--config", str(cfg),
              "--out", str(tmp_path / "o"))
    assert res.exit_code == 2
    assert "frobnicate" in res.output


def test_bad_alpha_exits_2(tmp_path, strong_table):
    path, data = strong_table
    res = run("binco", str(path), "--lambda", grid_arg(data),
              "--alpha", "1.5", "--out", str(tmp_path / "o"))
    assert res.exit_code == 2


def test_workers_env(tmp_path, strong_table):
    path, data = strong_table
    out = tmp_path / "run"
    res = run("binco", str(path), "--lambda", grid_arg(data),
              "--B", "25", "--out", str(out),
              env={"BINCO_WORKERS": "4"})
    assert res.exit_code == 0, res.output
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["workers"] == 4


def test_frequencies_then_report(tmp_path, strong_table):
    path, data = strong_table
    lm = lambda_max(data)
    fdir = tmp_path / "freq"
    res = run("frequencies", str(path), "--lambda", f"{0.4 * lm:.8g}",
              "--B", "25", "--seed", "0", "--workers", "4",
              "--out", str(fdir))
    assert res.exit_code == 0, res.output
    tab = fdir / "frequencies_0.tsv"
    assert tab.exists()
    rdir = tmp_path / "rep"
    res = run("report", str(tab), "--alpha", "0.1", "--out", str(rdir))
    assert res.exit_code == 0, res.output
    summary = json.loads((rdir / "summary.json").read_text())
    assert "ushape" in summary
    dens = (rdir / "density.tsv").read_text().splitlines()
    assert dens[0] == "x\tf_hat\tnull_fit"
    assert len(dens) == 25 + 2


def test_stability_command(tmp_path, strong_table):
    path, data = strong_table
    out = tmp_path / "stab"
    res = run("stability", str(path), "--lambda", grid_arg(data),
              "--alpha", "0.3", "--B", "25", "--seed", "0",
              "--workers", "4", "--out", str(out))
    assert res.exit_code == 0, res.output
    summary = json.loads((out / "summary.json").read_text())
    assert summary["method"] == "stability"
    if summary["attainable"]:
        assert summary["t_star"] > 0.5
        edges = (out / "edges.tsv").read_text().splitlines()
        assert len(edges) - 1 == summary["n_edges"]


def test_simulate_command(tmp_path):
    out = tmp_path / "sim"
    res = run("simulate", "--topology", POWER_LAW, "--signal", "STRONG",
              "--p", "30", "--n", "150", "--replicates", "2",
              "--alpha", "0.1", "--seed", "0", "--B", "25",
              "--lambda", "", "--workers", "4", "--out", str(out))
    # empty --lambda means the default grid of lambda_max fractions
    assert res.exit_code == 0, res.output
    rows = (out / "replicates.tsv").read_text().splitlines()
    assert len(rows) == 3
    agg = json.loads((out / "aggregate.json").read_text())
    assert agg["replicates"] == 2 and agg["failed"] == 0


def test_simulate_empirical_needs_histogram(tmp_path):
    res = run("simulate", "--topology", "EMPIRICAL", "--p", "30",
              "--replicates", "1", "--out", str(tmp_path / "o"))
    assert res.exit_code == 2
