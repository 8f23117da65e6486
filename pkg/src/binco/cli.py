"""Command-line interface.

Subcommands: standardize, frequencies, binco, stability, simulate, report.
Input tables are CSV/TSV with a header row of variable names and one sample
per row. Exit codes: 0 success (including NO_SIGNAL), 2 configuration
error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from .data import DataMatrix, standardize
from .driver import (
    FIXED,
    TWO_STEP,
    RunConfig,
    StudyConfig,
    emit_report,
    run_binco,
    run_simulation_study,
)
from .exceptions import BincoError, ConfigError
from .freqmodel import (
    NO_SIGNAL,
    empirical_density,
    estimate_fdr,
    fit_null,
    optimal_cutoff,
)
from .resample import (
    BOOTSTRAP,
    SUBSAMPLE_HALF,
    FrequencyTable,
    ResamplePlan,
    frequency_grid,
)
from .simgen import EMPIRICAL, EMPTY, HUB, POWER_LAW, read_degree_histogram
from .stability import stability_select
from .ushape import detect_ushape

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

WORKERS_ENV = "BINCO_WORKERS"

log = logging.getLogger("binco")


def _fail(code: int, msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _load_table(path) -> tuple[np.ndarray, list]:
    """Raw matrix + column names from a delimited text file."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        _fail(EXIT_IO, f"cannot read {path}: {e}")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        _fail(EXIT_IO, f"{path}: need a header row and at least one sample")
    delim = "\t" if "\t" in lines[0] else ("," if "," in lines[0] else None)
    names = lines[0].split(delim)
    names = [s.strip() for s in names]
    rows = []
    for ln in lines[1:]:
        fields = ln.split(delim)
        if len(fields) != len(names):
            _fail(EXIT_IO, f"{path}: row with {len(fields)} fields, expected {len(names)}")
        try:
            rows.append([float(v) for v in fields])
        except ValueError as e:
            _fail(EXIT_IO, f"{path}: {e}")
    return np.array(rows), names


def _standardized(path) -> DataMatrix:
    raw, names = _load_table(path)
    try:
        return standardize(raw, names)
    except BincoError as e:
        _fail(EXIT_NUMERICAL, str(e))


def _parse_config_file(path) -> dict:
    """Plain key=value lines; # starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        _fail(EXIT_IO, f"cannot read config {path}: {e}")
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            _fail(EXIT_CONFIG, f"config line without '=': {ln!r}")
        k, v = (s.strip() for s in ln.split("=", 1))
        out[k] = v
    return out


def _parse_grid(text) -> tuple:
    try:
        return tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError:
        _fail(EXIT_CONFIG, f"bad lambda grid {text!r}")


def _default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            _fail(EXIT_CONFIG, f"{WORKERS_ENV}={env!r} is not an integer")
    return 1


def _build_run_config(config_file, **overrides) -> RunConfig:
    raw = _parse_config_file(config_file) if config_file else {}
    coerce = {
        "lambda_grid": _parse_grid, "alpha": float, "B": int, "seed": int,
        "l": float, "workers": int, "scheme": str, "procedure": str,
        "l_strategy": str, "combine": str, "out_dir": str, "input_path": str,
    }
    kwargs = {}
    for k, v in raw.items():
        if k not in coerce:
            _fail(EXIT_CONFIG, f"unknown config key {k!r}")
        try:
            kwargs[k] = coerce[k](v)
        except ValueError:
            _fail(EXIT_CONFIG, f"bad value for {k}: {v!r}")
    for k, v in overrides.items():
        if v is not None:
            kwargs[k] = v
    kwargs.setdefault("workers", _default_workers())
    try:
        return RunConfig(**kwargs)
    except ConfigError as e:
        _fail(EXIT_CONFIG, str(e))


def _write_resolved(config: RunConfig, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "resolved_config.json").write_text(
        json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n"
    )


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="log per-level progress")
def main(verbose):
    """Bootstrap-aggregated network inference with direct FDR control."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )


@main.command("standardize")
@click.argument("input_path", type=click.Path())
@click.argument("output_path", type=click.Path())
def standardize_cmd(input_path, output_path):
    """Column-standardize a data table (mean 0, SD 1)."""
    data = _standardized(input_path)
    header = "\t".join(data.column_names)
    try:
        np.savetxt(output_path, data.values, delimiter="\t",
                   header=header, comments="", fmt="%.10g")
    except OSError as e:
        _fail(EXIT_IO, str(e))


def _scheme_option(f):
    return click.option("--scheme", type=click.Choice([BOOTSTRAP, SUBSAMPLE_HALF]),
                        default=None)(f)


@main.command("frequencies")
@click.argument("input_path", type=click.Path())
@click.option("--lambda", "lambda_grid", required=True,
              help="regularization level(s), comma-separated")
@click.option("--l", "l", type=float, default=None,
              help="randomized-weight floor in (0, 1]")
@click.option("--alpha", type=float, default=None)
@click.option("--B", "B", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--procedure", type=click.Choice(["SPACE", "NEIGHBORHOOD"]),
              default=None)
@_scheme_option
@click.option("--config", "config_file", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def frequencies_cmd(input_path, lambda_grid, out_dir, config_file, **overrides):
    """Tabulate per-edge selection frequencies over resamples."""
    overrides["lambda_grid"] = _parse_grid(lambda_grid)
    config = _build_run_config(config_file, **overrides)
    data = _standardized(input_path)
    _write_resolved(config, out_dir)
    plan = ResamplePlan(config.scheme, config.B, config.seed, data.n)
    try:
        tables = frequency_grid(
            data, config.lambda_grid, config.l, plan,
            procedure=config.procedure, workers=config.workers,
        )
    except BincoError as e:
        _fail(EXIT_NUMERICAL, str(e))
    for k, tab in enumerate(tables):
        tab.write(Path(out_dir) / f"frequencies_{k}.tsv")
    click.echo(f"wrote {len(tables)} table(s) to {out_dir}")


@main.command("binco")
@click.argument("input_path", type=click.Path())
@click.option("--lambda", "lambda_grid", default=None,
              help="grid, comma-separated; defaults to fractions of lambda_max")
@click.option("--alpha", type=float, default=None)
@click.option("--l", "l", type=float, default=None)
@click.option("--l-strategy", type=click.Choice([FIXED, TWO_STEP]), default=None)
@click.option("--B", "B", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--procedure", type=click.Choice(["SPACE", "NEIGHBORHOOD"]),
              default=None)
@_scheme_option
@click.option("--config", "config_file", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def binco_cmd(input_path, out_dir, config_file, lambda_grid, l_strategy,
              **overrides):
    """Run the full procedure and write the network report."""
    if lambda_grid is not None:
        overrides["lambda_grid"] = _parse_grid(lambda_grid)
    if l_strategy is not None:
        overrides["l_strategy"] = l_strategy
    config = _build_run_config(config_file, **overrides)
    data = _standardized(input_path)
    _write_resolved(config, out_dir)
    try:
        result, _ = run_binco(data, config)
        emit_report(result, config, data, out_dir)
    except BincoError as e:
        _fail(EXIT_NUMERICAL, str(e))
    except OSError as e:
        _fail(EXIT_IO, str(e))
    if result is NO_SIGNAL:
        click.echo(NO_SIGNAL)
    else:
        click.echo(
            f"selected {len(result.edges)} edges at c*={result.c_star:.3g}, "
            f"lambda*={result.lambda_star:.6g}, estimated FDR "
            f"{result.fdr_hat:.3g}"
        )


@main.command("stability")
@click.argument("input_path", type=click.Path())
@click.option("--lambda", "lambda_grid", required=True)
@click.option("--alpha", type=float, default=None)
@click.option("--l", "l", type=float, default=None)
@click.option("--B", "B", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@_scheme_option
@click.option("--config", "config_file", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def stability_cmd(input_path, lambda_grid, out_dir, config_file, **overrides):
    """Stability-selection baseline over the same frequency machinery."""
    overrides["lambda_grid"] = _parse_grid(lambda_grid)
    config = _build_run_config(config_file, **overrides)
    data = _standardized(input_path)
    _write_resolved(config, out_dir)
    plan = ResamplePlan(config.scheme, config.B, config.seed, data.n)
    union_sizes: list = []
    try:
        tables = frequency_grid(
            data, config.lambda_grid, config.l, plan,
            procedure=config.procedure, workers=config.workers,
            union_sizes=union_sizes,
        )
        res = stability_select(tables, config.alpha, union_sizes=union_sizes)
    except BincoError as e:
        _fail(EXIT_NUMERICAL, str(e))
    out = Path(out_dir)
    names = data.column_names
    lines = ["i\tj\tname_i\tname_j"]
    summary = {"method": "stability", "alpha": config.alpha, "B": config.B,
               "p": data.p, "n": data.n}
    if res is None:
        summary["attainable"] = False
        click.echo("no threshold attains the requested bound")
    else:
        summary.update(attainable=True, t_star=res.t_star, q_hat=res.q_hat,
                       bound_at_t=res.bound_at_t, n_edges=len(res.edges))
        for (i, j) in sorted(res.edges):
            lines.append(f"{i + 1}\t{j + 1}\t{names[i]}\t{names[j]}")
        click.echo(f"selected {len(res.edges)} edges at t*={res.t_star:.3g}")
    (out / "edges.tsv").write_text("\n".join(lines) + "\n")
    (out / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n"
    )


@main.command("simulate")
@click.option("--topology", type=click.Choice([POWER_LAW, HUB, EMPIRICAL, EMPTY]),
              required=True)
@click.option("--signal", type=click.Choice(["STRONG", "WEAK", "VERY_WEAK"]),
              default="STRONG")
@click.option("--p", type=int, default=100)
@click.option("--n", type=int, default=200)
@click.option("--components", type=int, default=1)
@click.option("--replicates", type=int, default=10)
@click.option("--alpha", type=float, default=0.05)
@click.option("--seed", type=int, default=0)
@click.option("--degree-histogram", type=click.Path(), default=None,
              help="two-column degree histogram (EMPIRICAL topology)")
@click.option("--with-stability", is_flag=True)
@click.option("--lambda", "lambda_grid", default=None)
@click.option("--l", "l", type=float, default=None)
@click.option("--B", "B", type=int, default=None)
@click.option("--workers", type=int, default=None)
@_scheme_option
@click.option("--config", "config_file", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def simulate_cmd(topology, signal, p, n, components, replicates, alpha, seed,
                 degree_histogram, with_stability, lambda_grid, out_dir,
                 config_file, **overrides):
    """Simulation study: generate, infer, and score over replicates."""
    if lambda_grid is not None:
        overrides["lambda_grid"] = _parse_grid(lambda_grid)
    run_cfg = _build_run_config(config_file, alpha=alpha, seed=seed, **overrides)
    params = {}
    if topology == EMPIRICAL:
        if degree_histogram is None:
            _fail(EXIT_CONFIG, "EMPIRICAL topology requires --degree-histogram")
        try:
            params["degree_histogram"] = read_degree_histogram(degree_histogram)
        except (OSError, ValueError) as e:
            _fail(EXIT_IO, f"bad degree histogram: {e}")
    study = StudyConfig(
        topology=topology, signal=signal, p=p, n=n, n_components=components,
        replicates=replicates, seed=seed, alpha=alpha, run=run_cfg,
        topology_params=params, with_stability=with_stability,
    )
    try:
        result = run_simulation_study(study)
    except BincoError as e:
        _fail(EXIT_NUMERICAL, str(e))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_resolved(run_cfg, out_dir)
    cols = ["replicate", "seed", "no_signal", "fdr", "power", "mpe",
            "ideal_power", "n_edges", "c_star", "lambda_star",
            "stability_fdr", "stability_power", "error"]
    lines = ["\t".join(cols)]
    for row in result.rows:
        lines.append("\t".join(
            "NA" if row.get(c) is None else str(row.get(c)) for c in cols
        ))
    (out / "replicates.tsv").write_text("\n".join(lines) + "\n")
    agg = result.aggregate()
    (out / "aggregate.json").write_text(
        json.dumps(agg, sort_keys=True, indent=2) + "\n"
    )
    click.echo(json.dumps(agg, sort_keys=True))


@main.command("report")
@click.argument("frequencies_tsv", type=click.Path())
@click.option("--alpha", type=float, default=0.05)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def report_cmd(frequencies_tsv, alpha, out_dir):
    """Density/null-fit report from a stored frequency table."""
    if not 0 < alpha < 1:
        _fail(EXIT_CONFIG, f"alpha must be in (0, 1), got {alpha}")
    try:
        tab = FrequencyTable.read(frequencies_tsv)
    except (OSError, ValueError, KeyError) as e:
        _fail(EXIT_IO, f"cannot read table: {e}")
    dens = empirical_density(tab, tab.p)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"method": "report", "alpha": alpha, "B": tab.B, "p": tab.p}
    try:
        rep = detect_ushape(dens)
        summary["ushape"] = rep.to_dict()
        if rep.u_flag:
            fit = fit_null(dens, (rep.v1, rep.v2))
            c = optimal_cutoff(dens, fit, alpha)
            summary.update(json.loads(fit.to_json()))
            summary["c_star"] = c
            if c is not None:
                summary["fdr_hat"] = estimate_fdr(dens, fit, c)
    except BincoError as e:
        _fail(EXIT_NUMERICAL, str(e))
    (out / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n"
    )
    lines = ["x\tf_hat\tnull_fit"]
    scaled = None
    if summary.get("c_star") is not None or "a" in summary:
        scaled = (1.0 - summary["pi_hat"]) * fit.null_mass
    for k in range(tab.B + 1):
        nf = f"{scaled[k]:.10g}" if scaled is not None else "NA"
        lines.append(f"{k / tab.B:.10g}\t{dens.mass[k]:.10g}\t{nf}")
    (out / "density.tsv").write_text("\n".join(lines) + "\n")
    click.echo(json.dumps({k: summary[k] for k in ("c_star",)
                           if k in summary}, sort_keys=True))


if __name__ == "__main__":
    main()
