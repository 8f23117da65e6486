"""End-to-end network inference: regularization scan, U-shape gating,
null fitting, cutoff selection, and report emission.

For each regularization level the driver tabulates selection frequencies,
screens the empirical density for a U-shape, fits the powered-beta-binomial
null on the peak-to-valley range, and finds the smallest frequency cutoff
meeting the target FDR. The level maximizing the estimated true-edge count
wins; if no level qualifies the run returns NO_SIGNAL.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .data import DataMatrix
from .exceptions import BincoError, ConfigError
from .freqmodel import (
    NO_SIGNAL,
    LambdaCandidate,
    NetworkEstimate,
    empirical_density,
    estimate_fdr,
    estimate_true_edges,
    fit_null,
    optimal_cutoff,
    select_lambda,
)
from .resample import BOOTSTRAP, SUBSAMPLE_HALF, ResamplePlan, frequency_grid
from .simgen import (
    EMPTY,
    GroundTruthModel,
    evaluate,
    gen_precision,
    gen_topology,
    ideal_power,
    sample_mvn,
)
from .space import lambda_max
from .stability import stability_select
from .ushape import detect_ushape

log = logging.getLogger("binco")

FIXED = "fixed"
TWO_STEP = "two-step"

# default grid fractions of lambda_max when the user supplies no grid
DEFAULT_GRID_FRACTIONS = (0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.7, 1.0)
TWO_STEP_L_GRID = tuple(i / 10 for i in range(1, 10))


@dataclass
class RunConfig:
    """Everything a full run needs besides the data itself."""

    lambda_grid: tuple = ()
    alpha: float = 0.05
    scheme: str = BOOTSTRAP
    B: int = 100
    seed: int = 0
    procedure: str = "SPACE"
    combine: str = "OR"
    l: float = 0.5
    l_strategy: str = FIXED
    workers: int = 1
    out_dir: str | None = None
    input_path: str | None = None

    def __post_init__(self):
        if self.lambda_grid:
            grid = tuple(float(x) for x in self.lambda_grid)
            if any(x <= 0 for x in grid) or any(
                b <= a for a, b in zip(grid, grid[1:])
            ):
                raise ConfigError("lambda grid must be positive and strictly increasing")
            self.lambda_grid = grid
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.B < 10:
            raise ConfigError(f"B must be >= 10, got {self.B}")
        if self.scheme not in (BOOTSTRAP, SUBSAMPLE_HALF):
            raise ConfigError(f"unknown resampling scheme {self.scheme!r}")
        if self.procedure not in ("SPACE", "NEIGHBORHOOD"):
            raise ConfigError(f"unknown procedure {self.procedure!r}")
        if not 0 < self.l <= 1:
            raise ConfigError(f"l must be in (0, 1], got {self.l}")
        if self.l_strategy not in (FIXED, TWO_STEP):
            raise ConfigError(f"unknown l strategy {self.l_strategy!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def resolved_grid(self, data: DataMatrix) -> tuple:
        if self.lambda_grid:
            return self.lambda_grid
        lm = lambda_max(data, self.procedure)
        return tuple(f * lm for f in DEFAULT_GRID_FRACTIONS)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda_grid"] = list(self.lambda_grid)
        return d


def _evaluate_candidate(tab, p: int, alpha: float, l: float) -> LambdaCandidate:
    """Full per-level diagnostic: U-shape screen, null fit, cutoff search.

    Failures never propagate; they demote the level to non-qualifying with
    the reason logged.
    """
    lam = tab.config.get("lambda")
    cand = LambdaCandidate(lam=lam, l=l, c_star=None, n_true_hat=0.0, u_flag=False,
                           table=tab)
    dens = empirical_density(tab, p)
    try:
        report = detect_ushape(dens)
    except BincoError as e:
        log.info("lambda=%.6g: U-shape screen failed (%s)", lam, e)
        return cand
    cand.report = report
    cand.u_flag = report.u_flag
    if not report.u_flag:
        log.info("lambda=%.6g: density not U-shaped (v2=%.2f)", lam, report.v2)
        return cand
    try:
        fit = fit_null(dens, (report.v1, report.v2))
    except BincoError as e:
        log.info("lambda=%.6g: null fit failed (%s)", lam, e)
        cand.u_flag = False
        return cand
    cand.fit = fit
    c_star = optimal_cutoff(dens, fit, alpha)
    if c_star is None:
        log.info("lambda=%.6g: no cutoff attains FDR <= %.3g", lam, alpha)
        return cand
    cand.c_star = c_star
    cand.fdr_hat = estimate_fdr(dens, fit, c_star)
    n_selected = sum(1 for k in tab.counts.values() if k / tab.B >= c_star - 1e-12)
    cand.n_true_hat = estimate_true_edges(n_selected, cand.fdr_hat)
    return cand


def _scan(data: DataMatrix, grid, l: float, config: RunConfig,
          union_sizes=None) -> list:
    plan = ResamplePlan(config.scheme, config.B, config.seed, data.n)
    tables = frequency_grid(
        data, grid, l, plan,
        procedure=config.procedure, combine=config.combine,
        workers=config.workers, union_sizes=union_sizes,
    )
    return [_evaluate_candidate(t, data.p, config.alpha, l) for t in tables]


def two_step_l(data: DataMatrix, config: RunConfig):
    """Perturbation-strength selection keeping average regularization fixed.

    Step 1 scans the grid without weight randomization and keeps the
    U-shaped levels. Step 2 re-runs each of those at every l in the
    0.1..0.9 grid with the level rescaled so the mean effective penalty is
    unchanged (1/w uniform on [1, 1/l] has mean (1 + 1/l)/2), and returns
    the qualifying (lambda, l) with the smallest l, ties toward the larger
    lambda. Falls back to the best unperturbed level when nothing qualifies.
    """
    grid = config.resolved_grid(data)
    step1 = _scan(data, grid, 1.0, config)
    ushaped = [c for c in step1 if c.u_flag]
    if not ushaped:
        return None
    best = None  # (l, -lam) minimized
    for l in TWO_STEP_L_GRID:
        for cand in ushaped:
            lam_l = 2.0 * cand.lam / (1.0 + 1.0 / l)
            probe = _scan(data, [lam_l], l, config)[0]
            if probe.u_flag and probe.c_star is not None:
                if best is None or (l, -lam_l) < (best[0], -best[1]):
                    best = (l, lam_l)
        if best is not None:
            break  # smaller l cannot appear in later iterations
    if best is None:
        fallback = select_lambda(step1)
        if fallback is NO_SIGNAL:
            return None
        return fallback.lam, 1.0
    return best[1], best[0]


def run_binco(data: DataMatrix, config: RunConfig):
    """Full procedure; returns (NetworkEstimate | NO_SIGNAL, diagnostics).

    Diagnostics are the per-level LambdaCandidate records, emitted for every
    grid point regardless of the outcome.
    """
    if config.l_strategy == TWO_STEP:
        pair = two_step_l(data, config)
        if pair is None:
            log.info("two-step selection found no U-shaped configuration")
            return NO_SIGNAL, []
        lam, l = pair
        candidates = _scan(data, [lam], l, config)
    else:
        candidates = _scan(data, config.resolved_grid(data), config.l, config)
    winner = select_lambda(candidates)
    if winner is NO_SIGNAL:
        return NO_SIGNAL, candidates
    assert winner.u_flag and winner.fdr_hat <= config.alpha + 1e-12
    tab = winner.table
    edges = {
        e for e, k in tab.counts.items() if k / tab.B >= winner.c_star - 1e-12
    }
    estimate = NetworkEstimate(
        edges=edges,
        c_star=winner.c_star,
        lambda_star=winner.lam,
        l_star=winner.l,
        fdr_hat=winner.fdr_hat,
        n_true_hat=winner.n_true_hat,
        fit=winner.fit,
        diagnostics=candidates,
    )
    return estimate, candidates


@dataclass
class StudyConfig:
    """Simulation-study orchestration parameters."""

    topology: str
    signal: str = "STRONG"
    p: int = 100
    n: int = 200
    n_components: int = 1
    replicates: int = 10
    seed: int = 0
    alpha: float = 0.05
    run: RunConfig = field(default_factory=RunConfig)
    topology_params: dict = field(default_factory=dict)
    with_stability: bool = False


@dataclass
class StudyResult:
    rows: list
    n_failed: int

    def aggregate(self) -> dict:
        """Mean/SD of realized FDR and power plus mean power efficiency."""
        ok = [r for r in self.rows if r.get("error") is None]
        out = {"replicates": len(self.rows), "failed": self.n_failed,
               "no_signal": sum(1 for r in ok if r["no_signal"])}
        for key in ("fdr", "power", "mpe"):
            vals = [r[key] for r in ok if r.get(key) is not None]
            out[f"{key}_mean"] = float(np.mean(vals)) if vals else None
            out[f"{key}_sd"] = (
                float(np.std(vals, ddof=1)) if len(vals) > 1 else None
            )
        return out


def run_simulation_study(study: StudyConfig) -> StudyResult:
    """Replicated generate/infer/score loop; deterministic given the seed."""
    rows = []
    n_failed = 0
    for r in range(study.replicates):
        rep_seed = study.seed + r
        row = {"replicate": r, "seed": rep_seed, "error": None}
        try:
            adjacency = gen_topology(
                study.topology, study.p, study.n_components,
                study.topology_params, seed=rep_seed,
            )
            model = gen_precision(
                adjacency, study.signal, seed=rep_seed, p=study.p,
                topology=study.topology,
            )
            data = sample_mvn(model, study.n, seed=rep_seed)
            cfg_d = study.run.to_dict()
            cfg_d.update(seed=rep_seed, alpha=study.alpha)
            config = RunConfig(**cfg_d)
            if study.with_stability or not config.lambda_grid:
                grid = config.resolved_grid(data)
                cfg_d["lambda_grid"] = grid
                config = RunConfig(**cfg_d)
            result, diagnostics = run_binco(data, config)
            if result is NO_SIGNAL:
                row.update(no_signal=True, fdr=None, power=None, mpe=None)
            else:
                ev = evaluate(result.edges, model)
                tables = [c.table for c in diagnostics if c.table is not None]
                ip = ideal_power(tables, model, study.alpha)
                row.update(
                    no_signal=False, fdr=ev.fdr, power=ev.power,
                    mpe=(ev.power / ip) if ip > 0 else None,
                    c_star=result.c_star, lambda_star=result.lambda_star,
                    n_edges=len(result.edges), ideal_power=ip,
                )
            if study.with_stability:
                plan = ResamplePlan(config.scheme, config.B, rep_seed, data.n)
                us: list = []
                tabs = frequency_grid(
                    data, config.lambda_grid, config.l, plan,
                    procedure=config.procedure, workers=config.workers,
                    union_sizes=us,
                )
                sr = stability_select(tabs, study.alpha, union_sizes=us)
                if sr is None:
                    row.update(stability_fdr=None, stability_power=None)
                else:
                    sev = evaluate(sr.edges, model)
                    row.update(stability_fdr=sev.fdr, stability_power=sev.power)
        except BincoError as e:
            log.warning("replicate %d failed: %s", r, e)
            row["error"] = str(e)
            n_failed += 1
        rows.append(row)
    return StudyResult(rows=rows, n_failed=n_failed)


def _svg_backend():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "binco"
    import matplotlib.pyplot as plt

    return plt


def emit_report(result, config: RunConfig, data: DataMatrix, out_dir) -> dict:
    """Write edges.tsv, summary.json, density.tsv, and plot.svg.

    Output is byte-identical across reruns on the same inputs (the SVG is
    written without timestamps).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: out / f"{k}.{ext}" for k, ext in
             [("edges", "tsv"), ("summary", "json"),
              ("density", "tsv"), ("plot", "svg")]}
    no_signal = result is NO_SIGNAL

    names = data.column_names
    lines = ["i\tj\tname_i\tname_j\tfreq\tpasses_cstar"]
    summary = {
        "method": "binco",
        "no_signal": bool(no_signal),
        "alpha": config.alpha,
        "B": config.B,
        "scheme": config.scheme,
        "procedure": config.procedure,
        "p": data.p,
        "n": data.n,
    }
    if not no_signal:
        tab = result.diagnostics and next(
            (c.table for c in result.diagnostics if c.lam == result.lambda_star),
            None,
        )
        for (i, j) in sorted(tab.counts):
            f = tab.counts[(i, j)] / tab.B
            passes = f >= result.c_star - 1e-12
            lines.append(
                f"{i + 1}\t{j + 1}\t{names[i]}\t{names[j]}\t{f:.10g}\t"
                f"{int(passes)}"
            )
        fit = result.fit
        summary.update(
            lambda_star=result.lambda_star,
            l_star=result.l_star,
            c_star=result.c_star,
            fdr_hat=result.fdr_hat,
            n_true_hat=result.n_true_hat,
            n_edges=len(result.edges),
            pi_hat=fit.pi_hat,
            theta={"a": fit.params.a, "b": fit.params.b,
                   "gamma": fit.params.gamma},
            fit_range=list(fit.fit_range),
        )
    paths["edges"].write_text("\n".join(lines) + "\n")
    paths["summary"].write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")

    dens_lines = ["x\tf_hat\tnull_fit"]
    if not no_signal:
        dens = empirical_density(tab, data.p)
        scaled = (1.0 - fit.pi_hat) * fit.null_mass
        for k in range(tab.B + 1):
            dens_lines.append(
                f"{k / tab.B:.10g}\t{dens.mass[k]:.10g}\t{scaled[k]:.10g}"
            )
    paths["density"].write_text("\n".join(dens_lines) + "\n")

    plt = _svg_backend()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if not no_signal:
        x = dens.lattice
        width = 0.8 / tab.B
        ax.bar(x, dens.mass, width=width, color="#b5c7dd",
               label="empirical density")
        ax.plot(x, scaled, color="#c0392b", lw=1.5,
                label="fitted null (scaled)")
        ax.axvline(result.c_star, color="#2c3e50", ls="--", lw=1,
                   label=f"cutoff c*={result.c_star:.2f}")
        ax.set_ylim(0, max(np.max(dens.mass[1:]) * 1.3, 1e-4))
        ax.legend(frameon=False)
    else:
        ax.text(0.5, 0.5, "NO_SIGNAL", ha="center", va="center",
                transform=ax.transAxes)
    ax.set_xlabel("selection frequency")
    ax.set_ylabel("density")
    fig.tight_layout()
    fig.savefig(paths["plot"], format="svg", metadata={"Date": None})
    plt.close(fig)
    return {k: str(v) for k, v in paths.items()}
