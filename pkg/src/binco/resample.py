"""Resampling and per-edge selection-frequency tabulation.

Every random draw comes from a substream keyed by (master seed, resample
index, purpose tag), so any resample is reproducible in isolation and the
tabulated frequencies are identical for any worker count or execution order.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import DataMatrix, standardize
from .exceptions import DimensionMismatch, IndexOutOfRange
from . import space as sp

BOOTSTRAP = "BOOTSTRAP"
SUBSAMPLE_HALF = "SUBSAMPLE_HALF"

_TAG_INDICES = 0
_TAG_WEIGHTS = 1


@dataclass
class ResamplePlan:
    scheme: str
    B: int
    seed: int
    n: int

    def __post_init__(self):
        if self.scheme not in (BOOTSTRAP, SUBSAMPLE_HALF):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.B < 1:
            raise ValueError("B must be >= 1")


@dataclass
class FrequencyTable:
    """Per-edge selection counts out of B resamples for one configuration.

    Frequencies are exact lattice values k/B; edges absent from `counts`
    were never selected.
    """

    counts: dict
    B: int
    p: int
    config: dict = field(default_factory=dict)
    n_nonconverged: int = 0

    def freq(self, edge) -> float:
        return self.counts.get(edge, 0) / self.B

    def frequencies(self) -> dict:
        return {e: k / self.B for e, k in self.counts.items()}

    def support(self) -> set:
        return set(self.counts)

    def write(self, tsv_path, sidecar_path=None):
        """TSV with 1-based indices plus a JSON provenance sidecar."""
        tsv_path = Path(tsv_path)
        lines = ["i\tj\tfreq"]
        for (i, j) in sorted(self.counts):
            lines.append(f"{i + 1}\t{j + 1}\t{self.counts[(i, j)] / self.B:.10g}")
        tsv_path.write_text("\n".join(lines) + "\n")
        if sidecar_path is None:
            sidecar_path = tsv_path.with_suffix(".json")
        Path(sidecar_path).write_text(
            json.dumps({**self.config, "B": self.B, "p": self.p}, sort_keys=True)
            + "\n"
        )

    @classmethod
    def read(cls, tsv_path, sidecar_path=None):
        tsv_path = Path(tsv_path)
        if sidecar_path is None:
            sidecar_path = tsv_path.with_suffix(".json")
        meta = json.loads(Path(sidecar_path).read_text())
        B = int(meta.pop("B"))
        p = int(meta.pop("p"))
        counts = {}
        for line in tsv_path.read_text().splitlines()[1:]:
            i, j, f = line.split("\t")
            counts[(int(i) - 1, int(j) - 1)] = round(float(f) * B)
        return cls(counts=counts, B=B, p=p, config=meta)


def _substream(plan: ResamplePlan, b: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([plan.seed, b, tag])


def draw_resample(plan: ResamplePlan, b: int) -> np.ndarray:
    """Row indices of resample b (1-based b), reproducible in isolation."""
    if not 1 <= b <= plan.B:
        raise IndexOutOfRange(f"resample index {b} outside [1, {plan.B}]")
    rng = _substream(plan, b, _TAG_INDICES)
    if plan.scheme == BOOTSTRAP:
        return rng.integers(0, plan.n, size=plan.n)
    return np.sort(rng.permutation(plan.n)[: plan.n // 2])


def _resample_weights(plan: ResamplePlan, b: int, p: int, l: float):
    if l >= 1.0:
        return None
    rng = _substream(plan, b, _TAG_WEIGHTS)
    w = np.ones((p, p))
    iu = np.triu_indices(p, k=1)
    inv = rng.uniform(1.0, 1.0 / l, size=iu[0].size)
    w[iu] = 1.0 / inv
    w[(iu[1], iu[0])] = w[iu]
    return sp.WeightMatrix(w=w, l=l, seed=b)


def _fit_one(data, lam, l, plan, b, procedure, combine, redraw_weights):
    """Edge set of the base procedure on resample b; returns (edges, converged)."""
    idx = draw_resample(plan, b)
    sub = standardize(data.values[idx], data.column_names)
    wb = 1 if redraw_weights else 0
    weights = _resample_weights(plan, b * wb, data.p, l)
    if procedure == "SPACE":
        est = sp.fit_space(sub, lam, weights=weights)
        return sp.selected_edges(est), est.converged
    edges = sp.fit_neighborhood(sub, lam, weights=weights, combine=combine)
    return edges, True


def selection_frequencies(
    data: DataMatrix,
    lam: float,
    l: float,
    plan: ResamplePlan,
    procedure: str = "SPACE",
    combine: str = "OR",
    workers: int = 1,
    redraw_weights: bool = True,
) -> FrequencyTable:
    """Fraction of resamples in which each edge is selected at (lam, l)."""
    tables = frequency_grid(
        data, [lam], l, plan, procedure, combine, workers, redraw_weights
    )
    return tables[0]


def frequency_grid(
    data: DataMatrix,
    lambda_list,
    l: float,
    plan: ResamplePlan,
    procedure: str = "SPACE",
    combine: str = "OR",
    workers: int = 1,
    redraw_weights: bool = True,
    union_sizes: list | None = None,
) -> list[FrequencyTable]:
    """One FrequencyTable per lambda, all built on the same resample draws.

    If union_sizes is a list, it is filled with |union over lambda of the
    selected set| per resample (input to the stability baseline's q-hat).
    """
    lambda_list = list(lambda_list)
    if not lambda_list:
        raise ValueError("empty lambda grid")
    if plan.n != data.n:
        raise DimensionMismatch(f"plan n={plan.n} but data has n={data.n}")

    def one_resample(b):
        per_lam = []
        union = set()
        for lam in lambda_list:
            edges, conv = _fit_one(
                data, lam, l, plan, b, procedure, combine, redraw_weights
            )
            per_lam.append((edges, conv))
            union |= edges
        return b, per_lam, len(union)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_resample, range(1, plan.B + 1)))
    else:
        results = [one_resample(b) for b in range(1, plan.B + 1)]

    counts = [dict() for _ in lambda_list]
    nonconv = [0] * len(lambda_list)
    unions = [0] * plan.B
    for b, per_lam, usize in results:
        unions[b - 1] = usize
        for k, (edges, conv) in enumerate(per_lam):
            for e in edges:
                counts[k][e] = counts[k].get(e, 0) + 1
            if not conv:
                nonconv[k] += 1
    if union_sizes is not None:
        union_sizes[:] = unions
    tables = []
    for k, lam in enumerate(lambda_list):
        tables.append(
            FrequencyTable(
                counts=counts[k],
                B=plan.B,
                p=data.p,
                config={
                    "lambda": lam,
                    "l": l,
                    "scheme": plan.scheme,
                    "seed": plan.seed,
                    "procedure": procedure,
                },
                n_nonconverged=nonconv[k],
            )
        )
    return tables
