"""Stability-selection baseline: max-over-lambda frequency thresholding
with the expected-false-positive bound used as an FDR proxy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import EmptySelection, InconsistentTables, ThresholdTooLow


@dataclass
class StabilityResult:
    t_star: float
    edges: set
    q_hat: float
    bound_at_t: float


def max_frequencies(tables) -> dict:
    """Pointwise max selection frequency across a list of tables."""
    if not tables:
        raise InconsistentTables("no tables given")
    key = (tables[0].p, tables[0].B)
    out = {}
    for t in tables:
        if (t.p, t.B) != key:
            raise InconsistentTables(f"table (p={t.p}, B={t.B}) differs from {key}")
        for e, k in t.counts.items():
            f = k / t.B
            if f > out.get(e, 0.0):
                out[e] = f
    return out


def estimate_q(union_sizes) -> float:
    """Mean per-resample size of the union of selected sets over lambda."""
    return float(np.mean(union_sizes))


def fdr_proxy_bound(q_hat: float, t: float, n_omega: int, set_size: int):
    """(expected-false-positive bound, FDR proxy) at threshold t > 0.5."""
    if t <= 0.5:
        raise ThresholdTooLow(f"threshold must exceed 0.5, got {t}")
    if set_size < 1:
        raise EmptySelection("selection at t is empty")
    ev_bound = q_hat**2 / ((2 * t - 1) * n_omega)
    return ev_bound / set_size, ev_bound


def stability_select(tables, alpha: float, union_sizes=None) -> StabilityResult | None:
    """Smallest lattice threshold in (0.5, 1] whose FDR proxy is <= alpha.

    union_sizes defaults to per-table support-size means when the shared
    per-resample unions are unavailable (single-table use).
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    maxf = max_frequencies(tables)
    B = tables[0].B
    p = tables[0].p
    n_omega = p * (p - 1) // 2
    if union_sizes is None:
        raise ValueError("union_sizes required (per-resample union cardinalities)")
    q_hat = estimate_q(union_sizes)
    for k in range(B // 2 + 1, B + 1):
        t = k / B
        if t <= 0.5:
            continue
        edges = {e for e, f in maxf.items() if f >= t - 1e-12}
        if not edges:
            continue
        proxy, _ = fdr_proxy_bound(q_hat, t, n_omega, len(edges))
        if proxy <= alpha:
            return StabilityResult(
                t_star=t, edges=edges, q_hat=q_hat, bound_at_t=proxy
            )
    return None
