"""Ground-truth network simulation and scoring.

Topologies are realized per disconnected component by exact configuration-
model pairing (stub matching with double-edge-swap repair, so the drawn
degree sequence is reproduced with no self-loops or parallel edges).
Concentration matrices are built by diagonal-dominance rescaling with a
global magnitude multiplier tuned to hit a target mean |partial correlation|.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import DataMatrix, standardize
from .exceptions import (
    BadParams,
    CalibrationFailure,
    DimensionMismatch,
    FactorizationFailure,
    LostEdge,
    UngraphicalDegreeSequence,
)

POWER_LAW = "POWER_LAW"
HUB = "HUB"
EMPIRICAL = "EMPIRICAL"
EMPTY = "EMPTY"

SIGNAL_TARGETS = {"STRONG": 0.34, "WEAK": 0.25, "VERY_WEAK": 0.21}
MEAN_TOL = 0.02


@dataclass
class GroundTruthModel:
    adjacency: set
    concentration: np.ndarray
    partial_corr: np.ndarray
    topology: str
    signal: dict

    @property
    def p(self) -> int:
        return self.concentration.shape[0]

    def write(self, edges_path, matrix_path):
        lines = [f"{i + 1}\t{j + 1}" for (i, j) in sorted(self.adjacency)]
        Path(edges_path).write_text("\n".join(lines) + ("\n" if lines else ""))
        np.savetxt(matrix_path, self.concentration)


@dataclass
class EvalResult:
    fdr: float
    power: float
    counts: tuple  # (TP, FP, FN)


def _graphical(degrees) -> bool:
    # Erdos-Gallai
    d = np.sort(degrees)[::-1]
    if d.sum() % 2:
        return False
    n = d.size
    csum = np.cumsum(d)
    for k in range(1, n + 1):
        rhs = k * (k - 1) + np.sum(np.minimum(d[k:], k))
        if csum[k - 1] > rhs:
            return False
    return True


def _pair_degrees(degrees, rng, max_repair=20000) -> set | None:
    """Stub matching followed by double-edge-swap repair of self-loops and
    parallel edges; returns None if repair stalls."""
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    rng.shuffle(stubs)
    edges = [tuple(sorted((int(stubs[2 * k]), int(stubs[2 * k + 1]))))
             for k in range(len(stubs) // 2)]
    for _ in range(max_repair):
        seen = {}
        bad = []
        for idx, e in enumerate(edges):
            if e[0] == e[1] or e in seen:
                bad.append(idx)
            else:
                seen[e] = idx
        if not bad:
            return set(edges)
        idx = bad[0]
        jdx = int(rng.integers(len(edges)))
        if jdx == idx:
            continue
        a, b = edges[idx]
        c, d = edges[jdx]
        e1 = tuple(sorted((a, c)))
        e2 = tuple(sorted((b, d)))
        edge_set = set(edges)
        if e1[0] == e1[1] or e2[0] == e2[1] or e1 in edge_set or e2 in edge_set or e1 == e2:
            continue
        edges[idx] = e1
        edges[jdx] = e2
    return None


def _draw_degrees(kind, m, params, rng) -> np.ndarray:
    if kind == POWER_LAW:
        gamma = params.get("gamma", 2.3)
        k_max = params.get("k_max", min(m - 1, 20))
        ks = np.arange(1, k_max + 1)
        probs = ks ** (-gamma)
        probs /= probs.sum()
        return rng.choice(ks, size=m, p=probs)
    if kind == HUB:
        deg = rng.integers(1, 5, size=m)
        hubs = rng.choice(m, size=3, replace=False)
        deg[hubs] = rng.integers(16, 26, size=3)
        return deg
    if kind == EMPIRICAL:
        hist = params["degree_histogram"]  # dict degree -> count
        ks = np.array(sorted(hist))
        probs = np.array([hist[k] for k in ks], dtype=float)
        probs /= probs.sum()
        return rng.choice(ks, size=m, p=probs)
    raise BadParams(f"unknown topology {kind!r}")


def gen_topology(kind, p, n_components=1, params=None, seed=0) -> set:
    """Edge set for one of the four topologies; components never share edges."""
    params = params or {}
    if p % n_components:
        raise BadParams(f"p={p} not divisible by {n_components} components")
    if kind == EMPTY:
        return set()
    m = p // n_components
    rng = np.random.default_rng(seed)
    edges = set()
    for comp in range(n_components):
        offset = comp * m
        comp_edges = None
        for attempt in range(100):
            deg = _draw_degrees(kind, m, params, rng)
            if deg.sum() % 2 or not _graphical(deg):
                continue
            paired = _pair_degrees(deg, rng)
            if paired is not None:
                comp_edges = paired
                # pairing preserves degrees by construction; verify anyway
                realized = np.zeros(m, dtype=int)
                for (i, j) in paired:
                    realized[i] += 1
                    realized[j] += 1
                if not np.array_equal(realized, deg):
                    raise UngraphicalDegreeSequence("pairing lost degrees")
                break
        if comp_edges is None:
            raise UngraphicalDegreeSequence(
                f"no simple realization after 100 draws (component {comp})"
            )
        edges |= {(i + offset, j + offset) for (i, j) in comp_edges}
    return edges


def partial_correlations(concentration: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.diag(concentration))
    rho = -concentration / np.outer(d, d)
    np.fill_diagonal(rho, 1.0)
    return rho


def _build_base(adjacency, p, dominance, rng) -> np.ndarray:
    A = np.zeros((p, p))
    for (i, j) in sorted(adjacency):
        v = rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])
        A[i, j] = v
        A[j, i] = v
    # row-wise rescale of off-diagonals to absolute sum `dominance`
    for i in range(p):
        s = np.sum(np.abs(A[i]))
        if s > 0:
            A[i] *= dominance / s
    A = (A + A.T) / 2.0
    # symmetrization can break dominance at high-degree columns; the
    # sqrt-row-sum normalization bounds the spectral radius by `dominance`
    # (Perron), so I + t*A stays positive definite for all t <= 1/dominance
    # while penalizing hub rows by 1/sqrt(degree) instead of 1/degree
    s = np.maximum(np.sum(np.abs(A), axis=1), 1e-12)
    A *= dominance / np.sqrt(np.outer(s, s))
    np.fill_diagonal(A, 1.0)
    return A


def gen_precision(
    adjacency: set,
    signal: str = "STRONG",
    seed: int = 0,
    p: int | None = None,
    topology: str = "",
    dominance: float = 0.9,
) -> GroundTruthModel:
    """Positive-definite concentration matrix whose nonzero support is the
    adjacency and whose mean |partial correlation| hits the signal target."""
    if signal not in SIGNAL_TARGETS:
        raise BadParams(f"signal must be one of {sorted(SIGNAL_TARGETS)}")
    target = SIGNAL_TARGETS[signal]
    if p is None:
        if not adjacency:
            raise BadParams("p required for an empty adjacency")
        p = max(max(e) for e in adjacency) + 1
    if any(i == j for (i, j) in adjacency):
        raise BadParams("self-loops in adjacency")

    if not adjacency:
        K = np.eye(p)
        return GroundTruthModel(
            adjacency=set(),
            concentration=K,
            partial_corr=partial_correlations(K),
            topology=topology or EMPTY,
            signal={"mean": 0.0, "sd": 0.0, "level": signal},
        )

    pairs = sorted(adjacency)
    ij = tuple(np.array(pairs).T)

    for attempt in range(20):
        rng = np.random.default_rng([seed, attempt])
        S = _build_base(adjacency, p, dominance, rng)
        off = S - np.eye(p)

        def realized_mean(t):
            K = np.eye(p) + t * off
            rho = partial_correlations(K)
            return np.mean(np.abs(rho[ij])), K, rho

        # expand upper bracket while comfortably positive definite
        t_hi = 1.0
        m_hi, K_hi, _ = realized_mean(t_hi)
        while m_hi < target:
            t_try = t_hi * 1.05
            K_try = np.eye(p) + t_try * off
            if np.linalg.eigvalsh(K_try)[0] <= 1e-3:
                break
            t_hi = t_try
            m_hi, K_hi, _ = realized_mean(t_hi)
        if m_hi < target - MEAN_TOL:
            continue  # this draw cannot reach the target; redraw
        t_lo = 0.0
        t = t_hi
        for _ in range(200):
            m, K, rho = realized_mean(t)
            if abs(m - target) <= MEAN_TOL / 2:
                break
            if m > target:
                t_hi = t
            else:
                t_lo = t
            t = (t_lo + t_hi) / 2
        else:
            raise CalibrationFailure("bisection exhausted")
        m, K, rho = realized_mean(t)
        if abs(m - target) > MEAN_TOL:
            continue
        if np.linalg.eigvalsh(K)[0] <= 1e-8:
            continue
        if np.min(np.abs(rho[ij])) <= 1e-10:
            continue  # LostEdge: regenerate
        vals = np.abs(rho[ij])
        return GroundTruthModel(
            adjacency=set(adjacency),
            concentration=K,
            partial_corr=rho,
            topology=topology,
            signal={
                "mean": float(vals.mean()),
                "sd": float(vals.std(ddof=1)) if vals.size > 1 else 0.0,
                "level": signal,
            },
        )
    raise LostEdge("could not calibrate a valid matrix in 20 attempts")


def sample_mvn(model: GroundTruthModel, n: int, seed: int = 0) -> DataMatrix:
    """n standardized draws from N(0, concentration^-1)."""
    try:
        cov = np.linalg.inv(model.concentration)
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as e:
        raise FactorizationFailure(str(e)) from e
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, model.p))
    return standardize(Z @ L.T)


def evaluate(selected: set, truth: GroundTruthModel) -> EvalResult:
    if selected and max(max(e) for e in selected) >= truth.p:
        raise DimensionMismatch("selected edges outside truth dimension")
    E = truth.adjacency
    tp = len(selected & E)
    fp = len(selected - E)
    fn = len(E - selected)
    fdr = fp / max(1, tp + fp)
    power = tp / len(E) if E else 0.0
    return EvalResult(fdr=fdr, power=power, counts=(tp, fp, fn))


def ideal_power(tables, truth: GroundTruthModel, alpha: float) -> float:
    """Best achievable power of any lattice cutoff (over the given tables)
    whose realized FDR is within alpha."""
    if not isinstance(tables, (list, tuple)):
        tables = [tables]
    best = 0.0
    for table in tables:
        by_count = {}
        for e, k in table.counts.items():
            by_count.setdefault(k, []).append(e)
        selected = set()
        # sweep cutoff downward, adding edges as the threshold drops
        for k in range(table.B, 0, -1):
            selected |= set(by_count.get(k, []))
            if not selected:
                continue
            res = evaluate(selected, truth)
            if res.fdr <= alpha and res.power > best:
                best = res.power
    return best


def read_degree_histogram(path) -> dict:
    """Two-column text file: degree count."""
    hist = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k, c = line.split()
        hist[int(k)] = int(c)
    return hist
