"""L1-penalized partial-correlation estimation.

Two base procedures are provided: the joint partial-correlation regression
(all rho_ij fitted simultaneously against the p node regressions) and the
per-node neighborhood lasso. Both accept an optional symmetric weight matrix
implementing the randomized-lasso penalty lam * |coef| / w_ij.

Edge sets are plain Python sets of 0-based (i, j) tuples with i < j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .data import DataMatrix
from .exceptions import DimensionMismatch, InvalidPerturbationFloor

MAX_SWEEPS = 500
CONV_TOL = 1e-6
KKT_TOL = 1e-6
ZERO_TOL = 1e-6
SIGMA_ROUNDS = 2


@dataclass
class WeightMatrix:
    """Symmetric random penalty weights w_ij in (l, 1]; 1/w_ij ~ U[1, 1/l]."""

    w: np.ndarray
    l: float
    seed: int


@dataclass
class SpaceEstimate:
    """Fitted joint partial-correlation model for one (lambda, weights) pair."""

    rho: np.ndarray
    sigma_diag: np.ndarray
    lam: float
    weights: np.ndarray | None
    converged: bool
    iterations: int
    objective_trace: np.ndarray


def sample_weights(p: int, l: float, seed: int) -> WeightMatrix:
    """Draw randomized-lasso weights: 1/w_ij i.i.d. Uniform[1, 1/l] for i < j."""
    if not (0.0 < l <= 1.0):
        raise InvalidPerturbationFloor(f"l must be in (0, 1], got {l}")
    w = np.ones((p, p))
    if l < 1.0:
        rng = np.random.default_rng(seed)
        iu = np.triu_indices(p, k=1)
        inv = rng.uniform(1.0, 1.0 / l, size=iu[0].size)
        w[iu] = 1.0 / inv
        w[(iu[1], iu[0])] = w[iu]
    return WeightMatrix(w=w, l=l, seed=seed)


@njit(cache=True, nogil=True)
def _space_sweep(Y, R, rho, sigma, lam, W, col_sq, active, full):
    """One coordinate-descent pass; returns max |delta rho|.

    full=True visits every pair and refreshes the active-set flags;
    full=False only revisits currently-active pairs.
    """
    n, p = Y.shape
    max_delta = 0.0
    for i in range(p - 1):
        for j in range(i + 1, p):
            if not full and not active[i, j]:
                continue
            c_ij = np.sqrt(sigma[j] / sigma[i])
            c_ji = np.sqrt(sigma[i] / sigma[j])
            a = c_ij * c_ij * col_sq[j] + c_ji * c_ji * col_sq[i]
            g = rho[i, j] * a
            for t in range(n):
                g += c_ij * R[t, i] * Y[t, j] + c_ji * R[t, j] * Y[t, i]
            thr = lam / W[i, j]
            if g > thr:
                new = (g - thr) / a
            elif g < -thr:
                new = (g + thr) / a
            else:
                new = 0.0
            delta = new - rho[i, j]
            if delta != 0.0:
                for t in range(n):
                    R[t, i] -= c_ij * delta * Y[t, j]
                    R[t, j] -= c_ji * delta * Y[t, i]
                rho[i, j] = new
                rho[j, i] = new
                ad = abs(delta)
                if ad > max_delta:
                    max_delta = ad
            if full:
                active[i, j] = new != 0.0
    return max_delta


@njit(cache=True, nogil=True)
def _space_objective(R, rho, lam, W):
    p = rho.shape[0]
    obj = 0.5 * np.sum(R * R)
    for i in range(p - 1):
        for j in range(i + 1, p):
            obj += lam * abs(rho[i, j]) / W[i, j]
    return obj


@njit(cache=True, nogil=True)
def _space_residuals(Y, rho, sigma):
    n, p = Y.shape
    R = Y.copy()
    for i in range(p):
        for j in range(p):
            if j != i and rho[i, j] != 0.0:
                c = np.sqrt(sigma[j] / sigma[i])
                for t in range(n):
                    R[t, i] -= c * rho[i, j] * Y[t, j]
    return R


@njit(cache=True, nogil=True)
def _space_kkt_violation(Y, R, rho, sigma, lam, W):
    """Max subgradient-condition violation over all pairs at the current rho."""
    n, p = Y.shape
    viol = 0.0
    for i in range(p - 1):
        for j in range(i + 1, p):
            c_ij = np.sqrt(sigma[j] / sigma[i])
            c_ji = np.sqrt(sigma[i] / sigma[j])
            g = 0.0
            for t in range(n):
                g += c_ij * R[t, i] * Y[t, j] + c_ji * R[t, j] * Y[t, i]
            thr = lam / W[i, j]
            if rho[i, j] != 0.0:
                v = abs(-g + thr * np.sign(rho[i, j]))
            else:
                v = abs(g) - thr
            if v > viol:
                viol = v
    return viol


@njit(cache=True, nogil=True)
def _space_solve(Y, lam, W, sigma, max_sweeps, tol, kkt_tol):
    """Active-shooting coordinate descent at fixed sigma.

    The delta-based stop rule is certified against the exact subgradient
    conditions; if they fail, the sweep tolerance tightens and descent
    continues. Returns (rho, R, sweeps, converged, objective trace).
    """
    n, p = Y.shape
    col_sq = np.empty(p)
    for j in range(p):
        s = 0.0
        for t in range(n):
            s += Y[t, j] * Y[t, j]
        col_sq[j] = s
    rho = np.zeros((p, p))
    R = Y.copy()
    active = np.zeros((p, p), dtype=np.bool_)
    trace = np.empty(max_sweeps)
    sweeps = 0
    converged = False
    cur_tol = tol
    while sweeps < max_sweeps:
        delta = _space_sweep(Y, R, rho, sigma, lam, W, col_sq, active, True)
        trace[sweeps] = _space_objective(R, rho, lam, W)
        sweeps += 1
        if delta < cur_tol:
            if _space_kkt_violation(Y, R, rho, sigma, lam, W) < kkt_tol:
                converged = True
                break
            if cur_tol > 1e-14:
                cur_tol *= 0.1
                continue
            break
        while sweeps < max_sweeps:
            delta = _space_sweep(Y, R, rho, sigma, lam, W, col_sq, active, False)
            trace[sweeps] = _space_objective(R, rho, lam, W)
            sweeps += 1
            if delta < cur_tol:
                break
    return rho, R, sweeps, converged, trace[:sweeps]


@njit(cache=True, nogil=True)
def _lasso_node(Y, i, lam, W, col_sq, max_sweeps, tol):
    """Lasso regression of column i on all other columns (active shooting)."""
    n, p = Y.shape
    beta = np.zeros(p)
    r = Y[:, i].copy()
    active = np.zeros(p, dtype=np.bool_)
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        full_pass = True
        while sweeps < max_sweeps:
            max_delta = 0.0
            for j in range(p):
                if j == i:
                    continue
                if not full_pass and not active[j]:
                    continue
                g = beta[j] * col_sq[j]
                for t in range(n):
                    g += r[t] * Y[t, j]
                thr = lam / W[i, j]
                if g > thr:
                    new = (g - thr) / col_sq[j]
                elif g < -thr:
                    new = (g + thr) / col_sq[j]
                else:
                    new = 0.0
                delta = new - beta[j]
                if delta != 0.0:
                    for t in range(n):
                        r[t] -= delta * Y[t, j]
                    beta[j] = new
                    if abs(delta) > max_delta:
                        max_delta = abs(delta)
                if full_pass:
                    active[j] = new != 0.0
            sweeps += 1
            if max_delta < tol:
                if full_pass:
                    converged = True
                break
            full_pass = False
        if converged or sweeps >= max_sweeps:
            break
    return beta, converged


def _prepare(data: DataMatrix, lam: float, weights):
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    Y = np.ascontiguousarray(data.values)
    p = data.p
    if weights is None:
        W = np.ones((p, p))
    else:
        W = np.asarray(weights.w if isinstance(weights, WeightMatrix) else weights)
        if W.shape != (p, p):
            raise DimensionMismatch(f"weights shape {W.shape}, expected ({p}, {p})")
    return Y, W


def fit_space(
    data: DataMatrix,
    lam: float,
    weights: WeightMatrix | None = None,
    sigma_rounds: int = SIGMA_ROUNDS,
    max_sweeps: int = MAX_SWEEPS,
    tol: float = CONV_TOL,
    kkt_tol: float = KKT_TOL,
) -> SpaceEstimate:
    """Minimize the joint L1-penalized partial-correlation loss.

    Alternates sigma_rounds rounds of {solve rho at fixed sigma_ii} with
    residual-variance updates of sigma_ii; sigma_diag in the result is the
    diagonal used in the final rho solve, so the KKT conditions hold exactly
    with respect to it.
    """
    Y, W = _prepare(data, lam, weights)
    n, p = Y.shape
    sigma = np.ones(p)
    rho = np.zeros((p, p))
    total_sweeps = 0
    converged = False
    trace = np.empty(0)
    for k in range(max(1, sigma_rounds)):
        rho, R, sweeps, converged, trace = _space_solve(
            Y, lam, W, sigma, max_sweeps, tol, kkt_tol
        )
        total_sweeps += sweeps
        if k < sigma_rounds - 1:
            rss = np.sum(R * R, axis=0)
            sigma = n / np.maximum(rss, 1e-12)
    out = rho.copy()
    np.fill_diagonal(out, 1.0)
    return SpaceEstimate(
        rho=out,
        sigma_diag=sigma,
        lam=lam,
        weights=W if weights is not None else None,
        converged=converged,
        iterations=total_sweeps,
        objective_trace=trace,
    )


def space_gradient(data: DataMatrix, est: SpaceEstimate) -> np.ndarray:
    """Gradient of the smooth part of the joint loss at the fitted rho.

    For nonzero rho_ij the KKT conditions require this to equal
    -(lam / w_ij) * sign(rho_ij); for zero rho_ij, |grad| <= lam / w_ij.
    """
    Y = data.values
    p = data.p
    sigma = est.sigma_diag
    rho = est.rho.copy()
    np.fill_diagonal(rho, 0.0)
    R = _space_residuals(np.ascontiguousarray(Y), rho, sigma)
    grad = np.zeros((p, p))
    C = np.sqrt(np.outer(1.0 / sigma, sigma))  # C[i, j] = sqrt(sigma_j / sigma_i)
    G = Y.T @ R  # G[j, i] = <Y_j, R_i>
    for i in range(p - 1):
        for j in range(i + 1, p):
            grad[i, j] = -(C[i, j] * G[j, i] + C[j, i] * G[i, j])
            grad[j, i] = grad[i, j]
    return grad


def lambda_max(data: DataMatrix, procedure: str = "space") -> float:
    """Smallest lambda (unit weights) at which the zero solution is optimal."""
    Y = data.values
    G = Y.T @ Y
    np.fill_diagonal(G, 0.0)
    m = np.max(np.abs(G))
    return 2.0 * m if procedure.upper() == "SPACE" else m


def fit_neighborhood(
    data: DataMatrix,
    lam: float,
    weights: WeightMatrix | None = None,
    combine: str = "OR",
    max_sweeps: int = MAX_SWEEPS,
    tol: float = CONV_TOL,
    zero_tol: float = ZERO_TOL,
) -> set:
    """Per-node lasso edge selection with AND/OR symmetrization."""
    if combine not in ("AND", "OR"):
        raise ValueError(f"combine must be AND or OR, got {combine!r}")
    Y, W = _prepare(data, lam, weights)
    n, p = Y.shape
    col_sq = np.sum(Y * Y, axis=0)
    nonzero = np.zeros((p, p), dtype=bool)
    for i in range(p):
        beta, _ = _lasso_node(Y, i, lam, W, col_sq, max_sweeps, tol)
        nonzero[i] = np.abs(beta) > zero_tol
    edges = set()
    for i in range(p - 1):
        for j in range(i + 1, p):
            hit = (
                nonzero[i, j] and nonzero[j, i]
                if combine == "AND"
                else nonzero[i, j] or nonzero[j, i]
            )
            if hit:
                edges.add((i, j))
    return edges


def selected_edges(est: SpaceEstimate, zero_tol: float = ZERO_TOL) -> set:
    """Edges whose fitted |rho_ij| exceeds zero_tol."""
    p = est.rho.shape[0]
    rho = est.rho
    return {
        (i, j)
        for i in range(p - 1)
        for j in range(i + 1, p)
        if abs(rho[i, j]) > zero_tol
    }
