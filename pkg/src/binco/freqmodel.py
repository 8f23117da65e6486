"""Two-component mixture modeling of selection frequencies.

The null component is a powered-beta-binomial: a selection count out of B
resamples is Binomial(B, T) with T = Q^gamma and Q ~ Beta(a, b). Fitting the
null to the empirical frequency density on an interior range and
extrapolating its upper tail yields the plug-in FDR estimate that drives
cutoff and regularization selection.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, special

from .exceptions import (
    DimensionMismatch,
    EmptyFitRange,
    EmptyTail,
    OptimizerFailure,
    QuadratureFailure,
)

NO_SIGNAL = "NO_SIGNAL"

_JACOBI_NODES = 96
_PI_CAP = 1.0 - 1e-6


@dataclass
class EmpiricalDensity:
    """mass[k] = (number of candidate edges at frequency k/B) / N_omega."""

    mass: np.ndarray
    B: int
    n_omega: int

    @property
    def lattice(self) -> np.ndarray:
        return np.arange(self.B + 1) / self.B


@dataclass
class PoweredBetaParams:
    a: float
    b: float
    gamma: float

    def __post_init__(self):
        for name in ("a", "b", "gamma"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")


@dataclass
class NullMixtureFit:
    pi_hat: float
    params: PoweredBetaParams
    fit_range: tuple
    objective: float
    null_mass: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {
                "pi_hat": self.pi_hat,
                "a": self.params.a,
                "b": self.params.b,
                "gamma": self.params.gamma,
                "V1": self.fit_range[0],
                "V2": self.fit_range[1],
                "objective": self.objective,
            },
            sort_keys=True,
        )


@dataclass
class NetworkEstimate:
    edges: set
    c_star: float
    lambda_star: float
    l_star: float
    fdr_hat: float
    n_true_hat: float
    fit: NullMixtureFit | None = None
    diagnostics: list = field(default_factory=list)


def empirical_density(table, p: int) -> EmpiricalDensity:
    """Histogram of selection frequencies over the full candidate edge set.

    Edges absent from the table count at frequency 0.
    """
    n_omega = p * (p - 1) // 2
    mass = np.zeros(table.B + 1)
    for (i, j), k in table.counts.items():
        if i >= p or j >= p:
            raise DimensionMismatch(f"edge ({i}, {j}) outside p={p}")
        mass[k] += 1
    mass[0] += n_omega - sum(1 for k in table.counts.values() if k > 0)
    return EmpiricalDensity(mass=mass / n_omega, B=table.B, n_omega=n_omega)


def _integrand_factory(B: int, params: PoweredBetaParams):
    a, b, g = params.a, params.b, params.gamma
    lbeta = special.betaln(a, b)

    def log_kernel(u, k):
        # log of C(B,k) u^(g k) (1 - u^g)^(B-k); u in (0,1)
        lc = special.gammaln(B + 1) - special.gammaln(k + 1) - special.gammaln(B - k + 1)
        return lc + g * k * np.log(u) + (B - k) * np.log1p(-(u**g))

    return a, b, lbeta, log_kernel


def powered_beta_binomial_pmf(
    k: int, B: int, params: PoweredBetaParams, tol: float = 1e-10
) -> float:
    """P(count = k) under Binomial(B, Q^gamma), Q ~ Beta(a, b).

    Adaptive quadrature in the Q variable (substituting tau = q^gamma turns
    the powered prior back into a plain beta weight).
    """
    a, b, lbeta, log_kernel = _integrand_factory(B, params)

    def integrand(u):
        # exact endpoints are never sampled by the adaptive rule
        if u <= 0.0 or u >= 1.0:
            return 0.0
        lw = (a - 1) * np.log(u) + (b - 1) * np.log1p(-u) - lbeta
        return np.exp(lw + log_kernel(u, k))

    with warnings.catch_warnings():
        # roundoff near the endpoints is caught by the error bound below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            integrand, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=500
        )
    if not np.isfinite(val) or err > max(100 * tol, 1e-8):
        raise QuadratureFailure(
            f"pmf quadrature error {err:g} at k={k} for {params}"
        )
    return max(val, 0.0)


def null_mass_exact(B: int, params: PoweredBetaParams) -> np.ndarray:
    """Full pmf vector h(k/B), k = 0..B, by adaptive quadrature."""
    return np.array([powered_beta_binomial_pmf(k, B, params) for k in range(B + 1)])


def null_mass_fast(B: int, params: PoweredBetaParams) -> np.ndarray:
    """Gauss-Jacobi pmf vector; absorbs the beta endpoint weight exactly.

    Used inside the optimizer where thousands of evaluations are needed;
    reporting paths use null_mass_exact.
    """
    a, b, g = params.a, params.b, params.gamma
    x, w = special.roots_jacobi(_JACOBI_NODES, b - 1.0, a - 1.0)
    u = (x + 1.0) / 2.0
    scale = 2.0 ** (1.0 - a - b) / special.beta(a, b)
    ks = np.arange(B + 1)
    lc = (
        special.gammaln(B + 1)
        - special.gammaln(ks + 1)
        - special.gammaln(B - ks + 1)
    )
    logu = np.log(u)
    log1mug = np.log1p(-np.clip(u**g, None, 1.0 - 1e-300))
    logk = lc[:, None] + g * ks[:, None] * logu[None, :] + (B - ks)[:, None] * log1mug[None, :]
    vals = np.exp(logk) @ w
    return np.maximum(vals * scale, 1e-300)


def _range_indices(B: int, fit_range) -> np.ndarray:
    v1, v2 = fit_range
    ks = np.arange(B + 1)
    x = ks / B
    return ks[(x > v1 + 1e-12) & (x <= v2 + 1e-12)]


def fit_null(
    density: EmpiricalDensity, fit_range: tuple, n_starts: int = 8
) -> NullMixtureFit:
    """Fit (pi, a, b, gamma) to the empirical density on (V1, V2].

    The shape parameters minimize the cross-entropy between the empirical
    mass and the range-renormalized null; pi then matches the total mass on
    the fitting range. Parameter vectors whose null puts less mass on the
    range than observed are rejected outright: they would force pi < 0 at
    the mass-matching step, and the shapes that exploit them (a null spiked
    at zero frequency) produce vanishing tail mass and a worthless FDR
    estimate. Multistart simplex descent over log-parameters.
    """
    B = density.B
    idx = _range_indices(B, fit_range)
    f_range = density.mass[idx]
    f_sum = f_range.sum()
    if idx.size < 4 or f_sum <= 0:
        raise EmptyFitRange(
            f"fitting range {fit_range} covers {idx.size} lattice points "
            f"with total mass {f_sum:g}"
        )

    lo = np.log([0.05, 0.05, 0.05])
    hi = np.log([100.0, 100.0, 50.0])

    barrier = 1e12  # finite so the simplex can contract away from it
    infeasible = 1e6  # sloped so the simplex can descend toward feasibility

    def objective(logp):
        if np.any(logp < lo) or np.any(logp > hi):
            return barrier
        try:
            params = PoweredBetaParams(*np.exp(logp))
            h = null_mass_fast(B, params)[idx]
        except (ValueError, FloatingPointError):
            return barrier
        s = h.sum()
        # tiny slack keeps the pi = 0 boundary itself feasible
        if s < f_sum * (1.0 - 1e-6):
            return infeasible * (1.0 + f_sum - s)
        return -float(np.sum(f_range * np.log(h / s)))

    starts = [
        np.log([a0, b0, g0])
        for a0 in (0.5, 2.0)
        for b0 in (2.0, 10.0)
        for g0 in (0.5, 4.0)
    ][:n_starts]
    best = None
    for s in starts:
        res = optimize.minimize(
            objective,
            s,
            method="Nelder-Mead",
            options={"fatol": 1e-9, "xatol": 1e-6, "maxiter": 600},
        )
        if res.fun < infeasible and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise OptimizerFailure("no multistart reached a feasible optimum")
    params = PoweredBetaParams(*np.exp(best.x))
    null_mass = null_mass_exact(B, params)
    s_null = null_mass[idx].sum()
    pi_hat = 1.0 - f_sum / s_null
    pi_hat = float(np.clip(pi_hat, 0.0, _PI_CAP))
    return NullMixtureFit(
        pi_hat=pi_hat,
        params=params,
        fit_range=(float(fit_range[0]), float(fit_range[1])),
        objective=float(best.fun),
        null_mass=null_mass,
    )


def estimate_fdr(density: EmpiricalDensity, fit: NullMixtureFit, c: float) -> float:
    """Plug-in FDR of the cutoff rule {frequency >= c}, clamped at 1."""
    x = density.lattice
    tail = x >= c - 1e-12
    f_tail = density.mass[tail].sum()
    if f_tail <= 0:
        raise EmptyTail(f"no edge has selection frequency >= {c}")
    null_tail = (1.0 - fit.pi_hat) * fit.null_mass[tail].sum()
    return float(min(1.0, null_tail / f_tail))


def optimal_cutoff(
    density: EmpiricalDensity, fit: NullMixtureFit, alpha: float
) -> float | None:
    """Smallest lattice cutoff in (0, 1] whose estimated FDR is <= alpha."""
    if not 0 < alpha < 1:
        if alpha != 1:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    B = density.B
    for k in range(1, B + 1):
        c = k / B
        try:
            fdr = estimate_fdr(density, fit, c)
        except EmptyTail:
            continue
        if fdr <= alpha:
            return c
    return None


def estimate_true_edges(set_size: int, fdr: float) -> float:
    """Expected count of true edges in a selection of given size and FDR."""
    if not 0 <= fdr <= 1:
        raise ValueError(f"fdr must be in [0, 1], got {fdr}")
    return set_size * (1.0 - fdr)


@dataclass
class LambdaCandidate:
    lam: float
    l: float
    c_star: float | None
    n_true_hat: float
    u_flag: bool
    table: object = None
    fit: NullMixtureFit | None = None
    fdr_hat: float | None = None
    report: object = None


def select_lambda(candidates: list):
    """Winner of the regularization scan: max estimated-true-edge count
    among U-shaped candidates with an attainable cutoff; ties go to the
    larger (sparser) lambda. Returns NO_SIGNAL when nothing qualifies.
    """
    viable = [c for c in candidates if c.u_flag and c.c_star is not None]
    if not viable:
        return NO_SIGNAL
    return max(viable, key=lambda c: (c.n_true_hat, c.lam))
