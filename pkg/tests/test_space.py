import itertools

import numpy as np
import pytest

from binco.data import standardize
from binco.space import (
    WeightMatrix,
    fit_neighborhood,
    fit_space,
    lambda_max,
    sample_weights,
    selected_edges,
    space_gradient,
)


def random_data(rng, n, p):
    # correlated columns so the solvers see nontrivial structure
    z = rng.normal(size=(n, p))
    mix = np.eye(p) + 0.3 * rng.normal(size=(p, p)) / np.sqrt(p)
    return standardize(z @ mix)


def kkt_residual(data, est):
    """Max violation of the subgradient optimality conditions."""
    lam = est.lam
    W = est.weights if est.weights is not None else np.ones((data.p, data.p))
    grad = space_gradient(data, est)
    viol = 0.0
    for i in range(data.p - 1):
        for j in range(i + 1, data.p):
            thr = lam / W[i, j]
            r = est.rho[i, j]
            if abs(r) > 0:
                viol = max(viol, abs(grad[i, j] + thr * np.sign(r)))
            else:
                viol = max(viol, max(0.0, abs(grad[i, j]) - thr))
    return viol


def test_kkt_oracle_50_instances():
    rng = np.random.default_rng(42)
    worst = 0.0
    for k in range(50):
        n = int(rng.integers(20, 101))
        p = int(rng.integers(3, 21))
        data = random_data(rng, n, p)
        frac = 0.1 + 0.8 * rng.random()
        lam = frac * lambda_max(data)
        weights = sample_weights(p, 0.5, k) if k % 3 == 0 else None
        est = fit_space(data, lam, weights=weights)
        assert est.converged
        worst = max(worst, kkt_residual(data, est))
    assert worst < 1e-6


def test_p2_closed_form_threshold():
    # with two standardized columns the solution is a single soft-threshold:
    # the edge is nonzero exactly when 2*(n-1)*|r| exceeds lambda
    rng = np.random.default_rng(3)
    n = 50
    for _ in range(20):
        z = rng.normal(size=(n, 2))
        z[:, 1] = 0.6 * z[:, 0] + 0.8 * z[:, 1]
        data = standardize(z)
        r = data.values[:, 0] @ data.values[:, 1] / (n - 1)
        boundary = 2.0 * (n - 1) * abs(r)
        for lam in [0.5 * boundary, 0.99 * boundary, 1.01 * boundary, 2 * boundary]:
            est = fit_space(data, lam)
            selected = (0, 1) in selected_edges(est)
            assert selected == (boundary > lam)


def exhaustive_lasso(X, y, lam):
    """Support of argmin 0.5||y - Xb||^2 + lam*||b||_1 by trying every
    support and solving the KKT equality system on it."""
    p = X.shape[1]
    best = (np.inf, None)
    for mask in itertools.product([0, 1], repeat=p):
        idx = [j for j in range(p) if mask[j]]
        if not idx:
            beta = np.zeros(p)
        else:
            Xs = X[:, idx]
            # try every sign pattern on the support
            beta = None
            for signs in itertools.product([-1, 1], repeat=len(idx)):
                s = np.array(signs, dtype=float)
                b = np.linalg.solve(Xs.T @ Xs, Xs.T @ y - lam * s)
                if np.all(np.sign(b) == s):
                    beta = np.zeros(p)
                    beta[idx] = b
                    break
            if beta is None:
                continue
        obj = 0.5 * np.sum((y - X @ beta) ** 2) + lam * np.sum(np.abs(beta))
        if obj < best[0] - 1e-12:
            best = (obj, beta)
    return best[1]


def test_neighborhood_matches_exhaustive_kkt_solver():
    rng = np.random.default_rng(11)
    for k in range(50):
        data = random_data(rng, int(rng.integers(15, 60)), 3)
        lam = (0.05 + 0.5 * rng.random()) * lambda_max(data, "neighborhood")
        edges = fit_neighborhood(data, lam, combine="OR")
        Y = data.values
        nonzero = np.zeros((3, 3), dtype=bool)
        for i in range(3):
            others = [j for j in range(3) if j != i]
            beta = exhaustive_lasso(Y[:, others], Y[:, i], lam)
            for bj, j in zip(beta, others):
                nonzero[i, j] = abs(bj) > 1e-6
        expect = {
            (i, j)
            for i in range(2)
            for j in range(i + 1, 3)
            if nonzero[i, j] or nonzero[j, i]
        }
        assert edges == expect


def test_and_or_combination():
    rng = np.random.default_rng(5)
    data = random_data(rng, 40, 6)
    lam = 0.3 * lambda_max(data, "neighborhood")
    assert fit_neighborhood(data, lam, combine="AND") <= fit_neighborhood(
        data, lam, combine="OR"
    )
    with pytest.raises(ValueError):
        fit_neighborhood(data, lam, combine="XOR")


def test_permutation_equivariance():
    rng = np.random.default_rng(9)
    data = random_data(rng, 60, 8)
    lam = 0.3 * lambda_max(data)
    perm = rng.permutation(8)
    permuted = standardize(data.values[:, perm])
    e1 = selected_edges(fit_space(data, lam))
    e2 = selected_edges(fit_space(permuted, lam))
    mapped = {tuple(sorted((int(perm[i]), int(perm[j])))) for (i, j) in e2}
    assert e1 == mapped


def test_unit_weights_bit_identical():
    # l=1 weights are exact ones; supplying them must not change anything
    rng = np.random.default_rng(13)
    data = random_data(rng, 50, 7)
    lam = 0.25 * lambda_max(data)
    w = sample_weights(7, 1.0, 123)
    assert np.all(w.w == 1.0)
    a = fit_space(data, lam)
    b = fit_space(data, lam, weights=w)
    assert np.array_equal(a.rho, b.rho)
    assert np.array_equal(a.sigma_diag, b.sigma_diag)


def test_weight_distribution():
    w = sample_weights(40, 0.25, 7).w
    iu = np.triu_indices(40, k=1)
    inv = 1.0 / w[iu]
    assert inv.min() >= 1.0 and inv.max() <= 4.0
    assert np.array_equal(w, w.T)
    assert abs(inv.mean() - 2.5) < 0.1


def test_objective_monotone_decreasing():
    rng = np.random.default_rng(21)
    data = random_data(rng, 50, 10)
    est = fit_space(data, 0.2 * lambda_max(data))
    tr = est.objective_trace
    assert np.all(np.diff(tr) <= 1e-9)


def test_lambda_max_zero_solution():
    rng = np.random.default_rng(17)
    data = random_data(rng, 40, 6)
    lm = lambda_max(data)
    assert selected_edges(fit_space(data, lm * 1.0001)) == set()
    assert selected_edges(fit_space(data, lm * 0.95)) != set()


def test_rho_diagonal_and_symmetry():
    rng = np.random.default_rng(19)
    data = random_data(rng, 50, 6)
    est = fit_space(data, 0.3 * lambda_max(data))
    assert np.all(np.diag(est.rho) == 1.0)
    assert np.array_equal(est.rho, est.rho.T)
