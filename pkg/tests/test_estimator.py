import numpy as np
import pytest
from sklearn.base import clone
from sklearn.utils.validation import check_is_fitted
from sklearn.exceptions import NotFittedError

from binco.estimator import BincoNetwork
from binco.simgen import POWER_LAW, gen_precision, gen_topology, sample_mvn
from binco.space import lambda_max


@pytest.fixture(scope="module")
def fitted():
    adj = gen_topology(POWER_LAW, 40, 1, seed=0)
    model = gen_precision(adj, "STRONG", seed=0)
    data = sample_mvn(model, 150, seed=0)
    lm = lambda_max(data)
    est = BincoNetwork(
        lambda_grid=(0.3 * lm, 0.4 * lm, 0.5 * lm),
        alpha=0.1, B=25, seed=0, l=0.5, workers=4,
    ).fit(data.values)
    return model, est


def test_params_roundtrip():
    est = BincoNetwork(alpha=0.2, B=30, l=0.7)
    params = est.get_params()
    assert params["alpha"] == 0.2 and params["B"] == 30
    est2 = clone(est)
    assert est2.get_params() == params
    est.set_params(alpha=0.05)
    assert est.alpha == 0.05


def test_fit_attributes(fitted):
    model, est = fitted
    check_is_fitted(est)
    assert est.n_features_in_ == 40
    assert not est.no_signal_
    assert est.edges_
    assert est.adjacency_.shape == (40, 40)
    assert est.adjacency_.sum() == 2 * len(est.edges_)
    assert np.array_equal(est.adjacency_, est.adjacency_.T)
    assert est.fdr_hat_ <= 0.1 + 1e-12
    assert est.c_star_ is not None and est.lambda_star_ is not None
    # recovers mostly true structure
    tp = len(est.edges_ & model.adjacency)
    assert tp / len(est.edges_) > 0.6


def test_get_edges_names(fitted):
    _, est = fitted
    names = [f"g{k}" for k in range(40)]
    named = est.get_edges(names)
    assert len(named) == len(est.edges_)
    assert all(a.startswith("g") and b.startswith("g") for a, b in named)


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        BincoNetwork().get_edges()


def test_input_validation():
    with pytest.raises(ValueError):
        BincoNetwork().fit(np.ones(10))
    with pytest.raises(ValueError):
        BincoNetwork().fit(np.full((20, 3), np.nan))
