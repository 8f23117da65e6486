"""Scikit-learn style estimator facade over the full procedure."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .data import standardize
from .driver import FIXED, RunConfig, run_binco
from .freqmodel import NO_SIGNAL
from .resample import BOOTSTRAP


class BincoNetwork(BaseEstimator):
    """Sparse partial-correlation network with direct FDR control.

    Aggregates L1-regularized partial-correlation estimates over resamples
    of the data, models the per-edge selection frequencies as a
    two-component mixture with a powered-beta-binomial null, and keeps the
    edges whose frequency clears the smallest cutoff meeting the target
    FDR. ``fit`` accepts an (n_samples, n_features) array; features are
    network nodes.

    Parameters mirror :class:`binco.driver.RunConfig`. After fitting:

    Attributes
    ----------
    no_signal_ : bool
        True when no regularization level produced a usable (U-shaped)
        selection-frequency density; all other attributes are then None.
    edges_ : set of (i, j) tuples (0-based, i < j)
    adjacency_ : boolean (p, p) array
    c_star_, lambda_star_, l_star_, fdr_hat_, n_true_hat_ : floats
    null_fit_ : the fitted mixture (pi and powered-beta parameters)
    diagnostics_ : per-level scan records
    """

    def __init__(
        self,
        lambda_grid=(),
        alpha=0.05,
        scheme=BOOTSTRAP,
        B=100,
        seed=0,
        procedure="SPACE",
        l=0.5,
        l_strategy=FIXED,
        workers=1,
    ):
        self.lambda_grid = lambda_grid
        self.alpha = alpha
        self.scheme = scheme
        self.B = B
        self.seed = seed
        self.procedure = procedure
        self.l = l
        self.l_strategy = l_strategy
        self.workers = workers

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2,
                        ensure_min_features=2)
        data = standardize(X)
        config = RunConfig(
            lambda_grid=tuple(self.lambda_grid),
            alpha=self.alpha,
            scheme=self.scheme,
            B=self.B,
            seed=self.seed,
            procedure=self.procedure,
            l=self.l,
            l_strategy=self.l_strategy,
            workers=self.workers,
        )
        result, diagnostics = run_binco(data, config)
        self.n_features_in_ = data.p
        self.diagnostics_ = diagnostics
        if result is NO_SIGNAL:
            self.no_signal_ = True
            self.edges_ = set()
            self.c_star_ = None
            self.lambda_star_ = None
            self.l_star_ = None
            self.fdr_hat_ = None
            self.n_true_hat_ = None
            self.null_fit_ = None
        else:
            self.no_signal_ = False
            self.edges_ = result.edges
            self.c_star_ = result.c_star
            self.lambda_star_ = result.lambda_star
            self.l_star_ = result.l_star
            self.fdr_hat_ = result.fdr_hat
            self.n_true_hat_ = result.n_true_hat
            self.null_fit_ = result.fit
        p = self.n_features_in_
        adj = np.zeros((p, p), dtype=bool)
        for (i, j) in self.edges_:
            adj[i, j] = adj[j, i] = True
        self.adjacency_ = adj
        return self

    def get_edges(self, names=None):
        """Edge list, optionally mapped through node names."""
        check_is_fitted(self, "edges_")
        if names is None:
            return sorted(self.edges_)
        return [(names[i], names[j]) for (i, j) in sorted(self.edges_)]
