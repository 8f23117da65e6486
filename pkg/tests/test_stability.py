import numpy as np
import pytest

from binco.exceptions import (
    EmptySelection,
    InconsistentTables,
    ThresholdTooLow,
)
from binco.resample import FrequencyTable
from binco.stability import (
    estimate_q,
    fdr_proxy_bound,
    max_frequencies,
    stability_select,
)


def test_hand_computed_bound():
    proxy, ev = fdr_proxy_bound(50.0, 0.9, 124750, 100)
    assert abs(ev - 2500.0 / (0.8 * 124750.0)) < 1e-12
    assert abs(ev - 0.025050100200400802) < 1e-12
    assert abs(proxy - ev / 100) < 1e-15


def test_bound_monotone_in_t():
    prev = np.inf
    for t in [0.6, 0.7, 0.8, 0.9, 1.0]:
        proxy, _ = fdr_proxy_bound(30.0, t, 4950, 40)
        assert proxy < prev
        prev = proxy


def test_bound_guards():
    with pytest.raises(ThresholdTooLow):
        fdr_proxy_bound(10.0, 0.5, 100, 5)
    with pytest.raises(EmptySelection):
        fdr_proxy_bound(10.0, 0.9, 100, 0)


def test_max_frequencies():
    t1 = FrequencyTable(counts={(0, 1): 5, (0, 2): 2}, B=10, p=4)
    t2 = FrequencyTable(counts={(0, 1): 3, (1, 2): 9}, B=10, p=4)
    m = max_frequencies([t1, t2])
    assert m == {(0, 1): 0.5, (0, 2): 0.2, (1, 2): 0.9}
    with pytest.raises(InconsistentTables):
        max_frequencies([t1, FrequencyTable(counts={}, B=20, p=4)])
    with pytest.raises(InconsistentTables):
        max_frequencies([])


def test_select_matches_brute_force_scan():
    rng = np.random.default_rng(0)
    B, p = 20, 30
    n_omega = p * (p - 1) // 2
    counts = {}
    pairs = [(i, j) for i in range(p - 1) for j in range(i + 1, p)]
    for e in rng.choice(len(pairs), size=30, replace=False):
        counts[pairs[e]] = int(rng.integers(10, B + 1))
    tab = FrequencyTable(counts=counts, B=B, p=p)
    union_sizes = [len(counts)] * B
    alpha = 0.3
    res = stability_select([tab], alpha, union_sizes=union_sizes)
    # independent scan over the same lattice
    q = float(np.mean(union_sizes))
    expect = None
    for k in range(B // 2 + 1, B + 1):
        t = k / B
        sel = {e for e, c in counts.items() if c / B >= t - 1e-12}
        if not sel:
            continue
        if q * q / ((2 * t - 1) * n_omega * len(sel)) <= alpha:
            expect = (t, sel)
            break
    assert expect is not None
    assert res is not None
    assert res.t_star == expect[0]
    assert res.edges == expect[1]
    assert res.bound_at_t <= alpha


def test_unattainable_returns_none():
    tab = FrequencyTable(counts={(0, 1): 10}, B=10, p=50)
    # enormous q makes every proxy exceed alpha
    res = stability_select([tab], 0.05, union_sizes=[1000] * 10)
    assert res is None


def test_estimate_q_is_mean():
    assert estimate_q([10, 20, 30]) == 20.0


def test_union_sizes_required():
    tab = FrequencyTable(counts={(0, 1): 10}, B=10, p=5)
    with pytest.raises(ValueError):
        stability_select([tab], 0.1)
