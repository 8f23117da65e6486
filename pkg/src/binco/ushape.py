"""U-shape screening of selection-frequency densities.

A regularization level is usable only when the empirical frequency density
decreases at low frequencies and rises again near 1; the peak/valley pair
found here doubles as the mixture fitting range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import make_smoothing_spline

from .exceptions import DegenerateDensity
from .freqmodel import EmpiricalDensity

FLEX_GRID_SIZE = 30
VALLEY_LIMIT = 0.8


@dataclass
class UShapeReport:
    v1: float
    v2: float
    u_flag: bool
    s1: float
    s2: float
    s3: float
    s4: float
    smoother_df: float

    def to_dict(self) -> dict:
        return {
            "v1": self.v1,
            "v2": self.v2,
            "u_flag": self.u_flag,
            "s1": self.s1,
            "s2": self.s2,
            "s3": self.s3,
            "s4": self.s4,
            "smoother_df": self.smoother_df,
        }


def _sign_changes(spline, lo: float, hi: float, n_grid: int = 400) -> int:
    xs = np.linspace(lo, hi, n_grid)
    d = spline.derivative()(xs)
    signs = np.sign(d)
    signs = signs[signs != 0]
    if signs.size < 2:
        return 0
    return int(np.sum(signs[1:] != signs[:-1]))


def smooth_density(density: EmpiricalDensity):
    """Cubic smoothing spline of the density with auto-chosen flexibility.

    Scans a fixed penalty grid from most to least flexible and keeps the
    first fit whose derivative changes sign exactly once on (0, 1]; if none
    does, the least flexible fit is kept. Returns (values on the lattice,
    sign-change count, penalty used, spline).
    """
    x = density.lattice
    y = density.mass
    if np.count_nonzero(y) <= 1:
        raise DegenerateDensity("all mass concentrated at one lattice point")
    if density.B < 10:
        raise DegenerateDensity(f"B={density.B} too small to smooth")
    # penalty grid: near-interpolation up to near-linear
    lams = np.logspace(-9, 1, FLEX_GRID_SIZE)
    lo = x[1] / 2  # open at 0
    chosen = None
    for lam in lams:
        spline = make_smoothing_spline(x, y, lam=lam)
        changes = _sign_changes(spline, lo, 1.0)
        if changes == 1:
            chosen = (spline, changes, lam)
            break
    if chosen is None:
        spline = make_smoothing_spline(x, y, lam=lams[-1])
        chosen = (spline, _sign_changes(spline, lo, 1.0), lams[-1])
    spline, changes, lam = chosen
    return spline(x), changes, float(lam), spline


def detect_ushape(density: EmpiricalDensity) -> UShapeReport:
    """Peak/valley screening per the four-step rule.

    The valley v2 comes from the smoothed curve (lattice argmin on (0, 1)),
    the peak v1 from the raw density below v2; the two half-interval mass
    comparisons then ask for a rough decrease into the valley and a rough
    increase out of it. Ties break toward the smaller abscissa.
    """
    B = density.B
    x = density.lattice
    f = density.mass
    smooth, _, lam, _ = smooth_density(density)
    interior = np.arange(1, B)  # lattice restricted to (0, 1)
    v2_idx = interior[int(np.argmin(smooth[interior]))]
    v2 = x[v2_idx]

    def report(flag, v1=0.0, s=(0.0, 0.0, 0.0, 0.0)):
        return UShapeReport(
            v1=v1, v2=v2, u_flag=flag, s1=s[0], s2=s[1], s3=s[2], s4=s[3],
            smoother_df=lam,
        )

    if v2 > VALLEY_LIMIT:
        return report(False)

    below = np.arange(0, v2_idx)
    v1_idx = below[int(np.argmax(f[below]))]
    v1 = x[v1_idx]

    def snap(t):
        # nearest lattice point, half-up
        return int(np.floor(t * B + 0.5))

    mu1 = snap((v1 + v2) / 2)
    s1 = float(f[v1_idx : mu1 + 1].sum())
    s2 = float(f[mu1 + 1 : v2_idx + 1].sum())
    mu2 = snap((v2 + 1.0) / 2)
    s3 = float(f[v2_idx : mu2 + 1].sum())
    s4 = float(f[mu2 + 1 : B + 1].sum())
    flag = not (s1 < s2 or s3 > s4)
    rep = report(flag, v1, (s1, s2, s3, s4))
    return rep
