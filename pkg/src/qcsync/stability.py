"""Time-deviation (TDEV) stability analysis of clock-difference series.

For evenly spaced phase samples x_1..x_N at interval tau0 and averaging
factor m, the overlapping estimator used throughout is

    TDEV(m*tau0)^2 = 1 / (6 m^2 (N - 3m + 1))
                     * sum_{i=1}^{N-3m+1} [ sum_{j=i}^{i+m-1}
                         (x_{j+2m} - 2 x_{j+m} + x_j) ]^2

which vanishes on constants and exact linear ramps, scales like
tau^{-1/2} on white phase noise, and equals the sample sigma at m = 1 for
i.i.d. noise.  Gaps are refused, never interpolated: silent interpolation
would mask exactly the attack artifacts this statistic is meant to expose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import ConfigurationError, GapError

__all__ = [
    "TdevPoint",
    "TdevCurve",
    "tdev",
    "default_m_grid",
    "estimate_step_shift",
]


@dataclass(frozen=True)
class TdevPoint:
    m: int
    tau_s: float
    tdev_ps: float
    n_terms: int


@dataclass
class TdevCurve:
    tau0_s: float
    points: List[TdevPoint]

    def taus(self):
        return np.array([p.tau_s for p in self.points])

    def values(self):
        return np.array([p.tdev_ps for p in self.points])

    def nearest(self, tau_s):
        """Curve point whose averaging time is closest to ``tau_s``."""
        if not self.points:
            raise ConfigurationError("empty TDEV curve")
        idx = int(np.argmin(np.abs(self.taus() - tau_s)))
        return self.points[idx]

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("tau_s,tdev_ps,m,n_terms\n")
            for p in self.points:
                fh.write(f"{p.tau_s!r},{p.tdev_ps!r},{p.m},{p.n_terms}\n")


def default_m_grid(n):
    """Octave-spaced averaging factors {1, 2, 4, ...} up to (n-1)//3."""
    if n < 4:
        raise ConfigurationError("need at least 4 samples for a TDEV grid")
    top = (n - 1) // 3
    grid = []
    m = 1
    while m <= top:
        grid.append(m)
        m *= 2
    return grid


def tdev(x, tau0_s, m_values=None):
    """TDEV curve of an evenly spaced, gap-free phase series (ps in, ps out).

    Parameters
    ----------
    x : sequence of phase values, picoseconds
    tau0_s : base sampling interval, seconds
    m_values : averaging factors; defaults to the octave grid

    Raises ConfigurationError on a too-short series or an out-of-range m,
    and GapError when the series contains NaN gaps.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ConfigurationError("series must be one-dimensional")
    n = x.size
    if n < 4:
        raise ConfigurationError("series must contain at least 4 samples")
    if np.any(np.isnan(x)):
        raise GapError("series contains gaps; TDEV refuses to interpolate")
    if not np.all(np.isfinite(x)):
        raise ConfigurationError("series must be finite")
    if not (tau0_s > 0 and math.isfinite(tau0_s)):
        raise ConfigurationError("tau0_s must be > 0")

    if m_values is None:
        m_values = default_m_grid(n)
    m_values = [int(m) for m in m_values]
    top = (n - 1) // 3
    points = []
    for m in m_values:
        if not (1 <= m <= top):
            raise ConfigurationError(f"m={m} outside valid range [1, {top}] for N={n}")
        d = x[2 * m :] - 2.0 * x[m : n - m] + x[: n - 2 * m]
        csum = np.concatenate(([0.0], np.cumsum(d)))
        inner = csum[m:] - csum[: csum.size - m]
        n_terms = n - 3 * m + 1
        tvar = float(np.dot(inner, inner)) / (6.0 * m * m * n_terms)
        points.append(
            TdevPoint(m=m, tau_s=m * tau0_s, tdev_ps=math.sqrt(tvar), n_terms=n_terms)
        )
    return TdevCurve(tau0_s=tau0_s, points=points)


def estimate_step_shift(series, split_time_s):
    """Mean clock difference after a split time minus the mean before it.

    This is how the residual skew of a step-type attack is reported: the
    series is split at the (known or suspected) onset and the two sides are
    averaged.  Gap epochs are ignored; each side must keep at least 10
    usable points.
    """
    before = [
        p.delta_ps
        for p in series.points
        if not p.is_gap and p.epoch_start_s < split_time_s
    ]
    after = [
        p.delta_ps
        for p in series.points
        if not p.is_gap and p.epoch_start_s >= split_time_s
    ]
    if len(before) < 10 or len(after) < 10:
        raise ConfigurationError(
            f"need >= 10 usable epochs on each side of the split "
            f"(got {len(before)} before, {len(after)} after)"
        )
    return float(np.mean(after) - np.mean(before))
