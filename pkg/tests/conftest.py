"""Shared test helpers."""

from __future__ import annotations

import numpy as np
import pytest

from qcsync.estimator import ClockDifferencePoint, ClockDifferenceSeries


def make_series(values, epoch_s=1.0, sigma=None):
    """Synthetic clock-difference series; None entries become gap epochs."""
    points = []
    for k, v in enumerate(values):
        t = k * epoch_s
        if v is None:
            points.append(ClockDifferencePoint(t, None, None, None))
        else:
            points.append(
                ClockDifferencePoint(
                    t, float(v), 0.0, float(v), delta_sigma_ps=sigma
                )
            )
    return ClockDifferenceSeries(epoch_length_s=epoch_s, points=points)


@pytest.fixture
def rng():
    return np.random.default_rng(20250811)
