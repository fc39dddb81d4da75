#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Read the adjusted trajectory and boresight out of a solved graph."""

import numpy as np

from core.domain import Trajectory
from geometry import Rotation
from network.graph import FactorGraph


class NotEstimatedError(ValueError):
    """The boresight node was held fixed."""


def extract_trajectory(graph: FactorGraph, rate: float) -> Trajectory:
    """Keyframe poses densified by geodesic interpolation at a fixed rate.

    The output grid starts at the first keyframe and always contains the last one; every
    keyframe epoch that falls on the grid is reproduced verbatim.

    Raises:
        ValueError: a non-positive rate.
    """
    if rate <= 0.0:
        raise ValueError(f"Output rate must be positive, got {rate}")
    state = graph.state()
    t0, t1 = state.t[0], state.t[-1]
    count = int(np.floor((t1 - t0) * rate + 1e-6))
    times = t0 + np.arange(count + 1) / rate
    times = times[times < t1 - 1e-9]
    times = np.append(times, t1)
    # snap grid epochs onto keyframes within rounding
    near = np.searchsorted(state.t, times)
    for i, k in enumerate(near):
        for j in (k - 1, k):
            if 0 <= j < len(state.t) and abs(state.t[j] - times[i]) < 1e-9:
                times[i] = state.t[j]
    return state.at(times).trajectory()


def extract_boresight(graph: FactorGraph) -> Rotation:
    """Estimated mounting rotation.

    Raises:
        NotEstimatedError: the graph has no free boresight node.
    """
    if graph.boresight is None or graph.boresight.fixed:
        raise NotEstimatedError("Boresight was not estimated in this adjustment")
    return graph.boresight.rotation
