#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Reproducible random streams."""

import numpy as np


def rng_stream(seed: int, *labels: int) -> np.random.Generator:
    """Return a counter-based generator for one (seed, stream, slice) tuple.

    Independent labels give statistically independent streams, so work split by time
    slice or by tile draws the same numbers whatever the thread count.

    Args:
        seed: run seed.
        labels: stream identifiers, e.g. a stage constant and a slice index.

    Returns:
        A numpy Generator backed by Philox.
    """
    sequence = np.random.SeedSequence([int(seed), *(int(label) for label in labels)])
    return np.random.Generator(np.random.Philox(sequence))
