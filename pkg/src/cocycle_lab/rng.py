"""Deterministic counter-based randomness.

Every random draw in the package flows from one 64-bit seed through the
derivation (seed, module tag, stream index) -> Philox stream, realized
as SeedSequence(entropy=seed, spawn_key=(tag, index)).  Streams for
distinct (tag, index) pairs are independent; regenerating a stream from
the same triple is bitwise reproducible, so Monte-Carlo samples never
need to be stored.
"""
from __future__ import annotations

import numpy as np

TAG_SCENARIO = 1        # primary Brownian increments, index = sample
TAG_SCENARIO_COPY = 2   # independent decoupling copy, index = sample
TAG_POINCARE = 3        # optimizer starts, index = start
TAG_BATTERY = 4         # random-element test batteries, index = instance


def stream(seed: int, tag: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(tag, index))
    return np.random.Generator(np.random.Philox(ss))
