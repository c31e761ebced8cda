"""Seeded random streams.

Every stream is a Philox4x64-10 counter-based generator whose 128-bit key is
drawn from ``SeedSequence([seed, domain, index])``.  A question, a path or an
agent therefore owns an independent stream addressed by its index, and results
do not depend on the order or chunking in which streams are consumed.
"""

from __future__ import annotations

import os

import numpy as np

ARRIVALS = 1
AGENT = 2
BROWNIAN = 3
WALK = 4
SAMPLES = 5

SEED_ENV = "STOPWAIT_SEED"
_MASK = (1 << 64) - 1


def stream(seed: int, domain: int, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & _MASK, domain, int(index)])
    return np.random.Generator(np.random.Philox(key=ss.generate_state(2, np.uint64)))


def default_seed(explicit: int | None = None) -> int:
    """``explicit`` if given, else ``$STOPWAIT_SEED``, else 0."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return 0
