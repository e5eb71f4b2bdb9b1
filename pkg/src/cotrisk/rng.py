"""Seeded, counter-based random streams."""

import numpy as np


def stream(seed, *keys):
    """Return a Philox generator keyed by ``(seed, *keys)``.

    Distinct keys give statistically independent streams, so grid ``k`` of a
    replicated fit can be regenerated on its own.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
