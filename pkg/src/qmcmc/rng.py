"""Counter-based random streams.

Every shot (and every noise trajectory) draws from an independent Philox
stream derived from ``(seed, shot_index)``.  Streams are counter-based, so
results do not depend on the order in which shots are evaluated: evaluating
shots concurrently, in batches, or one by one yields identical outcomes.
"""

from __future__ import annotations

import numpy as np

# Each shot owns a 2**128-block slice of the Philox counter space.
_SHOT_STRIDE = 1 << 128


def philox_key(seed) -> np.ndarray:
    """Derive a 128-bit Philox key from an integer seed or tuple of integers."""
    return np.random.SeedSequence(seed).generate_state(2, np.uint64)


def shot_rng(seed, shot_index: int) -> np.random.Generator:
    """Independent generator for one shot of one seeded run."""
    if shot_index < 0:
        raise ValueError("shot_index must be nonnegative")
    bitgen = np.random.Philox(key=philox_key(seed), counter=shot_index * _SHOT_STRIDE)
    return np.random.Generator(bitgen)


class ShotStreams:
    """Cheap iteration over the per-shot streams of one seeded run.

    Re-seats a single Philox counter instead of constructing a generator per
    shot; ``shot(s)`` yields draws identical to ``shot_rng(seed, s)``.  The
    returned generator is shared, so finish one shot before seating the next.
    """

    def __init__(self, seed):
        self._bitgen = np.random.Philox(key=philox_key(seed))
        self.generator = np.random.Generator(self._bitgen)
        self._state = self._bitgen.state

    def shot(self, shot_index: int) -> np.random.Generator:
        if not 0 <= shot_index < 2**64:
            raise ValueError("shot_index out of range")
        st = self._state
        st["state"]["counter"][:] = 0
        st["state"]["counter"][2] = shot_index  # units of 2**128 counter blocks
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self._bitgen.state = st
        return self.generator
