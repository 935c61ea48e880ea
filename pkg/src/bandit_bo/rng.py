"""Named random streams split from one master seed.

Every draw in a run comes from a stream addressed by a name plus integer
coordinates (round, slot, category, ...). Because streams are derived, not
consumed sequentially, the order in which work is executed never changes
the numbers it sees.
"""

import numpy as np

_STREAM_IDS = {"init": 0, "noise": 1, "thompson": 2, "arm": 3, "random_search": 4}


def stream(seed, name, *key):
    """Return a fresh Generator for ``(seed, name, *key)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_STREAM_IDS[name],) + tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
