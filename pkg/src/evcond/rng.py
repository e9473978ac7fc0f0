"""Counter-based random streams.

Every consumer derives its generator from ``(master seed, purpose, index)``
so results do not depend on scheduling or worker count.
"""

import numpy as np

# purpose tags keep streams for different jobs disjoint
LIMIT = 1
SAMPLE = 2
TABLE2 = 3


def stream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(purpose), int(index)))
    return np.random.Generator(np.random.Philox(ss))
