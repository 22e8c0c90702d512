"""Counter-based random streams keyed by (master seed, path index, purpose).

Every path owns independent Philox streams, so results do not depend on how
paths are grouped into batches or threads.
"""

from __future__ import annotations

import numpy as np

NOISE = 0
INITIAL = 1
SAMPLES = 2
PERTURB = 3


def stream(seed: int, path: int = 0, purpose: int = NOISE) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(path), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))
