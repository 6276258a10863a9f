import numpy as np


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic 63-bit child seed of ``master`` for the integer path ``keys``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))
