"""Deterministic stream derivation from a single top-level seed.

Every random draw in the package flows from one integer seed through
``derive_rng(seed, component, *indices)``. The component name is hashed
with CRC-32 (stable across platforms and processes) so parallel workers
can derive their own streams without coordination.
"""

from __future__ import annotations

import zlib

import numpy as np


def derive_seedseq(seed: int, component: str, *indices: int) -> np.random.SeedSequence:
    tag = zlib.crc32(component.encode("utf-8"))
    return np.random.SeedSequence([int(seed), tag, *[int(i) for i in indices]])


def derive_rng(seed: int, component: str, *indices: int) -> np.random.Generator:
    return np.random.default_rng(derive_seedseq(seed, component, *indices))


def derive_seed(seed: int, component: str, *indices: int) -> int:
    """A stable integer subseed, for handing to components that reseed."""
    state = derive_seedseq(seed, component, *indices).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)

