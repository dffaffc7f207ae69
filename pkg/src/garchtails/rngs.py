"""Reproducible domain-separated RNG streams.

A master seed plus a sequence of labels (strings or integers) deterministically
identifies an independent numpy Generator.  Replicates get their own substream
from (master, command-label, replicate-index), so results do not depend on how
work is split across workers.
"""

from __future__ import annotations

import hashlib

import numpy as np

_U32 = 2**32


def _key_to_ints(key) -> list[int]:
    out = []
    for part in key:
        if isinstance(part, (int, np.integer)):
            out.append(int(part) % _U32)
        else:
            h = hashlib.sha256(str(part).encode()).digest()
            out.append(int.from_bytes(h[:4], "little"))
    return out


def stream(master_seed: int, *key) -> np.random.Generator:
    """Independent Generator for the given (master seed, label path)."""
    ss = np.random.SeedSequence([int(master_seed) % _U32] + _key_to_ints(key))
    return np.random.default_rng(ss)


def substreams(master_seed: int, *key, n: int) -> list[np.random.Generator]:
    """n independent replicate streams under one label path."""
    return [stream(master_seed, *key, i) for i in range(n)]
