"""Deterministic random-stream derivation.

Every stochastic step in the benchmark draws from its own generator,
derived from the master seed and a tuple of context parts (family tag,
support size, trial index, purpose tag, ...). Streams are therefore
independent of execution order and of how work is split across threads,
and reruns are bit-identical.

Stream contract, fixed so golden files stay portable: the decimal master
seed and the ``str()`` of each part are joined with ``"|"``, hashed with
BLAKE2b (16-byte digest), and the big-endian integer digest seeds numpy's
default generator (PCG64).
"""
from __future__ import annotations

from hashlib import blake2b

import numpy as np


def derive_rng(master_seed: int, *parts: object) -> np.random.Generator:
    """Generator for the stream identified by ``(master_seed, *parts)``."""
    key = "|".join([str(int(master_seed)), *(str(p) for p in parts)])
    digest = blake2b(key.encode("utf-8"), digest_size=16).digest()
    return np.random.default_rng(int.from_bytes(digest, "big"))
