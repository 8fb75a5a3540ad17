"""Seed derivation.

Every random stream is a ``numpy.random.Generator`` over PCG64 whose 64-bit seed is
derived from a master seed and a tuple of labels:

    seed = first 8 bytes (little endian) of BLAKE2b-256(
        str(master_seed) + "\\x1f" + "\\x1f".join(str(label) for label in labels))

Labels are things like ``("instance", family, n, index)``, so any stream can be
recreated in isolation without replaying the ones before it.
"""

from __future__ import annotations

import hashlib

import numpy as np

_SEP = "\x1f"


def derive_seed(master_seed: int, *labels) -> int:
    text = _SEP.join([str(int(master_seed))] + [str(label) for label in labels])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=32).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int, *labels) -> np.random.Generator:
    if labels:
        seed = derive_seed(seed, *labels)
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
