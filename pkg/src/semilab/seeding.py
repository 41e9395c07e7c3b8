"""Deterministic seed derivation for chunked, reproducible Monte Carlo.

Seeds are derived with BLAKE2b over a canonical, injective encoding of
(root_seed, *labels):

    8-byte little-endian root seed,
    then per label: tag byte (0x01 int / 0x02 str), 4-byte length, payload.

Integers encode as 8-byte two's-complement little-endian, strings as UTF-8.
The first 8 bytes of the digest, read little-endian, form the derived seed.
Identical inputs always give identical seeds; distinct label sequences give
independent-looking streams.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Union

import numpy as np

Label = Union[int, str]


def seed_derive(root_seed: int, labels: Iterable[Label] = ()) -> int:
    """Derive a 64-bit seed from a root seed and a sequence of labels."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(root_seed).to_bytes(8, "little", signed=True))
    for lab in labels:
        if isinstance(lab, bool):
            raise TypeError("bool labels are ambiguous; use int or str")
        if isinstance(lab, (int, np.integer)):
            payload = int(lab).to_bytes(8, "little", signed=True)
            h.update(b"\x01")
        elif isinstance(lab, str):
            payload = lab.encode("utf-8")
            h.update(b"\x02")
        else:
            raise TypeError(f"unsupported label type: {type(lab)!r}")
        h.update(len(payload).to_bytes(4, "little"))
        h.update(payload)
    return int.from_bytes(h.digest(), "little")


def rng_for(root_seed: int, labels: Iterable[Label] = ()) -> np.random.Generator:
    """NumPy Generator seeded by :func:`seed_derive`."""
    return np.random.default_rng(seed_derive(root_seed, labels))
