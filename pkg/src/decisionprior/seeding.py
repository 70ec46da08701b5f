"""Deterministic, named random number streams.

All randomness in the package flows from a single integer seed through
labelled streams, e.g. ``rng_stream(seed, "chain", 2)``. Stream derivation
hashes the base seed together with the labels (SHA-256), so streams are
independent of each other, stable across runs and platforms, and two
consumers never share draws unless they ask for the same labels.

The generator is NumPy's PCG64, whose output for a given seed is part of
NumPy's compatibility guarantee.
"""

from __future__ import annotations

import hashlib

import numpy as np

Label = int | str


def derive_seed(base_seed: int, *labels: Label) -> int:
    """Derive a 64-bit child seed from a base seed and a label path."""
    material = repr(int(base_seed)) + "".join(f"/{label!r}" for label in labels)
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_stream(base_seed: int, *labels: Label) -> np.random.Generator:
    """Return a PCG64 generator for the stream named by ``labels``."""
    return np.random.Generator(np.random.PCG64(derive_seed(base_seed, *labels)))
