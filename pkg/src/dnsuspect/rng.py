"""Deterministic random-stream splitting.

Every random choice in the pipeline draws from a generator derived from the
single run seed plus a label path, e.g. ``stream(seed, "kmeans", segment, k)``.
A stage re-run in isolation therefore sees exactly the bits it saw inside the
full run, and two runs with the same seed are bit-identical.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_key(label: object) -> int:
    if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
        return int(label)
    digest = hashlib.sha256(str(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def stream(seed: int, *labels: object) -> np.random.Generator:
    """Return the generator for ``seed`` split by the given label path."""
    ss = np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(_label_key(lab) for lab in labels)
    )
    return np.random.Generator(np.random.PCG64(ss))
