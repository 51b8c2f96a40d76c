"""Labelled random streams.

Every module that needs randomness gets its own generator derived from the
scenario seed and a fixed label, so adding a consumer never perturbs the
stream of another one.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(label.encode("utf-8"))]))
