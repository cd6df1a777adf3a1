"""Seeded random-number streams.

Every stochastic operation in the package draws from a stream derived from
(seed, tag, index...) so that results depend only on the seed and the logical
position of the draw, never on evaluation order or worker count.
"""

from __future__ import annotations

import numpy as np

# Tags are hashed into the seed sequence; strings are folded to ints so the
# derivation is stable across processes.


def _fold(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFF
    if isinstance(tag, str):
        h = 2166136261
        for ch in tag.encode("utf8"):
            h = ((h ^ ch) * 16777619) & 0xFFFFFFFF
        return h
    raise TypeError(f"unsupported stream tag {tag!r}")


def substream(seed: int, *tags) -> np.random.Generator:
    """Return an independent generator for (seed, *tags).

    Streams with different tag paths are statistically independent; the same
    path always yields the same stream.
    """
    key = tuple(_fold(t) for t in tags)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=key))
