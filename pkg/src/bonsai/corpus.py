"""Synthetic corpus generation: a first-order Markov symbol source with
tunable redundancy, so experiment sweeps are reproducible without large
proprietary datasets."""

from __future__ import annotations

import random


def markov_bytes(
    n_bytes: int,
    stickiness: float = 0.9,
    active_symbols: int = 16,
    seed: int = 0,
) -> bytes:
    """Byte stream where each symbol repeats the previous one with probability
    `stickiness` and otherwise jumps to one of `active_symbols` values.

    Higher stickiness and fewer active symbols mean lower entropy and more
    deduplication potential.
    """
    rng = random.Random(seed)
    pool = [(i * 251) % 256 for i in range(active_symbols)]
    out = bytearray(n_bytes)
    current = pool[0]
    for i in range(n_bytes):
        if rng.random() >= stickiness:
            current = pool[rng.randrange(active_symbols)]
        out[i] = current
    return bytes(out)
