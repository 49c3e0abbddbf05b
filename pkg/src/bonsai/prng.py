"""Seeded deterministic pseudo-random generator and deletion-position draws.

SplitMix64 is used for its trivial portability and published test vectors;
re-implementations in any language reproduce the position streams bit for bit.
"""

from __future__ import annotations

from .core import ParameterError

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def splitmix64_next(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (output, next_state)."""
    state = (state + _GAMMA) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31), state


def deletion_positions(seed: int, n_o: int, count: int) -> list[int]:
    """First `count` distinct values of the stream (splitmix64 mod n_o).

    Positions index the original chunk and are returned in generation order,
    which is also the storage order of the deleted values.
    """
    if count > n_o:
        raise ParameterError(f"cannot pick {count} distinct positions out of {n_o}")
    state = seed & _MASK
    seen = set()
    out = []
    while len(out) < count:
        u, state = splitmix64_next(state)
        p = u % n_o
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out
