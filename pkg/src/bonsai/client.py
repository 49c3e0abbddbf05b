"""Client-side transformation: seeded deletions, invert, policy-distance
selection, and the inverse reconstruction used on retrieval."""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    DecodeError,
    ParameterError,
    Policy,
    SymbolDistribution,
    SystemConfig,
    pack_symbols,
    unpack_symbols,
)
from .prng import deletion_positions


@dataclass(frozen=True)
class ClientDeviation:
    """The locally kept secret needed to rebuild a chunk from its outsource."""

    seed: int
    invert_bit: bool
    deleted_values: tuple[int, ...]  # in PRNG emission order
    file_id: int


def delete_at(chunk: list[int], positions: list[int]) -> tuple[list[int], list[int]]:
    """Remove the symbols at the given original indices (simultaneously).

    Returns the shortened sequence and the deleted values in the order the
    positions were supplied.
    """
    n = len(chunk)
    if len(set(positions)) != len(positions):
        raise ParameterError("deletion positions must be distinct")
    if any(not 0 <= p < n for p in positions):
        raise ParameterError("deletion position out of range")
    dropped = set(positions)
    kept = [s for i, s in enumerate(chunk) if i not in dropped]
    return kept, [chunk[p] for p in positions]


def invert(symbols: list[int], k: int) -> list[int]:
    """Map each symbol to its complement 2^k - 1 - value (an involution)."""
    top = (1 << k) - 1
    return [top - s for s in symbols]


def frequency(symbols: list[int], k: int) -> SymbolDistribution:
    """Empirical symbol distribution of a nonempty sequence."""
    if not symbols:
        raise ParameterError("cannot take the frequency of an empty sequence")
    counts = [0] * (1 << k)
    for s in symbols:
        counts[s] += 1
    return SymbolDistribution.from_counts(counts)


def policy_distance(freq: SymbolDistribution, policy_dist: SymbolDistribution) -> float:
    """Euclidean distance between two symbol distributions."""
    return math.sqrt(float(_distance_sq(freq, policy_dist)))


def _distance_sq(freq: SymbolDistribution, policy_dist: SymbolDistribution) -> Fraction:
    if len(freq) != len(policy_dist):
        raise ParameterError("distribution length mismatch")
    return sum(
        (a - b) ** 2 for a, b in zip(freq.probs, policy_dist.probs)
    )


def _symbol_counts(symbols: list[int], n: int) -> list[int]:
    counts = [0] * n
    for s in symbols:
        counts[s] += 1
    return counts


def _scaled_policy(dist: SymbolDistribution) -> tuple[list[int], int]:
    """Policy probabilities as integers over one common denominator."""
    den = math.lcm(*(p.denominator for p in dist.probs))
    return [p.numerator * (den // p.denominator) for p in dist.probs], den


def transform(
    chunk: list[int],
    policy: Policy,
    seeds: list[int],
    config: SystemConfig,
    file_id: int | None = None,
) -> tuple[list[int], ClientDeviation]:
    """Pick, among 2t candidates (t seeded deletions and their inverts), the
    outsource closest to the policy distribution.

    Ties break deterministically: lowest seed index first, non-inverted before
    inverted. Distances are compared exactly: the squared distance is scaled
    by the common denominator of all terms, making it an integer. Inverting a
    candidate just reverses its count vector, so only the winner is
    materialized.
    """
    if len(seeds) != config.t:
        raise ParameterError(f"expected {config.t} seeds, got {len(seeds)}")
    if len(set(seeds)) != len(seeds):
        raise ParameterError("seeds must be pairwise distinct")
    if len(chunk) != config.n_o:
        raise ParameterError(f"chunk length {len(chunk)} != n_o={config.n_o}")
    if config.n_b < 1:
        raise ParameterError("cannot delete every symbol of a chunk")
    if file_id is None:
        file_id = int.from_bytes(os.urandom(8), "little")

    nums, den = _scaled_policy(policy.distribution)
    n_b = config.n_b
    best = None  # ((scaled dist_sq, seed_idx, inverted), kept, values, seed)
    for idx, seed in enumerate(seeds):
        positions = deletion_positions(seed, config.n_o, config.n_del)
        kept, values = delete_at(chunk, positions)
        counts = _symbol_counts(kept, config.alphabet_size)
        for inverted in (False, True):
            cand = counts[::-1] if inverted else counts
            d = sum((c * den - a * n_b) ** 2 for c, a in zip(cand, nums))
            key = (d, idx, inverted)
            if best is None or key < best[0]:
                best = (key, kept, values, seed)
    key, kept, values, seed = best
    outsource = invert(kept, config.k) if key[2] else kept
    deviation = ClientDeviation(
        seed=seed,
        invert_bit=key[2],
        deleted_values=tuple(values),
        file_id=file_id,
    )
    return outsource, deviation


def reconstruct(
    outsource: list[int], deviation: ClientDeviation, config: SystemConfig
) -> list[int]:
    """Exact inverse of transform: undo invert, then reinsert deleted values
    at their original indices."""
    if len(outsource) != config.n_o - len(deviation.deleted_values):
        raise DecodeError("outsource length inconsistent with deviation")
    symbols = list(outsource)
    if deviation.invert_bit:
        symbols = invert(symbols, config.k)
    positions = deletion_positions(
        deviation.seed, config.n_o, len(deviation.deleted_values)
    )
    chunk: list[int | None] = [None] * config.n_o
    for p, v in zip(positions, deviation.deleted_values):
        chunk[p] = v
    it = iter(symbols)
    for i in range(config.n_o):
        if chunk[i] is None:
            chunk[i] = next(it)
    return chunk


# Local deviation store: one fixed-layout binary record per chunk. This layout
# is also what UCR measurements count.
#   file_id u64 LE | seed u64 LE | invert u8 | count u32 LE | packed values


def encode_deviation(deviation: ClientDeviation, k: int) -> bytes:
    head = struct.pack(
        "<QQBI",
        deviation.file_id,
        deviation.seed,
        1 if deviation.invert_bit else 0,
        len(deviation.deleted_values),
    )
    return head + pack_symbols(deviation.deleted_values, k)


def decode_deviations(data: bytes, k: int) -> list[ClientDeviation]:
    out = []
    pos = 0
    head = struct.Struct("<QQBI")
    while pos < len(data):
        if pos + head.size > len(data):
            raise DecodeError("truncated deviation record")
        file_id, seed, inv, count = head.unpack_from(data, pos)
        pos += head.size
        nbytes = (count + 1) // 2 if k == 4 else count
        values = unpack_symbols(data[pos : pos + nbytes], count, k)
        pos += nbytes
        out.append(ClientDeviation(seed, bool(inv), tuple(values), file_id))
    return out
