"""Sorting the column-index string into a base, extracting the reversing swap
list, and the bitmap-plus-positions encoding of the swap record."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

from .core import BitReader, BitWriter, BonsaiError, DecodeError, ParameterError


def position_bits(n_b: int) -> int:
    """Bits per recorded swap endpoint: ceil(log2 n_b), at least 1."""
    return max(1, (n_b - 1).bit_length())


@dataclass(frozen=True)
class Change:
    """Swap record: bit i of the bitmap marks a left endpoint, the positions
    array holds the matching right endpoints in recording order."""

    bitmap: tuple[bool, ...]
    positions: tuple[int, ...]

    @property
    def n_swaps(self) -> int:
        return len(self.positions)

    def bit_size(self) -> int:
        """Logical content size: bitmap plus packed right endpoints."""
        return len(self.bitmap) + len(self.positions) * position_bits(len(self.bitmap))


def sort_bids(bid_string: Sequence[int]) -> list[int]:
    """Stable ascending sort of the column-index string."""
    return sorted(bid_string)


def find_swaps(bid_string: Sequence[int], base: Sequence[int]) -> list[tuple[int, int]]:
    """Greedy cycle-sort-style swap extraction.

    Scans j left to right; whenever base[j] != work[j], swaps position j with
    the minimum position k holding the needed value (work[k] == base[j]) that
    is not already in place (work[k] != base[k]). Each swap fixes position j,
    so recorded pairs have strictly increasing left endpoints and j < k, and
    applying them in order to bid_string yields base.
    """
    import heapq as _heapq

    work = list(bid_string)
    if sorted(work) != list(base):
        raise BonsaiError("base is not the sorted version of bid_string")
    n = len(work)
    # per-value min-heaps of positions currently holding that value out of
    # place; entries are validated lazily on pop
    misplaced: dict[int, list[int]] = {}
    for idx in range(n):
        if work[idx] != base[idx]:
            misplaced.setdefault(work[idx], []).append(idx)
    for heap in misplaced.values():
        _heapq.heapify(heap)
    swaps = []
    for j in range(n):
        if base[j] != work[j]:
            heap = misplaced[base[j]]
            while True:
                k = _heapq.heappop(heap)
                if k > j and work[k] == base[j] and work[k] != base[k]:
                    break
            moved = work[j]
            work[j], work[k] = work[k], moved
            if moved != base[k]:
                _heapq.heappush(misplaced.setdefault(moved, []), k)
            swaps.append((j, k))
    return swaps


def encode_change(swaps: Sequence[tuple[int, int]], n_b: int) -> Change:
    bitmap = [False] * n_b
    positions = []
    for i, j in swaps:
        if bitmap[i]:
            raise BonsaiError(f"duplicate swap left endpoint {i}")
        if not 0 <= i < j < n_b:
            raise ParameterError(f"invalid swap pair ({i}, {j}) for n_b={n_b}")
        bitmap[i] = True
        positions.append(j)
    return Change(tuple(bitmap), tuple(positions))


def apply_change_inverse(base: Sequence[int], change: Change) -> list[int]:
    """Undo the recorded swaps (in reverse order) to recover the pre-sort
    bid string."""
    n = len(base)
    if len(change.bitmap) != n:
        raise DecodeError("change bitmap length mismatch")
    lefts = [i for i, b in enumerate(change.bitmap) if b]
    if len(lefts) != len(change.positions):
        raise DecodeError("positions count does not match bitmap popcount")
    if any(not 0 <= j < n for j in change.positions):
        raise DecodeError("swap right endpoint out of range")
    work = list(base)
    for i, j in reversed(list(zip(lefts, change.positions))):
        work[i], work[j] = work[j], work[i]
    return work


# Wire layout: bitmap bytes (MSB-first, zero padded), u16 LE swap count, then
# right endpoints packed at position_bits(n_b) bits each, zero padded.


def encode_change_bytes(change: Change) -> bytes:
    n_b = len(change.bitmap)
    w = BitWriter()
    for b in change.bitmap:
        w.write("1" if b else "0")
    out = bytearray(w.getvalue())
    out += struct.pack("<H", len(change.positions))
    pw = BitWriter()
    width = position_bits(n_b)
    for j in change.positions:
        pw.write_uint(j, width)
    out += pw.getvalue()
    return bytes(out)


def decode_change_bytes(data: bytes, n_b: int) -> Change:
    bitmap_bytes = (n_b + 7) // 8
    if len(data) < bitmap_bytes + 2:
        raise DecodeError("truncated change record")
    r = BitReader(data[:bitmap_bytes], n_b)
    bitmap = tuple(r.read_bit() == "1" for _ in range(n_b))
    (count,) = struct.unpack_from("<H", data, bitmap_bytes)
    width = position_bits(n_b)
    pos_bytes = (count * width + 7) // 8
    body = data[bitmap_bytes + 2 : bitmap_bytes + 2 + pos_bytes]
    if len(body) < pos_bytes:
        raise DecodeError("truncated change positions")
    pr = BitReader(body)
    positions = tuple(pr.read_uint(width) for _ in range(count))
    change = Change(bitmap, positions)
    if sum(bitmap) != count:
        raise DecodeError("positions count does not match bitmap popcount")
    return change
