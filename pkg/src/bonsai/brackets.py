"""Zoned bracket table: symbol -> (zone, row, column) layout built from a
symbol distribution, Huffman codes for rows and zones, and the change-value /
split / merge codec steps."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import BonsaiError, DecodeError, ParameterError, SymbolDistribution, SystemConfig


def huffman(probabilities: Sequence) -> list[str]:
    """Canonical Huffman codewords for the given weights.

    Merging is deterministic: ties by lowest index, merged nodes after leaves
    of equal weight. Codewords are then reassigned canonically by
    (length, index). A single item gets the degenerate code "0".
    """
    n = len(probabilities)
    if n == 0 or all(p == 0 for p in probabilities):
        raise ParameterError("need at least one positive weight")
    if n == 1:
        return ["0"]

    # heap entries: (weight, merged_flag, tiebreak_index, leaf_indices)
    heap = [(Fraction(p), 0, i, [i]) for i, p in enumerate(probabilities)]
    heapq.heapify(heap)
    lengths = [0] * n
    counter = n
    while len(heap) > 1:
        w1, _, _, l1 = heapq.heappop(heap)
        w2, _, _, l2 = heapq.heappop(heap)
        for i in l1 + l2:
            lengths[i] += 1
        heapq.heappush(heap, (w1 + w2, 1, counter, l1 + l2))
        counter += 1

    codes = [""] * n
    code = 0
    prev_len = None
    for i in sorted(range(n), key=lambda i: (lengths[i], i)):
        if prev_len is not None:
            code = (code + 1) << (lengths[i] - prev_len)
        codes[i] = format(code, f"0{lengths[i]}b")
        prev_len = lengths[i]
    return codes


@dataclass(frozen=True)
class BracketTable:
    """Bijection alphabet <-> (zone, row, col) plus the row and zone codes."""

    k: int
    zones_enabled: bool
    rows: int  # rows per zone
    cols: int  # columns per zone (the Bid domain)
    layout: dict  # symbol -> (zone, row, col)
    inverse: dict  # (zone, row, col) -> symbol
    sid_codes: tuple[str, ...]  # one per row index
    vid_codes: tuple[str, ...]  # one per zone (empty tuple when zones disabled)
    _sid_decode: dict = field(repr=False, default_factory=dict)
    _vid_decode: dict = field(repr=False, default_factory=dict)

    @property
    def bid_bits(self) -> int:
        return max(1, (self.cols - 1).bit_length())

    def zone_of(self, symbol: int) -> int:
        return self.layout[symbol][0]


def build_table(dist: SymbolDistribution, config: SystemConfig) -> BracketTable:
    """Place symbols rows-first, most probable first, and derive the codes.

    With zones enabled the grid is four zones of 2^(k/2-1) x 2^(k/2-1),
    filled top-left, top-right, bottom-left, bottom-right; row weights are
    summed across zones. With zones disabled there is a single
    2^(k/2) x 2^(k/2) grid.
    """
    k = config.k
    n = 1 << k
    if len(dist) != n:
        raise ParameterError(f"distribution must have {n} entries")
    if config.zones_enabled:
        side = 1 << (k // 2 - 1)
        zones = 4
    else:
        side = 1 << (k // 2)
        zones = 1

    order = sorted(range(n), key=lambda s: (-dist.probs[s], s))
    layout = {}
    inverse = {}
    per_zone = side * side
    for idx, sym in enumerate(order):
        zone, within = divmod(idx, per_zone)
        row, col = divmod(within, side)
        layout[sym] = (zone, row, col)
        inverse[(zone, row, col)] = sym

    row_probs = [Fraction(0)] * side
    zone_probs = [Fraction(0)] * zones
    for sym, (zone, row, _col) in layout.items():
        row_probs[row] += dist.probs[sym]
        zone_probs[zone] += dist.probs[sym]

    sid_codes = tuple(huffman(row_probs))
    vid_codes = tuple(huffman(zone_probs)) if config.zones_enabled else ()
    return BracketTable(
        k=k,
        zones_enabled=config.zones_enabled,
        rows=side,
        cols=side,
        layout=layout,
        inverse=inverse,
        sid_codes=sid_codes,
        vid_codes=vid_codes,
        _sid_decode={c: i for i, c in enumerate(sid_codes)},
        _vid_decode={c: i for i, c in enumerate(vid_codes)},
    )


@dataclass(frozen=True)
class CloudDeviation:
    """The per-record reversal data produced by the server-side codec."""

    addendum: str  # concatenated row codewords, one per symbol
    changed_values: str  # concatenated zone codewords, one per symbol
    change: object  # swaps.Change


def change_values(outsource: Sequence[int], table: BracketTable) -> tuple[list[int], str]:
    """Replace every symbol by its zone-1 counterpart at the same (row, col),
    appending the symbol's zone codeword to the changed-values string."""
    if not table.zones_enabled:
        raise ParameterError("change_values requires zones")
    result = []
    cv = []
    for s in outsource:
        zone, row, col = table.layout[s]
        result.append(table.inverse[(0, row, col)])
        cv.append(table.vid_codes[zone])
    return result, "".join(cv)


def split(symbols: Sequence[int], table: BracketTable) -> tuple[list[int], str]:
    """Separate each symbol into its column index and its row codeword."""
    bids = []
    addendum = []
    for s in symbols:
        zone, row, col = table.layout[s]
        if table.zones_enabled and zone != 0:
            raise BonsaiError(f"symbol {s} not in the first zone after change_values")
        bids.append(col)
        addendum.append(table.sid_codes[row])
    return bids, "".join(addendum)


def _decode_codewords(bits: str, decode_map: dict, count: int, what: str) -> list[int]:
    out = []
    pos = 0
    max_len = max((len(c) for c in decode_map), default=0)
    for _ in range(count):
        end = pos
        while True:
            end += 1
            if end - pos > max_len or end > len(bits):
                raise DecodeError(f"invalid {what} codeword at bit {pos}")
            idx = decode_map.get(bits[pos:end])
            if idx is not None:
                out.append(idx)
                pos = end
                break
    return out


def merge(
    bid_string: Sequence[int], addendum: str, changed_values: str, table: BracketTable
) -> list[int]:
    """Inverse of change_values followed by split."""
    n = len(bid_string)
    rows = _decode_codewords(addendum, table._sid_decode, n, "row")
    if table.zones_enabled:
        zones = _decode_codewords(changed_values, table._vid_decode, n, "zone")
    else:
        zones = [0] * n
    out = []
    for bid, row, zone in zip(bid_string, rows, zones):
        try:
            out.append(table.inverse[(zone, row, bid)])
        except KeyError:
            raise DecodeError(f"no symbol at zone={zone} row={row} col={bid}")
    return out
