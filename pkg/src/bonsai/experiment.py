"""Deletion-count sweeps over a corpus.

The full per-chunk pipeline (seeded deletions, invert selection, table split,
sort, swap extraction) runs in a batch kernel over numpy arrays, compiled with
numba when available. The kernel mirrors the reference implementation in
client.py / engine.py step for step; a test cross-checks the two on the same
inputs. Distances are compared in float64 here instead of exact rationals,
which can only matter on near-exact ties.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import metrics
from .brackets import BracketTable, build_table
from .core import ParameterError, SymbolDistribution, SystemConfig
from .prng import splitmix64_next
from .swaps import position_bits

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is normally installed
    def njit(**_kw):
        return lambda f: f

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


def symbols_from_bytes(data: bytes, k: int) -> np.ndarray:
    """Split a byte string into k-bit symbols, high bits first."""
    if 8 % k != 0:
        raise ParameterError("k must divide 8 to chunk a byte stream")
    raw = np.frombuffer(data, dtype=np.uint8)
    if k == 8:
        return raw.copy()
    bits = np.unpackbits(raw).reshape(-1, k)
    weights = (1 << np.arange(k - 1, -1, -1)).astype(np.uint8)
    return (bits * weights).sum(axis=1).astype(np.uint8)


def table_arrays(table: BracketTable, n_symbols: int):
    """Flatten the table into per-symbol lookup arrays: column index, row
    codeword length, zone codeword length."""
    col_of = np.zeros(n_symbols, np.int64)
    sid_bits = np.zeros(n_symbols, np.int64)
    vid_bits = np.zeros(n_symbols, np.int64)
    for s in range(n_symbols):
        zone, row, col = table.layout[s]
        col_of[s] = col
        sid_bits[s] = len(table.sid_codes[row])
        if table.zones_enabled:
            vid_bits[s] = len(table.vid_codes[zone])
    return col_of, sid_bits, vid_bits


@njit(cache=True)
def _pipeline_batch(chunks, seeds, n_del, policy, col_of, sid_bits, vid_bits, hist, stats, symhist):
    """Per chunk: pick the best of 2t candidates, then compute its column
    histogram, swap count, and addendum / changed-value bit totals."""
    n_chunks, n_o = chunks.shape
    t = seeds.shape[1]
    n_symbols = policy.shape[0]
    n_b = n_o - n_del
    cols = hist.shape[1]
    n_o_u = np.uint64(n_o)
    seen = np.zeros((t, n_o), np.bool_)
    counts = np.zeros(n_symbols, np.int64)
    bids = np.zeros(n_b, np.int64)
    base = np.zeros(n_b, np.int64)
    work = np.zeros(n_b, np.int64)
    for c in range(n_chunks):
        seen[:, :] = False
        best_d = 1e300
        best_seed = 0
        best_inv = False
        for si in range(t):
            state = seeds[c, si]
            got = 0
            while got < n_del:
                state = state + _GAMMA
                z = state
                z = (z ^ (z >> _S30)) * _M1
                z = (z ^ (z >> _S27)) * _M2
                z = z ^ (z >> _S31)
                p = int(z % n_o_u)
                if not seen[si, p]:
                    seen[si, p] = True
                    got += 1
            counts[:] = 0
            for i in range(n_o):
                if not seen[si, i]:
                    counts[chunks[c, i]] += 1
            d_plain = 0.0
            d_inv = 0.0
            for s in range(n_symbols):
                e_plain = counts[s] / n_b - policy[s]
                e_inv = counts[n_symbols - 1 - s] / n_b - policy[s]
                d_plain += e_plain * e_plain
                d_inv += e_inv * e_inv
            # same candidate order and strict comparison as the reference
            if d_plain < best_d:
                best_d = d_plain
                best_seed = si
                best_inv = False
            if d_inv < best_d:
                best_d = d_inv
                best_seed = si
                best_inv = True
        add_bits = 0
        cv_bits = 0
        pos = 0
        for i in range(n_o):
            if not seen[best_seed, i]:
                s = int(chunks[c, i])
                if best_inv:
                    s = n_symbols - 1 - s
                symhist[s] += 1
                add_bits += sid_bits[s]
                cv_bits += vid_bits[s]
                col = col_of[s]
                bids[pos] = col
                hist[c, col] += 1
                pos += 1
        bp = 0
        for col in range(cols):
            for _ in range(hist[c, col]):
                base[bp] = col
                bp += 1
        for i in range(n_b):
            work[i] = bids[i]
        n_swaps = 0
        for j in range(n_b):
            if work[j] != base[j]:
                kk = j + 1
                while not (work[kk] == base[j] and work[kk] != base[kk]):
                    kk += 1
                tmp = work[j]
                work[j] = work[kk]
                work[kk] = tmp
                n_swaps += 1
        stats[c, 0] = n_swaps
        stats[c, 1] = add_bits
        stats[c, 2] = cv_bits


def run_batch(chunks: np.ndarray, seeds: np.ndarray, n_del: int, policy_f: np.ndarray, table: BracketTable):
    """Run the batch kernel; returns (column histograms, per-chunk stats,
    received-symbol histogram)."""
    n_symbols = policy_f.shape[0]
    col_of, sid_bits, vid_bits = table_arrays(table, n_symbols)
    hist = np.zeros((chunks.shape[0], table.cols), np.int32)
    stats = np.zeros((chunks.shape[0], 3), np.int64)
    symhist = np.zeros(n_symbols, np.int64)
    _pipeline_batch(
        np.ascontiguousarray(chunks, np.uint8),
        np.ascontiguousarray(seeds, np.uint64),
        n_del,
        policy_f,
        col_of,
        sid_bits,
        vid_bits,
        hist,
        stats,
        symhist,
    )
    return hist, stats, symhist


def make_seeds(n_chunks: int, t: int, master_seed: int = 1) -> np.ndarray:
    """Deterministic per-chunk seed lists from one master seed."""
    out = np.zeros((n_chunks, t), np.uint64)
    state = master_seed & 0xFFFFFFFFFFFFFFFF
    for c in range(n_chunks):
        for i in range(t):
            value, state = splitmix64_next(state)
            out[c, i] = value
    return out


def smoothed_distribution(symbols: np.ndarray, k: int) -> SymbolDistribution:
    """Add-one smoothed symbol distribution of a corpus, as exact rationals."""
    n = 1 << k
    counts = np.bincount(symbols, minlength=n)
    total = int(counts.sum())
    return SymbolDistribution(tuple(Fraction(int(c) + 1, total + n) for c in counts))


def forest_size_from_bases(bases: np.ndarray, bid_bits: int, s_p: int) -> tuple[int, int, int]:
    """Trie size for a set of equal-length bases without building the trie.

    Rows must be the base sequences. Returns (node_count, leaf_count, bits);
    nodes are counted as distinct nonempty prefixes of the sorted rows.
    """
    if bases.size == 0:
        return 0, 0, 0
    uniq = np.unique(bases, axis=0)
    n_b = uniq.shape[1]
    node_count = n_b  # first row contributes a full path
    if uniq.shape[0] > 1:
        neq = uniq[1:] != uniq[:-1]
        first_diff = np.argmax(neq, axis=1)  # rows are distinct, so valid
        node_count += int((n_b - first_diff).sum())
    leaf_count = uniq.shape[0]
    bits = node_count * (bid_bits + 8) + leaf_count * s_p
    return node_count, leaf_count, bits


def hist_to_bases(hist: np.ndarray) -> np.ndarray:
    """Expand unique column histograms into sorted base sequences."""
    uniq = np.unique(hist, axis=0)
    n_b = int(uniq[0].sum())
    cols = np.arange(uniq.shape[1])
    out = np.zeros((uniq.shape[0], n_b), np.int64)
    for i in range(uniq.shape[0]):
        out[i] = np.repeat(cols, uniq[i])
    return out


def _deviation_record_bits(k: int, n_del: int) -> int:
    value_bytes = (n_del + 1) // 2 if k == 4 else n_del
    return (8 + 8 + 1 + 4 + value_bytes) * 8


def sweep_deletions(
    data: bytes,
    k: int,
    n_o: int,
    n_del_values,
    t: int = 2,
    zones_enabled: bool | None = None,
    master_seed: int = 1,
) -> list[metrics.CompressionReport]:
    """One compression report per deletion count over the same corpus.

    The policy and bracket table are derived once from the whole corpus
    (a warmed-up server) and held fixed across the sweep.
    """
    symbols = symbols_from_bytes(data, k)
    n_chunks = symbols.size // n_o
    if n_chunks == 0:
        raise ParameterError("corpus smaller than one chunk")
    chunks = symbols[: n_chunks * n_o].reshape(n_chunks, n_o)
    seeds = make_seeds(n_chunks, t, master_seed)
    dist = smoothed_distribution(symbols, k)
    policy_f = np.array([float(p) for p in dist.probs])

    reports = []
    for n_del in n_del_values:
        config = SystemConfig(k=k, n_o=n_o, n_b=n_o - n_del, t=t, zones_enabled=zones_enabled)
        table = build_table(dist, config)
        hist, stats, symhist = run_batch(chunks, seeds, n_del, policy_f, table)
        bases = hist_to_bases(hist)
        _nodes, _leaves, forest_bits = forest_size_from_bases(
            bases, table.bid_bits, config.s_p
        )
        total_swaps = int(stats[:, 0].sum())
        change_bits = n_chunks * config.n_b + total_swaps * position_bits(config.n_b)
        received = symhist / symhist.sum()
        reports.append(
            metrics.measured_report(
                config,
                n_f=n_chunks,
                client_bits=n_chunks * _deviation_record_bits(k, n_del),
                addendum_bits=int(stats[:, 1].sum()),
                change_bits=change_bits,
                changed_value_bits=int(stats[:, 2].sum()),
                forest_bits=forest_bits,
                mean_swaps=total_swaps / n_chunks,
                entropy=metrics.distribution_entropy(received),
            )
        )
    return reports
