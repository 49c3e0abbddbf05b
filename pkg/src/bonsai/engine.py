"""Server-side pipeline: policy setup, deduplication of received outsources,
record storage, and decompression."""

from __future__ import annotations

import json
import os
import struct
import threading
from dataclasses import dataclass
from fractions import Fraction

from . import brackets, swaps
from .core import (
    BitReader,
    BitWriter,
    ConflictError,
    NotFoundError,
    ParameterError,
    Policy,
    SymbolDistribution,
    SystemConfig,
)
from .forest import BaseForest


@dataclass(frozen=True)
class StoredRecord:
    """Everything the server keeps for one upload besides the shared base."""

    file_id: int
    table_version: int
    base_pointer: int
    addendum: str  # row codewords, one per symbol
    change: swaps.Change
    changed_values: str  # zone codewords, one per symbol (empty without zones)


@dataclass
class OpCounter:
    """Elementary-operation counts for complexity validation."""

    symbol_ops: int = 0  # per-symbol table work (change values + split + merge)
    sort_comparisons: int = 0
    swap_ops: int = 0
    forest_touches: int = 0

    @property
    def total(self) -> int:
        return self.symbol_ops + self.sort_comparisons + self.swap_ops + self.forest_touches


def _counting_mergesort(seq, counter: OpCounter):
    if len(seq) <= 1:
        return list(seq)
    mid = len(seq) // 2
    left = _counting_mergesort(seq[:mid], counter)
    right = _counting_mergesort(seq[mid:], counter)
    out = []
    i = j = 0
    while i < len(left) and j < len(right):
        counter.sort_comparisons += 1
        if left[i] <= right[j]:
            out.append(left[i])
            i += 1
        else:
            out.append(right[j])
            j += 1
    out.extend(left[i:])
    out.extend(right[j:])
    return out


class CloudEngine:
    """Holds the forest, the per-upload records, the raw symbol histogram the
    policy is derived from, and the versioned bracket tables.

    Writers (dedup, setup) take the exclusive lock; decompress takes it too,
    which trivially satisfies the single-writer/multi-reader contract.
    """

    def __init__(self, config: SystemConfig, setup_interval: int | None = 10_000):
        self.config = config
        self.setup_interval = setup_interval
        self.forest = BaseForest(config.n_b)
        self.records: dict[int, StoredRecord] = {}
        self.histogram = [0] * config.alphabet_size
        self.tables: dict[int, tuple[Policy, brackets.BracketTable]] = {}
        self.active_version = -1
        self._uploads_since_setup = 0
        self._version_counts: dict[int, list[int]] = {}
        self._lock = threading.RLock()
        self.last_ops: OpCounter | None = None
        self.setup()

    @property
    def active_policy(self) -> Policy:
        return self.tables[self.active_version][0]

    @property
    def active_table(self) -> brackets.BracketTable:
        return self.tables[self.active_version][1]

    def setup(self) -> Policy:
        """Derive a fresh policy from the Laplace-smoothed symbol histogram
        and rebuild the bracket table. Old table versions stay available so
        existing records remain decodable."""
        with self._lock:
            n = self.config.alphabet_size
            total = sum(self.histogram)
            dist = SymbolDistribution(
                tuple(Fraction(c + 1, total + n) for c in self.histogram)
            )
            policy = Policy(dist, self.config.n_b)
            table = brackets.build_table(dist, self.config)
            self.active_version += 1
            self.tables[self.active_version] = (policy, table)
            self._version_counts[self.active_version] = list(self.histogram)
            self._uploads_since_setup = 0
            return policy

    def dedup(self, file_id: int, outsource, instrument: bool = False) -> StoredRecord:
        """Transform an outsource into (base pointer, addendum, change,
        changed values) and store the record."""
        with self._lock:
            if len(outsource) != self.config.n_b:
                raise ParameterError(
                    f"outsource length {len(outsource)} != n_b={self.config.n_b}"
                )
            if file_id in self.records:
                raise ConflictError(f"file id {file_id} already stored")
            counter = OpCounter() if instrument else None
            table = self.active_table
            if table.zones_enabled:
                chnv, cv = brackets.change_values(outsource, table)
            else:
                chnv, cv = list(outsource), ""
            bids, addendum = brackets.split(chnv, table)
            if counter:
                counter.symbol_ops += 2 * len(outsource)
                base = _counting_mergesort(bids, counter)
            else:
                base = swaps.sort_bids(bids)
            swap_list = swaps.find_swaps(bids, base)
            change = swaps.encode_change(swap_list, self.config.n_b)
            pointer, _was_new = self.forest.insert(base)
            if counter:
                counter.swap_ops += len(bids) + len(swap_list)
                counter.forest_touches += self.forest.last_touches
            record = StoredRecord(
                file_id=file_id,
                table_version=self.active_version,
                base_pointer=pointer,
                addendum=addendum,
                change=change,
                changed_values=cv,
            )
            self.records[file_id] = record
            for s in outsource:
                self.histogram[s] += 1
            self.last_ops = counter
            self._uploads_since_setup += 1
            if self.setup_interval and self._uploads_since_setup >= self.setup_interval:
                self.setup()
            return record

    def decompress(self, file_id: int, use_index: bool = True) -> list[int]:
        """Exact inverse of dedup for one stored record."""
        with self._lock:
            record = self.records.get(file_id)
            if record is None:
                raise NotFoundError(f"unknown file id {file_id}")
            _policy, table = self.tables[record.table_version]
            base = self.forest.get_base(record.base_pointer, use_index=use_index)
            bids = swaps.apply_change_inverse(base, record.change)
            return brackets.merge(bids, record.addendum, record.changed_values, table)

    def record_bits(self, record: StoredRecord) -> int:
        """Measured storage for one record: addendum + change + changed values
        plus the file id and base pointer."""
        return (
            len(record.addendum)
            + record.change.bit_size()
            + len(record.changed_values)
            + self.config.s_fid
            + self.config.s_p
        )

    def storage_bits(self) -> int:
        """Measured server storage: all records plus the forest."""
        table = self.active_table
        total = self.forest.size_bits(table.bid_bits, self.config.s_p)
        for record in self.records.values():
            total += self.record_bits(record)
        return total

    # Persistence: append-only record log plus forest snapshot plus metadata.

    def save(self, directory: str) -> None:
        with self._lock:
            os.makedirs(directory, exist_ok=True)
            with open(os.path.join(directory, "forest.bin"), "wb") as f:
                f.write(self.forest.serialize())
            meta = {
                "config": {
                    "k": self.config.k,
                    "n_o": self.config.n_o,
                    "n_b": self.config.n_b,
                    "t": self.config.t,
                    "s_seed": self.config.s_seed,
                    "s_fid": self.config.s_fid,
                    "s_p": self.config.s_p,
                    "zones_enabled": self.config.zones_enabled,
                },
                "histogram": self.histogram,
                "active_version": self.active_version,
                "version_counts": {str(v): c for v, c in self._version_counts.items()},
                "setup_interval": self.setup_interval,
            }
            with open(os.path.join(directory, "meta.json"), "w") as f:
                json.dump(meta, f)
            with open(os.path.join(directory, "records.log"), "wb") as f:
                for record in self.records.values():
                    f.write(_encode_record(record, self.config.n_b))

    @classmethod
    def load(cls, directory: str) -> "CloudEngine":
        with open(os.path.join(directory, "meta.json")) as f:
            meta = json.load(f)
        config = SystemConfig(**meta["config"])
        engine = cls.__new__(cls)
        engine.config = config
        engine.setup_interval = meta["setup_interval"]
        engine.records = {}
        engine.histogram = list(meta["histogram"])
        engine.tables = {}
        engine._version_counts = {}
        engine._lock = threading.RLock()
        engine.last_ops = None
        engine._uploads_since_setup = 0
        engine.active_version = meta["active_version"]
        n = config.alphabet_size
        for v_str, counts in meta["version_counts"].items():
            total = sum(counts)
            dist = SymbolDistribution(tuple(Fraction(c + 1, total + n) for c in counts))
            policy = Policy(dist, config.n_b)
            engine.tables[int(v_str)] = (policy, brackets.build_table(dist, config))
            engine._version_counts[int(v_str)] = list(counts)
        with open(os.path.join(directory, "forest.bin"), "rb") as f:
            engine.forest = BaseForest.deserialize(f.read())
        with open(os.path.join(directory, "records.log"), "rb") as f:
            data = f.read()
        pos = 0
        while pos < len(data):
            record, pos = _decode_record(data, pos, config.n_b)
            engine.records[record.file_id] = record
        return engine


def _encode_record(record: StoredRecord, n_b: int) -> bytes:
    out = bytearray(struct.pack("<QIQ", record.file_id, record.table_version, record.base_pointer))
    for bits in (record.addendum, record.changed_values):
        w = BitWriter()
        w.write(bits)
        payload = w.getvalue()
        out += struct.pack("<I", len(bits)) + payload
    change_bytes = swaps.encode_change_bytes(record.change)
    out += struct.pack("<I", len(change_bytes)) + change_bytes
    return bytes(out)


def _decode_record(data: bytes, pos: int, n_b: int) -> tuple[StoredRecord, int]:
    file_id, version, pointer = struct.unpack_from("<QIQ", data, pos)
    pos += 20
    strings = []
    for _ in range(2):
        (bitlen,) = struct.unpack_from("<I", data, pos)
        pos += 4
        nbytes = (bitlen + 7) // 8
        r = BitReader(data[pos : pos + nbytes], bitlen)
        strings.append("".join(r.read_bit() for _ in range(bitlen)))
        pos += nbytes
    (clen,) = struct.unpack_from("<I", data, pos)
    pos += 4
    change = swaps.decode_change_bytes(data[pos : pos + clen], n_b)
    pos += clen
    record = StoredRecord(file_id, version, pointer, strings[0], change, strings[1])
    return record, pos
