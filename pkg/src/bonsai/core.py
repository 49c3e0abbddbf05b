"""Core value types: symbols, packing, distributions, configuration, errors."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence


class BonsaiError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(BonsaiError):
    """An argument violates a precondition."""


class RangeError(ParameterError):
    """A symbol value does not fit the configured bit width."""


class DecodeError(BonsaiError):
    """An encoded artifact cannot be decoded."""


class ConflictError(BonsaiError):
    """An identifier is already in use."""


class NotFoundError(BonsaiError):
    """A requested identifier does not exist."""


class CapacityError(BonsaiError):
    """An exact computation would exceed the configured feasibility bound."""


class ProtocolError(BonsaiError):
    """A byte stream does not follow the wire protocol."""


@dataclass(frozen=True)
class SystemConfig:
    """Global parameters shared by client and server.

    k is the symbol width in bits (even, presets 4 and 8), n_o the number of
    symbols per original chunk, n_b the number of symbols actually uploaded,
    and t the number of candidate seeds tried per chunk.
    """

    k: int
    n_o: int
    n_b: int
    t: int = 2
    s_seed: int = 64
    s_fid: int = 64
    s_p: int = 64
    zones_enabled: bool | None = None

    def __post_init__(self):
        if self.k < 2 or self.k % 2 != 0:
            raise ParameterError(f"k must be even and >= 2, got {self.k}")
        if not self.n_b <= self.n_o:
            raise ParameterError(f"need n_b <= n_o, got n_b={self.n_b} n_o={self.n_o}")
        if self.t < 1:
            raise ParameterError("t must be >= 1")
        if self.zones_enabled is None:
            object.__setattr__(self, "zones_enabled", self.k >= 4)

    @property
    def alphabet_size(self) -> int:
        return 1 << self.k

    @property
    def n_del(self) -> int:
        return self.n_o - self.n_b


def check_symbols(symbols: Iterable[int], k: int) -> None:
    limit = 1 << k
    for s in symbols:
        if not 0 <= s < limit:
            raise RangeError(f"symbol {s} out of range for k={k}")


def pack_symbols(symbols: Sequence[int], k: int) -> bytes:
    """Pack symbols into bytes: two per byte for k=4 (first in the high
    nibble), one per byte otherwise. Trailing pad bits are zero."""
    check_symbols(symbols, k)
    if k == 4:
        out = bytearray()
        for i in range(0, len(symbols) - 1, 2):
            out.append((symbols[i] << 4) | symbols[i + 1])
        if len(symbols) % 2:
            out.append(symbols[-1] << 4)
        return bytes(out)
    return bytes(symbols)


def unpack_symbols(data: bytes, count: int, k: int) -> list[int]:
    """Inverse of pack_symbols."""
    if k == 4:
        need = (count + 1) // 2
        if len(data) < need:
            raise DecodeError(f"need {need} bytes for {count} nibbles, got {len(data)}")
        out = []
        for i in range(count):
            b = data[i // 2]
            out.append(b >> 4 if i % 2 == 0 else b & 0x0F)
        return out
    if len(data) < count:
        raise DecodeError(f"need {count} bytes, got {len(data)}")
    return [b for b in data[:count]]


_SUM_TOLERANCE = Fraction(1, 1 << 20)


@dataclass(frozen=True)
class SymbolDistribution:
    """Probability of each alphabet symbol, stored exactly as fractions."""

    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if any(p < 0 for p in self.probs):
            raise ParameterError("distribution entries must be nonnegative")
        if abs(sum(self.probs) - 1) > _SUM_TOLERANCE:
            raise ParameterError(f"distribution sums to {float(sum(self.probs))}, not 1")

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "SymbolDistribution":
        total = sum(counts)
        if total <= 0:
            raise ParameterError("counts must have a positive total")
        return cls(tuple(Fraction(c, total) for c in counts))

    @classmethod
    def uniform(cls, n: int) -> "SymbolDistribution":
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class Policy:
    """Target symbol distribution and outsource length published by the server."""

    distribution: SymbolDistribution
    n_b: int


class BitWriter:
    """Accumulates a bit string, most significant bit first within bytes."""

    def __init__(self):
        self._bits: list[str] = []
        self._nbits = 0

    def write(self, bits: str) -> None:
        self._bits.append(bits)
        self._nbits += len(bits)

    def write_uint(self, value: int, width: int) -> None:
        if width:
            self.write(format(value, f"0{width}b"))

    @property
    def bit_length(self) -> int:
        return self._nbits

    def getvalue(self) -> bytes:
        s = "".join(self._bits)
        pad = -len(s) % 8
        s += "0" * pad
        return bytes(int(s[i : i + 8], 2) for i in range(0, len(s), 8))

    def bitstring(self) -> str:
        return "".join(self._bits)


class BitReader:
    """Reads a bit string produced by BitWriter."""

    def __init__(self, data: bytes, bit_length: int | None = None):
        self._s = "".join(format(b, "08b") for b in data)
        if bit_length is not None:
            if bit_length > len(self._s):
                raise DecodeError("bit length exceeds available data")
            self._s = self._s[:bit_length]
        self._pos = 0

    @classmethod
    def from_bitstring(cls, bits: str) -> "BitReader":
        r = cls.__new__(cls)
        r._s = bits
        r._pos = 0
        return r

    def read_bit(self) -> str:
        if self._pos >= len(self._s):
            raise DecodeError("bit string exhausted")
        b = self._s[self._pos]
        self._pos += 1
        return b

    def read_uint(self, width: int) -> int:
        if width == 0:
            return 0
        if self._pos + width > len(self._s):
            raise DecodeError("bit string exhausted")
        v = int(self._s[self._pos : self._pos + width], 2)
        self._pos += width
        return v

    @property
    def remaining(self) -> int:
        return len(self._s) - self._pos
