"""Trie over sorted base strings: O(n_b) search and insert, auto-incremented
leaf pointers, and the node-count accounting behind the forest size metric."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .core import NotFoundError, ParameterError


@dataclass
class _Node:
    symbol: int
    children: dict = field(default_factory=dict)  # symbol -> _Node
    pointer: int | None = None  # set on the leaf of a complete base


class BaseForest:
    """Stores each distinct sorted base once; prefixes are shared.

    Every root-to-leaf path spells a nondecreasing sequence of length n_b.
    Pointers are issued by a monotone counter and never reused.
    """

    def __init__(self, n_b: int):
        if n_b < 1:
            raise ParameterError("n_b must be >= 1")
        self.n_b = n_b
        self.roots: dict[int, _Node] = {}
        self.next_pointer = 0
        self.node_count = 0
        self.leaf_count = 0
        self._by_pointer: dict[int, tuple[int, ...]] = {}
        self.last_touches = 0  # nodes visited by the most recent search/insert

    def _check(self, base) -> tuple[int, ...]:
        base = tuple(base)
        if len(base) != self.n_b:
            raise ParameterError(f"base length {len(base)} != n_b={self.n_b}")
        if any(base[i] > base[i + 1] for i in range(len(base) - 1)):
            raise ParameterError("base must be sorted ascending")
        return base

    def search(self, base) -> int | None:
        """Pointer of a previously inserted identical base, or None."""
        base = self._check(base)
        touches = 0
        node = self.roots.get(base[0])
        if node is not None:
            touches += 1
            for s in base[1:]:
                node = node.children.get(s)
                if node is None:
                    break
                touches += 1
        self.last_touches = touches
        if node is None:
            return None
        return node.pointer

    def insert(self, base) -> tuple[int, bool]:
        """Idempotent insert; returns (pointer, was_new)."""
        base = self._check(base)
        touches = 0
        node = self.roots.get(base[0])
        if node is None:
            node = _Node(base[0])
            self.roots[base[0]] = node
            self.node_count += 1
        touches += 1
        for s in base[1:]:
            child = node.children.get(s)
            if child is None:
                child = _Node(s)
                node.children[s] = child
                self.node_count += 1
            node = child
            touches += 1
        self.last_touches = touches
        if node.pointer is not None:
            return node.pointer, False
        node.pointer = self.next_pointer
        self.next_pointer += 1
        self.leaf_count += 1
        self._by_pointer[node.pointer] = base
        return node.pointer, True

    def get_base(self, pointer: int, use_index: bool = True) -> tuple[int, ...]:
        """Base behind a pointer.

        The default path uses the pointer index (O(n_b)). With use_index=False
        the forest is scanned leaf by leaf instead, which is linear in the
        number of stored bases; kept for complexity-validation tests.
        """
        if use_index:
            try:
                return self._by_pointer[pointer]
            except KeyError:
                raise NotFoundError(f"unknown base pointer {pointer}")
        touches = 0
        for base, node in self._iter_leaves():
            touches += len(base)
            if node.pointer == pointer:
                self.last_touches = touches
                return tuple(base)
        self.last_touches = touches
        raise NotFoundError(f"unknown base pointer {pointer}")

    def _iter_leaves(self):
        stack = [([root.symbol], root) for _, root in sorted(self.roots.items())]
        while stack:
            path, node = stack.pop()
            if node.pointer is not None:
                yield path, node
            for s, child in sorted(node.children.items(), reverse=True):
                stack.append((path + [s], child))

    def size_bits(self, bid_bits: int, s_p: int = 64) -> int:
        """Accounting model for the stored forest: every node costs its symbol
        plus 8 structural bits, every leaf additionally a pointer."""
        return self.node_count * (bid_bits + 8) + self.leaf_count * s_p

    # Snapshot serialization: header (n_b u32, next_pointer u64, root count
    # u32), then a preorder walk with per node: symbol u8, child_count u8,
    # has_leaf u8 [+ pointer u64 LE]. Child maps are written in symbol order.

    def serialize(self) -> bytes:
        out = bytearray(struct.pack("<IQI", self.n_b, self.next_pointer, len(self.roots)))
        stack = [root for _, root in sorted(self.roots.items(), reverse=True)]
        while stack:
            node = stack.pop()
            out.append(node.symbol)
            out.append(len(node.children))
            if node.pointer is not None:
                out.append(1)
                out += struct.pack("<Q", node.pointer)
            else:
                out.append(0)
            for _, child in sorted(node.children.items(), reverse=True):
                stack.append(child)
        return bytes(out)

    @classmethod
    def deserialize(cls, data: bytes) -> "BaseForest":
        n_b, next_pointer, n_roots = struct.unpack_from("<IQI", data, 0)
        forest = cls(n_b)
        pos = 16
        # stack of (parent, remaining child slots); path tracked alongside
        stack: list[tuple[_Node | None, int]] = [(None, n_roots)]
        path: list[int] = []
        while stack:
            parent, remaining = stack[-1]
            if remaining == 0:
                stack.pop()
                if path:
                    path.pop()
                continue
            stack[-1] = (parent, remaining - 1)
            symbol, n_children, has_leaf = data[pos], data[pos + 1], data[pos + 2]
            pos += 3
            node = _Node(symbol)
            forest.node_count += 1
            if parent is None:
                forest.roots[symbol] = node
            else:
                parent.children[symbol] = node
            path.append(symbol)
            if has_leaf:
                (node.pointer,) = struct.unpack_from("<Q", data, pos)
                pos += 8
                forest.leaf_count += 1
                forest._by_pointer[node.pointer] = tuple(path)
            stack.append((node, n_children))
        forest.next_pointer = next_pointer
        return forest
