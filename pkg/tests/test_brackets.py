import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bonsai.brackets import build_table, change_values, huffman, merge, split
from bonsai.core import DecodeError, ParameterError, SymbolDistribution, SystemConfig

# Worked 16-symbol example distribution used throughout the table tests.
EXAMPLE_PROBS = (
    Fraction(3, 16), Fraction(1, 16), Fraction(1, 16), Fraction(1, 24),
    Fraction(1, 16), Fraction(1, 24), Fraction(1, 24), Fraction(3, 64),
    Fraction(1, 16), Fraction(1, 24), Fraction(1, 24), Fraction(3, 64),
    Fraction(1, 24), Fraction(3, 64), Fraction(3, 64), Fraction(1, 8),
)


def random_distribution(rng, n):
    weights = [rng.randint(1, 100) for _ in range(n)]
    total = sum(weights)
    return SymbolDistribution(tuple(Fraction(w, total) for w in weights))


class TestHuffman:
    def test_single_weight_degenerate_code(self):
        assert huffman([Fraction(1)]) == ["0"]

    def test_all_zero_rejected(self):
        with pytest.raises(ParameterError):
            huffman([0, 0])
        with pytest.raises(ParameterError):
            huffman([])

    def test_known_code(self):
        codes = huffman([Fraction(7, 16), Fraction(7, 32), Fraction(17, 96), Fraction(1, 6)])
        assert codes == ["0", "10", "110", "111"]

    def test_prefix_free_kraft_and_near_optimal(self):
        import math

        rng = random.Random(9)
        for _ in range(50):
            n = rng.randint(2, 40)
            dist = random_distribution(rng, n)
            codes = huffman(dist.probs)
            assert len(set(codes)) == n
            for a in codes:
                for b in codes:
                    if a != b:
                        assert not b.startswith(a)
            assert sum(Fraction(1, 1 << len(c)) for c in codes) == 1
            expected = sum(p * len(c) for p, c in zip(dist.probs, codes))
            entropy = -sum(float(p) * math.log2(float(p)) for p in dist.probs if p)
            assert float(expected) < entropy + 1

    def test_zero_weights_allowed_among_positive(self):
        codes = huffman([Fraction(1, 2), Fraction(0), Fraction(1, 2)])
        assert len(codes) == 3
        assert sum(Fraction(1, 1 << len(c)) for c in codes) == 1

    def test_canonical_assignment_is_sorted_by_length_then_index(self):
        codes = huffman([Fraction(1, 8), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)])
        assert codes[1] == "0"  # most probable symbol gets the shortest code
        assert sorted(len(c) for c in codes) == [1, 2, 3, 3]


class TestExampleTable:
    def test_row_sums_and_sid_codes(self):
        dist = SymbolDistribution(EXAMPLE_PROBS)
        cfg = SystemConfig(k=4, n_o=9, n_b=6, zones_enabled=False)
        table = build_table(dist, cfg)
        assert (table.rows, table.cols) == (4, 4)
        row_sums = [Fraction(0)] * 4
        for s, (_zone, row, _col) in table.layout.items():
            row_sums[row] += EXAMPLE_PROBS[s]
        assert row_sums == [Fraction(7, 16), Fraction(7, 32), Fraction(34, 192), Fraction(1, 6)]
        assert table.sid_codes == ("0", "10", "110", "111")
        assert table.vid_codes == ()

    def test_fill_order_most_probable_first_ties_ascending(self):
        dist = SymbolDistribution(EXAMPLE_PROBS)
        cfg = SystemConfig(k=4, n_o=9, n_b=6, zones_enabled=False)
        table = build_table(dist, cfg)
        # row 0 holds the four most probable symbols: 0 (3/16), 15 (1/8),
        # then the 1/16 group in ascending value
        assert [table.inverse[(0, 0, c)] for c in range(4)] == [0, 15, 1, 2]

    def test_zoned_table_shape(self):
        dist = SymbolDistribution(EXAMPLE_PROBS)
        cfg = SystemConfig(k=4, n_o=9, n_b=6, zones_enabled=True)
        table = build_table(dist, cfg)
        assert (table.rows, table.cols) == (2, 2)
        assert len(table.vid_codes) == 4
        assert table.bid_bits == 1
        zones = [table.layout[s][0] for s in range(16)]
        assert sorted(zones) == [0] * 4 + [1] * 4 + [2] * 4 + [3] * 4
        # zone 0 holds the four most probable symbols
        assert {s for s, (z, _r, _c) in table.layout.items() if z == 0} == {0, 15, 1, 2}


@st.composite
def table_case(draw):
    k = draw(st.sampled_from([2, 4, 8]))
    zones = draw(st.booleans()) if k >= 4 else False
    seed = draw(st.integers(0, 10_000))
    rng = random.Random(seed)
    dist = random_distribution(rng, 1 << k)
    n = draw(st.integers(1, 50))
    symbols = [rng.randrange(1 << k) for _ in range(n)]
    return k, zones, dist, symbols


@settings(max_examples=120, deadline=None)
@given(table_case())
def test_codec_round_trip(case):
    k, zones, dist, symbols = case
    cfg = SystemConfig(k=k, n_o=len(symbols) + 1, n_b=len(symbols), zones_enabled=zones)
    table = build_table(dist, cfg)
    if zones:
        changed, cv = change_values(symbols, table)
    else:
        changed, cv = list(symbols), ""
    bids, addendum = split(changed, table)
    assert all(0 <= b < table.cols for b in bids)
    assert merge(bids, addendum, cv, table) == symbols


def test_change_values_requires_zones():
    dist = SymbolDistribution(EXAMPLE_PROBS)
    table = build_table(dist, SystemConfig(k=4, n_o=9, n_b=6, zones_enabled=False))
    with pytest.raises(ParameterError):
        change_values([0], table)


def test_merge_rejects_garbage_addendum():
    dist = SymbolDistribution(EXAMPLE_PROBS)
    table = build_table(dist, SystemConfig(k=4, n_o=9, n_b=6, zones_enabled=False))
    bids, addendum = split([0, 15, 3], table)
    with pytest.raises(DecodeError):
        merge(bids, addendum[:-1], "", table)


def test_build_table_length_check():
    with pytest.raises(ParameterError):
        build_table(SymbolDistribution.uniform(8), SystemConfig(k=4, n_o=9, n_b=6))
