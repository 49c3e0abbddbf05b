import random

import numpy as np
import pytest

from bonsai import corpus, experiment
from bonsai.brackets import build_table, change_values, split
from bonsai.client import transform
from bonsai.core import Policy, SystemConfig
from bonsai.forest import BaseForest
from bonsai.swaps import find_swaps, sort_bids


def test_symbols_from_bytes():
    data = bytes([0xAB, 0x4C])
    assert experiment.symbols_from_bytes(data, 8).tolist() == [0xAB, 0x4C]
    assert experiment.symbols_from_bytes(data, 4).tolist() == [0xA, 0xB, 0x4, 0xC]
    assert experiment.symbols_from_bytes(data, 2).tolist() == [2, 2, 2, 3, 1, 0, 3, 0]


def test_markov_corpus_is_deterministic_and_low_entropy():
    a = corpus.markov_bytes(10_000, seed=5)
    assert a == corpus.markov_bytes(10_000, seed=5)
    assert a != corpus.markov_bytes(10_000, seed=6)
    assert len(set(a)) <= 16  # only the active pool appears


@pytest.mark.parametrize("k,zones,n_del", [(8, True, 5), (8, False, 3), (4, True, 4), (4, False, 2)])
def test_batch_kernel_matches_reference_pipeline(k, zones, n_del):
    n_o, t, n_chunks = 32, 2, 60
    rng = random.Random(k * 100 + n_del)
    data = corpus.markov_bytes(4096, stickiness=0.7, seed=k + n_del)
    symbols = experiment.symbols_from_bytes(data, k)
    chunks = symbols[: n_chunks * n_o].reshape(n_chunks, n_o)
    seeds = experiment.make_seeds(n_chunks, t, master_seed=99)
    dist = experiment.smoothed_distribution(symbols, k)
    config = SystemConfig(k=k, n_o=n_o, n_b=n_o - n_del, t=t, zones_enabled=zones)
    table = build_table(dist, config)
    policy = Policy(dist, config.n_b)
    policy_f = np.array([float(p) for p in dist.probs])

    hist, stats, symhist = experiment.run_batch(chunks, seeds, n_del, policy_f, table)

    ref_symhist = np.zeros(1 << k, np.int64)
    for c in range(n_chunks):
        outsource, _dev = transform(
            list(map(int, chunks[c])), policy, [int(s) for s in seeds[c]], config, file_id=c
        )
        for s in outsource:
            ref_symhist[s] += 1
        if zones:
            changed, cv = change_values(outsource, table)
        else:
            changed, cv = list(outsource), ""
        bids, addendum = split(changed, table)
        swaps = find_swaps(bids, sort_bids(bids))
        assert stats[c, 0] == len(swaps)
        assert stats[c, 1] == len(addendum)
        assert stats[c, 2] == len(cv)
        assert hist[c].tolist() == np.bincount(bids, minlength=table.cols).tolist()
    assert symhist.tolist() == ref_symhist.tolist()
    del rng


def test_forest_size_shortcut_matches_real_trie():
    rng = random.Random(3)
    n_b = 12
    bases = np.array(
        [sorted(rng.randrange(6) for _ in range(n_b)) for _ in range(200)], np.int64
    )
    forest = BaseForest(n_b)
    for base in bases:
        forest.insert(base.tolist())
    nodes, leaves, bits = experiment.forest_size_from_bases(bases, bid_bits=3, s_p=64)
    assert nodes == forest.node_count
    assert leaves == forest.leaf_count
    assert bits == forest.size_bits(3, 64)


def test_hist_to_bases():
    hist = np.array([[2, 0, 1], [0, 3, 0], [2, 0, 1]], np.int32)
    bases = experiment.hist_to_bases(hist)
    assert sorted(map(tuple, bases.tolist())) == [(0, 0, 2), (1, 1, 1)]


def test_sweep_produces_reports_with_sane_fields():
    data = corpus.markov_bytes(1 << 16, seed=2)
    reports = experiment.sweep_deletions(data, 8, 64, [1, 4], t=2)
    assert [r.n_del for r in reports] == [1, 4]
    for r in reports:
        assert r.n_f == (1 << 16) // 64
        assert r.tcr_measured == pytest.approx(r.ucr_measured + r.ccr_measured)
        assert r.ucr_measured > 0 and r.ccr_measured > 0
        assert 0 < r.mean_entropy <= 8
        assert 0 <= r.mean_swaps <= r.n_b
