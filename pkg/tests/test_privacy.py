import itertools
import math
import random
from fractions import Fraction

import pytest

from bonsai.core import CapacityError, ParameterError, Policy, SymbolDistribution, SystemConfig
from bonsai.privacy import (
    Prior,
    count_embeddings,
    preimage_count_weak,
    rank_experiment,
    strong_posterior,
    strong_report,
    weak_report,
)


def brute_force_supersequence_count(o, n_o, n_symbols):
    o = tuple(o)
    total = 0
    for f in itertools.product(range(n_symbols), repeat=n_o):
        it = iter(f)
        if all(s in it for s in o):
            total += 1
    return total


def brute_force_embeddings(f, o):
    return sum(
        1
        for positions in itertools.combinations(range(len(f)), len(o))
        if all(f[p] == s for p, s in zip(positions, o))
    )


def test_preimage_count_matches_enumeration():
    for n_o in range(1, 7):
        for n_b in range(1, n_o):
            for k in (1, 2):
                o = [i % (1 << k) for i in range(n_b)]
                assert preimage_count_weak(n_o, n_b, k) == brute_force_supersequence_count(
                    o, n_o, 1 << k
                )


def test_preimage_count_is_string_independent():
    # the count depends only on lengths and alphabet, not on which o is fixed
    n_o, n_b, k = 5, 3, 2
    counts = {
        brute_force_supersequence_count(o, n_o, 1 << k)
        for o in itertools.product(range(1 << k), repeat=n_b)
    }
    assert counts == {preimage_count_weak(n_o, n_b, k)}


def test_preimage_count_validates():
    with pytest.raises(ParameterError):
        preimage_count_weak(3, 4, 2)


def test_count_embeddings_matches_enumeration():
    rng = random.Random(4)
    for _ in range(200):
        f = [rng.randrange(3) for _ in range(rng.randint(0, 9))]
        o = [rng.randrange(3) for _ in range(rng.randint(0, len(f)))]
        assert count_embeddings(f, o) == brute_force_embeddings(f, o)


def test_count_embeddings_edge_cases():
    assert count_embeddings([1, 2], []) == 1
    assert count_embeddings([], [1]) == 0
    assert count_embeddings([1, 1, 1], [1, 1]) == 3


class TestWeakReport:
    def test_broken_prng_closed_form(self):
        r = weak_report(256, 241, 8, prng_broken=True)
        assert r.uncertainty_bits == 8 * 15  # the 120-bit point
        assert r.leakage == 241 / 256  # approx 0.94
        assert r.m == 256 ** 15

    def test_intact_prng_uses_preimage_count(self):
        r = weak_report(6, 4, 2, prng_broken=False)
        m = preimage_count_weak(6, 4, 2)
        assert r.m == m
        assert r.uncertainty_bits == pytest.approx(math.log2(m))
        assert r.leakage == pytest.approx((12 - math.log2(m)) / 12)

    def test_intact_beats_broken(self):
        # position ambiguity only adds uncertainty
        for n_b in (2, 4, 6):
            intact = weak_report(8, n_b, 2, prng_broken=False)
            broken = weak_report(8, n_b, 2, prng_broken=True)
            assert intact.uncertainty_bits >= broken.uncertainty_bits

    def test_huge_parameters_do_not_overflow(self):
        r = weak_report(4096, 4000, 8, prng_broken=False)
        assert 0 < r.uncertainty_bits < 8 * 4096
        assert 0 < r.leakage < 1


class TestPriors:
    def test_uniform_prob_and_entropy(self):
        p = Prior.uniform(2)
        assert p.prob((0, 1, 2)) == Fraction(1, 64)
        assert p.sequence_entropy(3) == 6.0

    def test_iid(self):
        p = Prior.iid([Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)])
        assert p.prob((0, 1)) == Fraction(1, 8)
        assert p.sequence_entropy(2) == pytest.approx(2 * 1.75)

    def test_iid_must_normalize(self):
        with pytest.raises(ParameterError):
            Prior.iid([Fraction(1, 2), Fraction(1, 4)])

    def test_markov_prob(self):
        p = Prior.markov(
            [Fraction(1, 2), Fraction(1, 2)],
            [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]],
        )
        assert p.prob((0, 0, 0)) == Fraction(1, 2)
        assert p.prob((0, 1)) == 0
        # a deterministic chain adds no entropy after the first symbol
        assert p.sequence_entropy(5) == pytest.approx(1.0)

    def test_markov_entropy_matches_exhaustive(self):
        p = Prior.markov(
            [Fraction(1, 4), Fraction(3, 4)],
            [[Fraction(1, 3), Fraction(2, 3)], [Fraction(1, 2), Fraction(1, 2)]],
        )
        length = 6
        h = -sum(
            float(p.prob(f)) * math.log2(float(p.prob(f)))
            for f in itertools.product(range(2), repeat=length)
            if p.prob(f) > 0
        )
        assert p.sequence_entropy(length) == pytest.approx(h)


class TestStrongPosterior:
    def test_sums_to_one_and_covers_supersequences(self):
        o = (0, 1, 1)
        posterior = strong_posterior(o, Prior.uniform(1), 5, prng_broken=False)
        assert sum(posterior.values()) == 1
        assert len(posterior) == preimage_count_weak(5, 3, 1)
        for f in posterior:
            assert count_embeddings(f, o) > 0

    def test_weights_proportional_to_embeddings_under_uniform_prior(self):
        o = (1, 1)
        posterior = strong_posterior(o, Prior.uniform(1), 4, prng_broken=False)
        w = {f: count_embeddings(f, o) for f in posterior}
        total = sum(w.values())
        for f, p in posterior.items():
            assert p == Fraction(w[f], total)

    def test_broken_prng_uniform_entropy_is_exact(self):
        for n_del in (1, 2, 3):
            n_o = 5
            o = (0, 1) + (0,) * (n_o - n_del - 2)
            report = strong_report(
                o, Prior.uniform(2), n_o, prng_broken=True, deleted_positions=list(range(n_del))
            )
            assert report.uncertainty_bits == pytest.approx(2 * n_del)

    def test_broken_prng_requires_positions(self):
        with pytest.raises(ParameterError):
            strong_posterior((0,), Prior.uniform(1), 2, prng_broken=True)

    def test_enumeration_gate(self):
        with pytest.raises(CapacityError):
            strong_posterior((0,) * 10, Prior.uniform(8), 30, prng_broken=False)

    def test_prior_shifts_posterior(self):
        o = (0,)
        skewed = Prior.iid([Fraction(9, 10), Fraction(1, 10)])
        posterior = strong_posterior(o, skewed, 2, prng_broken=False)
        # (0,0) should dominate (0,1) and (1,0)
        assert posterior[(0, 0)] > posterior[(0, 1)]
        assert posterior[(0, 1)] == posterior[(1, 0)]


def test_rank_experiment_basics():
    rng = random.Random(8)
    config = SystemConfig(k=2, n_o=6, n_b=4, t=1, zones_enabled=False)
    policy = Policy(SymbolDistribution.uniform(4), 4)
    chunks = [[rng.randrange(4) for _ in range(6)] for _ in range(40)]
    seeds = [[rng.randrange(1 << 32)] for _ in chunks]
    m = 4 ** 2
    grid = [1, 4, m]
    hits = rank_experiment(chunks, Prior.uniform(2), grid, config, policy, seeds, prng_broken=True)
    assert set(hits) == set(grid)
    assert 0 <= hits[1] <= hits[4] <= hits[m]
    assert hits[m] == 1.0  # the truth is always among all m candidates
