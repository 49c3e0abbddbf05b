"""Information-theoretic privacy analysis: preimage counts, adversary
uncertainty and leakage, the subsequence-embedding posterior, and the
Monte-Carlo guess-rank experiment.

Closed-form quantities are exact at any scale; posterior-based quantities
enumerate preimages and are gated to toy-scale parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .client import invert, reconstruct, transform
from .core import CapacityError, ParameterError, SystemConfig
from .prng import deletion_positions

ENUMERATION_LIMIT = 1 << 24


@dataclass(frozen=True)
class PrivacyReport:
    m: int  # preimage count
    uncertainty_bits: float
    leakage: float
    adversary: str  # "weak" or "strong"
    prng_broken: bool


def _log2(n: int) -> float:
    """log2 of a (possibly huge) positive integer."""
    if n.bit_length() <= 512:
        return math.log2(n)
    shift = n.bit_length() - 64
    return math.log2(n >> shift) + shift


def preimage_count_weak(n_o: int, n_b: int, k: int) -> int:
    """Number of length-n_o strings containing a given length-n_b string as a
    subsequence (independent of which string is fixed)."""
    if n_b > n_o:
        raise ParameterError("need n_b <= n_o")
    n = 1 << k
    return sum(
        math.comb(n_o, j + n_b) * (n - 1) ** (n_o - n_b - j)
        for j in range(n_o - n_b + 1)
    )


def weak_report(n_o: int, n_b: int, k: int, prng_broken: bool) -> PrivacyReport:
    """Uncertainty and leakage for an adversary with no prior on the data."""
    h_f = k * n_o
    if prng_broken:
        # deletion positions known: one free symbol per deletion
        m = (1 << k) ** (n_o - n_b)
        uncertainty = k * (n_o - n_b)
        leakage = n_b / n_o
    else:
        m = preimage_count_weak(n_o, n_b, k)
        uncertainty = _log2(m)
        leakage = (h_f - uncertainty) / h_f
    return PrivacyReport(m, float(uncertainty), float(leakage), "weak", prng_broken)


def count_embeddings(f: Sequence[int], o: Sequence[int]) -> int:
    """Number of distinct ways o occurs in f as a subsequence (bottom-up DP,
    one row at a time)."""
    if len(o) > len(f):
        return 0
    # row[j] = embeddings of o[:j] in the prefix of f seen so far
    row = [1] + [0] * len(o)
    for fi in f:
        for j in range(len(o), 0, -1):
            if o[j - 1] == fi:
                row[j] += row[j - 1]
    return row[len(o)]


@dataclass(frozen=True)
class Prior:
    """Adversary's model of original chunks: uniform, i.i.d. per symbol, or a
    first-order Markov chain over symbols."""

    kind: str  # "uniform" | "iid" | "markov"
    n_symbols: int
    probs: tuple | None = None  # iid: per-symbol probabilities
    initial: tuple | None = None  # markov: distribution of the first symbol
    transition: tuple | None = None  # markov: rows of conditional distributions

    @classmethod
    def uniform(cls, k: int) -> "Prior":
        return cls("uniform", 1 << k)

    @classmethod
    def iid(cls, probs) -> "Prior":
        probs = tuple(Fraction(p) for p in probs)
        if abs(sum(probs) - 1) > Fraction(1, 1 << 20):
            raise ParameterError("iid prior must be normalized")
        return cls("iid", len(probs), probs=probs)

    @classmethod
    def markov(cls, initial, transition) -> "Prior":
        initial = tuple(Fraction(p) for p in initial)
        transition = tuple(tuple(Fraction(p) for p in row) for row in transition)
        return cls("markov", len(initial), initial=initial, transition=transition)

    def prob(self, f: Sequence[int]) -> Fraction:
        if self.kind == "uniform":
            return Fraction(1, self.n_symbols ** len(f))
        if self.kind == "iid":
            p = Fraction(1)
            for s in f:
                p *= self.probs[s]
            return p
        p = self.initial[f[0]]
        for a, b in zip(f, f[1:]):
            p *= self.transition[a][b]
        return p

    def sequence_entropy(self, length: int) -> float:
        """H of a length-`length` sequence under this prior, in bits."""
        if self.kind == "uniform":
            return length * math.log2(self.n_symbols)
        if self.kind == "iid":
            return length * _entropy(self.probs)
        h = _entropy(self.initial)
        marginal = list(self.initial)
        for _ in range(length - 1):
            h += sum(
                float(marginal[s]) * _entropy(self.transition[s])
                for s in range(self.n_symbols)
                if marginal[s] > 0
            )
            marginal = [
                sum(marginal[s] * self.transition[s][t] for s in range(self.n_symbols))
                for t in range(self.n_symbols)
            ]
        return h


def _entropy(probs) -> float:
    return -sum(float(p) * math.log2(float(p)) for p in probs if p > 0)


def _supersequences(o: Sequence[int], n_o: int, n_symbols: int):
    """All length-n_o strings containing o as a subsequence, each once."""
    o = tuple(o)
    n_b = len(o)
    out = []
    stack = [((), 0)]
    while stack:
        prefix, j = stack.pop()
        i = len(prefix)
        if i == n_o:
            out.append(prefix)
            continue
        if n_o - i < n_b - j:
            continue
        if n_o - i == n_b - j:
            # forced: must spell the rest of o exactly
            out.append(prefix + o[j:])
            continue
        for s in range(n_symbols):
            stack.append((prefix + (s,), j + 1 if j < n_b and s == o[j] else j))
    return out


def _insertion_candidates(o: Sequence[int], n_o: int, positions: Sequence[int], n_symbols: int):
    """All chunks obtained by inserting arbitrary symbols at the known deleted
    (original-index) positions."""
    deleted = sorted(positions)
    if len(set(deleted)) != len(deleted) or any(not 0 <= p < n_o for p in deleted):
        raise ParameterError("invalid deletion positions")
    if len(o) + len(deleted) != n_o:
        raise ParameterError("outsource length inconsistent with positions")
    kept_slots = [i for i in range(n_o) if i not in set(deleted)]
    template = [None] * n_o
    for slot, s in zip(kept_slots, o):
        template[slot] = s
    if not deleted:
        return [tuple(template)]
    out = []
    stack = [(template, 0)]
    while stack:
        current, idx = stack.pop()
        if idx == len(deleted):
            out.append(tuple(current))
            continue
        for s in range(n_symbols):
            nxt = list(current)
            nxt[deleted[idx]] = s
            stack.append((nxt, idx + 1))
    return out


def strong_posterior(
    o: Sequence[int],
    prior: Prior,
    n_o: int,
    prng_broken: bool,
    deleted_positions: Sequence[int] | None = None,
) -> dict:
    """Exact posterior over preimages of o, weighted by embedding counts and
    the prior. With a broken PRNG only insertions at the known deleted
    positions are considered and every candidate embeds exactly once."""
    k = (prior.n_symbols - 1).bit_length()
    if prng_broken:
        if deleted_positions is None:
            raise ParameterError("broken-PRNG posterior needs the deleted positions")
        count = prior.n_symbols ** (n_o - len(o))
        if count > ENUMERATION_LIMIT:
            raise CapacityError(f"{count} candidates exceed the 2^24 enumeration bound")
        weights = {f: prior.prob(f) for f in _insertion_candidates(o, n_o, deleted_positions, prior.n_symbols)}
    else:
        count = preimage_count_weak(n_o, len(o), k)
        if count > ENUMERATION_LIMIT:
            raise CapacityError(f"{count} candidates exceed the 2^24 enumeration bound")
        weights = {
            f: count_embeddings(f, o) * prior.prob(f)
            for f in _supersequences(o, n_o, prior.n_symbols)
        }
    total = sum(weights.values())
    return {f: w / total for f, w in weights.items() if w > 0}


def strong_report(
    o: Sequence[int],
    prior: Prior,
    n_o: int,
    prng_broken: bool,
    deleted_positions: Sequence[int] | None = None,
) -> PrivacyReport:
    """Posterior entropy and leakage for a distribution-aware adversary."""
    posterior = strong_posterior(o, prior, n_o, prng_broken, deleted_positions)
    uncertainty = _entropy(posterior.values())
    h_f = prior.sequence_entropy(n_o)
    leakage = (h_f - uncertainty) / h_f if h_f > 0 else 0.0
    return PrivacyReport(len(posterior), uncertainty, leakage, "strong", prng_broken)


def rank_experiment(
    chunks: Sequence[Sequence[int]],
    prior: Prior,
    g_grid: Sequence[int],
    config: SystemConfig,
    policy,
    seed_lists: Sequence[Sequence[int]],
    prng_broken: bool = True,
) -> dict[int, float]:
    """Fraction of chunks whose true original is among the g most probable
    posterior preimages of its outsource, per g.

    The adversary is assumed to know the scheme, so an inverted outsource is
    uninverted before enumeration. Posterior ties break in lexicographic
    candidate order.
    """
    ranks = []
    for chunk, seeds in zip(chunks, seed_lists):
        chunk = list(chunk)
        outsource, deviation = transform(chunk, policy, list(seeds), config)
        assert reconstruct(outsource, deviation, config) == chunk
        o_eff = invert(outsource, config.k) if deviation.invert_bit else outsource
        positions = None
        if prng_broken:
            positions = deletion_positions(deviation.seed, config.n_o, config.n_del)
        posterior = strong_posterior(o_eff, prior, config.n_o, prng_broken, positions)
        ordered = sorted(posterior.items(), key=lambda kv: (-kv[1], kv[0]))
        truth = tuple(chunk)
        rank = next(i for i, (f, _p) in enumerate(ordered, start=1) if f == truth)
        ranks.append(rank)
    total = len(ranks)
    return {g: sum(1 for r in ranks if r <= g) / total for g in g_grid}
