"""What an adversary learns from an outsource alone.

Compares the weak (no prior) and strong (distribution-aware) adversaries on a
small alphabet, with the deletion PRNG intact and broken, and runs a short
rank experiment against the uniform-guessing baseline.
"""

import random

from bonsai import Policy, Prior, SymbolDistribution, SystemConfig
from bonsai.privacy import rank_experiment, strong_report, weak_report

n_o, n_b, k = 10, 5, 2

print("weak adversary (counts preimages, no prior):")
for broken in (False, True):
    r = weak_report(n_o, n_b, k, prng_broken=broken)
    print(f"  prng_broken={broken!s:5}  preimages={r.m:8d}  "
          f"uncertainty={r.uncertainty_bits:6.2f} bits  leakage={r.leakage:.3f}")

o = (0, 1, 2, 3, 0)
print("\nstrong adversary (posterior over preimages), outsource", o)
for broken in (False, True):
    r = strong_report(o, Prior.uniform(k), n_o, prng_broken=broken,
                      deleted_positions=list(range(n_o - n_b)) if broken else None)
    print(f"  prng_broken={broken!s:5}  support={r.m:8d}  "
          f"uncertainty={r.uncertainty_bits:6.2f} bits  leakage={r.leakage:.3f}")

# rank experiment: how often the true chunk lands in the adversary's top g
config = SystemConfig(k=k, n_o=n_o, n_b=n_b, t=1, zones_enabled=False)
policy = Policy(SymbolDistribution.uniform(1 << k), n_b)
rng = random.Random(0)
chunks = [[rng.randrange(1 << k) for _ in range(n_o)] for _ in range(500)]
seeds = [[rng.getrandbits(64)] for _ in chunks]
m = (1 << k) ** (n_o - n_b)
grid = [1, 16, 128, 512, m]
hits = rank_experiment(chunks, Prior.uniform(k), grid, config, policy, seeds)
print(f"\ntop-g hit rate over 500 chunks ({m} candidate preimages each):")
for g in grid:
    print(f"  g={g:5d}  hit={hits[g]:.3f}  uniform baseline={g / m:.3f}")
