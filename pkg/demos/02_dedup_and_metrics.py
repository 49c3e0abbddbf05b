"""Deduplication and compression ratios on a synthetic corpus.

Uploads a few hundred chunks of sticky-Markov data, prints how many distinct
bases the forest actually stores, then sweeps the deletion count and reports
the measured total compression ratio at each point.
"""

import random
import secrets

from bonsai import CloudEngine, SystemConfig, corpus, experiment, transform

config = SystemConfig(k=8, n_o=64, n_b=60, t=2)
engine = CloudEngine(config)
data = corpus.markov_bytes(64 * 400, seed=7)
rng = random.Random(7)

for fid in range(400):
    chunk = list(data[fid * 64 : (fid + 1) * 64])
    seeds = [secrets.randbits(64) for _ in range(config.t)]
    outsource, _dev = transform(chunk, engine.active_policy, seeds, config, file_id=fid)
    engine.dedup(fid, outsource)

print("uploads           :", len(engine.records))
print("distinct bases    :", engine.forest.leaf_count)
print("forest nodes      :", engine.forest.node_count)
print("stored bits total :", engine.storage_bits())

print("\ndeletion sweep on a 2 MB corpus (k=8, n_o=256):")
reports = experiment.sweep_deletions(corpus.markov_bytes(2 << 20, seed=0), 8, 256, range(1, 16, 2))
print("n_del  ucr      ccr      tcr")
for r in reports:
    print(f"{r.n_del:5d}  {r.ucr_measured:.5f}  {r.ccr_measured:.5f}  {r.tcr_measured:.5f}")
