"""Round trip of one chunk: transform, upload, decompress, reconstruct.

Shows what the server sees (the outsource) versus what the client keeps
(the deviation record), and that the composition is exact.
"""

import secrets

from bonsai import CloudEngine, SystemConfig, reconstruct, transform

config = SystemConfig(k=8, n_o=32, n_b=28, t=2)
engine = CloudEngine(config)

chunk = [(3 * i + 7) % 256 for i in range(config.n_o)]
seeds = [secrets.randbits(64) for _ in range(config.t)]

outsource, deviation = transform(chunk, engine.active_policy, seeds, config, file_id=1)
print("chunk     :", chunk)
print("outsource :", outsource)
print("deviation : seed=%#018x invert=%s deleted=%s"
      % (deviation.seed, deviation.invert_bit, list(deviation.deleted_values)))

record = engine.dedup(1, outsource)
print("stored    : base pointer %d, %d swaps, %d record bits"
      % (record.base_pointer, record.change.n_swaps, engine.record_bits(record)))

restored = reconstruct(engine.decompress(1), deviation, config)
print("exact     :", restored == chunk)
