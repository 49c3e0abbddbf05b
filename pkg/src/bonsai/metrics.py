"""Client, cloud, and total compression ratios: closed-form models and
measured bit counts.

The model formulas are reported verbatim (including their worst-case
changed-values term and their n_o/n_b mixing); the measured numbers count the
bits of the actual serialized artifacts and are the ground truth.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields

from .core import SystemConfig
from .swaps import position_bits


@dataclass
class CompressionReport:
    """One experiment point: ratios plus their per-term bit components."""

    n_f: int = 0
    n_del: int = 0
    k: int = 0
    n_o: int = 0
    n_b: int = 0
    ucr_measured: float = 0.0
    ucr_model: float = 0.0
    ccr_measured: float = 0.0
    ccr_model: float = 0.0
    tcr_measured: float = 0.0
    tcr_model: float = 0.0
    deleted_value_bits: int = 0
    seed_bits: int = 0
    addendum_bits: int = 0
    change_bits: int = 0
    changed_value_bits: int = 0
    forest_bits: int = 0
    id_bits: int = 0
    pointer_bits: int = 0
    mean_swaps: float = 0.0
    mean_entropy: float = 0.0


def ucr(config: SystemConfig, n_f: int = 1) -> float:
    """Client ratio model: per-file seed, deleted values, id and invert bit
    over the original size. Independent of n_f."""
    del n_f  # cancels
    num = config.s_seed + config.n_del * config.k + config.s_fid + 1
    return num / (config.k * config.n_o)


def ccr_model(
    config: SystemConfig, n_f: int, entropy: float, mean_swaps: float, forest_bits: float
) -> float:
    """Cloud ratio model: forest plus per-record addendum entropy, bitmap and
    worst-case changed values (together 3*n_o), swap positions, id, pointer."""
    per_record = (
        entropy
        + 3 * config.n_o
        + mean_swaps * position_bits(config.n_b)
        + config.s_fid
        + config.s_p
    )
    return (forest_bits + n_f * per_record) / (n_f * config.k * config.n_o)


def tcr_model(
    config: SystemConfig, n_f: int, entropy: float, mean_swaps: float, forest_bits: float
) -> float:
    """Total ratio model; the constant c bundles seed, pointer, both ids and
    the invert bit."""
    c = config.s_seed + config.s_p + 2 * config.s_fid + 1
    per_record = (
        c
        + entropy
        + config.n_del * config.k
        + 3 * config.n_o
        + mean_swaps * position_bits(config.n_b)
    )
    return (forest_bits + n_f * per_record) / (n_f * config.k * config.n_o)


def distribution_entropy(probs) -> float:
    """Shannon entropy in bits of a probability vector."""
    return -sum(float(p) * math.log2(float(p)) for p in probs if p > 0)


def measured_report(
    config: SystemConfig,
    n_f: int,
    client_bits: int,
    addendum_bits: int,
    change_bits: int,
    changed_value_bits: int,
    forest_bits: int,
    mean_swaps: float,
    entropy: float,
) -> CompressionReport:
    """Assemble a report from measured component bit counts, with the model
    values alongside."""
    original = n_f * config.k * config.n_o
    cloud_bits = (
        addendum_bits
        + change_bits
        + changed_value_bits
        + forest_bits
        + n_f * (config.s_fid + config.s_p)
    )
    return CompressionReport(
        n_f=n_f,
        n_del=config.n_del,
        k=config.k,
        n_o=config.n_o,
        n_b=config.n_b,
        ucr_measured=client_bits / original,
        ucr_model=ucr(config),
        ccr_measured=cloud_bits / original,
        ccr_model=ccr_model(config, n_f, entropy, mean_swaps, forest_bits),
        tcr_measured=(client_bits + cloud_bits) / original,
        tcr_model=tcr_model(config, n_f, entropy, mean_swaps, forest_bits),
        deleted_value_bits=n_f * config.n_del * config.k,
        seed_bits=n_f * config.s_seed,
        addendum_bits=addendum_bits,
        change_bits=change_bits,
        changed_value_bits=changed_value_bits,
        forest_bits=forest_bits,
        id_bits=2 * n_f * config.s_fid,
        pointer_bits=n_f * config.s_p,
        mean_swaps=mean_swaps,
        mean_entropy=entropy,
    )


def write_reports_csv(path: str, reports) -> None:
    """One row per experiment point, every component as its own column."""
    cols = [f.name for f in fields(CompressionReport)]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(cols)
        for r in reports:
            writer.writerow([getattr(r, c) for c in cols])
