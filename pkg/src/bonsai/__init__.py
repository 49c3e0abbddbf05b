"""Bonsai: dual-deduplication storage with client-side seeded deletions and
server-side bracket-table deduplication, plus compression metrics and an
information-theoretic privacy analyzer."""

from .brackets import BracketTable, build_table, change_values, huffman, merge, split
from .client import (
    ClientDeviation,
    decode_deviations,
    encode_deviation,
    reconstruct,
    transform,
)
from .core import (
    BonsaiError,
    CapacityError,
    ConflictError,
    DecodeError,
    NotFoundError,
    ParameterError,
    Policy,
    ProtocolError,
    RangeError,
    SymbolDistribution,
    SystemConfig,
)
from .engine import CloudEngine, StoredRecord
from .forest import BaseForest
from .metrics import CompressionReport, ccr_model, measured_report, tcr_model, ucr
from .privacy import (
    PrivacyReport,
    Prior,
    count_embeddings,
    preimage_count_weak,
    rank_experiment,
    strong_posterior,
    strong_report,
    weak_report,
)
from .prng import deletion_positions, splitmix64_next
from .swaps import Change, apply_change_inverse, encode_change, find_swaps, sort_bids
from .wire import Client, Server, serve

__version__ = "0.1.0"

__all__ = [
    "BaseForest",
    "BonsaiError",
    "BracketTable",
    "CapacityError",
    "Change",
    "Client",
    "ClientDeviation",
    "CloudEngine",
    "CompressionReport",
    "ConflictError",
    "DecodeError",
    "NotFoundError",
    "ParameterError",
    "Policy",
    "PrivacyReport",
    "Prior",
    "ProtocolError",
    "RangeError",
    "Server",
    "StoredRecord",
    "SymbolDistribution",
    "SystemConfig",
    "apply_change_inverse",
    "build_table",
    "ccr_model",
    "change_values",
    "count_embeddings",
    "decode_deviations",
    "deletion_positions",
    "encode_change",
    "encode_deviation",
    "find_swaps",
    "huffman",
    "measured_report",
    "merge",
    "preimage_count_weak",
    "rank_experiment",
    "reconstruct",
    "serve",
    "sort_bids",
    "split",
    "splitmix64_next",
    "strong_posterior",
    "strong_report",
    "tcr_model",
    "transform",
    "ucr",
    "weak_report",
]
