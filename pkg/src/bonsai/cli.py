"""Operator entry point: run the server, upload and retrieve files, generate
synthetic corpora, and run experiment sweeps.

Exit codes: 0 success, 1 usage or internal error, 2 server unreachable,
3 deviation store missing, 4 manifest missing or inconsistent.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import corpus as corpus_mod
from . import experiment, metrics, wire
from .client import decode_deviations, encode_deviation, reconstruct, transform
from .core import Policy, SymbolDistribution, SystemConfig, pack_symbols
from .engine import CloudEngine

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNREACHABLE = 2
EXIT_NO_STORE = 3
EXIT_BAD_MANIFEST = 4

DEFAULT_ADDR = "127.0.0.1:7744"


@dataclass
class Manifest:
    """Everything needed to reassemble one uploaded file."""

    file_name: str
    byte_length: int
    chunks: list  # ordered [file_id, chunk_index] pairs
    k: int
    n_o: int
    n_b: int
    t: int
    pad_symbols: int  # zero symbols appended to fill the final chunk


def parse_addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def bytes_to_symbols(data: bytes, k: int) -> list[int]:
    if k == 8:
        return list(data)
    if k == 4:
        out = []
        for b in data:
            out.append(b >> 4)
            out.append(b & 0x0F)
        return out
    raise ValueError(f"unsupported symbol width k={k} for file chunking")


def chunk_file(path: str, config: SystemConfig) -> tuple[list[list[int]], Manifest]:
    """Split a file into n_o-symbol chunks, zero-padding the final one."""
    with open(path, "rb") as f:
        data = f.read()
    symbols = bytes_to_symbols(data, config.k)
    chunks = []
    for start in range(0, len(symbols), config.n_o):
        chunks.append(symbols[start : start + config.n_o])
    pad = 0
    if chunks and len(chunks[-1]) < config.n_o:
        pad = config.n_o - len(chunks[-1])
        chunks[-1] = chunks[-1] + [0] * pad
    manifest = Manifest(
        file_name=os.path.basename(path),
        byte_length=len(data),
        chunks=[],
        k=config.k,
        n_o=config.n_o,
        n_b=config.n_b,
        t=config.t,
        pad_symbols=pad,
    )
    return chunks, manifest


def reassemble(chunks: list[list[int]], manifest: Manifest) -> bytes:
    symbols = [s for chunk in chunks for s in chunk]
    if manifest.pad_symbols:
        symbols = symbols[: len(symbols) - manifest.pad_symbols]
    data = pack_symbols(symbols, manifest.k)
    return data[: manifest.byte_length]


def _policy_from_histogram(counts: list[int], n_b: int) -> Policy:
    n = len(counts)
    total = sum(counts)
    dist = SymbolDistribution(tuple(Fraction(c + 1, total + n) for c in counts))
    return Policy(dist, n_b)


def _connect(addr: tuple[str, int]) -> wire.Client:
    try:
        return wire.Client(addr)
    except OSError:
        print(f"error: server at {addr[0]}:{addr[1]} unreachable", file=sys.stderr)
        raise SystemExit(EXIT_UNREACHABLE)


def _load_manifest(path: str) -> Manifest:
    try:
        with open(path) as f:
            raw = json.load(f)
        return Manifest(**raw)
    except (OSError, ValueError, TypeError):
        print(f"error: manifest {path} missing or malformed", file=sys.stderr)
        raise SystemExit(EXIT_BAD_MANIFEST)


def cmd_serve(args) -> int:
    store = args.store
    if store and os.path.exists(os.path.join(store, "meta.json")):
        engine = CloudEngine.load(store)
    else:
        config = SystemConfig(
            k=args.k, n_o=args.n_o, n_b=args.n_b, t=args.seeds, zones_enabled=args.zones
        )
        engine = CloudEngine(config)
    addr = parse_addr(args.addr)
    with wire.Server(addr, engine) as server:
        print(f"listening on {addr[0]}:{addr[1]}", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
    if store:
        engine.save(store)
    return EXIT_OK


def cmd_upload(args) -> int:
    client = _connect(parse_addr(args.addr))
    with client:
        n_b, k, counts = client.get_policy()
        policy = _policy_from_histogram(counts, n_b)
        config = SystemConfig(k=k, n_o=args.n_o, n_b=n_b, t=args.seeds, zones_enabled=args.zones)
        chunks, manifest = chunk_file(args.path, config)
        os.makedirs(args.store, exist_ok=True)
        records = bytearray()
        for index, chunk in enumerate(chunks):
            seeds = set()
            while len(seeds) < config.t:
                seeds.add(secrets.randbits(64))
            file_id = secrets.randbits(64)
            outsource, deviation = transform(chunk, policy, sorted(seeds), config, file_id)
            status = client.upload(file_id, outsource, k)
            if status not in (wire.STATUS_OK, wire.STATUS_DUPLICATE):
                print(f"error: upload of chunk {index} rejected", file=sys.stderr)
                return EXIT_ERROR
            records += encode_deviation(deviation, k)
            manifest.chunks.append([file_id, index])
        with open(os.path.join(args.store, "deviations.bin"), "ab") as f:
            f.write(records)
        manifest_path = os.path.join(args.store, manifest.file_name + ".manifest.json")
        with open(manifest_path, "w") as f:
            json.dump(asdict(manifest), f, indent=1)
    print(manifest_path)
    return EXIT_OK


def cmd_get(args) -> int:
    manifest = _load_manifest(args.manifest)
    store = os.path.dirname(os.path.abspath(args.manifest))
    dev_path = os.path.join(store, "deviations.bin")
    if not os.path.exists(dev_path):
        print(f"error: deviation store {dev_path} missing", file=sys.stderr)
        return EXIT_NO_STORE
    with open(dev_path, "rb") as f:
        deviations = {d.file_id: d for d in decode_deviations(f.read(), manifest.k)}
    config = SystemConfig(k=manifest.k, n_o=manifest.n_o, n_b=manifest.n_b, t=manifest.t)
    client = _connect(parse_addr(args.addr))
    chunks = []
    with client:
        for file_id, _index in manifest.chunks:
            deviation = deviations.get(file_id)
            if deviation is None:
                print(f"error: no deviation for chunk {file_id}", file=sys.stderr)
                return EXIT_NO_STORE
            outsource = client.get(file_id, manifest.k)
            if outsource is None:
                print(f"error: server has no chunk {file_id}", file=sys.stderr)
                return EXIT_BAD_MANIFEST
            chunks.append(reconstruct(outsource, deviation, config))
    data = reassemble(chunks, manifest)
    if len(data) != manifest.byte_length:
        print("error: reassembled length disagrees with manifest", file=sys.stderr)
        return EXIT_BAD_MANIFEST
    out = args.out or manifest.file_name + ".restored"
    with open(out, "wb") as f:
        f.write(data)
    print(out)
    return EXIT_OK


def cmd_corpus(args) -> int:
    data = corpus_mod.markov_bytes(
        args.mb * (1 << 20), stickiness=args.stickiness, active_symbols=args.active, seed=args.seed
    )
    with open(args.out, "wb") as f:
        f.write(data)
    print(args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.corpus:
        with open(args.corpus, "rb") as f:
            data = f.read()
    else:
        data = corpus_mod.markov_bytes(args.mb * (1 << 20), seed=args.seed)
    n_del_values = range(args.n_del_min, args.n_del_max + 1)
    reports = experiment.sweep_deletions(
        data, args.k, args.n_o, n_del_values, t=args.seeds, zones_enabled=args.zones
    )
    metrics.write_reports_csv(args.csv, reports)
    print(args.csv)
    return EXIT_OK


def _zones(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("--zones takes on or off")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bonsai")
    sub = parser.add_subparsers(dest="command", required=True)
    addr_default = os.environ.get("BONSAI_ADDR", DEFAULT_ADDR)

    def common(p, server_params=False):
        p.add_argument("--addr", default=addr_default, help="host:port (env BONSAI_ADDR)")
        p.add_argument("--seeds", type=int, default=2, metavar="T", help="candidate seeds per chunk")
        p.add_argument("--zones", type=_zones, default=None, help="on|off (default: on for k>=4)")
        if server_params:
            p.add_argument("--k", type=int, default=8)
            p.add_argument("--n-o", type=int, default=256, dest="n_o")
            p.add_argument("--n-b", type=int, default=241, dest="n_b")

    p = sub.add_parser("serve", help="run the storage server")
    common(p, server_params=True)
    p.add_argument("--store", default=None, help="state directory (loaded if present, saved on exit)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("upload", help="chunk, transform and upload a file")
    common(p)
    p.add_argument("path")
    p.add_argument("--n-o", type=int, default=256, dest="n_o")
    p.add_argument("--store", default="bonsai-store", help="deviation store directory")
    p.set_defaults(func=cmd_upload)

    p = sub.add_parser("get", help="retrieve and reassemble a file from its manifest")
    common(p)
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_get)

    p = sub.add_parser("corpus", help="write a synthetic Markov corpus")
    p.add_argument("out")
    p.add_argument("--mb", type=int, default=16)
    p.add_argument("--stickiness", type=float, default=0.9)
    p.add_argument("--active", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("experiment", help="deletion-count sweep, one CSV row per point")
    common(p)
    p.add_argument("--csv", required=True, metavar="PATH")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--n-o", type=int, default=256, dest="n_o")
    p.add_argument("--corpus", default=None, help="corpus file (default: generated)")
    p.add_argument("--mb", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-del-min", type=int, default=1, dest="n_del_min")
    p.add_argument("--n-del-max", type=int, default=19, dest="n_del_max")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
