"""Framed binary protocol over TCP: upload, get, and get-policy, plus the
threaded server loop driving a CloudEngine.

Frame layout (little-endian throughout):
    magic "BNSI" | version u8 = 1 | msg_type u8 | payload_len u32 | payload
"""

from __future__ import annotations

import socket
import socketserver
import struct
import threading
from dataclasses import dataclass

from .core import ProtocolError, pack_symbols, unpack_symbols
from .engine import CloudEngine

MAGIC = b"BNSI"
VERSION = 1

MSG_UPLOAD = 0x01
MSG_UPLOAD_ACK = 0x02
MSG_GET = 0x03
MSG_GET_RESP = 0x04
MSG_GET_POLICY = 0x05
MSG_POLICY = 0x06

STATUS_OK = 0
STATUS_DUPLICATE = 1
STATUS_BAD_LENGTH = 2
STATUS_NOT_FOUND = 1  # for GET_RESP


@dataclass(frozen=True)
class Frame:
    msg_type: int
    payload: bytes


def encode_frame(frame: Frame) -> bytes:
    return (
        MAGIC
        + struct.pack("<BBI", VERSION, frame.msg_type, len(frame.payload))
        + frame.payload
    )


def decode_frame(data: bytes) -> tuple[Frame, int]:
    """Decode one frame from the start of data; returns (frame, bytes used)."""
    if len(data) < 10:
        raise ProtocolError("short frame header")
    if data[:4] != MAGIC:
        raise ProtocolError("bad magic")
    version, msg_type, length = struct.unpack_from("<BBI", data, 4)
    if version != VERSION:
        raise ProtocolError(f"unknown protocol version {version}")
    if len(data) < 10 + length:
        raise ProtocolError("short frame payload")
    return Frame(msg_type, data[10 : 10 + length]), 10 + length


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ProtocolError("connection closed mid-frame")
        buf += chunk
    return buf


def read_frame(sock: socket.socket) -> Frame:
    header = _read_exact(sock, 10)
    if header[:4] != MAGIC:
        raise ProtocolError("bad magic")
    version, msg_type, length = struct.unpack_from("<BBI", header, 4)
    if version != VERSION:
        raise ProtocolError(f"unknown protocol version {version}")
    return Frame(msg_type, _read_exact(sock, length))


def upload_payload(file_id: int, symbols, k: int) -> bytes:
    return struct.pack("<QIB", file_id, len(symbols), k) + pack_symbols(symbols, k)


def parse_upload(payload: bytes) -> tuple[int, int, list[int]]:
    file_id, n_b, k = struct.unpack_from("<QIB", payload, 0)
    symbols = unpack_symbols(payload[13:], n_b, k)
    return file_id, k, symbols


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        engine: CloudEngine = self.server.engine  # type: ignore[attr-defined]
        sock = self.request
        try:
            while True:
                try:
                    frame = read_frame(sock)
                except ProtocolError:
                    return  # drop only this connection
                reply = self._dispatch(engine, frame)
                if reply is None:
                    return
                sock.sendall(encode_frame(reply))
        finally:
            sock.close()

    @staticmethod
    def _dispatch(engine: CloudEngine, frame: Frame) -> Frame | None:
        from .core import ConflictError, NotFoundError, ParameterError

        if frame.msg_type == MSG_UPLOAD:
            try:
                file_id, k, symbols = parse_upload(frame.payload)
            except Exception:
                return None
            if k != engine.config.k or len(symbols) != engine.config.n_b:
                status = STATUS_BAD_LENGTH
            else:
                try:
                    engine.dedup(file_id, symbols)
                    status = STATUS_OK
                except ConflictError:
                    status = STATUS_DUPLICATE
                except ParameterError:
                    status = STATUS_BAD_LENGTH
            return Frame(MSG_UPLOAD_ACK, struct.pack("<QB", file_id, status))

        if frame.msg_type == MSG_GET:
            (file_id,) = struct.unpack("<Q", frame.payload)
            try:
                symbols = engine.decompress(file_id)
            except NotFoundError:
                return Frame(MSG_GET_RESP, struct.pack("<QBI", file_id, STATUS_NOT_FOUND, 0))
            payload = struct.pack("<QBI", file_id, STATUS_OK, len(symbols))
            payload += pack_symbols(symbols, engine.config.k)
            return Frame(MSG_GET_RESP, payload)

        if frame.msg_type == MSG_GET_POLICY:
            cfg = engine.config
            payload = struct.pack("<IB", cfg.n_b, cfg.k)
            payload += b"".join(struct.pack("<Q", c) for c in engine.histogram)
            return Frame(MSG_POLICY, payload)

        return None  # unknown type: drop the connection


class Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], engine: CloudEngine):
        super().__init__(address, _Handler)
        self.engine = engine

    def serve_in_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def serve(engine: CloudEngine, address: tuple[str, int]) -> None:
    """Run the server until interrupted."""
    with Server(address, engine) as server:
        server.serve_forever()


class Client:
    """Thin blocking client for the framed protocol."""

    def __init__(self, address: tuple[str, int]):
        self.sock = socket.create_connection(address)

    def close(self) -> None:
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _call(self, frame: Frame) -> Frame:
        self.sock.sendall(encode_frame(frame))
        return read_frame(self.sock)

    def upload(self, file_id: int, symbols, k: int) -> int:
        reply = self._call(Frame(MSG_UPLOAD, upload_payload(file_id, symbols, k)))
        if reply.msg_type != MSG_UPLOAD_ACK:
            raise ProtocolError("unexpected reply to upload")
        rid, status = struct.unpack("<QB", reply.payload)
        if rid != file_id:
            raise ProtocolError("upload ack for a different file id")
        return status

    def get(self, file_id: int, k: int) -> list[int] | None:
        reply = self._call(Frame(MSG_GET, struct.pack("<Q", file_id)))
        if reply.msg_type != MSG_GET_RESP:
            raise ProtocolError("unexpected reply to get")
        rid, status, n_b = struct.unpack_from("<QBI", reply.payload, 0)
        if status != STATUS_OK:
            return None
        return unpack_symbols(reply.payload[13:], n_b, k)

    def get_policy(self) -> tuple[int, int, list[int]]:
        """Returns (n_b, k, histogram counts)."""
        reply = self._call(Frame(MSG_GET_POLICY, b""))
        if reply.msg_type != MSG_POLICY:
            raise ProtocolError("unexpected reply to get_policy")
        n_b, k = struct.unpack_from("<IB", reply.payload, 0)
        counts = [
            struct.unpack_from("<Q", reply.payload, 5 + 8 * i)[0]
            for i in range((len(reply.payload) - 5) // 8)
        ]
        return n_b, k, counts
