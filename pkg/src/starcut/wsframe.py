"""Minimal WebSocket (RFC 6455) framing: enough for one browser client and a
scripted test client on localhost.

Text frames only, no extensions, no fragmentation on send (fragmented receive
is reassembled).  The server never masks; clients always mask.
"""

from __future__ import annotations

import base64
import hashlib
import os
import socket
import struct

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class WsClosed(ConnectionError):
    """Peer closed the WebSocket."""


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _GUID).encode()).digest()
    return base64.b64encode(digest).decode()


def handshake_response(request: bytes) -> bytes:
    """HTTP 101 response for an upgrade request; raises ValueError otherwise."""
    head = request.split(b"\r\n\r\n", 1)[0].decode("latin-1")
    lines = head.split("\r\n")
    headers = {}
    for line in lines[1:]:
        name, _, value = line.partition(":")
        headers[name.strip().lower()] = value.strip()
    if "websocket" not in headers.get("upgrade", "").lower():
        raise ValueError("not a websocket upgrade request")
    key = headers.get("sec-websocket-key")
    if not key:
        raise ValueError("missing Sec-WebSocket-Key")
    return (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept_key(key)}\r\n"
        "\r\n"
    ).encode()


def _read_exact(sock: socket.socket, count: int) -> bytes:
    chunks = []
    while count:
        chunk = sock.recv(count)
        if not chunk:
            raise WsClosed("socket closed mid-frame")
        chunks.append(chunk)
        count -= len(chunk)
    return b"".join(chunks)


def read_frame(sock: socket.socket) -> tuple[int, bytes]:
    """One raw frame: (opcode, payload).  Unmasks masked payloads."""
    header = _read_exact(sock, 2)
    fin = header[0] & 0x80
    opcode = header[0] & 0x0F
    masked = header[1] & 0x80
    length = header[1] & 0x7F
    if length == 126:
        length = struct.unpack(">H", _read_exact(sock, 2))[0]
    elif length == 127:
        length = struct.unpack(">Q", _read_exact(sock, 8))[0]
    mask = _read_exact(sock, 4) if masked else None
    payload = _read_exact(sock, length) if length else b""
    if mask:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return (opcode | (0 if fin else 0x100)), payload


def read_message(sock: socket.socket) -> str:
    """Next complete text message; answers pings, raises WsClosed on close."""
    buffer = b""
    while True:
        opcode, payload = read_frame(sock)
        fin = not (opcode & 0x100)
        opcode &= 0xFF
        if opcode == OP_CLOSE:
            try:
                send_frame(sock, b"", OP_CLOSE)
            except OSError:
                pass
            raise WsClosed("close frame received")
        if opcode == OP_PING:
            send_frame(sock, payload, OP_PONG)
            continue
        if opcode == OP_PONG:
            continue
        if opcode in (OP_TEXT, OP_CONT):
            buffer += payload
            if fin:
                return buffer.decode("utf-8")


def send_frame(sock: socket.socket, payload: bytes, opcode: int = OP_TEXT, mask: bool = False) -> None:
    length = len(payload)
    head = bytearray([0x80 | opcode])
    mask_bit = 0x80 if mask else 0
    if length < 126:
        head.append(mask_bit | length)
    elif length < 1 << 16:
        head.append(mask_bit | 126)
        head += struct.pack(">H", length)
    else:
        head.append(mask_bit | 127)
        head += struct.pack(">Q", length)
    if mask:
        key = os.urandom(4)
        head += key
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    sock.sendall(bytes(head) + payload)


def send_message(sock: socket.socket, text: str, mask: bool = False) -> None:
    send_frame(sock, text.encode("utf-8"), OP_TEXT, mask=mask)


def client_handshake(sock: socket.socket, host: str, path: str = "/") -> None:
    key = base64.b64encode(os.urandom(16)).decode()
    request = (
        f"GET {path} HTTP/1.1\r\n"
        f"Host: {host}\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Key: {key}\r\n"
        "Sec-WebSocket-Version: 13\r\n"
        "\r\n"
    ).encode()
    sock.sendall(request)
    response = b""
    while b"\r\n\r\n" not in response:
        chunk = sock.recv(4096)
        if not chunk:
            raise WsClosed("server closed during handshake")
        response += chunk
    status = response.split(b"\r\n", 1)[0]
    if b"101" not in status:
        raise ConnectionError(f"handshake rejected: {status!r}")
    for line in response.split(b"\r\n"):
        if line.lower().startswith(b"sec-websocket-accept:"):
            got = line.split(b":", 1)[1].strip().decode()
            if got != accept_key(key):
                raise ConnectionError("bad Sec-WebSocket-Accept")
            return
    raise ConnectionError("missing Sec-WebSocket-Accept")
