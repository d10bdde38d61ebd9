"""Interactive session service: load an image once, recompute the cut on
every seed or helper event, stream contours back, persist accepted results.

Protocol (schema v1, documented field-by-field in docs/protocol.md): JSON
objects, one per frame.  Over a socket the framing is WebSocket text frames,
so a browser can connect directly; in ``--stdio`` mode it is one JSON object
per line, which lets scripted tests run without networking.

Client messages carry a strictly increasing ``seq``.  Within a session,
events are processed one at a time; when several ``seed_move`` events are
waiting, only the newest is segmented and the stale ones are dropped
(latest-wins) -- only the most recent seed matters for a live contour.
Every non-dropped event is answered by a ``result`` or ``error`` carrying
the seq of the event it answers, so reply seqs increase monotonically.
"""

from __future__ import annotations

import json
import socket
import sys
import threading
import time
from collections import deque
from pathlib import Path

from . import wsframe
from .artifacts import write_result_artifacts, write_seeds_file
from .engine import HelperSeed, SeedPoint, TemplateConfig, default_config, segment
from .imaging import load_image

PROTOCOL_VERSION = 1

CLIENT_KINDS = ("load", "seed_move", "helper_add", "helper_clear", "accept")


class ProtocolError(ValueError):
    pass


def _require_number(msg, key):
    value = msg.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ProtocolError(f"{msg.get('kind', '?')} needs a numeric {key!r}")
    return float(value)


def parse_client_message(raw: str) -> dict:
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"not valid JSON: {exc}") from exc
    if not isinstance(msg, dict):
        raise ProtocolError("message must be a JSON object")
    if msg.get("v") != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {msg.get('v')!r}")
    kind = msg.get("kind")
    if kind not in CLIENT_KINDS:
        raise ProtocolError(f"unknown kind {kind!r}")
    seq = msg.get("seq")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 1:
        raise ProtocolError("seq must be a positive integer")
    if kind in ("seed_move", "helper_add"):
        _require_number(msg, "x")
        _require_number(msg, "y")
    if kind == "load" and not isinstance(msg.get("path"), str):
        raise ProtocolError("load needs a string 'path'")
    return msg


class Session:
    """One interactive segmentation session with its own worker thread."""

    def __init__(self, session_id: str, send, out_dir="sessions", cfg: TemplateConfig | None = None):
        self.session_id = session_id
        self.out_dir = Path(out_dir)
        self.cfg = cfg or default_config()
        self._send = send
        self._queue: deque[dict] = deque()
        self._wake = threading.Condition()
        self._closed = False
        self._last_seq = 0

        self.image = None
        self.image_path: str | None = None
        self.seed: SeedPoint | None = None
        self.helpers: tuple[HelperSeed, ...] = ()
        self.last_result = None
        self.first_move_at: float | None = None

        self._worker = threading.Thread(target=self._run, name=f"session-{session_id}", daemon=True)
        self._worker.start()

    # -- queueing ----------------------------------------------------------

    def post_raw(self, raw: str) -> None:
        try:
            msg = parse_client_message(raw)
        except ProtocolError as exc:
            self._emit_error(0, str(exc))
            return
        with self._wake:
            if msg["seq"] <= self._last_seq:
                self._emit_error(msg["seq"], "seq must increase")
                return
            self._last_seq = msg["seq"]
            self._queue.append(msg)
            self._wake.notify()

    def close(self) -> None:
        with self._wake:
            self._closed = True
            self._wake.notify()

    def join(self, timeout=None) -> None:
        self._worker.join(timeout)

    # -- worker ------------------------------------------------------------

    def _run(self) -> None:
        while True:
            with self._wake:
                while not self._queue and not self._closed:
                    self._wake.wait()
                if not self._queue and self._closed:
                    return
                msg = self._queue.popleft()
                if msg["kind"] == "seed_move":
                    # latest-wins: a run of queued seed_moves collapses to the newest
                    while self._queue and self._queue[0]["kind"] == "seed_move":
                        msg = self._queue.popleft()
            try:
                self._handle(msg)
            except Exception as exc:  # answer, never kill the session
                self._emit_error(msg["seq"], str(exc))

    def _handle(self, msg: dict) -> None:
        kind = msg["kind"]
        seq = msg["seq"]
        if kind == "load":
            self._handle_load(msg)
        elif kind == "seed_move":
            if self.image is None:
                raise ProtocolError("no image loaded")
            seed = SeedPoint(msg["x"], msg["y"])
            if not self.image.contains(seed.x, seed.y):
                raise ProtocolError("seed outside image")
            if self.first_move_at is None:
                self.first_move_at = time.monotonic()
            self.seed = seed
            self._recompute(seq)
        elif kind == "helper_add":
            if self.image is None:
                raise ProtocolError("no image loaded")
            helper = HelperSeed(msg["x"], msg["y"])
            if not self.image.contains(helper.x, helper.y):
                raise ProtocolError("helper outside image")
            self.helpers = self.helpers + (helper,)
            if self.seed is not None:
                self._recompute(seq)
            else:
                self._emit(seq, {"answers": "helper_add", "helpers": self._helper_list()})
        elif kind == "helper_clear":
            self.helpers = ()
            if self.seed is not None and self.image is not None:
                self._recompute(seq)
            else:
                self._emit(seq, {"answers": "helper_clear", "helpers": []})
        elif kind == "accept":
            self._handle_accept(msg)

    def _handle_load(self, msg: dict) -> None:
        image = load_image(msg["path"], spacing=msg.get("spacing"))
        self.image = image
        self.image_path = msg["path"]
        self.seed = None
        self.helpers = ()
        self.last_result = None
        self.first_move_at = None
        self._emit(
            msg["seq"],
            {
                "answers": "load",
                "width": image.width,
                "height": image.height,
                "spacing": image.spacing,
            },
        )

    def _recompute(self, seq: int) -> None:
        result = segment(self.image, self.seed, self.helpers, self.cfg)
        self.last_result = result
        self._emit(
            seq,
            {
                "answers": "seed_move",
                "seed": [self.seed.x, self.seed.y],
                "helpers": self._helper_list(),
                "contour": [[float(x), float(y)] for x, y in result.contour.vertices],
                "cut_radius_px": [float(r) for r in result.cut_radius],
                "diameter_a_mm": result.diameter_a,
                "diameter_b_mm": result.diameter_b,
                "elapsed_ms": result.elapsed_ms,
            },
        )

    def _handle_accept(self, msg: dict) -> None:
        if self.last_result is None:
            raise ProtocolError("no segmentation to accept yet")
        satisfied = msg.get("satisfied", True)
        if not isinstance(satisfied, bool):
            raise ProtocolError("satisfied must be a boolean")
        out = self.out_dir / self.session_id
        paths = write_result_artifacts(self.last_result, self.seed, self.helpers, out)
        write_seeds_file(self.seed, self.helpers, out / "seeds.txt")
        interaction_s = (
            time.monotonic() - self.first_move_at if self.first_move_at is not None else None
        )
        record = {
            "case_id": self.session_id,
            "image": self.image_path,
            "seeds": "seeds.txt",
            "satisfied": satisfied,
            "interaction_s": interaction_s,
        }
        (out / "case_record.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
        self._emit(
            msg["seq"],
            {
                "answers": "accept",
                "out_dir": str(out),
                "files": sorted(p.name for p in out.iterdir()),
                "diameter_a_mm": self.last_result.diameter_a,
                "diameter_b_mm": self.last_result.diameter_b,
                "satisfied": satisfied,
                "interaction_s": interaction_s,
            },
        )

    # -- emission ----------------------------------------------------------

    def _helper_list(self):
        return [[h.x, h.y] for h in self.helpers]

    def _emit(self, seq: int, payload: dict) -> None:
        self._send({"v": PROTOCOL_VERSION, "kind": "result", "seq": seq, "payload": payload})

    def _emit_error(self, seq: int, message: str) -> None:
        self._send({"v": PROTOCOL_VERSION, "kind": "error", "seq": seq, "message": message})


# ---------------------------------------------------------------------------
# stdio transport


def serve_stdio(out_dir="sessions", stdin=None, stdout=None) -> None:
    """One session, one JSON message per line; used by scripted clients."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    lock = threading.Lock()

    def send(msg: dict) -> None:
        with lock:
            stdout.write(json.dumps(msg, sort_keys=True) + "\n")
            stdout.flush()

    session = Session("stdio", send, out_dir=out_dir)
    try:
        for line in stdin:
            line = line.strip()
            if line:
                session.post_raw(line)
    finally:
        session.close()
        session.join()


# ---------------------------------------------------------------------------
# socket transport (WebSocket framing + a tiny static file server for the UI)


def _http_response(status: str, body: bytes, content_type: str) -> bytes:
    return (
        f"HTTP/1.1 {status}\r\n"
        f"Content-Type: {content_type}\r\n"
        f"Content-Length: {len(body)}\r\n"
        "Access-Control-Allow-Origin: *\r\n"
        "Connection: close\r\n\r\n"
    ).encode() + body


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".png": "image/png",
    ".json": "application/json",
}


def _serve_http(conn: socket.socket, request: bytes, static_dir: str | None) -> None:
    line = request.split(b"\r\n", 1)[0].decode("latin-1")
    parts = line.split()
    path = parts[1] if len(parts) > 1 else "/"
    if path.startswith("/image/"):
        # image bytes for the UI; the path after /image/ is a server-side path
        from urllib.parse import unquote

        target = Path(unquote(path[len("/image/") :]))
        try:
            image = load_image(target)
            import io

            from PIL import Image as PILImage

            buf = io.BytesIO()
            PILImage.fromarray(image.pixels, mode="L").save(buf, format="PNG")
            conn.sendall(_http_response("200 OK", buf.getvalue(), "image/png"))
        except Exception as exc:
            conn.sendall(_http_response("404 Not Found", str(exc).encode(), "text/plain"))
        return
    if static_dir:
        root = Path(static_dir).resolve()
        rel = "index.html" if path in ("/", "") else path.lstrip("/").split("?")[0]
        target = (root / rel).resolve()
        if target.is_file() and root in target.parents:
            body = target.read_bytes()
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            conn.sendall(_http_response("200 OK", body, ctype))
            return
    conn.sendall(_http_response("404 Not Found", b"not found", "text/plain"))


def _handle_connection(conn: socket.socket, addr, out_dir, static_dir, counter: list) -> None:
    try:
        request = b""
        while b"\r\n\r\n" not in request:
            chunk = conn.recv(4096)
            if not chunk:
                return
            request += chunk
        try:
            response = wsframe.handshake_response(request)
        except ValueError:
            _serve_http(conn, request, static_dir)
            return
        conn.sendall(response)

        counter[0] += 1
        session_id = f"ws-{counter[0]:04d}"
        lock = threading.Lock()

        def send(msg: dict) -> None:
            with lock:
                try:
                    wsframe.send_message(conn, json.dumps(msg, sort_keys=True))
                except OSError:
                    pass

        session = Session(session_id, send, out_dir=out_dir)
        try:
            while True:
                session.post_raw(wsframe.read_message(conn))
        except (wsframe.WsClosed, ConnectionError, OSError):
            pass
        finally:
            session.close()
    finally:
        try:
            conn.close()
        except OSError:
            pass


def serve_sockets(host: str, port: int, out_dir="sessions", static_dir=None, ready=None) -> None:
    """Accept loop; each WebSocket connection is its own session."""
    server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    server.bind((host, port))
    server.listen(8)
    counter = [0]
    bound = server.getsockname()
    print(f"session service listening on ws://{bound[0]}:{bound[1]}/", file=sys.stderr)
    if ready is not None:
        ready(bound)
    try:
        while True:
            conn, addr = server.accept()
            thread = threading.Thread(
                target=_handle_connection,
                args=(conn, addr, out_dir, static_dir, counter),
                daemon=True,
            )
            thread.start()
    except KeyboardInterrupt:
        pass
    finally:
        server.close()
