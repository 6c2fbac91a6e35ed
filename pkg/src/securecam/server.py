"""Device-side HTTP server: control endpoints plus the encrypted stream.

Endpoints mirror the stock camera server's shape — a root page, a
/capture trigger answered with "Taking Photo", /control and /status —
but every frame leaves the device sealed: /stream carries multipart
parts whose bodies are SFRM wire records, and /saved-photo returns the
sealed still. No endpoint except the index page ever emits plaintext
image bytes.

One capture loop owns frame production. Stream connections subscribe to
a broadcast of the sealed records; a slow client drops frames rather
than slowing the loop.
"""

from __future__ import annotations

import argparse
import json
import os
import threading
import time
from dataclasses import asdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable, Optional
from urllib.parse import parse_qs, urlsplit

from .broadcast import Broadcast
from .camera import CameraSettings, CaptureFlag, FrameSource, Pacer, apply_control
from .errors import OutOfRange, SecurecamError, UnknownVar
from .sealing import CipherMode, KeyConfig, encode_wire, load_key_config, seal_frame
from .stats import StreamStats

DEFAULT_BIND = "127.0.0.1"
DEFAULT_PORT = 8032
STREAM_BOUNDARY = b"secureframe"

PLACEHOLDER_INDEX = b"""<!DOCTYPE html>
<html><head><title>securecam device</title></head>
<body><h1>securecam device server</h1>
<p>No control panel bundle is installed. The endpoints are live:</p>
<ul>
<li><code>GET /capture</code> &mdash; trigger a still</li>
<li><code>GET /saved-photo</code> &mdash; fetch the sealed still</li>
<li><code>GET /stream</code> &mdash; encrypted frame stream</li>
<li><code>GET /control?var=&lt;name&gt;&amp;val=&lt;int&gt;</code> &mdash; adjust settings</li>
<li><code>GET /status</code> &mdash; settings and throughput stats</li>
</ul>
<p>Frames are encrypted on the wire; point the viewer relay at
<code>/stream</code> to watch them.</p></body></html>
"""


class DeviceServer:
    """Owns the capture loop, shared state and the HTTP listener."""

    def __init__(
        self,
        key_cfg: KeyConfig,
        settings: Optional[CameraSettings] = None,
        bind: str = DEFAULT_BIND,
        port: int = DEFAULT_PORT,
        frames_dir: Optional[str] = None,
        seed: int = 0,
        ui_dir: Optional[str] = None,
        iv_source: Callable[[int], bytes] = os.urandom,
        clock: Callable[[], float] = time.time,
    ):
        self.key_cfg = key_cfg
        self.settings = settings or CameraSettings()
        self.bind = bind
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self._iv_source = iv_source
        self._source = FrameSource(seed=seed, frames_dir=frames_dir, clock=clock)
        self.flag = CaptureFlag()
        self.hub = Broadcast()
        self.stats = StreamStats()
        self._latest_still: Optional[bytes] = None
        self._frames_sent = 0
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._capture_thread: Optional[threading.Thread] = None
        self._httpd = _HTTPServer((bind, port), _Handler)
        self._httpd.device = self

    # --- lifecycle ---

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://{self.bind}:{self.port}"

    def start(self) -> None:
        self._capture_thread = threading.Thread(
            target=self._capture_loop, name="capture-loop", daemon=True
        )
        self._capture_thread.start()
        threading.Thread(
            target=self._httpd.serve_forever, name="http-listener", daemon=True
        ).start()

    def stop(self) -> None:
        self._stop.set()
        self.hub.close()
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._capture_thread is not None:
            self._capture_thread.join(timeout=5)

    def serve_forever(self) -> None:
        self.start()
        try:
            while not self._stop.is_set():
                time.sleep(0.5)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    # --- shared state ---

    def update_setting(self, var: str, val: int) -> CameraSettings:
        with self._lock:
            self.settings = apply_control(self.settings, var, val)
            return self.settings

    def latest_still(self) -> Optional[bytes]:
        with self._lock:
            return self._latest_still

    def count_sent(self) -> None:
        with self._lock:
            self._frames_sent += 1

    def status(self) -> dict:
        with self._lock:
            settings = self.settings
            frames_sent = self._frames_sent
        stats = self.stats.snapshot()
        stats["frames_sent"] = frames_sent
        return {
            "settings": asdict(settings),
            "mode": self.key_cfg.mode.name.lower(),
            "key_id": self.key_cfg.key_id,
            "stats": stats,
        }

    # --- producer ---

    def _capture_loop(self) -> None:
        pacer = Pacer(self.settings.fps_limit)
        while not self._stop.is_set():
            settings = self.settings  # snapshot; changes apply next frame
            pacer.set_fps(settings.fps_limit)
            pacer.wait()
            if self._stop.is_set():
                break
            frame = self._source.next_frame(settings)
            t0 = time.perf_counter()
            enc = seal_frame(frame, self.key_cfg, iv_source=self._iv_source)
            latency_us = (time.perf_counter() - t0) * 1e6
            record = encode_wire(enc)
            self.stats.add(len(record), latency_us)
            if self.flag.consume():
                with self._lock:
                    self._latest_still = record
            self.hub.publish((enc.seq, record))


class _HTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True
    device: DeviceServer


class _Handler(BaseHTTPRequestHandler):
    server_version = "securecam/0.1"
    protocol_version = "HTTP/1.0"

    def log_message(self, fmt, *args):  # keep the test output quiet
        pass

    @property
    def device(self) -> DeviceServer:
        return self.server.device  # type: ignore[attr-defined]

    def _send(self, code: int, ctype: str, body: bytes) -> None:
        self.send_response(code)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_HEAD(self):
        if urlsplit(self.path).path == "/":
            self.send_response(200)
            self.send_header("Content-Type", "text/html")
            self.end_headers()
        else:
            self.send_response(404)
            self.end_headers()

    def do_GET(self):
        url = urlsplit(self.path)
        route = url.path
        try:
            if route == "/":
                self._index()
            elif route.startswith("/ui/"):
                self._ui_asset(route[4:])
            elif route == "/capture":
                self.device.flag.request()
                self._send(200, "text/plain", b"Taking Photo")
            elif route == "/saved-photo":
                record = self.device.latest_still()
                if record is None:
                    self._send(404, "text/plain", b"no still captured yet")
                else:
                    self._send(200, "application/octet-stream", record)
            elif route == "/control":
                self._control(url.query)
            elif route == "/status":
                body = json.dumps(self.device.status()).encode()
                self._send(200, "application/json", body)
            elif route == "/stream":
                self._stream()
            else:
                self._send(404, "text/plain", b"not found")
        except (BrokenPipeError, ConnectionResetError):
            pass

    def _index(self) -> None:
        ui_dir = self.device.ui_dir
        if ui_dir is not None and (ui_dir / "index.html").is_file():
            self._send(200, "text/html", (ui_dir / "index.html").read_bytes())
        else:
            self._send(200, "text/html", PLACEHOLDER_INDEX)

    def _ui_asset(self, name: str) -> None:
        ui_dir = self.device.ui_dir
        safe = Path(name).name  # strip any path components
        if ui_dir is not None and (ui_dir / "ui" / safe).is_file():
            ui_dir = ui_dir / "ui"  # bundles that keep assets in ui/
        if ui_dir is None or not safe or not (ui_dir / safe).is_file():
            self._send(404, "text/plain", b"not found")
            return
        ctype = {
            ".js": "text/javascript",
            ".css": "text/css",
            ".html": "text/html",
            ".map": "application/json",
        }.get(Path(safe).suffix, "application/octet-stream")
        self._send(200, ctype, (ui_dir / safe).read_bytes())

    def _control(self, query: str) -> None:
        params = parse_qs(query)
        var = params.get("var", [""])[0]
        raw_val = params.get("val", [""])[0]
        try:
            val = int(raw_val)
        except ValueError:
            self._send(400, "text/plain", f"val {raw_val!r} is not an integer".encode())
            return
        try:
            self.device.update_setting(var, val)
        except (UnknownVar, OutOfRange) as exc:
            self._send(400, "text/plain", str(exc).encode())
            return
        self._send(200, "text/plain", b"")

    def _stream(self) -> None:
        device = self.device
        sub = device.hub.subscribe()
        self.send_response(200)
        self.send_header(
            "Content-Type",
            f"multipart/x-mixed-replace; boundary={STREAM_BOUNDARY.decode()}",
        )
        self.send_header("Connection", "close")
        self.end_headers()
        try:
            while not device._stop.is_set():
                item = sub.get(timeout=0.5)
                if item is None:
                    if sub.closed:
                        break
                    continue
                _seq, record = item
                part = (
                    b"--" + STREAM_BOUNDARY + b"\r\n"
                    b"Content-Type: application/octet-stream\r\n"
                    b"Content-Length: " + str(len(record)).encode() + b"\r\n\r\n"
                ) + record + b"\r\n"
                self.wfile.write(part)
                self.wfile.flush()
                device.count_sent()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            sub.cancel()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="securecam-device",
        description="Simulated camera device serving an encrypted frame stream.",
    )
    parser.add_argument("--bind", default=DEFAULT_BIND, help="listen address")
    parser.add_argument("--port", type=int, default=DEFAULT_PORT, help="listen port")
    parser.add_argument(
        "--mode", choices=["ecb", "cbc", "ctr"], help="override the key file's mode"
    )
    parser.add_argument("--key-file", help="pre-shared key file (else $SECURECAM_KEY)")
    parser.add_argument("--frames-dir", help="serve real *.jpg files from this directory")
    parser.add_argument("--seed", type=int, default=0, help="frame generator seed")
    parser.add_argument("--fps", type=int, default=10, help="frame rate limit, 1..30")
    parser.add_argument("--framesize", type=int, default=5, help="resolution class, 0..10")
    parser.add_argument(
        "--allow-ecb",
        action="store_true",
        help="opt in to the insecure ECB mode (leaks plaintext block structure)",
    )
    parser.add_argument("--ui-dir", help="directory with the control panel bundle")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_key_config(args.key_file, allow_ecb=args.allow_ecb)
        if args.mode is not None:
            mode = CipherMode.parse(args.mode)
            if mode is CipherMode.ECB and not args.allow_ecb:
                raise ValueError("ECB is insecure; pass --allow-ecb to use it")
            cfg = KeyConfig(key_id=cfg.key_id, key=cfg.key, mode=mode)
        settings = CameraSettings(framesize=args.framesize, fps_limit=args.fps)
    except (ValueError, SecurecamError) as exc:
        print(f"error: {exc}")
        return 2
    server = DeviceServer(
        cfg,
        settings=settings,
        bind=args.bind,
        port=args.port,
        frames_dir=args.frames_dir,
        seed=args.seed,
        ui_dir=args.ui_dir,
    )
    print(f"device server on {server.base_url} mode={cfg.mode.name.lower()}")
    server.serve_forever()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
