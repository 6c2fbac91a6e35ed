"""Trusted receiving side: decrypts the stream and re-serves plaintext.

The relay is the only component holding the key besides the device. It
pulls the encrypted multipart stream, opens each record, counts rejects
by cause, and hands validated JPEGs to a sink: a directory writer, a
plaintext MJPEG re-server for the control panel, or a null counter.
Nothing that fails validation ever reaches a sink, and ciphertext is
never persisted or re-served.
"""

from __future__ import annotations

import argparse
import http.client
import json
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import urlsplit

from .broadcast import Broadcast
from .errors import ConnectFailed, IoFailure, SecurecamError
from .sealing import KeyConfig, decode_wire, load_key_config, open_frame
from .stats import percentile


@dataclass
class RelayReport:
    frames_ok: int = 0
    frames_rejected: int = 0
    rejected_by_cause: dict = field(default_factory=dict)
    seq_gaps: int = 0
    decrypt_p50_us: float = 0.0
    decrypt_p95_us: float = 0.0
    decrypt_p99_us: float = 0.0
    throughput_bytes_per_sec: float = 0.0
    achieved_fps: float = 0.0
    parts_consumed: int = 0
    elapsed_s: float = 0.0
    transport_error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "frames_ok": self.frames_ok,
            "frames_rejected": self.frames_rejected,
            "rejected_by_cause": dict(self.rejected_by_cause),
            "seq_gaps": self.seq_gaps,
            "decrypt_latency_us": {
                "p50": self.decrypt_p50_us,
                "p95": self.decrypt_p95_us,
                "p99": self.decrypt_p99_us,
            },
            "throughput_bytes_per_sec": self.throughput_bytes_per_sec,
            "achieved_fps": self.achieved_fps,
            "parts_consumed": self.parts_consumed,
            "elapsed_s": self.elapsed_s,
            "transport_error": self.transport_error,
        }


def _read_part(fp) -> Optional[bytes]:
    """One multipart body from the stream, or None at end of stream.

    Parts are length-delimited by their Content-Length header, so record
    bytes are never scanned for boundary strings.
    """
    content_length = None
    saw_boundary = False
    while True:
        line = fp.readline(65536)
        if not line:
            return None
        line = line.strip()
        if not line:
            if saw_boundary and content_length is not None:
                break
            continue  # tolerate blank lines between parts
        if line.startswith(b"--"):
            saw_boundary = True
        elif b":" in line:
            name, _, value = line.partition(b":")
            if name.strip().lower() == b"content-length":
                content_length = int(value.strip())
    body = fp.read(content_length)
    if body is None or len(body) != content_length:
        return None  # truncated part: drop, never forward
    return body


class _Sink:
    content_type = "image/jpeg"

    def emit(self, seq: int, data: bytes) -> None:
        raise NotImplementedError

    def close(self) -> None:
        pass


class NullSink(_Sink):
    """Counts frames; writes nothing anywhere."""

    def __init__(self):
        self.count = 0

    def emit(self, seq: int, data: bytes) -> None:
        self.count += 1


class DirSink(_Sink):
    """Writes one frame_<seq>.jpg per validated frame."""

    def __init__(self, out_dir: str):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def emit(self, seq: int, data: bytes) -> None:
        try:
            (self.out_dir / f"frame_{seq}.jpg").write_bytes(data)
        except OSError as exc:
            raise IoFailure(f"cannot write frame {seq}: {exc}") from exc


class MjpegSink(_Sink):
    """Re-serves validated plaintext as a standard MJPEG stream.

    GET /stream is multipart/x-mixed-replace with image/jpeg parts;
    GET /still proxies the device's sealed still through a decrypt.
    Binds to localhost only: past this point frames are plaintext.
    """

    def __init__(
        self,
        listen_port: int = 0,
        device_url: Optional[str] = None,
        key_cfg: Optional[KeyConfig] = None,
    ):
        self.hub = Broadcast(depth=2)
        self.device_url = device_url
        self.key_cfg = key_cfg
        self._httpd = _SinkServer(("127.0.0.1", listen_port), _SinkHandler)
        self._httpd.sink = self
        threading.Thread(
            target=self._httpd.serve_forever, name="mjpeg-sink", daemon=True
        ).start()

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def emit(self, seq: int, data: bytes) -> None:
        self.hub.publish((seq, data))

    def fetch_still(self) -> Optional[bytes]:
        """Decrypted device still, or None when the device has none."""
        if self.device_url is None or self.key_cfg is None:
            return None
        parts = urlsplit(self.device_url)
        conn = http.client.HTTPConnection(parts.hostname, parts.port, timeout=5)
        try:
            conn.request("GET", "/saved-photo")
            resp = conn.getresponse()
            if resp.status != 200:
                return None
            record = resp.read()
        finally:
            conn.close()
        return open_frame(decode_wire(record), self.key_cfg)

    def close(self) -> None:
        self.hub.close()
        self._httpd.shutdown()
        self._httpd.server_close()


class _SinkServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True
    sink: MjpegSink


class _SinkHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.0"

    def log_message(self, fmt, *args):
        pass

    def do_GET(self):
        sink: MjpegSink = self.server.sink  # type: ignore[attr-defined]
        route = urlsplit(self.path).path
        try:
            if route == "/stream":
                self._stream(sink)
            elif route == "/still":
                try:
                    still = sink.fetch_still()
                except SecurecamError as exc:
                    self._plain(502, f"still failed validation: {exc}".encode())
                    return
                except OSError as exc:
                    self._plain(502, f"device unreachable: {exc}".encode())
                    return
                if still is None:
                    self._plain(404, b"no still available")
                else:
                    self.send_response(200)
                    self.send_header("Content-Type", "image/jpeg")
                    self.send_header("Content-Length", str(len(still)))
                    self.end_headers()
                    self.wfile.write(still)
            else:
                self._plain(404, b"not found")
        except (BrokenPipeError, ConnectionResetError):
            pass

    def _plain(self, code: int, body: bytes) -> None:
        self.send_response(code)
        self.send_header("Content-Type", "text/plain")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _stream(self, sink: MjpegSink) -> None:
        sub = sink.hub.subscribe()
        self.send_response(200)
        self.send_header("Content-Type", "multipart/x-mixed-replace; boundary=frame")
        self.send_header("Connection", "close")
        self.end_headers()
        try:
            while True:
                item = sub.get(timeout=0.5)
                if item is None:
                    if sub.closed:
                        break
                    continue
                _seq, data = item
                part = (
                    b"--frame\r\n"
                    b"Content-Type: image/jpeg\r\n"
                    b"Content-Length: " + str(len(data)).encode() + b"\r\n\r\n"
                ) + data + b"\r\n"
                self.wfile.write(part)
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            sub.cancel()


def consume_stream(
    url: str,
    key_cfg: KeyConfig,
    sink: _Sink,
    count: Optional[int] = None,
    duration: Optional[float] = None,
) -> RelayReport:
    """Pull the encrypted stream, open every part, feed the sink.

    Runs until the count or duration limit, or until the device
    disconnects. A report is produced on every exit path.
    """
    report = RelayReport()
    parts = urlsplit(url)
    latencies: list[float] = []
    total_bytes = 0
    first_t = last_t = None
    prev_seq: Optional[int] = None
    try:
        conn = http.client.HTTPConnection(parts.hostname, parts.port, timeout=10)
        conn.request("GET", parts.path or "/stream")
        resp = conn.getresponse()
    except (OSError, http.client.HTTPException) as exc:
        report.transport_error = str(exc)
        return report
    if resp.status != 200:
        report.transport_error = f"HTTP {resp.status}"
        conn.close()
        return report
    start = time.monotonic()
    try:
        while True:
            if count is not None and report.parts_consumed >= count:
                break
            if duration is not None and time.monotonic() - start >= duration:
                break
            body = _read_part(resp)
            if body is None:
                break
            now = time.monotonic()
            first_t = first_t if first_t is not None else now
            last_t = now
            report.parts_consumed += 1
            total_bytes += len(body)
            t0 = time.perf_counter()
            try:
                record = decode_wire(body)
                if prev_seq is not None and record.seq != prev_seq + 1:
                    report.seq_gaps += 1
                prev_seq = record.seq
                plain = open_frame(record, key_cfg)
            except SecurecamError as exc:
                cause = type(exc).__name__
                report.frames_rejected += 1
                report.rejected_by_cause[cause] = (
                    report.rejected_by_cause.get(cause, 0) + 1
                )
                continue
            latencies.append((time.perf_counter() - t0) * 1e6)
            report.frames_ok += 1
            sink.emit(record.seq, plain)
    finally:
        conn.close()
        report.elapsed_s = round(time.monotonic() - start, 3)
    if latencies:
        report.decrypt_p50_us = round(percentile(latencies, 50), 1)
        report.decrypt_p95_us = round(percentile(latencies, 95), 1)
        report.decrypt_p99_us = round(percentile(latencies, 99), 1)
    if first_t is not None and last_t > first_t:
        span = last_t - first_t
        report.throughput_bytes_per_sec = round(total_bytes / span, 1)
        if report.parts_consumed >= 2:
            report.achieved_fps = round((report.parts_consumed - 1) / span, 3)
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="securecam-relay",
        description="Decrypting stream consumer: validates frames and re-serves or stores them.",
    )
    parser.add_argument(
        "--url", default="http://127.0.0.1:8032/stream", help="device stream URL"
    )
    parser.add_argument("--key-file", help="pre-shared key file (else $SECURECAM_KEY)")
    parser.add_argument(
        "--sink", choices=["dir", "mjpeg", "null"], default="null", help="frame destination"
    )
    parser.add_argument("--out-dir", default="frames_out", help="directory for --sink dir")
    parser.add_argument(
        "--listen-port", type=int, default=8033, help="plaintext MJPEG port for --sink mjpeg"
    )
    parser.add_argument("--count", type=int, help="stop after this many parts")
    parser.add_argument("--duration", type=float, help="stop after this many seconds")
    parser.add_argument("--report-json", help="write the run report to this path")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        key_cfg = load_key_config(args.key_file, allow_ecb=True)  # receive-side
    except (ValueError, SecurecamError) as exc:
        print(f"error: {exc}")
        return 2
    device_base = urlsplit(args.url)
    device_url = f"http://{device_base.hostname}:{device_base.port}"
    if args.sink == "dir":
        sink: _Sink = DirSink(args.out_dir)
    elif args.sink == "mjpeg":
        sink = MjpegSink(args.listen_port, device_url=device_url, key_cfg=key_cfg)
        print(f"plaintext mjpeg on {sink.base_url}/stream")
    else:
        sink = NullSink()
    try:
        report = consume_stream(
            args.url, key_cfg, sink, count=args.count, duration=args.duration
        )
    except IoFailure as exc:
        print(f"sink failure: {exc}")
        return 1
    finally:
        sink.close()
    print(
        f"consumed {report.parts_consumed} parts: {report.frames_ok} ok,"
        f" {report.frames_rejected} rejected, {report.seq_gaps} seq gaps,"
        f" {report.achieved_fps} fps"
    )
    if report.rejected_by_cause:
        for cause, n in sorted(report.rejected_by_cause.items()):
            print(f"  rejected {cause}: {n}")
    if args.report_json:
        Path(args.report_json).write_text(json.dumps(report.to_dict(), indent=2))
    if report.transport_error is not None:
        print(f"transport error: {report.transport_error}")
        return 1
    return 0 if report.frames_rejected == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
