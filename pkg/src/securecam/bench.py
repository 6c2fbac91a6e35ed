"""Benchmark harness: per-frame sealing cost and end-to-end frame rates.

The micro suite seals synthetic frames of fixed sizes and reports
latency percentiles, throughput and ciphertext expansion per
(mode, key size, frame size) cell. The e2e suite runs the real device
server and relay over loopback and measures delivered, validated fps —
encrypted against a plaintext baseline that reuses the same capture
loop and multipart framing but skips the seal. The plaintext baseline
lives here, not in the device server, which never serves plaintext.
"""

from __future__ import annotations

import argparse
import json
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import urlsplit

from . import jpeg
from .broadcast import Broadcast
from .camera import CameraSettings, FrameSource, Pacer, _filler_bytes
from .relay import NullSink, _read_part, consume_stream
from .sealing import CipherMode, KeyConfig, expected_ciphertext_len, seal_frame
from .server import DeviceServer
from .stats import percentile

WARMUP_ITERATIONS = 50


@dataclass(frozen=True)
class SyntheticFrame:
    seq: int
    timestamp_ms: int
    jpeg: bytes
    settings: None = None


def synthetic_jpeg(size: int, seed: int) -> bytes:
    """Marker-valid buffer of exactly `size` bytes, deterministic in seed."""
    if size < 4:
        raise ValueError("synthetic frame needs at least 4 bytes for the markers")
    return jpeg.SOI + _filler_bytes(seed, size - 4) + jpeg.EOI


@dataclass
class MicroCell:
    mode: str
    key_bits: int
    frame_bytes: int
    iterations: int
    p50_us: float
    p95_us: float
    p99_us: float
    mb_per_s: float
    bytes_processed: int
    wall_time_s: float
    expansion_bytes: int


@dataclass
class MicroReport:
    seed: int
    warmup: int
    cells: list[MicroCell] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "suite": "micro",
            "seed": self.seed,
            "warmup": self.warmup,
            "cells": [vars(c) for c in self.cells],
        }


def run_micro(
    mode_list: list[CipherMode],
    key_bits_list: list[int],
    frame_sizes: list[int],
    iterations: int,
    seed: int = 1,
) -> MicroReport:
    """Seal each synthetic frame `iterations` times per configuration
    after a discarded warmup; frame content is deterministic in seed."""
    if iterations < 100:
        raise ValueError(f"need at least 100 iterations after warmup, got {iterations}")
    report = MicroReport(seed=seed, warmup=WARMUP_ITERATIONS)
    for key_bits in key_bits_list:
        key = _filler_bytes(seed ^ key_bits, key_bits // 8)
        for mode in mode_list:
            cfg = KeyConfig(key_id=0, key=key, mode=mode)
            for size in frame_sizes:
                frame = SyntheticFrame(0, 0, synthetic_jpeg(size, seed + size))
                for _ in range(WARMUP_ITERATIONS):
                    seal_frame(frame, cfg)
                latencies = []
                start = time.perf_counter()
                for _ in range(iterations):
                    t0 = time.perf_counter()
                    enc = seal_frame(frame, cfg)
                    latencies.append((time.perf_counter() - t0) * 1e6)
                wall = time.perf_counter() - start
                processed = size * iterations
                report.cells.append(
                    MicroCell(
                        mode=mode.name.lower(),
                        key_bits=key_bits,
                        frame_bytes=size,
                        iterations=iterations,
                        p50_us=round(percentile(latencies, 50), 2),
                        p95_us=round(percentile(latencies, 95), 2),
                        p99_us=round(percentile(latencies, 99), 2),
                        mb_per_s=round(processed / wall / 1e6, 3),
                        bytes_processed=processed,
                        wall_time_s=round(wall, 6),
                        expansion_bytes=len(enc.ciphertext) - size,
                    )
                )
    return report


# --- plaintext baseline for the e2e comparison ---


class _PlainBaseline:
    """Capture loop + multipart serving with the seal step removed."""

    def __init__(self, settings: CameraSettings, seed: int = 0, port: int = 0):
        self.settings = settings
        self._source = FrameSource(seed=seed)
        self.hub = Broadcast()
        self._stop = threading.Event()
        self._httpd = _PlainServer(("127.0.0.1", port), _PlainHandler)
        self._httpd.baseline = self

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self._httpd.server_address[1]}/stream"

    def start(self) -> None:
        threading.Thread(target=self._loop, daemon=True).start()
        threading.Thread(target=self._httpd.serve_forever, daemon=True).start()

    def stop(self) -> None:
        self._stop.set()
        self.hub.close()
        self._httpd.shutdown()
        self._httpd.server_close()

    def _loop(self) -> None:
        pacer = Pacer(self.settings.fps_limit)
        while not self._stop.is_set():
            pacer.wait()
            if self._stop.is_set():
                break
            frame = self._source.next_frame(self.settings)
            self.hub.publish((frame.seq, frame.jpeg))


class _PlainServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True
    baseline: _PlainBaseline


class _PlainHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.0"

    def log_message(self, fmt, *args):
        pass

    def do_GET(self):
        baseline: _PlainBaseline = self.server.baseline  # type: ignore[attr-defined]
        if urlsplit(self.path).path != "/stream":
            self.send_response(404)
            self.end_headers()
            return
        sub = baseline.hub.subscribe()
        self.send_response(200)
        self.send_header("Content-Type", "multipart/x-mixed-replace; boundary=frame")
        self.send_header("Connection", "close")
        self.end_headers()
        try:
            while not baseline._stop.is_set():
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


def _consume_plain(url: str, duration: float) -> dict:
    import http.client

    parts = urlsplit(url)
    conn = http.client.HTTPConnection(parts.hostname, parts.port, timeout=10)
    conn.request("GET", parts.path)
    resp = conn.getresponse()
    n = 0
    first_t = last_t = None
    start = time.monotonic()
    try:
        while time.monotonic() - start < duration:
            body = _read_part(resp)
            if body is None or not jpeg.is_jpeg(body):
                break
            now = time.monotonic()
            first_t = first_t if first_t is not None else now
            last_t = now
            n += 1
    finally:
        conn.close()
    fps = (n - 1) / (last_t - first_t) if n >= 2 else 0.0
    return {"frames_ok": n, "achieved_fps": round(fps, 3)}


def run_e2e(
    fps_limit: int,
    frame_size_class: int,
    duration: float,
    encrypted: bool,
    seed: int = 0,
    key: bytes = bytes(range(16)),
    mode: CipherMode = CipherMode.CTR,
) -> dict:
    """Delivered, validated fps at the relay over `duration` seconds."""
    result = {
        "suite": "e2e",
        "encrypted": encrypted,
        "fps_limit": fps_limit,
        "framesize": frame_size_class,
        "duration_s": duration,
    }
    if duration <= 0:
        result.update({"frames_ok": 0, "achieved_fps": 0.0})
        return result
    settings = CameraSettings(framesize=frame_size_class, fps_limit=fps_limit)
    if encrypted:
        cfg = KeyConfig(key_id=0, key=key, mode=mode)
        server = DeviceServer(cfg, settings=settings, port=0, seed=seed)
        server.start()
        try:
            report = consume_stream(
                server.base_url + "/stream", cfg, NullSink(), duration=duration
            )
        finally:
            server.stop()
        if report.frames_rejected:
            raise RuntimeError(
                f"{report.frames_rejected} frames rejected with the correct key:"
                f" {report.rejected_by_cause}"
            )
        result.update(
            {
                "frames_ok": report.frames_ok,
                "achieved_fps": report.achieved_fps,
                "decrypt_latency_us": {
                    "p50": report.decrypt_p50_us,
                    "p95": report.decrypt_p95_us,
                    "p99": report.decrypt_p99_us,
                },
            }
        )
    else:
        baseline = _PlainBaseline(settings, seed=seed)
        baseline.start()
        try:
            result.update(_consume_plain(baseline.url, duration))
        finally:
            baseline.stop()
    return result


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="securecam-bench",
        description="Measure sealing cost and plaintext-vs-encrypted frame rates.",
    )
    parser.add_argument("--suite", choices=["micro", "e2e"], default="micro")
    parser.add_argument(
        "--modes", default="ecb,cbc,ctr", help="comma list for the micro suite"
    )
    parser.add_argument("--key-bits", default="128,192,256", help="comma list")
    parser.add_argument(
        "--sizes", default="2048,8192,30000,122880", help="frame bytes, comma list"
    )
    parser.add_argument("--iters", type=int, default=300, help="timed seals per cell")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--duration", type=float, default=10.0, help="e2e seconds per run")
    parser.add_argument("--fps", type=int, default=10, help="e2e frame rate limit")
    parser.add_argument("--framesize", type=int, default=5, help="e2e resolution class")
    parser.add_argument("--json", dest="json_path", help="write the report here")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.suite == "micro":
        report = run_micro(
            [CipherMode.parse(m) for m in args.modes.split(",")],
            [int(b) for b in args.key_bits.split(",")],
            [int(s) for s in args.sizes.split(",")],
            args.iters,
            seed=args.seed,
        ).to_dict()
        header = f"{'mode':<5} {'bits':>4} {'bytes':>7} {'p50 us':>9} {'p95 us':>9} {'MB/s':>8} {'exp':>4}"
        print(header)
        for c in report["cells"]:
            print(
                f"{c['mode']:<5} {c['key_bits']:>4} {c['frame_bytes']:>7}"
                f" {c['p50_us']:>9.1f} {c['p95_us']:>9.1f} {c['mb_per_s']:>8.2f}"
                f" {c['expansion_bytes']:>4}"
            )
    else:
        plain = run_e2e(args.fps, args.framesize, args.duration, encrypted=False, seed=args.seed)
        enc = run_e2e(args.fps, args.framesize, args.duration, encrypted=True, seed=args.seed)
        report = {"suite": "e2e", "plaintext": plain, "encrypted": enc}
        print(
            f"plaintext: {plain['frames_ok']} frames at {plain['achieved_fps']} fps\n"
            f"encrypted: {enc['frames_ok']} frames at {enc['achieved_fps']} fps"
        )
    if args.json_path:
        Path(args.json_path).write_text(json.dumps(report, indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
