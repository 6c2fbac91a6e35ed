"""Rolling throughput/latency accounting for the capture loop and relay."""

from __future__ import annotations

import threading
import time
from collections import deque
from typing import Sequence


def percentile(values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile of an unsorted sample; 0.0 when empty."""
    if not values:
        return 0.0
    ordered = sorted(values)
    rank = max(1, -(-len(ordered) * q // 100))  # ceil without float fuzz
    return ordered[int(rank) - 1]


class StreamStats:
    """Per-frame samples over a trailing time window (default 5 s).

    fps and bytes/s are rate estimates across the samples still inside
    the window; latency percentiles cover the same samples.
    """

    def __init__(self, window_s: float = 5.0, clock=time.monotonic):
        self.window_s = window_s
        self._clock = clock
        self._samples: deque = deque()  # (t, nbytes, latency_us)
        self._lock = threading.Lock()

    def add(self, nbytes: int, latency_us: float) -> None:
        now = self._clock()
        with self._lock:
            self._samples.append((now, nbytes, latency_us))
            self._prune(now)

    def _prune(self, now: float) -> None:
        cutoff = now - self.window_s
        while self._samples and self._samples[0][0] < cutoff:
            self._samples.popleft()

    def snapshot(self) -> dict:
        with self._lock:
            self._prune(self._clock())
            samples = list(self._samples)
        if len(samples) < 2:
            fps = 0.0
            rate = 0.0
        else:
            span = samples[-1][0] - samples[0][0]
            fps = (len(samples) - 1) / span if span > 0 else 0.0
            rate = sum(s[1] for s in samples[1:]) / span if span > 0 else 0.0
        lats = [s[2] for s in samples]
        return {
            "fps": round(fps, 3),
            "bytes_per_sec": round(rate, 1),
            "encrypt_p50_us": round(percentile(lats, 50), 1),
            "encrypt_p95_us": round(percentile(lats, 95), 1),
            "encrypt_p99_us": round(percentile(lats, 99), 1),
        }
