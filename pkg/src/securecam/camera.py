"""Simulated camera: valid JPEG frames under live-adjustable settings.

Two sources replace the hardware sensor. Generator mode starts from a
fixed embedded baseline JPEG and inserts comment (0xFFFE) segments right
after the start-of-image marker, carrying the sequence number, timestamp
and deterministic filler, sized so the frame approximates the byte budget
of the selected resolution class and quality. Directory mode cycles
user-supplied *.jpg files in lexicographic order.

The capture-flag / buffer hand-off model: HTTP handlers set the flag,
the single capture loop consumes it while producing frames at the paced
rate.
"""

from __future__ import annotations

import base64
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import jpeg
from .errors import OutOfRange, SourceExhausted, UnknownVar

# Nominal sensor resolutions for classes 0..10, up to the 2 MP ceiling.
RESOLUTIONS = (
    (96, 96),
    (160, 120),
    (176, 144),
    (240, 176),
    (240, 240),
    (320, 240),
    (400, 296),
    (480, 320),
    (640, 480),
    (800, 600),
    (1600, 1200),
)

# Byte budget per resolution class at quality 10; scaled down as quality
# rises (larger quality value = stronger compression = smaller frame).
FRAMESIZE_TARGETS = (
    2048,
    3072,
    5120,
    8192,
    12288,
    18432,
    27648,
    40960,
    61440,
    86016,
    122880,
)

SETTING_RANGES = {
    "framesize": (0, 10),
    "quality": (10, 63),
    "brightness": (-2, 2),
    "contrast": (-2, 2),
    "fps_limit": (1, 30),
}


@dataclass(frozen=True)
class CameraSettings:
    framesize: int = 5
    quality: int = 10
    brightness: int = 0
    contrast: int = 0
    fps_limit: int = 10

    def __post_init__(self):
        for name, (lo, hi) in SETTING_RANGES.items():
            val = getattr(self, name)
            if not lo <= val <= hi:
                raise OutOfRange(f"{name}={val} outside {lo}..{hi}")

    def target_bytes(self) -> int:
        return int(FRAMESIZE_TARGETS[self.framesize] * (64 - self.quality) / 54)


@dataclass(frozen=True)
class Frame:
    seq: int
    timestamp_ms: int
    jpeg: bytes
    settings: CameraSettings


def apply_control(settings: CameraSettings, var: str, val: int) -> CameraSettings:
    """New settings with one knob changed; rejects unknown names and
    out-of-range values."""
    if var not in SETTING_RANGES:
        raise UnknownVar(f"no such setting: {var}")
    lo, hi = SETTING_RANGES[var]
    if not lo <= val <= hi:
        raise OutOfRange(f"{var}={val} outside {lo}..{hi}")
    return replace(settings, **{var: val})


class CaptureFlag:
    """Still-capture request bridge: set by the HTTP handler, cleared by
    the capture loop. Idempotent on repeated requests."""

    def __init__(self):
        self._event = threading.Event()

    @property
    def pending(self) -> bool:
        return self._event.is_set()

    def request(self) -> None:
        self._event.set()

    def consume(self) -> bool:
        """True exactly when a request was pending; clears it."""
        if self._event.is_set():
            self._event.clear()
            return True
        return False


# 32x24 baseline JFIF gradient; the fixed starting point for every
# generated frame.
TEMPLATE_JPEG = base64.b64decode(
    "/9j/4AAQSkZJRgABAQAAAQABAAD/2wBDAAoHBwgHBgoICAgLCgoLDhgQDg0NDh0VFhEYIx8lJCIf"
    "IiEmKzcvJik0KSEiMEExNDk7Pj4+JS5ESUM8SDc9Pjv/2wBDAQoLCw4NDhwQEBw7KCIoOzs7Ozs7"
    "Ozs7Ozs7Ozs7Ozs7Ozs7Ozs7Ozs7Ozs7Ozs7Ozs7Ozs7Ozs7Ozs7Ozs7Ozv/wAARCAAYACADASIA"
    "AhEBAxEB/8QAHwAAAQUBAQEBAQEAAAAAAAAAAAECAwQFBgcICQoL/8QAtRAAAgEDAwIEAwUFBAQA"
    "AAF9AQIDAAQRBRIhMUEGE1FhByJxFDKBkaEII0KxwRVS0fAkM2JyggkKFhcYGRolJicoKSo0NTY3"
    "ODk6Q0RFRkdISUpTVFVWV1hZWmNkZWZnaGlqc3R1dnd4eXqDhIWGh4iJipKTlJWWl5iZmqKjpKWm"
    "p6ipqrKztLW2t7i5usLDxMXGx8jJytLT1NXW19jZ2uHi4+Tl5ufo6erx8vP09fb3+Pn6/8QAHwEA"
    "AwEBAQEBAQEBAQAAAAAAAAECAwQFBgcICQoL/8QAtREAAgECBAQDBAcFBAQAAQJ3AAECAxEEBSEx"
    "BhJBUQdhcRMiMoEIFEKRobHBCSMzUvAVYnLRChYkNOEl8RcYGRomJygpKjU2Nzg5OkNERUZHSElK"
    "U1RVVldYWVpjZGVmZ2hpanN0dXZ3eHl6goOEhYaHiImKkpOUlZaXmJmaoqOkpaanqKmqsrO0tba3"
    "uLm6wsPExcbHyMnK0tPU1dbX2Nna4uPk5ebn6Onq8vP09fb3+Pn6/9oADAMBAAIRAxEAPwDkbK36"
    "cV0Flb9OKpWVv04roLK36cV0El2yt+nFSeINXXQNHMic3U+Y4ACMhsfeweoH0PJA71dto0hjMsrK"
    "iICzMxwFA6kmvO9d1V9d1mSVZGa1iJS3XPAX+9jA+9jPPPQdqANmyt+nFdBZW/TiiigDL8b6u1lZ"
    "ppFvxLdpulYEgrHnoP8AewQfYHjmuTsrfpxRRQB//9k="
)

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MAX_SEGMENT = 0xFFFF + 2  # marker + length field + max payload


def _filler_bytes(seed: int, count: int) -> bytes:
    """Deterministic filler from splitmix64; 0xFF is remapped so the
    payload can never look like a JPEG marker."""
    if count == 0:
        return b""
    n64 = (count + 7) // 8
    idx = np.arange(1, n64 + 1, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * np.uint64(_SPLITMIX_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    raw = z.astype("<u8").view(np.uint8)[:count]
    return np.where(raw == 0xFF, np.uint8(0x7F), raw).tobytes()


def _com_segments(total_insert: int, header: bytes, filler: bytes) -> bytes:
    """Comment segments totalling exactly total_insert bytes, the first
    carrying the header text, the rest filler."""
    payload = header + filler
    out = bytearray()
    pos = 0
    remaining = total_insert
    while remaining:
        seg_total = min(remaining, _MAX_SEGMENT)
        if 0 < remaining - seg_total < 4:
            seg_total = remaining - 4  # leave room for one more marker
        seg_len = seg_total - 2  # length field covers itself + payload
        out += b"\xff\xfe" + seg_len.to_bytes(2, "big")
        out += payload[pos : pos + seg_total - 4]
        pos += seg_total - 4
        remaining -= seg_total
    return bytes(out)


class FrameSource:
    """Produces sequenced JPEG frames; generator mode is deterministic
    given (seed, seq, settings)."""

    def __init__(
        self,
        seed: int = 0,
        frames_dir: Optional[str] = None,
        clock: Callable[[], float] = time.time,
    ):
        self.seed = seed
        self.clock = clock
        self._seq = 0
        self._files: Optional[list[Path]] = None
        if frames_dir is not None:
            self._files = [
                p
                for p in sorted(Path(frames_dir).glob("*.jpg"))
                if jpeg.is_jpeg(p.read_bytes())
            ]

    def next_frame(self, settings: CameraSettings) -> Frame:
        seq = self._seq
        self._seq += 1
        ts = int(self.clock() * 1000)
        if self._files is not None:
            if not self._files:
                raise SourceExhausted("no JPEG files in frames directory")
            data = self._files[seq % len(self._files)].read_bytes()
        else:
            data = self._generate(seq, ts, settings)
        return Frame(seq=seq, timestamp_ms=ts, jpeg=data, settings=settings)

    def _generate(self, seq: int, ts: int, settings: CameraSettings) -> bytes:
        header = b"seq=%08x ts=%013d br=%+d ct=%+d " % (
            seq,
            ts,
            settings.brightness,
            settings.contrast,
        )
        base = len(TEMPLATE_JPEG)
        insert = max(settings.target_bytes() - base, len(header) + 4)
        mix = (self.seed ^ (seq * _SPLITMIX_GAMMA)) & 0xFFFFFFFFFFFFFFFF
        filler = _filler_bytes(mix, insert)  # generous; segments trim it
        segments = _com_segments(insert, header, filler)
        return TEMPLATE_JPEG[:2] + segments + TEMPLATE_JPEG[2:]


class Pacer:
    """Keeps a loop at or below a target rate.

    The interval carries a 1% guard above 1/fps so the configured limit
    acts as a hard cap even under scheduler jitter, and a stalled loop
    resumes without bursting (the schedule is never back-dated).
    """

    GUARD = 1.01

    def __init__(self, fps: float):
        self._interval = self.GUARD / fps
        self._next: Optional[float] = None

    def set_fps(self, fps: float) -> None:
        self._interval = self.GUARD / fps

    def wait(self) -> None:
        now = time.monotonic()
        if self._next is None:
            self._next = now
        delay = self._next - now
        if delay > 0:
            time.sleep(delay)
        next_slot = self._next + self._interval
        now = time.monotonic()
        if next_slot < now:  # behind schedule: skip the missed slots
            next_slot = now + self._interval
        self._next = next_slot
