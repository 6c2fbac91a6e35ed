"""Shared test helpers: deterministic randomness and server lifecycles."""

import contextlib
import random

import pytest

from securecam.camera import CameraSettings
from securecam.sealing import CipherMode, KeyConfig
from securecam.server import DeviceServer


def seeded_iv_source(seed: int):
    """Deterministic stand-in for os.urandom, for reproducible seals."""
    rng = random.Random(seed)

    def source(n: int) -> bytes:
        return rng.randbytes(n)

    return source


class FixedClock:
    """Wall clock that ticks a fixed step per frame; keeps generated
    frame content reproducible across runs."""

    def __init__(self, start: float = 1_700_000_000.0, step: float = 0.1):
        self.now = start
        self.step = step

    def __call__(self) -> float:
        t = self.now
        self.now += self.step
        return t


@contextlib.contextmanager
def running_server(**kwargs):
    defaults = dict(
        key_cfg=KeyConfig(key_id=0, key=bytes(range(16)), mode=CipherMode.CTR),
        settings=CameraSettings(framesize=2, fps_limit=25),
        port=0,
    )
    defaults.update(kwargs)
    server = DeviceServer(**defaults)
    server.start()
    try:
        yield server
    finally:
        server.stop()


@pytest.fixture
def device_server():
    with running_server() as server:
        yield server


# Markers that may legitimately follow SOI in a real JPEG header.
_SEGMENT_MARKERS = frozenset(range(0xE0, 0xF0)) | {0xC0, 0xC2, 0xC4, 0xDB, 0xFE}


def find_jpeg_leak(data: bytes, min_span: int = 1024):
    """Looks for plaintext JPEG structure: the literal FF D8 FF E0 header
    signature, or a well-formed SOI (start marker followed by a segment
    marker) with an EOI more than min_span bytes later. Returns a
    description of the hit, or None."""
    idx = data.find(b"\xff\xd8\xff\xe0")
    if idx >= 0:
        return f"ffd8ffe0 at {idx}"
    i = 0
    while True:
        i = data.find(b"\xff\xd8\xff", i)
        if i < 0 or i + 3 >= len(data):
            return None
        if data[i + 3] in _SEGMENT_MARKERS:
            j = data.find(b"\xff\xd9", i + 4 + min_span)
            if j >= 0:
                return f"soi..eoi span of {j + 2 - i} bytes at {i}"
        i += 1
