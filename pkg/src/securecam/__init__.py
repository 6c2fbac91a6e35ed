"""Encrypted camera streaming testbed.

A simulated JPEG camera, AES-128/192/256 in ECB/CBC/CTR, a bit-exact
encrypted-frame wire format served over HTTP, a decrypting viewer/relay,
and a benchmark harness.
"""

from .camera import CameraSettings, CaptureFlag, Frame, FrameSource, apply_control
from .sealing import (
    CipherMode,
    EncryptedFrame,
    KeyConfig,
    decode_wire,
    encode_wire,
    load_key_config,
    open_frame,
    seal_frame,
)

__all__ = [
    "CameraSettings",
    "CaptureFlag",
    "CipherMode",
    "EncryptedFrame",
    "Frame",
    "FrameSource",
    "KeyConfig",
    "apply_control",
    "decode_wire",
    "encode_wire",
    "load_key_config",
    "open_frame",
    "seal_frame",
]

__version__ = "0.1.0"
