"""Minimal JPEG marker checks used to validate recovered plaintext."""

from .errors import CorruptImage

SOI = b"\xff\xd8"
EOI = b"\xff\xd9"


def is_jpeg(data: bytes) -> bool:
    """True if data starts with SOI and ends with EOI."""
    return len(data) >= 4 and data[:2] == SOI and data[-2:] == EOI


def validate_jpeg(data: bytes) -> bytes:
    if not is_jpeg(data):
        raise CorruptImage(
            f"{len(data)}-byte buffer lacks JPEG start/end markers"
        )
    return data
