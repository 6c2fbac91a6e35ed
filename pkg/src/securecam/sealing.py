"""Seals JPEG frames into encrypted records and the bit-exact wire format.

Wire record, all multi-byte integers big-endian:

    bytes 0-3    magic "SFRM"
    byte  4      version 0x01
    byte  5      mode (0x00 ECB, 0x01 CBC, 0x02 CTR)
    byte  6      key id
    byte  7      reserved 0x00
    bytes 8-11   sequence number
    bytes 12-19  timestamp, milliseconds
    bytes 20-35  IV / initial counter block (all-zero for ECB)
    bytes 36-39  plaintext length
    bytes 40-43  ciphertext length
    bytes 44-    ciphertext

Every frame gets a fresh random IV so records decrypt independently of
ordering or loss. There is no MAC: integrity rests on the JPEG marker
check alone, which a mid-body CTR bit-flip does not trip. That gap is
deliberate, not an oversight; treat the transport as confidential but
not tamper-proof.
"""

from __future__ import annotations

import enum
import os
import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import aes, jpeg, modes
from .aes import BLOCK_SIZE
from .errors import (
    BadMagic,
    InvalidKeyLength,
    KeyMismatch,
    LengthMismatch,
    TruncatedRecord,
    UnknownMode,
    UnsupportedVersion,
)

MAGIC = b"SFRM"
VERSION = 1
HEADER_LEN = 44
_HEADER = struct.Struct(">4sBBBBIQ16sII")

KEY_ENV_VAR = "SECURECAM_KEY"


class CipherMode(enum.IntEnum):
    ECB = 0x00
    CBC = 0x01
    CTR = 0x02

    @classmethod
    def parse(cls, name: str) -> "CipherMode":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise UnknownMode(f"mode must be ecb, cbc or ctr, got {name!r}") from None


@dataclass(frozen=True)
class KeyConfig:
    """One pre-shared key slot. Key distribution is out of scope; keys
    arrive via config file or environment."""

    key_id: int
    key: bytes
    mode: CipherMode = CipherMode.CTR
    _template: aes.CipherContext = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.key_id <= 255:
            raise ValueError(f"key_id {self.key_id} outside 0..255")
        if len(self.key) not in (16, 24, 32):
            raise InvalidKeyLength(f"key must be 16, 24 or 32 bytes, got {len(self.key)}")
        object.__setattr__(self, "_template", aes.expand_key(self.key))

    def context(self) -> aes.CipherContext:
        """Fresh context sharing the expanded schedule."""
        return self._template.clone()


@dataclass(frozen=True)
class EncryptedFrame:
    mode: CipherMode
    key_id: int
    seq: int
    timestamp_ms: int
    iv: bytes
    plaintext_len: int
    ciphertext: bytes


def padded_len(plaintext_len: int) -> int:
    """Ciphertext length for the always-pad block modes."""
    return (plaintext_len // BLOCK_SIZE + 1) * BLOCK_SIZE


def expected_ciphertext_len(mode: CipherMode, plaintext_len: int) -> int:
    if mode is CipherMode.CTR:
        return plaintext_len
    return padded_len(plaintext_len)


def seal_frame(
    frame,
    cfg: KeyConfig,
    seq: Optional[int] = None,
    iv: Optional[bytes] = None,
    iv_source: Callable[[int], bytes] = os.urandom,
) -> EncryptedFrame:
    """Encrypt one frame under cfg with a fresh random IV (zero for ECB).

    seq defaults to the frame's own sequence number. iv/iv_source exist
    for deterministic tests; reusing an IV across frames voids the
    confidentiality of CBC/CTR, so leave them alone in real use.
    """
    data = frame.jpeg
    ctx = cfg.context()
    if cfg.mode is CipherMode.ECB:
        iv = bytes(BLOCK_SIZE)
        ciphertext = modes.ecb_encrypt(ctx, modes.pad_pkcs7(data))
    else:
        if iv is None:
            iv = iv_source(BLOCK_SIZE)
        modes.set_iv(ctx, iv)
        if cfg.mode is CipherMode.CBC:
            ciphertext = modes.cbc_encrypt(ctx, modes.pad_pkcs7(data))
        else:
            ciphertext = modes.ctr_xcrypt(ctx, data)
    return EncryptedFrame(
        mode=cfg.mode,
        key_id=cfg.key_id,
        seq=frame.seq if seq is None else seq,
        timestamp_ms=frame.timestamp_ms,
        iv=iv,
        plaintext_len=len(data),
        ciphertext=ciphertext,
    )


def open_frame(enc: EncryptedFrame, cfg: KeyConfig) -> bytes:
    """Decrypt, unpad, length-check and marker-validate one record.

    Raises KeyMismatch / InvalidPadding / LengthMismatch / CorruptImage;
    a frame that fails any check never leaves this function.
    """
    if enc.key_id != cfg.key_id:
        raise KeyMismatch(f"record key id {enc.key_id}, local key id {cfg.key_id}")
    ctx = cfg.context()
    if enc.mode is CipherMode.CTR:
        modes.set_iv(ctx, enc.iv)
        plain = modes.ctr_xcrypt(ctx, enc.ciphertext)
    else:
        if enc.mode is CipherMode.CBC:
            modes.set_iv(ctx, enc.iv)
            padded = modes.cbc_decrypt(ctx, enc.ciphertext)
        else:
            padded = modes.ecb_decrypt(ctx, enc.ciphertext)
        plain = modes.unpad_pkcs7(padded)
    if len(plain) != enc.plaintext_len:
        raise LengthMismatch(
            f"recovered {len(plain)} bytes, header says {enc.plaintext_len}"
        )
    return jpeg.validate_jpeg(plain)


def encode_wire(enc: EncryptedFrame) -> bytes:
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        int(enc.mode),
        enc.key_id,
        0,
        enc.seq,
        enc.timestamp_ms,
        enc.iv,
        enc.plaintext_len,
        len(enc.ciphertext),
    )
    return header + enc.ciphertext


def decode_wire(data: bytes) -> EncryptedFrame:
    """Parse one complete record; every length is validated before the
    payload is touched."""
    if len(data) < HEADER_LEN:
        raise TruncatedRecord(f"{len(data)} bytes, header needs {HEADER_LEN}")
    magic, version, mode_tag, key_id, _reserved, seq, ts, iv, pt_len, ct_len = (
        _HEADER.unpack_from(data)
    )
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersion(f"version {version}, expected {VERSION}")
    try:
        mode = CipherMode(mode_tag)
    except ValueError:
        raise UnknownMode(f"mode tag 0x{mode_tag:02x}") from None
    if ct_len != expected_ciphertext_len(mode, pt_len):
        raise LengthMismatch(
            f"{mode.name} record with plaintext_len {pt_len} cannot have"
            f" ciphertext_len {ct_len}"
        )
    if len(data) - HEADER_LEN < ct_len:
        raise TruncatedRecord(
            f"declared {ct_len} ciphertext bytes, only {len(data) - HEADER_LEN} present"
        )
    if len(data) - HEADER_LEN > ct_len:
        raise LengthMismatch(f"{len(data) - HEADER_LEN - ct_len} trailing bytes")
    return EncryptedFrame(
        mode=mode,
        key_id=key_id,
        seq=seq,
        timestamp_ms=ts,
        iv=iv,
        plaintext_len=pt_len,
        ciphertext=data[HEADER_LEN:],
    )


def parse_key_line(line: str) -> KeyConfig:
    fields = {}
    for token in line.split():
        name, _, value = token.partition("=")
        if not _:
            raise ValueError(f"malformed token {token!r}")
        fields[name] = value
    missing = {"key_id", "mode", "key"} - fields.keys()
    if missing:
        raise ValueError(f"key line missing {sorted(missing)}")
    return KeyConfig(
        key_id=int(fields["key_id"]),
        key=bytes.fromhex(fields["key"]),
        mode=CipherMode.parse(fields["mode"]),
    )


def load_key_config(
    path: Optional[str] = None, allow_ecb: bool = False
) -> KeyConfig:
    """First key from a key file, or the SECURECAM_KEY environment hex
    key (key id 0, default mode) when no file is given.

    ECB must be opted into explicitly wherever a mode is configured.
    """
    if path is not None:
        cfg = None
        with open(path) as fh:
            for raw in fh:
                line = raw.strip()
                if line and not line.startswith("#"):
                    cfg = parse_key_line(line)
                    break
        if cfg is None:
            raise ValueError(f"no key lines in {path}")
    else:
        hex_key = os.environ.get(KEY_ENV_VAR)
        if not hex_key:
            raise ValueError(f"no key file given and {KEY_ENV_VAR} is unset")
        cfg = KeyConfig(key_id=0, key=bytes.fromhex(hex_key))
    if cfg.mode is CipherMode.ECB and not allow_ecb:
        raise ValueError("ECB is insecure; pass the explicit allow-ecb flag to use it")
    return cfg
