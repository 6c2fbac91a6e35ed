"""Buffer-level ECB, CBC and CTR over the AES core, plus PKCS#7 padding.

ECB and CBC require block-aligned input (pad first); CTR works on any
length and is its own inverse. The IV lives in the context and advances
across calls: after cbc_encrypt/cbc_decrypt it holds the last ciphertext
block, after ctr_xcrypt it holds the counter block past the consumed
blocks, so back-to-back calls continue one logical stream.

ECB is provided for parity and measurement only. It leaks plaintext block
equality (see the pattern tests) and every configuration surface that can
select it demands an explicit opt-in. Do not use it for real traffic.
"""

from __future__ import annotations

import struct

import numpy as np

from . import aes
from .aes import BLOCK_SIZE, CipherContext
from .errors import InvalidLength, InvalidPadding

_MASK128 = (1 << 128) - 1


def pad_pkcs7(data: bytes) -> bytes:
    """Always-pad PKCS#7: output is the next block multiple strictly
    greater than the input length, so aligned input gains a full block."""
    n = BLOCK_SIZE - (len(data) % BLOCK_SIZE)
    return data + bytes([n]) * n


def unpad_pkcs7(data: bytes) -> bytes:
    """Strip a PKCS#7 pad, validating every pad byte."""
    if len(data) == 0 or len(data) % BLOCK_SIZE:
        raise InvalidLength(
            f"padded data must be a nonzero multiple of {BLOCK_SIZE}, got {len(data)}"
        )
    n = data[-1]
    if not 1 <= n <= BLOCK_SIZE:
        raise InvalidPadding(f"pad byte {n} out of range 1..{BLOCK_SIZE}")
    if data[-n:] != bytes([n]) * n:
        raise InvalidPadding("pad bytes disagree with pad count")
    return data[:-n]


def set_iv(ctx: CipherContext, iv: bytes) -> None:
    """Replace the context IV / counter block."""
    if len(iv) != BLOCK_SIZE:
        raise InvalidLength(f"iv must be {BLOCK_SIZE} bytes, got {len(iv)}")
    ctx.iv[:] = iv


def _require_aligned(buf: bytes) -> None:
    if len(buf) % BLOCK_SIZE:
        raise InvalidLength(
            f"buffer length {len(buf)} is not a multiple of {BLOCK_SIZE}"
        )


def ecb_encrypt(ctx: CipherContext, buf: bytes) -> bytes:
    """Each block encrypted independently. INSECURE: equal plaintext
    blocks produce equal ciphertext blocks."""
    _require_aligned(buf)
    return aes.encrypt_blocks(ctx, buf)


def ecb_decrypt(ctx: CipherContext, buf: bytes) -> bytes:
    _require_aligned(buf)
    return aes.decrypt_blocks(ctx, buf)


def cbc_encrypt(ctx: CipherContext, buf: bytes) -> bytes:
    """CBC chaining from ctx.iv; leaves the last ciphertext block in
    ctx.iv. Serial by nature, so this runs on the scalar cipher core."""
    _require_aligned(buf)
    if not buf:
        return b""
    nwords = len(buf) // 4
    words = struct.unpack(f">{nwords}I", buf)
    c0, c1, c2, c3 = struct.unpack(">4I", ctx.iv)
    out = []
    for i in range(0, nwords, 4):
        c0, c1, c2, c3 = aes._encrypt_words(
            ctx, words[i] ^ c0, words[i + 1] ^ c1, words[i + 2] ^ c2, words[i + 3] ^ c3
        )
        out.append(c0)
        out.append(c1)
        out.append(c2)
        out.append(c3)
    ct = struct.pack(f">{nwords}I", *out)
    ctx.iv[:] = ct[-BLOCK_SIZE:]
    return ct


def cbc_decrypt(ctx: CipherContext, buf: bytes) -> bytes:
    """Inverse of cbc_encrypt. All blocks decrypt in parallel, then each
    is XORed with the preceding ciphertext block (IV for the first)."""
    _require_aligned(buf)
    if not buf:
        return b""
    decrypted = np.frombuffer(aes.decrypt_blocks(ctx, buf), dtype=np.uint8)
    chain = np.frombuffer(bytes(ctx.iv) + buf[:-BLOCK_SIZE], dtype=np.uint8)
    plain = (decrypted ^ chain).tobytes()
    ctx.iv[:] = buf[-BLOCK_SIZE:]
    return plain


def _counter_blocks(iv: bytes, count: int) -> bytes:
    """count consecutive counter blocks starting at iv, incrementing
    big-endian across the full 16 bytes."""
    hi = np.uint64(int.from_bytes(iv[:8], "big"))
    lo = np.uint64(int.from_bytes(iv[8:], "big"))
    lo_v = lo + np.arange(count, dtype=np.uint64)
    hi_v = hi + (lo_v < lo).astype(np.uint64)
    out = np.empty((count, 16), dtype=np.uint8)
    out[:, :8] = hi_v.astype(">u8").view(np.uint8).reshape(count, 8)
    out[:, 8:] = lo_v.astype(">u8").view(np.uint8).reshape(count, 8)
    return out.tobytes()


def ctr_xcrypt(ctx: CipherContext, buf: bytes) -> bytes:
    """XOR buf with the keystream from encrypting successive counter
    blocks. Involution: running it twice with the same initial counter
    returns the input. Advances ctx.iv past the consumed blocks."""
    if not buf:
        return b""
    nblocks = (len(buf) + BLOCK_SIZE - 1) // BLOCK_SIZE
    keystream = aes.encrypt_blocks(ctx, _counter_blocks(bytes(ctx.iv), nblocks))
    data = np.frombuffer(buf, dtype=np.uint8)
    ks = np.frombuffer(keystream, dtype=np.uint8)[: len(buf)]
    counter = (int.from_bytes(ctx.iv, "big") + nblocks) & _MASK128
    ctx.iv[:] = counter.to_bytes(BLOCK_SIZE, "big")
    return (data ^ ks).tobytes()
