"""AES block cipher: key expansion plus single-block and bulk encrypt/decrypt.

Implemented from the FIPS-197 standard with the S-box as a precomputed
constant table. Two execution paths share one key schedule:

* scalar: T-table encryption / table-based inverse cipher for one 16-byte
  block at a time (used where chaining forces serial work),
* bulk: numpy lanes that run the round function across all blocks of a
  buffer at once (used by the ECB/CTR paths and CBC decryption).

Not hardened against timing side channels; table lookups are
data-dependent. That limitation is documented rather than fixed.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidBlockLength, InvalidKeyLength

BLOCK_SIZE = 16

_ROUNDS = {16: 10, 24: 12, 32: 14}

SBOX = bytes.fromhex(
    "637c777bf26b6fc53001672bfed7ab76"
    "ca82c97dfa5947f0add4a2af9ca472c0"
    "b7fd9326363ff7cc34a5e5f171d83115"
    "04c723c31896059a071280e2eb27b275"
    "09832c1a1b6e5aa0523bd6b329e32f84"
    "53d100ed20fcb15b6acbbe394a4c58cf"
    "d0efaafb434d338545f9027f503c9fa8"
    "51a3408f929d38f5bcb6da2110fff3d2"
    "cd0c13ec5f974417c4a77e3d645d1973"
    "60814fdc222a908846eeb814de5e0bdb"
    "e0323a0a4906245cc2d3ac629195e479"
    "e7c8376d8dd54ea96c56f4ea657aae08"
    "ba78252e1ca6b4c6e8dd741f4bbd8b8a"
    "703eb5664803f60e613557b986c11d9e"
    "e1f8981169d98e949b1e87e9ce5528df"
    "8ca1890dbfe6426841992d0fb054bb16"
)

_inv = bytearray(256)
for _i, _s in enumerate(SBOX):
    _inv[_s] = _i
INV_SBOX = bytes(_inv)
del _inv, _i, _s


def _gf_mul_table(factor: int) -> bytes:
    """Multiplication table x -> x * factor in GF(2^8) mod x^8+x^4+x^3+x+1."""
    table = bytearray(256)
    for x in range(256):
        a, b, acc = x, factor, 0
        while b:
            if b & 1:
                acc ^= a
            a <<= 1
            if a & 0x100:
                a ^= 0x11B
            b >>= 1
        table[x] = acc
    return bytes(table)


MUL2 = _gf_mul_table(2)
MUL3 = _gf_mul_table(3)
MUL9 = _gf_mul_table(9)
MUL11 = _gf_mul_table(11)
MUL13 = _gf_mul_table(13)
MUL14 = _gf_mul_table(14)

# Encryption T-tables: SubBytes+ShiftRows+MixColumns folded into four
# word lookups per column.
_T0 = tuple((MUL2[s] << 24) | (s << 16) | (s << 8) | MUL3[s] for s in SBOX)
_T1 = tuple((MUL3[s] << 24) | (MUL2[s] << 16) | (s << 8) | s for s in SBOX)
_T2 = tuple((s << 24) | (MUL3[s] << 16) | (MUL2[s] << 8) | s for s in SBOX)
_T3 = tuple((s << 24) | (s << 16) | (MUL3[s] << 8) | MUL2[s] for s in SBOX)

# Flat-index permutations for the (4 columns x 4 rows) state laid out as
# byte 4c+r.
_SHIFT_ROWS = (0, 5, 10, 15, 4, 9, 14, 3, 8, 13, 2, 7, 12, 1, 6, 11)
_INV_SHIFT_ROWS = (0, 13, 10, 7, 4, 1, 14, 11, 8, 5, 2, 15, 12, 9, 6, 3)

_SBOX_NP = np.frombuffer(SBOX, dtype=np.uint8)
_INV_SBOX_NP = np.frombuffer(INV_SBOX, dtype=np.uint8)
_MUL2_NP = np.frombuffer(MUL2, dtype=np.uint8)
_MUL9_NP = np.frombuffer(MUL9, dtype=np.uint8)
_MUL11_NP = np.frombuffer(MUL11, dtype=np.uint8)
_MUL13_NP = np.frombuffer(MUL13, dtype=np.uint8)
_MUL14_NP = np.frombuffer(MUL14, dtype=np.uint8)
_SHIFT_ROWS_NP = np.array(_SHIFT_ROWS, dtype=np.intp)
_INV_SHIFT_ROWS_NP = np.array(_INV_SHIFT_ROWS, dtype=np.intp)


class CipherContext:
    """Expanded round keys plus the current IV / counter block.

    The schedule (``round_keys``) is immutable after creation and may be
    shared between threads; ``iv`` is mutated by the chaining modes, so a
    context must not be used by two buffer operations concurrently.
    """

    __slots__ = ("round_keys", "key_bits", "rounds", "iv", "_words", "_rk_np")

    def __init__(self, round_keys: bytes, key_bits: int):
        self.round_keys = round_keys
        self.key_bits = key_bits
        self.rounds = _ROUNDS[key_bits // 8]
        self.iv = bytearray(BLOCK_SIZE)
        # word view for the scalar path, row view for the bulk path
        self._words = tuple(
            int.from_bytes(round_keys[i : i + 4], "big")
            for i in range(0, len(round_keys), 4)
        )
        self._rk_np = (
            np.frombuffer(round_keys, dtype=np.uint8)
            .reshape(self.rounds + 1, BLOCK_SIZE)
            .copy()
        )

    def clone(self) -> "CipherContext":
        """Independent context sharing the schedule, with a copied IV."""
        other = object.__new__(CipherContext)
        other.round_keys = self.round_keys
        other.key_bits = self.key_bits
        other.rounds = self.rounds
        other.iv = bytearray(self.iv)
        other._words = self._words
        other._rk_np = self._rk_np
        return other


def expand_key(key: bytes) -> CipherContext:
    """Expand a 16/24/32-byte key into the full round-key schedule.

    The IV starts out all-zero; the chaining modes set it before use.
    """
    if len(key) not in _ROUNDS:
        raise InvalidKeyLength(f"key must be 16, 24 or 32 bytes, got {len(key)}")
    nk = len(key) // 4
    nr = _ROUNDS[len(key)]
    words = [int.from_bytes(key[4 * i : 4 * i + 4], "big") for i in range(nk)]
    rcon = 1
    for i in range(nk, 4 * (nr + 1)):
        t = words[i - 1]
        if i % nk == 0:
            t = ((t << 8) | (t >> 24)) & 0xFFFFFFFF
            t = (
                (SBOX[(t >> 24) & 0xFF] << 24)
                | (SBOX[(t >> 16) & 0xFF] << 16)
                | (SBOX[(t >> 8) & 0xFF] << 8)
                | SBOX[t & 0xFF]
            )
            t ^= rcon << 24
            rcon = ((rcon << 1) ^ (0x1B if rcon & 0x80 else 0)) & 0xFF
        elif nk > 6 and i % nk == 4:
            t = (
                (SBOX[(t >> 24) & 0xFF] << 24)
                | (SBOX[(t >> 16) & 0xFF] << 16)
                | (SBOX[(t >> 8) & 0xFF] << 8)
                | SBOX[t & 0xFF]
            )
        words.append(words[i - nk] ^ t)
    schedule = b"".join(w.to_bytes(4, "big") for w in words)
    return CipherContext(schedule, len(key) * 8)


def _encrypt_words(ctx: CipherContext, s0: int, s1: int, s2: int, s3: int):
    """T-table cipher core on four 32-bit column words."""
    w = ctx._words
    s0 ^= w[0]
    s1 ^= w[1]
    s2 ^= w[2]
    s3 ^= w[3]
    i = 4
    for _ in range(ctx.rounds - 1):
        t0 = _T0[s0 >> 24] ^ _T1[(s1 >> 16) & 0xFF] ^ _T2[(s2 >> 8) & 0xFF] ^ _T3[s3 & 0xFF] ^ w[i]
        t1 = _T0[s1 >> 24] ^ _T1[(s2 >> 16) & 0xFF] ^ _T2[(s3 >> 8) & 0xFF] ^ _T3[s0 & 0xFF] ^ w[i + 1]
        t2 = _T0[s2 >> 24] ^ _T1[(s3 >> 16) & 0xFF] ^ _T2[(s0 >> 8) & 0xFF] ^ _T3[s1 & 0xFF] ^ w[i + 2]
        t3 = _T0[s3 >> 24] ^ _T1[(s0 >> 16) & 0xFF] ^ _T2[(s1 >> 8) & 0xFF] ^ _T3[s2 & 0xFF] ^ w[i + 3]
        s0, s1, s2, s3 = t0, t1, t2, t3
        i += 4
    b = SBOX
    o0 = ((b[s0 >> 24] << 24) | (b[(s1 >> 16) & 0xFF] << 16) | (b[(s2 >> 8) & 0xFF] << 8) | b[s3 & 0xFF]) ^ w[i]
    o1 = ((b[s1 >> 24] << 24) | (b[(s2 >> 16) & 0xFF] << 16) | (b[(s3 >> 8) & 0xFF] << 8) | b[s0 & 0xFF]) ^ w[i + 1]
    o2 = ((b[s2 >> 24] << 24) | (b[(s3 >> 16) & 0xFF] << 16) | (b[(s0 >> 8) & 0xFF] << 8) | b[s1 & 0xFF]) ^ w[i + 2]
    o3 = ((b[s3 >> 24] << 24) | (b[(s0 >> 16) & 0xFF] << 16) | (b[(s1 >> 8) & 0xFF] << 8) | b[s2 & 0xFF]) ^ w[i + 3]
    return o0, o1, o2, o3


def encrypt_block(ctx: CipherContext, block: bytes) -> bytes:
    """Encrypt exactly one 16-byte block. Read-only on the context."""
    if len(block) != BLOCK_SIZE:
        raise InvalidBlockLength(f"block must be 16 bytes, got {len(block)}")
    o0, o1, o2, o3 = _encrypt_words(
        ctx,
        int.from_bytes(block[0:4], "big"),
        int.from_bytes(block[4:8], "big"),
        int.from_bytes(block[8:12], "big"),
        int.from_bytes(block[12:16], "big"),
    )
    return (
        o0.to_bytes(4, "big")
        + o1.to_bytes(4, "big")
        + o2.to_bytes(4, "big")
        + o3.to_bytes(4, "big")
    )


def decrypt_block(ctx: CipherContext, block: bytes) -> bytes:
    """Exact inverse of encrypt_block under the same context."""
    if len(block) != BLOCK_SIZE:
        raise InvalidBlockLength(f"block must be 16 bytes, got {len(block)}")
    rk = ctx.round_keys
    nr = ctx.rounds
    state = [block[i] ^ rk[16 * nr + i] for i in range(16)]
    for rnd in range(nr - 1, 0, -1):
        state = [INV_SBOX[state[p]] for p in _INV_SHIFT_ROWS]
        base = 16 * rnd
        state = [state[i] ^ rk[base + i] for i in range(16)]
        mixed = [0] * 16
        for c in range(0, 16, 4):
            a0, a1, a2, a3 = state[c : c + 4]
            mixed[c] = MUL14[a0] ^ MUL11[a1] ^ MUL13[a2] ^ MUL9[a3]
            mixed[c + 1] = MUL9[a0] ^ MUL14[a1] ^ MUL11[a2] ^ MUL13[a3]
            mixed[c + 2] = MUL13[a0] ^ MUL9[a1] ^ MUL14[a2] ^ MUL11[a3]
            mixed[c + 3] = MUL11[a0] ^ MUL13[a1] ^ MUL9[a2] ^ MUL14[a3]
        state = mixed
    state = [INV_SBOX[state[p]] for p in _INV_SHIFT_ROWS]
    return bytes(state[i] ^ rk[i] for i in range(16))


def _mix_columns_np(state: np.ndarray) -> np.ndarray:
    v = state.reshape(-1, 4, 4)
    t = v[:, :, 0] ^ v[:, :, 1] ^ v[:, :, 2] ^ v[:, :, 3]
    u = _MUL2_NP[v ^ np.roll(v, -1, axis=2)]
    return (v ^ u ^ t[:, :, None]).reshape(-1, 16)


def _inv_mix_columns_np(state: np.ndarray) -> np.ndarray:
    v = state.reshape(-1, 4, 4)
    out = (
        _MUL14_NP[v]
        ^ _MUL11_NP[np.roll(v, -1, axis=2)]
        ^ _MUL13_NP[np.roll(v, -2, axis=2)]
        ^ _MUL9_NP[np.roll(v, -3, axis=2)]
    )
    return out.reshape(-1, 16)


def encrypt_blocks(ctx: CipherContext, data: bytes) -> bytes:
    """Encrypt a block-aligned buffer, all blocks in parallel (raw ECB core).

    Callers are responsible for the length precondition; cipher_modes wraps
    this with the error contract.
    """
    if not data:
        return b""
    rk = ctx._rk_np
    state = np.frombuffer(data, dtype=np.uint8).reshape(-1, 16) ^ rk[0]
    for rnd in range(1, ctx.rounds):
        state = _SBOX_NP[state][:, _SHIFT_ROWS_NP]
        state = _mix_columns_np(state) ^ rk[rnd]
    state = _SBOX_NP[state][:, _SHIFT_ROWS_NP] ^ rk[ctx.rounds]
    return state.tobytes()


def decrypt_blocks(ctx: CipherContext, data: bytes) -> bytes:
    """Inverse of encrypt_blocks; all blocks in parallel."""
    if not data:
        return b""
    rk = ctx._rk_np
    state = np.frombuffer(data, dtype=np.uint8).reshape(-1, 16) ^ rk[ctx.rounds]
    for rnd in range(ctx.rounds - 1, 0, -1):
        state = _INV_SBOX_NP[state[:, _INV_SHIFT_ROWS_NP]] ^ rk[rnd]
        state = _inv_mix_columns_np(state)
    state = _INV_SBOX_NP[state[:, _INV_SHIFT_ROWS_NP]] ^ rk[0]
    return state.tobytes()
