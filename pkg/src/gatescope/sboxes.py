"""Reference S-box tables generated from their algebraic definitions.

Tables are computed at import time rather than hand-typed: the 8-bit AES
substitution from inversion in GF(2^8) followed by the affine map, and the
4-bit PRESENT substitution from the algebraic normal forms of its four
coordinate functions.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SBoxEntry:
    """A known cipher substitution: name, input width, full table."""

    cipher: str
    n: int
    table: tuple
    note: str = ""

    def __post_init__(self):
        if sorted(self.table) != list(range(1 << self.n)):
            raise ValueError(f"{self.cipher} table is not a bijection")


def _gf256_mul(a, b):
    # carry-less multiply modulo the Rijndael polynomial x^8+x^4+x^3+x+1
    result = 0
    for _ in range(8):
        if b & 1:
            result ^= a
        high = a & 0x80
        a = (a << 1) & 0xFF
        if high:
            a ^= 0x1B
        b >>= 1
    return result


def _gf256_inv(a):
    if a == 0:
        return 0
    # a^(2^8 - 2) by square-and-multiply
    result = 1
    power = a
    for bit in range(8):
        if (254 >> bit) & 1:
            result = _gf256_mul(result, power)
        power = _gf256_mul(power, power)
    return result


def _aes_affine(b):
    result = 0
    for i in range(8):
        bit = (
            (b >> i)
            ^ (b >> ((i + 4) % 8))
            ^ (b >> ((i + 5) % 8))
            ^ (b >> ((i + 6) % 8))
            ^ (b >> ((i + 7) % 8))
            ^ (0x63 >> i)
        ) & 1
        result |= bit << i
    return result


def aes_sbox():
    """The AES substitution: affine(inverse(x)) over GF(2^8)."""
    return tuple(_aes_affine(_gf256_inv(x)) for x in range(256))


# Algebraic normal forms of the PRESENT substitution's coordinates; each
# output bit is the XOR of the listed monomials (bit masks over x0..x3,
# 0 denoting the constant-1 monomial).
_PRESENT_ANF = (
    (0b0001, 0b0100, 0b0110, 0b1000),
    (0b0010, 0b0111, 0b1000, 0b1010, 0b1011, 0b1100, 0b1101),
    (0, 0b0011, 0b0100, 0b1000, 0b1001, 0b1010, 0b1011, 0b1101),
    (0, 0b0001, 0b0010, 0b0110, 0b0111, 0b1000, 0b1011, 0b1101),
)


def _anf_eval(monomials, x):
    value = 0
    for m in monomials:
        # the monomial is 1 iff all its variables are set in x
        value ^= 1 if (x & m) == m else 0
    return value


def present_sbox():
    """The PRESENT substitution from its coordinate ANFs."""
    return tuple(
        sum(_anf_eval(_PRESENT_ANF[j], x) << j for j in range(4)) for x in range(16)
    )


def builtin_sbox_entries():
    """The substitutions the scanner recognizes out of the box."""
    return [
        SBoxEntry("AES", 8, aes_sbox(), "GF(2^8) inversion + affine map"),
        SBoxEntry("PRESENT", 4, present_sbox(), "coordinate ANFs"),
    ]
