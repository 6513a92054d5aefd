"""Canonical byte encodings for group elements.

G1: 33 bytes — one prefix byte (0x02 even y / 0x03 odd y / 0x00 infinity)
    followed by the 32-byte big-endian x coordinate (zeros for infinity).
G2: 65 bytes — same prefix convention, then x.c0 and x.c1 as 32-byte
    big-endian values. The "parity" of an Fp2 value y is the parity of its
    c0 component, or of c1 when c0 is zero, which distinguishes y from -y
    because p is odd.
GT: 384 bytes — the twelve Fp coefficients in w-power order
    e0.c0, e0.c1, e1.c0, ..., e5.c1, each 32-byte big-endian.

Decoding validates membership: on-curve for G1 (whose BN cofactor is 1, so
the subgroup is the whole group), on-twist plus an order-r check for G2,
and a full order-r check for GT.
"""

from gmpy2 import mpz

from ..errors import InvalidEncoding
from .fields import fp2_sqrt, fp_sqrt, fp12_pow, FP12_ONE

G1_LEN = 33
G2_LEN = 65
GT_LEN = 384

_INF_G1 = b"\x00" * G1_LEN
_INF_G2 = b"\x00" * G2_LEN


def _fp2_parity(v) -> int:
    return int(v[0] & 1) if v[0] != 0 else int(v[1] & 1)


def g1_to_bytes(curve, affine) -> bytes:
    if affine is None:
        return _INF_G1
    x, y = affine
    prefix = 2 + int(y & 1)
    return bytes([prefix]) + int(x).to_bytes(32, "big")


def g1_from_bytes(curve, data: bytes):
    if len(data) != G1_LEN:
        raise InvalidEncoding(f"G1 element must be {G1_LEN} bytes, got {len(data)}")
    if data == _INF_G1:
        return None
    prefix = data[0]
    if prefix not in (2, 3):
        raise InvalidEncoding(f"bad G1 prefix byte 0x{prefix:02x}")
    x = mpz(int.from_bytes(data[1:], "big"))
    p = curve.p
    if x >= p:
        raise InvalidEncoding("G1 x coordinate out of range")
    y = fp_sqrt((x * x % p * x + curve.b) % p, p)
    if y is None:
        raise InvalidEncoding("G1 x coordinate is not on the curve")
    if int(y & 1) != prefix - 2:
        y = (-y) % p
    return (x, y)


def g2_to_bytes(curve, affine) -> bytes:
    if affine is None:
        return _INF_G2
    x, y = affine
    prefix = 2 + _fp2_parity(y)
    return (
        bytes([prefix])
        + int(x[0]).to_bytes(32, "big")
        + int(x[1]).to_bytes(32, "big")
    )


def g2_from_bytes(curve, data: bytes, check_order: bool = True):
    if len(data) != G2_LEN:
        raise InvalidEncoding(f"G2 element must be {G2_LEN} bytes, got {len(data)}")
    if data == _INF_G2:
        return None
    prefix = data[0]
    if prefix not in (2, 3):
        raise InvalidEncoding(f"bad G2 prefix byte 0x{prefix:02x}")
    p = curve.p
    x = (
        mpz(int.from_bytes(data[1:33], "big")),
        mpz(int.from_bytes(data[33:], "big")),
    )
    if x[0] >= p or x[1] >= p:
        raise InvalidEncoding("G2 x coordinate out of range")
    ops = curve.ops2
    rhs = ops._add(ops._mul(ops._sqr(x), x), curve.b2)
    y = fp2_sqrt(rhs, p)
    if y is None:
        raise InvalidEncoding("G2 x coordinate is not on the twist")
    if _fp2_parity(y) != prefix - 2:
        y = ops._neg(y)
    point = (x, y)
    if check_order and ops.scalar_mul(curve.r, point) is not None:
        raise InvalidEncoding("G2 point is not in the order-r subgroup")
    return point


def gt_to_bytes(curve, value) -> bytes:
    d0, d1 = value
    coeffs = (d0[0], d1[0], d0[1], d1[1], d0[2], d1[2])
    return b"".join(
        int(c).to_bytes(32, "big") for e in coeffs for c in e
    )


def gt_from_bytes(curve, data: bytes, check_order: bool = True):
    if len(data) != GT_LEN:
        raise InvalidEncoding(f"GT element must be {GT_LEN} bytes, got {len(data)}")
    p = curve.p
    raw = [
        mpz(int.from_bytes(data[i : i + 32], "big")) for i in range(0, GT_LEN, 32)
    ]
    if any(c >= p for c in raw):
        raise InvalidEncoding("GT coefficient out of range")
    e = [(raw[2 * j], raw[2 * j + 1]) for j in range(6)]
    value = ((e[0], e[2], e[4]), (e[1], e[3], e[5]))
    if check_order:
        if all(c == 0 for c in raw):
            raise InvalidEncoding("GT zero is not a group element")
        if fp12_pow(value, curve.r, p, curve.ctx.xi) != FP12_ONE:
            raise InvalidEncoding("GT element is not in the order-r subgroup")
    return value
