"""Deterministic generation of Barreto-Naehrig pairing curves.

A BN curve is fixed by a single integer u:

    p = 36u^4 + 36u^3 + 24u^2 + 6u + 1      (field modulus)
    r = 36u^4 + 36u^3 + 18u^2 + 6u + 1      (group order)
    t = 6u^2 + 1                            (trace; #E(Fp) = p + 1 - t = r)

The search keeps u odd, which forces p % 4 == 3 so that the quadratic
extension can be Fp[i]/(i^2 + 1), and confines u to a window where both p
and r are exactly 256-bit numbers. Everything downstream of u — the curve
constant b, the base points, the sextic twist — is found by fixed ascending
scans, so a given seed always reproduces bit-identical parameters.

The group of rational points has order exactly r (cofactor 1), so any
nonzero point on the right curve generates it; the b-scan uses that to
recognize the curve with the correct order. G2 lives on the twist
y^2 = x^3 + b/xi over Fp2, whose order n2 is r * h2; the twist cofactor h2
is cleared when deriving the G2 generator.
"""

import functools
import hashlib
from itertools import count

import gmpy2
from gmpy2 import mpz

from ..errors import InvalidEncoding, UnsupportedSecurityLevel
from .encoding import g1_from_bytes, g1_to_bytes, g2_from_bytes, g2_to_bytes
from .fields import (
    FP2_ONE,
    FieldCtx,
    fp2_inv,
    fp2_is_square,
    fp2_mul,
    fp2_mul_fp,
    fp2_neg,
    fp2_pow,
    fp2_sqr,
    fp2_sqrt,
    fp_legendre,
    fp_sqrt,
)
from .points import g1_ops, g2_ops

DEFAULT_SEED = b"abbenet-bn-v1"
CURVE_FAMILY = "barreto-naehrig"

_SEARCH_DOMAIN = b"abbenet-curve-search-v1"
_U_BASE = mpz(0x6200000000000000)
_U_OFFSET_BITS = 56
_PRIMALITY_REPS = 40
_MAX_U_STEPS = 4_000_000


def bn_p(u):
    u = mpz(u)
    return 36 * u**4 + 36 * u**3 + 24 * u**2 + 6 * u + 1


def bn_r(u):
    u = mpz(u)
    return 36 * u**4 + 36 * u**3 + 18 * u**2 + 6 * u + 1


def bn_t(u):
    u = mpz(u)
    return 6 * u**2 + 1


def _initial_u(seed: bytes):
    digest = hashlib.sha256(_SEARCH_DOMAIN + seed).digest()
    offset = int.from_bytes(digest, "big") % (1 << _U_OFFSET_BITS)
    return _U_BASE + 2 * offset + 1


def _search_u(seed: bytes):
    u = _initial_u(seed)
    for _ in range(_MAX_U_STEPS):
        p = bn_p(u)
        if (
            p.bit_length() == 256
            and gmpy2.is_prime(p, _PRIMALITY_REPS)
            and gmpy2.is_prime(bn_r(u), _PRIMALITY_REPS)
        ):
            return u
        u += 2
    raise RuntimeError("curve search window exhausted")


def _search_b_and_g1(p, r):
    """Smallest b >= 1 giving a curve of order r, with base point (1, y).

    Candidate points are (1, y) with y = sqrt(1 + b); because the target
    curve has prime order r, checking r * P == O on a single nonzero point
    both selects the correct sextic twist class for b and certifies the
    point as a generator.
    """
    for b in count(1):
        rhs = (1 + b) % p
        if fp_legendre(rhs, p) != 1:
            continue
        y = fp_sqrt(rhs, p)
        y = min(y, p - y)
        point = (mpz(1), y)
        if g1_ops(p, b).scalar_mul(r, point) is None:
            return mpz(b), point
    raise RuntimeError("unreachable")


def _twist_orders(u, p, t):
    """Orders of the two sextic twists of the curve over Fp2."""
    t2 = t * t - 2 * p
    v = 6 * u * u + 4 * u + 1  # 4p - t^2 = 3 v^2
    assert 3 * v * v == 4 * p - t * t
    base = p * p + 1
    return base - (t2 + 3 * t * v) // 2, base - (t2 - 3 * t * v) // 2


def _fp2_is_cube(a, p):
    return fp2_pow(a, (p * p - 1) // 3, p) == FP2_ONE


def _twist_point(b2, p, start=0):
    """First point (x, y) with x = (j, 1), j ascending from start."""
    for j in count(start):
        x = (mpz(j), mpz(1))
        rhs_x = fp2_mul(fp2_sqr(x, p), x, p)
        rhs = ((rhs_x[0] + b2[0]) % p, (rhs_x[1] + b2[1]) % p)
        if not fp2_is_square(rhs, p):
            continue
        y = fp2_sqrt(rhs, p)
        if (y[0] if y[0] != 0 else y[1]) & 1:
            y = fp2_neg(y, p)
        return (x, y), j
    raise RuntimeError("unreachable")


def _search_twist(u, p, t, r, b):
    """Find xi = c + i (nonsquare, noncube) whose twist y^2 = x^3 + b/xi
    has order divisible by r; returns (xi, b2, h2)."""
    n2a, n2b = _twist_orders(u, p, t)
    if n2a % r == 0:
        n2, n2_other = n2a, n2b
    elif n2b % r == 0:
        n2, n2_other = n2b, n2a
    else:
        raise RuntimeError("no sextic twist has order divisible by r")
    for c in count(1):
        xi = (mpz(c), mpz(1))
        if fp2_is_square(xi, p) or _fp2_is_cube(xi, p):
            continue
        b2 = fp2_mul_fp(fp2_inv(xi, p), b, p)
        ops = g2_ops(p, b2)
        start = 0
        while True:
            point, j = _twist_point(b2, p, start)
            if ops.scalar_mul(n2, point) is None:
                if ops.scalar_mul(n2_other, point) is not None:
                    return xi, b2, n2 // r
                start = j + 1  # point order divides both candidates; rare
                continue
            break  # wrong sextic twist class: try the next xi
    raise RuntimeError("unreachable")


def _search_g2(p, r, b2, h2, ops):
    start = 0
    while True:
        point, j = _twist_point(b2, p, start)
        g2 = ops.scalar_mul(h2, point)
        if g2 is not None:
            if ops.scalar_mul(r, g2) is not None:
                raise RuntimeError("twist cofactor inconsistent")
            return g2
        start = j + 1


def _naf(k):
    """Non-adjacent form, most significant digit first."""
    digits = []
    k = int(k)
    while k:
        if k & 1:
            d = 2 - (k % 4)
            k -= d
        else:
            d = 0
        digits.append(d)
        k >>= 1
    digits.reverse()
    return digits


class CurveParams:
    """A fully derived BN curve: fields, towers, groups and generators.

    All structure is a deterministic function of u; the generators may be
    overridden (e.g. when loading serialized parameters) with any points of
    order r on the same curve/twist.
    """

    family = CURVE_FAMILY

    def __init__(self, u, security_bits=128):
        self.u = mpz(u)
        self.security_bits = int(security_bits)
        self.p = bn_p(u)
        self.r = bn_r(u)
        self.t = bn_t(u)
        if self.p.bit_length() != 256 or not gmpy2.is_prime(self.p, _PRIMALITY_REPS):
            raise ValueError("u does not give a 256-bit prime field")
        if not gmpy2.is_prime(self.r, _PRIMALITY_REPS):
            raise ValueError("u does not give a prime group order")
        self.b, self.g1 = _search_b_and_g1(self.p, self.r)
        self.ops1 = g1_ops(self.p, self.b)
        xi, b2, h2 = _search_twist(self.u, self.p, self.t, self.r, self.b)
        self.b2 = b2
        self.h2 = h2
        self.ctx = FieldCtx(self.p, xi)
        self.ops2 = g2_ops(self.p, b2)
        self.g2 = _search_g2(self.p, self.r, b2, h2, self.ops2)
        self.ate_naf = _naf(6 * self.u + 2)
        self._pair_cache = {}

    def __eq__(self, other):
        if not isinstance(other, CurveParams):
            return NotImplemented
        return (self.p, self.r, self.g1, self.g2) == (
            other.p,
            other.r,
            other.g1,
            other.g2,
        )

    def __hash__(self):
        return hash((int(self.p), int(self.r)))

    def __repr__(self):
        return f"CurveParams(u={hex(int(self.u))}, {self.p.bit_length()}-bit p)"


@functools.lru_cache(maxsize=8)
def _generate_cached(security_bits: int, seed: bytes) -> CurveParams:
    return CurveParams(_search_u(seed), security_bits)


def generate_curve(security_bits: int = 128, seed: bytes = DEFAULT_SEED) -> CurveParams:
    """Derive a pairing curve at the requested security level from a seed.

    The same (security_bits, seed) pair always returns identical
    parameters. Only the 128-bit level is supported.
    """
    if security_bits != 128:
        raise UnsupportedSecurityLevel(
            f"only 128-bit curves are supported, not {security_bits}"
        )
    if not isinstance(seed, bytes):
        raise TypeError("seed must be bytes")
    return _generate_cached(security_bits, seed)


def curve_to_json_obj(curve: CurveParams) -> dict:
    return {
        "family": curve.family,
        "security_bits": curve.security_bits,
        "u": hex(int(curve.u)),
        "p": hex(int(curve.p)),
        "r": hex(int(curve.r)),
        "g1": g1_to_bytes(curve, curve.g1).hex(),
        "g2": g2_to_bytes(curve, curve.g2).hex(),
    }


def curve_from_json_obj(obj: dict) -> CurveParams:
    """Reconstruct and validate a curve from its JSON form.

    u is authoritative; p and r must match its BN polynomials, and the
    generator encodings must decode to order-r points on the derived curve
    and twist. Repeated loads of the same description return a cached
    instance, so file parsing does not pay the reconstruction cost.
    """
    try:
        family = obj["family"]
        security_bits = obj["security_bits"]
        u = int(obj["u"], 16)
        p = int(obj["p"], 16)
        r = int(obj["r"], 16)
        g1_hex = str(obj["g1"])
        g2_hex = str(obj["g2"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidEncoding(f"malformed curve object: {exc}") from exc
    if family != CURVE_FAMILY:
        raise InvalidEncoding(f"unsupported curve family {family!r}")
    if security_bits != 128:
        raise UnsupportedSecurityLevel(
            f"only 128-bit curves are supported, not {security_bits}"
        )
    return _from_fields_cached(u, p, r, g1_hex, g2_hex, security_bits)


@functools.lru_cache(maxsize=8)
def _from_fields_cached(u, p, r, g1_hex, g2_hex, security_bits) -> CurveParams:
    try:
        curve = CurveParams(u, security_bits)
    except ValueError as exc:
        raise InvalidEncoding(str(exc)) from exc
    if p != curve.p or r != curve.r:
        raise InvalidEncoding("p or r inconsistent with the curve parameter u")
    try:
        g1 = g1_from_bytes(curve, bytes.fromhex(g1_hex))
        g2 = g2_from_bytes(curve, bytes.fromhex(g2_hex))
    except ValueError as exc:
        raise InvalidEncoding(f"bad generator encoding: {exc}") from exc
    if g1 is None or g2 is None:
        raise InvalidEncoding("generators must not be the identity")
    if curve.ops1.scalar_mul(curve.r, g1) is not None:
        raise InvalidEncoding("g1 is not in the order-r subgroup")
    curve.g1 = g1
    curve.g2 = g2
    curve._pair_cache = {}
    return curve
