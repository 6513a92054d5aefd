"""Pairing groups over deterministically generated BN curves.

Public surface:

- ``generate_curve(security_bits, seed)`` / curve JSON (de)serialization
- immutable ``G1Element`` / ``G2Element`` / ``GTElement`` wrappers
- group operations: ``scalar_mul``, ``group_add``, ``negate``, ``pair``
- scalar helpers: ``random_scalar``, ``hash_to_scalar``
- canonical encodings via each element's ``.encoding`` and ``decode_*``
- a process-wide, thread-safe operation counter ``counters`` tracking
  pairing evaluations and group scalar multiplications

GT is written through the same additive-style API as the point groups:
``group_add`` is the GT product and ``scalar_mul`` the GT power, so
protocol code is uniform across groups. All three groups have prime order
r; scalars are reduced mod r on use.
"""

import hashlib
import threading

from ..errors import WrongGroup
from ..errors import InvalidEncoding  # noqa: F401  (re-export convenience)
from .curvegen import (
    CurveParams,
    DEFAULT_SEED,
    curve_from_json_obj,
    curve_to_json_obj,
    generate_curve,
)
from .encoding import (
    G1_LEN,
    G2_LEN,
    GT_LEN,
    g1_from_bytes,
    g1_to_bytes,
    g2_from_bytes,
    g2_to_bytes,
    gt_from_bytes,
    gt_to_bytes,
)
from .fields import FP12_ONE, fp12_conj, fp12_mul, fp12_pow
from .ate import pair_points

__all__ = [
    "CurveParams",
    "DEFAULT_SEED",
    "G1Element",
    "G2Element",
    "GTElement",
    "counters",
    "curve_from_json_obj",
    "curve_to_json_obj",
    "decode_g1",
    "decode_g2",
    "decode_gt",
    "g1_generator",
    "g1_identity",
    "g2_generator",
    "g2_identity",
    "generate_curve",
    "group_add",
    "gt_generator",
    "gt_identity",
    "hash_to_scalar",
    "negate",
    "pair",
    "random_scalar",
    "scalar_mul",
]


class OpCounters:
    """Thread-safe counters for the expensive group operations."""

    def __init__(self):
        self._lock = threading.Lock()
        self.pairings = 0
        self.group_mults = 0

    def count_pairing(self):
        with self._lock:
            self.pairings += 1

    def count_group_mult(self):
        with self._lock:
            self.group_mults += 1

    def reset(self):
        with self._lock:
            self.pairings = 0
            self.group_mults = 0

    def snapshot(self) -> dict:
        with self._lock:
            return {"pairings": self.pairings, "group_mults": self.group_mults}


counters = OpCounters()


class _Element:
    """Immutable (curve, value) wrapper shared by the three groups."""

    __slots__ = ("curve", "value")
    group = ""

    def __init__(self, curve, value):
        object.__setattr__(self, "curve", curve)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, val):
        raise AttributeError("group elements are immutable")

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and self.curve == other.curve
            and self.value == other.value
        )

    def __hash__(self):
        return hash((self.group, self.encoding))

    def __repr__(self):
        return f"{type(self).__name__}(0x{self.encoding.hex()[:16]}...)"

    def __add__(self, other):
        return group_add(self, other)

    def __neg__(self):
        return negate(self)

    def __rmul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return scalar_mul(k, self)


class G1Element(_Element):
    group = "g1"

    @property
    def encoding(self) -> bytes:
        return g1_to_bytes(self.curve, self.value)

    def is_identity(self) -> bool:
        return self.value is None


class G2Element(_Element):
    group = "g2"

    @property
    def encoding(self) -> bytes:
        return g2_to_bytes(self.curve, self.value)

    def is_identity(self) -> bool:
        return self.value is None


class GTElement(_Element):
    group = "gt"

    @property
    def encoding(self) -> bytes:
        return gt_to_bytes(self.curve, self.value)

    def is_identity(self) -> bool:
        return self.value == FP12_ONE


def g1_generator(curve) -> G1Element:
    return G1Element(curve, curve.g1)


def g2_generator(curve) -> G2Element:
    return G2Element(curve, curve.g2)


def g1_identity(curve) -> G1Element:
    return G1Element(curve, None)


def g2_identity(curve) -> G2Element:
    return G2Element(curve, None)


def gt_identity(curve) -> GTElement:
    return GTElement(curve, FP12_ONE)


def gt_generator(curve) -> GTElement:
    """e(g1, g2); cached per curve (no counter bump for the cached value)."""
    cached = curve._pair_cache.get("gt_gen")
    if cached is None:
        cached = pair_points(curve.g1, curve.g2, curve)
        curve._pair_cache["gt_gen"] = cached
    return GTElement(curve, cached)


def scalar_mul(k: int, element):
    """k-fold group operation; in GT this is the k-th power."""
    if not isinstance(element, _Element):
        raise WrongGroup(f"cannot scalar-multiply {type(element).__name__}")
    counters.count_group_mult()
    curve = element.curve
    k = int(k) % int(curve.r)
    if isinstance(element, G1Element):
        return G1Element(curve, curve.ops1.scalar_mul(k, element.value))
    if isinstance(element, G2Element):
        return G2Element(curve, curve.ops2.scalar_mul(k, element.value))
    if isinstance(element, GTElement):
        return GTElement(curve, fp12_pow(element.value, k, curve.p, curve.ctx.xi))
    raise WrongGroup(f"cannot scalar-multiply {type(element).__name__}")


def group_add(a, b):
    """Group operation; in GT this is the product."""
    if type(a) is not type(b) or not isinstance(a, _Element):
        raise WrongGroup(
            f"cannot combine {type(a).__name__} with {type(b).__name__}"
        )
    if a.curve != b.curve:
        raise WrongGroup("elements belong to different curves")
    curve = a.curve
    if isinstance(a, GTElement):
        return GTElement(curve, fp12_mul(a.value, b.value, curve.p, curve.ctx.xi))
    ops = curve.ops1 if isinstance(a, G1Element) else curve.ops2
    result = ops.to_affine(ops.add(ops.from_affine(a.value), ops.from_affine(b.value)))
    return type(a)(curve, result)


def negate(a):
    if isinstance(a, GTElement):
        # Order-r GT elements are unitary: conjugation inverts them.
        return GTElement(a.curve, fp12_conj(a.value, a.curve.p))
    if isinstance(a, (G1Element, G2Element)):
        ops = a.curve.ops1 if isinstance(a, G1Element) else a.curve.ops2
        return type(a)(a.curve, ops.neg_affine(a.value))
    raise WrongGroup(f"cannot negate {type(a).__name__}")


def pair(a: G1Element, b: G2Element) -> GTElement:
    """Reduced optimal ate pairing e: G1 x G2 -> GT."""
    if not isinstance(a, G1Element) or not isinstance(b, G2Element):
        raise WrongGroup(
            f"pairing needs (G1, G2), got ({type(a).__name__}, {type(b).__name__})"
        )
    if a.curve != b.curve:
        raise WrongGroup("pairing inputs belong to different curves")
    counters.count_pairing()
    if a.value is None or b.value is None:
        return GTElement(a.curve, FP12_ONE)
    return GTElement(a.curve, pair_points(a.value, b.value, a.curve))


def random_scalar(curve, rng) -> int:
    """Uniform scalar in [1, r-1] from an object with randbelow()."""
    return 1 + rng.randbelow(int(curve.r) - 1)


def hash_to_scalar(curve, data: bytes) -> int:
    """SHA-512 of data reduced mod r, avoiding zero."""
    counter = 0
    while True:
        digest = hashlib.sha512(data if counter == 0 else
                                data + counter.to_bytes(4, "big")).digest()
        value = int.from_bytes(digest, "big") % int(curve.r)
        if value:
            return value
        counter += 1


def decode_g1(curve, data: bytes) -> G1Element:
    return G1Element(curve, g1_from_bytes(curve, data))


def decode_g2(curve, data: bytes) -> G2Element:
    return G2Element(curve, g2_from_bytes(curve, data))


def decode_gt(curve, data: bytes) -> GTElement:
    return GTElement(curve, gt_from_bytes(curve, data))
