"""Group API behavior and pairing properties on the default curve.

The pairing has no second implementation to diff against, so correctness
rests on the properties that uniquely pin down a reduced bilinear map of
order r — bilinearity over random scalars, non-degeneracy, exact order —
plus a dual-route check of the final exponentiation (addition chain vs one
generic exponentiation by (p^12-1)/r).
"""

import threading

import pytest

from abbenet._drbg import DeterministicRandom
from abbenet.errors import InvalidEncoding, WrongGroup
from abbenet.pairing import (
    G1Element,
    G2Element,
    GTElement,
    counters,
    decode_g1,
    decode_g2,
    decode_gt,
    g1_generator,
    g1_identity,
    g2_generator,
    g2_identity,
    generate_curve,
    group_add,
    gt_generator,
    gt_identity,
    hash_to_scalar,
    negate,
    pair,
    random_scalar,
    scalar_mul,
)
from abbenet.pairing.ate import final_exp, final_exp_slow, miller_loop
from abbenet.pairing.curvegen import _twist_point
from abbenet.pairing.encoding import g2_to_bytes, gt_to_bytes
from abbenet.pairing.fields import FP12_ONE, fp12_pow


@pytest.fixture(scope="module")
def curve():
    return generate_curve()


@pytest.fixture(scope="module")
def rng():
    return DeterministicRandom(b"pairing-api-tests")


def test_bilinearity_1000(curve, rng):
    g1, g2 = g1_generator(curve), g2_generator(curve)
    base = pair(g1, g2)
    r = int(curve.r)
    for _ in range(1000):
        x = random_scalar(curve, rng)
        y = random_scalar(curve, rng)
        lhs = pair(scalar_mul(x, g1), scalar_mul(y, g2))
        assert lhs == scalar_mul(x * y % r, base)


def test_nondegenerate_and_order(curve):
    e = pair(g1_generator(curve), g2_generator(curve))
    assert not e.is_identity()
    # exact-order check without modular reduction of the exponent
    assert fp12_pow(e.value, int(curve.r), curve.p, curve.ctx.xi) == FP12_ONE


def test_final_exp_dual_route(curve, rng):
    g1, g2 = g1_generator(curve), g2_generator(curve)
    for _ in range(3):
        P = scalar_mul(random_scalar(curve, rng), g1)
        Q = scalar_mul(random_scalar(curve, rng), g2)
        m = miller_loop(P.value, Q.value, curve)
        assert final_exp(m, curve) == final_exp_slow(m, curve)


def test_pairing_of_sums(curve, rng):
    g1, g2 = g1_generator(curve), g2_generator(curve)
    for _ in range(5):
        a = scalar_mul(random_scalar(curve, rng), g1)
        b = scalar_mul(random_scalar(curve, rng), g1)
        q = scalar_mul(random_scalar(curve, rng), g2)
        assert pair(group_add(a, b), q) == group_add(pair(a, q), pair(b, q))


def test_identity_inputs(curve):
    counters.reset()
    assert pair(g1_identity(curve), g2_generator(curve)) == gt_identity(curve)
    assert pair(g1_generator(curve), g2_identity(curve)) == gt_identity(curve)
    assert counters.snapshot()["pairings"] == 2


def test_wrong_group_rejections(curve):
    g1, g2 = g1_generator(curve), g2_generator(curve)
    with pytest.raises(WrongGroup):
        pair(g2, g1)
    with pytest.raises(WrongGroup):
        pair(g1, gt_generator(curve))
    with pytest.raises(WrongGroup):
        group_add(g1, g2)
    with pytest.raises(WrongGroup):
        scalar_mul(3, "not an element")
    other = generate_curve(128, b"some-other-seed")
    with pytest.raises(WrongGroup):
        pair(g1_generator(other), g2)
    with pytest.raises(WrongGroup):
        group_add(g1, g1_generator(other))


def test_counter_semantics(curve):
    counters.reset()
    g1, g2 = g1_generator(curve), g2_generator(curve)
    pair(g1, g2)
    assert counters.snapshot() == {"pairings": 1, "group_mults": 0}
    scalar_mul(7, g1)
    scalar_mul(7, g2)
    scalar_mul(0, g1)  # still counted: the call is what is being counted
    assert counters.snapshot() == {"pairings": 1, "group_mults": 3}
    counters.reset()
    assert counters.snapshot() == {"pairings": 0, "group_mults": 0}


def test_counter_thread_safety():
    counters.reset()
    barrier = threading.Barrier(8)

    def work():
        barrier.wait()
        for _ in range(500):
            counters.count_group_mult()
            counters.count_pairing()

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert counters.snapshot() == {"pairings": 4000, "group_mults": 4000}
    counters.reset()


def test_scalar_edge_cases(curve):
    g1 = g1_generator(curve)
    r = int(curve.r)
    assert scalar_mul(0, g1) == g1_identity(curve)
    assert scalar_mul(1, g1) == g1
    assert scalar_mul(r, g1) == g1_identity(curve)
    assert scalar_mul(r + 1, g1) == g1
    assert scalar_mul(-1, g1) == negate(g1)
    e = gt_generator(curve)
    assert scalar_mul(r, e) == gt_identity(curve)
    assert scalar_mul(r + 1, e) == e


def test_add_neg_identities(curve):
    for gen, ident in (
        (g1_generator(curve), g1_identity(curve)),
        (g2_generator(curve), g2_identity(curve)),
        (gt_generator(curve), gt_identity(curve)),
    ):
        assert group_add(gen, ident) == gen
        assert group_add(gen, negate(gen)) == ident
        assert negate(negate(gen)) == gen


def test_group_law_vs_scalars(curve, rng):
    r = int(curve.r)
    for gen in (g1_generator(curve), g2_generator(curve), gt_generator(curve)):
        a, b = random_scalar(curve, rng), random_scalar(curve, rng)
        lhs = scalar_mul((a + b) % r, gen)
        rhs = group_add(scalar_mul(a, gen), scalar_mul(b, gen))
        assert lhs == rhs


def test_operator_sugar(curve):
    g1 = g1_generator(curve)
    assert 2 * g1 == group_add(g1, g1)
    assert g1 + g1 == 2 * g1
    assert -g1 == negate(g1)


def test_encode_roundtrip_1000_per_group(curve, rng):
    g1, g2, e = g1_generator(curve), g2_generator(curve), gt_generator(curve)
    for gen, decode in ((g1, decode_g1), (g2, decode_g2), (e, decode_gt)):
        for _ in range(1000):
            el = scalar_mul(random_scalar(curve, rng), gen)
            data = el.encoding
            back = decode(curve, data)
            assert back == el
            assert back.encoding == data


def test_identity_encodings(curve):
    assert decode_g1(curve, g1_identity(curve).encoding) == g1_identity(curve)
    assert decode_g2(curve, g2_identity(curve).encoding) == g2_identity(curve)
    assert len(g1_identity(curve).encoding) == 33
    assert len(g2_identity(curve).encoding) == 65
    e = gt_identity(curve)
    assert decode_gt(curve, e.encoding) == e
    assert len(e.encoding) == 384


def test_decode_rejections(curve):
    good_g1 = g1_generator(curve).encoding
    good_g2 = g2_generator(curve).encoding
    good_gt = gt_generator(curve).encoding

    for data in (b"", good_g1[:-1], good_g1 + b"\x00"):
        with pytest.raises(InvalidEncoding):
            decode_g1(curve, data)
    with pytest.raises(InvalidEncoding):
        decode_g1(curve, b"\x05" + good_g1[1:])
    with pytest.raises(InvalidEncoding):  # x >= p
        decode_g1(curve, b"\x02" + b"\xff" * 32)
    with pytest.raises(InvalidEncoding):  # x = 2 is off-curve
        decode_g1(curve, b"\x02" + (2).to_bytes(32, "big"))

    with pytest.raises(InvalidEncoding):
        decode_g2(curve, good_g2[:-1])
    with pytest.raises(InvalidEncoding):
        decode_g2(curve, b"\x07" + good_g2[1:])

    # a twist point outside the order-r subgroup must be rejected
    point, _ = _twist_point(curve.b2, curve.p)
    assert curve.ops2.scalar_mul(curve.r, point) is not None  # not in subgroup
    with pytest.raises(InvalidEncoding):
        decode_g2(curve, g2_to_bytes(curve, point))

    with pytest.raises(InvalidEncoding):
        decode_gt(curve, good_gt[:-1])
    with pytest.raises(InvalidEncoding):  # all-zero is not a group element
        decode_gt(curve, b"\x00" * 384)
    # a Miller-loop value before final exponentiation is not order r
    m = miller_loop(curve.g1, curve.g2, curve)
    with pytest.raises(InvalidEncoding):
        decode_gt(curve, gt_to_bytes(curve, m))


def test_hash_to_scalar(curve):
    a = hash_to_scalar(curve, b"user:alice")
    b = hash_to_scalar(curve, b"user:bob")
    assert a != b
    assert hash_to_scalar(curve, b"user:alice") == a
    assert 0 < a < int(curve.r)


def test_random_scalar_reproducible(curve):
    def draw(seed):
        rng = DeterministicRandom(seed)
        return [random_scalar(curve, rng) for _ in range(5)]

    r1, r2 = draw(b"seed-x"), draw(b"seed-x")
    assert r1 == r2
    assert all(0 < s < int(curve.r) for s in r1)
    assert len(set(r1)) == 5


def test_elements_are_immutable(curve):
    g1 = g1_generator(curve)
    with pytest.raises(AttributeError):
        g1.value = None
    assert isinstance(hash(g1), int)
    assert g1.group == "g1"
    assert isinstance(g1, G1Element)
    assert isinstance(g2_generator(curve), G2Element)
    assert isinstance(gt_generator(curve), GTElement)
