import dataclasses
import hashlib
import json
import time

import pytest

from abbenet._drbg import DeterministicRandom
from abbenet.abbe import AccessPolicy, UserRecord, decapsulate, keygen, policy_satisfies, setup
from abbenet.errors import AuthFailure, SchemaViolation
from abbenet.ndn import Consumer, Forwarder, Producer
from abbenet.pairing import generate_curve
from abbenet.rooms import (
    MessageEnvelope,
    NotRecipient,
    chat_name,
    load_envelope,
    post_message,
    receive_message,
    room_id,
    save_envelope,
)

UNIVERSE = ("eng", "sec", "ops", "hr")
REGISTRY = {
    "u1": frozenset({"eng", "sec"}),
    "u2": frozenset({"eng"}),
    "u3": frozenset({"sec", "ops"}),
    "u4": frozenset({"eng", "sec", "ops"}),
    "u5": frozenset({"eng", "sec"}),
}


@pytest.fixture(scope="module")
def curve():
    return generate_curve()


@pytest.fixture(scope="module")
def instance(curve):
    users = [UserRecord(uid, attrs) for uid, attrs in sorted(REGISTRY.items())]
    mpk, msk = setup(curve, UNIVERSE, users, DeterministicRandom(b"rooms-setup"))
    keys = {u.user_id: keygen(msk, u) for u in users}
    return mpk, keys


def oracle_recipients(policy):
    return {uid for uid, attrs in REGISTRY.items() if policy_satisfies(policy, UserRecord(uid, attrs))}


def deliveries(envelope, instance):
    """Map each registry user to their receive_message outcome."""
    mpk, keys = instance
    return {uid: receive_message(envelope, keys[uid], mpk) for uid in REGISTRY}


def test_room_id_is_order_insensitive():
    a = AccessPolicy(frozenset({"eng", "sec", "ops"}), frozenset({"u2", "u1"}))
    b = AccessPolicy(frozenset({"ops", "eng", "sec"}), frozenset({"u1", "u2"}))
    assert room_id(a) == room_id(b)
    assert len(room_id(a).digest) == 32
    assert room_id(a).hex == room_id(a).digest.hex()


def test_room_id_separates_policies():
    base = AccessPolicy(frozenset({"eng"}), frozenset())
    assert room_id(base) != room_id(AccessPolicy(frozenset({"eng", "sec"}), frozenset()))
    assert room_id(base) != room_id(AccessPolicy(frozenset({"eng"}), frozenset({"u1"})))


def test_room_id_collision_scan():
    rng = DeterministicRandom(b"room-id-scan")
    pool = [f"attr{i}" for i in range(12)]
    ids = [f"user{i}" for i in range(6)]
    seen = set()
    policies = []
    while len(policies) < 1000:
        attrs = frozenset(rng.sample(pool, rng.randrange(1, 6)))
        revoked = frozenset(rng.sample(ids, rng.randrange(0, 4)))
        key = (tuple(sorted(attrs)), tuple(sorted(revoked)))
        if key in seen:
            continue
        seen.add(key)
        policies.append(AccessPolicy(attrs, revoked))
    digests = {room_id(p).digest for p in policies}
    assert len(digests) == 1000


@pytest.mark.parametrize(
    "attrs,revoked",
    [
        ({"eng"}, set()),
        ({"eng", "sec"}, set()),
        ({"eng"}, {"u2"}),
        ({"sec"}, {"u5"}),
        ({"ops"}, {"u3", "u4"}),
    ],
)
def test_recipients_match_policy_oracle(instance, attrs, revoked):
    mpk, _ = instance
    policy = AccessPolicy(frozenset(attrs), frozenset(revoked))
    envelope = post_message(mpk, policy, "u1", b"standup at 10", DeterministicRandom(b"oracle-post"))
    outcomes = deliveries(envelope, instance)
    readers = {uid for uid, out in outcomes.items() if out is not NotRecipient}
    assert readers == oracle_recipients(policy)
    for uid in readers:
        room, plaintext = outcomes[uid]
        assert plaintext == b"standup at 10"
        assert room == room_id(policy)


def test_rekeying_moves_the_room(instance):
    mpk, _ = instance
    old_policy = AccessPolicy(frozenset({"eng"}), frozenset())
    new_policy = AccessPolicy(frozenset({"eng"}), frozenset({"u5"}))
    rng = DeterministicRandom(b"rekey")
    before = post_message(mpk, old_policy, "u1", b"old epoch", rng)
    after = post_message(mpk, new_policy, "u1", b"new epoch", rng)

    assert room_id(old_policy) != room_id(new_policy)
    old_outcomes = deliveries(before, instance)
    new_outcomes = deliveries(after, instance)
    # u5 keeps the history it was part of but drops out of the new epoch.
    assert old_outcomes["u5"][1] == b"old epoch"
    assert new_outcomes["u5"] is NotRecipient
    for uid in ("u1", "u2", "u4"):
        assert old_outcomes[uid][1] == b"old epoch"
        assert new_outcomes[uid][1] == b"new epoch"
    assert old_outcomes["u3"] is NotRecipient


def test_fresh_session_key_per_post(instance):
    mpk, keys = instance
    policy = AccessPolicy(frozenset({"eng"}), frozenset())
    rng = DeterministicRandom(b"fresh-keys")
    first = post_message(mpk, policy, "u1", b"same words", rng)
    second = post_message(mpk, policy, "u1", b"same words", rng)
    assert first.nonce != second.nonce
    assert first.ciphertext != second.ciphertext
    assert decapsulate(mpk, keys["u2"], first.header) != decapsulate(mpk, keys["u2"], second.header)
    # Same policy, so both land in the same room.
    assert receive_message(first, keys["u2"], mpk)[0] == receive_message(second, keys["u2"], mpk)[0]


def test_empty_message(instance):
    mpk, keys = instance
    policy = AccessPolicy(frozenset({"sec"}), frozenset())
    envelope = post_message(mpk, policy, "u3", b"", DeterministicRandom(b"empty"))
    assert receive_message(envelope, keys["u3"], mpk)[1] == b""


def test_timestamps(instance):
    mpk, _ = instance
    policy = AccessPolicy(frozenset({"eng"}), frozenset())
    pinned = post_message(mpk, policy, "u1", b"x", DeterministicRandom(b"ts"), timestamp=1234)
    assert pinned.timestamp == 1234
    now_ms = time.time() * 1000
    fresh = post_message(mpk, policy, "u1", b"x", DeterministicRandom(b"ts2"))
    assert isinstance(fresh.timestamp, int)
    assert abs(fresh.timestamp - now_ms) < 30_000


def test_corrupted_body_authorized_reader(instance):
    mpk, keys = instance
    policy = AccessPolicy(frozenset({"eng"}), frozenset())
    envelope = post_message(mpk, policy, "u1", b"payload", DeterministicRandom(b"corrupt"))
    flipped = bytearray(envelope.ciphertext)
    flipped[0] ^= 0x01
    bad = dataclasses.replace(envelope, ciphertext=bytes(flipped))
    with pytest.raises(AuthFailure):
        receive_message(bad, keys["u2"], mpk)
    # An unauthorized key never reaches the AEAD, corrupted or not.
    assert receive_message(bad, keys["u3"], mpk) is NotRecipient


def test_header_swap_detected(instance):
    mpk, keys = instance
    rng = DeterministicRandom(b"graft")
    env_a = post_message(mpk, AccessPolicy(frozenset({"eng"}), frozenset()), "u1", b"for eng", rng)
    env_b = post_message(mpk, AccessPolicy(frozenset({"sec"}), frozenset()), "u1", b"for sec", rng)
    grafted = dataclasses.replace(env_a, header=env_b.header)
    # u1 satisfies both policies, so decapsulation succeeds — the AEAD must refuse.
    with pytest.raises(AuthFailure):
        receive_message(grafted, keys["u1"], mpk)


def test_envelope_roundtrip(curve, instance):
    mpk, keys = instance
    policy = AccessPolicy(frozenset({"eng", "sec"}), frozenset({"u2"}))
    envelope = post_message(mpk, policy, "u4", b"wire me", DeterministicRandom(b"wire"), timestamp=9000)
    blob = save_envelope(envelope)
    back = load_envelope(blob, curve)
    assert back.sender_id == "u4"
    assert back.timestamp == 9000
    assert back.nonce == envelope.nonce
    assert back.ciphertext == envelope.ciphertext
    assert back.tag == envelope.tag
    room, plaintext = receive_message(back, keys["u4"], mpk)
    assert plaintext == b"wire me"
    assert room == room_id(policy)
    # Canonical form survives a parse/serialize cycle byte for byte.
    assert save_envelope(back) == blob


def test_envelope_rejects_malformed(curve, instance):
    mpk, _ = instance
    policy = AccessPolicy(frozenset({"eng"}), frozenset())
    envelope = post_message(mpk, policy, "u1", b"ok", DeterministicRandom(b"mal"), timestamp=1)
    good = json.loads(save_envelope(envelope))

    def rejects(obj, path):
        with pytest.raises(SchemaViolation) as err:
            load_envelope(json.dumps(obj).encode(), curve)
        assert err.value.path == path

    rejects({**good, "extra": 1}, "/")
    missing = dict(good)
    del missing["tag"]
    rejects(missing, "/")
    rejects({**good, "nonce": "@@@"}, "/nonce")
    rejects({**good, "nonce": "AAAA"}, "/nonce")  # decodes to 3 bytes, not 12
    rejects({**good, "tag": "AAAA"}, "/tag")
    rejects({**good, "ciphertext": 5}, "/ciphertext")
    rejects({**good, "sender_id": ""}, "/sender_id")
    rejects({**good, "timestamp": 1.5}, "/timestamp")
    rejects({**good, "timestamp": -4}, "/timestamp")
    rejects({**good, "header": {**good["header"], "kdf": "pbkdf2"}}, "/header/kdf")
    rejects({**good, "header": "nope"}, "/header")

    with pytest.raises(SchemaViolation) as err:
        load_envelope(b"\xff\xfe", curve)
    assert err.value.path == "/"


def test_chat_name_layout():
    name = chat_name("alice", 7)
    assert str(name) == "/chat/alice/7"
    assert name.segment is None


def test_envelopes_travel_as_named_data(curve, instance):
    mpk, keys = instance
    policy = AccessPolicy(frozenset({"eng"}), frozenset())
    rng = DeterministicRandom(b"chat-net")
    posts = [post_message(mpk, policy, "u1", f"msg {i}".encode(), rng, timestamp=i) for i in range(3)]

    with Forwarder() as fwd:
        producer = Producer(fwd)
        producer.register_prefix("/chat/u1")
        for seq, env in enumerate(posts):
            producer.publish(chat_name("u1", seq), save_envelope(env))
        consumer = Consumer(fwd)
        for seq in range(3):
            blob = consumer.fetch(chat_name("u1", seq))
            envelope = load_envelope(blob, curve)
            room, plaintext = receive_message(envelope, keys["u2"], mpk)
            assert plaintext == f"msg {seq}".encode()
            assert room == room_id(policy)
            assert receive_message(envelope, keys["u3"], mpk) is NotRecipient
        producer.close()
