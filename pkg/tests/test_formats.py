"""Round-trips and failure paths for the three JSON file formats.

Expected values come from two independent directions: round-trips are
checked against the in-memory objects that produced the files, and every
rejection test asserts the exact JSON path the loader must report.
"""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abbenet._drbg import DeterministicRandom
from abbenet.abbe import AccessPolicy, UserRecord, decapsulate, encapsulate, keygen, setup
from abbenet.errors import SchemaViolation
from abbenet.formats import (
    ConfigFile,
    HeaderFile,
    KeysFile,
    canonical_json_bytes,
    header_from_abbe,
    header_to_abbe,
    load_config,
    load_header,
    load_keys,
    save_config,
    save_header,
    save_keys,
)
from abbenet.pairing import curve_to_json_obj, generate_curve


@pytest.fixture(scope="module")
def curve():
    return generate_curve()


UNIVERSE = ("dept:eng", "dept:sales", "role:lead", "site:hq")
REGISTRY = (
    UserRecord("alice", ("dept:eng", "role:lead", "site:hq")),
    UserRecord("bob", ("dept:eng",)),
    UserRecord("carol", ("dept:sales", "role:lead")),
)


@pytest.fixture(scope="module")
def instance(curve):
    rng = DeterministicRandom(b"formats-test-instance")
    mpk, msk = setup(curve, UNIVERSE, REGISTRY, rng)
    keys = tuple(keygen(msk, u) for u in REGISTRY)
    return mpk, msk, keys, rng


def reload(obj, loader):
    """Serialize a (possibly mutated) JSON object and run it through a loader."""
    return loader(canonical_json_bytes(obj))


def violation(obj, loader) -> SchemaViolation:
    with pytest.raises(SchemaViolation) as err:
        reload(obj, loader)
    return err.value


# ----------------------------------------------------------------- canonical


def test_canonical_json_is_sorted_minimal_utf8():
    blob = canonical_json_bytes({"b": 1, "a": [2, 3], "s": "ü"})
    assert blob == '{"a":[2,3],"b":1,"s":"ü"}'.encode("utf-8")
    # key order of the input dict must not matter
    assert blob == canonical_json_bytes({"s": "ü", "a": [2, 3], "b": 1})


# -------------------------------------------------------------------- config


def make_config(curve, pool, users, policy):
    return ConfigFile(curve=curve, attribute_pool=pool, users=users, policy=policy)


def test_config_roundtrip_small_pool(curve):
    pool = tuple(f"a{i:02d}" for i in range(50))
    cfg = make_config(
        curve,
        pool,
        (UserRecord("u1", (pool[7], pool[21], pool[40])),),
        AccessPolicy({pool[7], pool[21]}, frozenset()),
    )
    blob = save_config(cfg)
    assert load_config(blob) == cfg
    assert save_config(load_config(blob)) == blob


def test_config_roundtrip_with_revocation_and_unicode(curve):
    cfg = make_config(
        curve,
        ("café", "日本語", "plain"),
        (
            UserRecord("uá", ("café", "plain")),
            UserRecord("u2", ("日本語",)),
        ),
        AccessPolicy({"café"}, {"u2"}),
    )
    blob = save_config(cfg)
    assert load_config(blob) == cfg
    # canonical form is deterministic byte for byte
    assert save_config(load_config(blob)) == blob


@st.composite
def config_strategy(draw):
    pool = draw(st.lists(st.text(min_size=1, max_size=12), min_size=1, max_size=6, unique=True))
    ids = draw(st.lists(st.text(min_size=1, max_size=8), min_size=0, max_size=4, unique=True))
    users = tuple(
        UserRecord(uid, tuple(draw(st.lists(st.sampled_from(pool), min_size=1, unique=True))))
        for uid in ids
    )
    policy_attrs = draw(st.lists(st.sampled_from(pool), min_size=1, unique=True))
    revoked = draw(st.lists(st.sampled_from(ids), unique=True)) if ids else []
    return ConfigFile(
        curve=generate_curve(),
        attribute_pool=tuple(pool),
        users=users,
        policy=AccessPolicy(frozenset(policy_attrs), frozenset(revoked)),
    )


@settings(max_examples=60, deadline=None)
@given(config_strategy())
def test_config_roundtrip_property(cfg):
    blob = save_config(cfg)
    assert load_config(blob) == cfg
    assert save_config(load_config(blob)) == blob


def test_config_rejects_policy_attribute_outside_pool(curve):
    cfg = make_config(
        curve, ("a", "b"), (UserRecord("u", ("a",)),), AccessPolicy({"a"})
    )
    obj = json.loads(save_config(cfg))
    obj["policy"]["attributes"] = ["a", "zz"]
    err = violation(obj, load_config)
    assert err.path == "/policy/attributes"
    assert "zz" in err.reason


def test_config_referential_rejections(curve):
    cfg = make_config(
        curve,
        ("a", "b"),
        (UserRecord("u1", ("a",)), UserRecord("u2", ("b",))),
        AccessPolicy({"a"}, {"u2"}),
    )
    good = json.loads(save_config(cfg))

    obj = json.loads(json.dumps(good))
    obj["users"][1]["attributes"] = ["b", "stray"]
    assert violation(obj, load_config).path == "/users/1/attributes"

    obj = json.loads(json.dumps(good))
    obj["users"][1]["id"] = "u1"
    assert violation(obj, load_config).path == "/users/1/id"

    obj = json.loads(json.dumps(good))
    obj["policy"]["revoked"] = ["nobody"]
    assert violation(obj, load_config).path == "/policy/revoked"


def test_config_schema_rejections(curve):
    cfg = make_config(curve, ("a",), (UserRecord("u", ("a",)),), AccessPolicy({"a"}))
    good = json.loads(save_config(cfg))

    obj = json.loads(json.dumps(good))
    del obj["policy"]
    assert violation(obj, load_config).path == "/"

    obj = json.loads(json.dumps(good))
    obj["junk"] = 1
    assert violation(obj, load_config).path == "/"

    obj = json.loads(json.dumps(good))
    obj["curve"]["u"] = "0xZZ"
    assert violation(obj, load_config).path == "/curve/u"

    obj = json.loads(json.dumps(good))
    obj["curve"]["family"] = "edwards"
    assert violation(obj, load_config).path == "/curve/family"

    obj = json.loads(json.dumps(good))
    obj["policy"]["attributes"] = []
    assert violation(obj, load_config).path == "/policy/attributes"

    with pytest.raises(SchemaViolation) as err:
        load_config(b"not json")
    assert err.value.path == "/"

    with pytest.raises(SchemaViolation) as err:
        load_config(b"[1,2]")
    assert err.value.path == "/"


def test_config_rejects_inconsistent_curve(curve):
    cfg = make_config(curve, ("a",), (UserRecord("u", ("a",)),), AccessPolicy({"a"}))
    good = json.loads(save_config(cfg))

    obj = json.loads(json.dumps(good))
    obj["curve"]["p"] = hex(int(obj["curve"]["p"], 16) + 2)
    err = violation(obj, load_config)
    assert err.path == "/curve"

    obj = json.loads(json.dumps(good))
    obj["curve"]["security_bits"] = 192
    assert violation(obj, load_config).path == "/curve"


# ---------------------------------------------------------------------- keys


def test_keys_roundtrip_and_determinism(instance):
    mpk, msk, keys, _ = instance
    kf = KeysFile(mpk=mpk, msk=msk, user_keys=keys)
    blob = save_keys(kf)
    loaded = load_keys(blob)
    assert loaded == kf
    assert save_keys(loaded) == blob


def test_keys_element_counts_follow_attribute_counts(curve):
    rng = DeterministicRandom(b"formats-counts")
    registry = (
        UserRecord("one", ("x",)),
        UserRecord("three", ("x", "y", "z")),
    )
    mpk, msk = setup(curve, ("x", "y", "z"), registry, rng)
    kf = KeysFile(mpk, msk, tuple(keygen(msk, u) for u in registry))
    obj = json.loads(save_keys(kf))
    counts = {e["user_id"]: len(e["elements"]) for e in obj["user_keys"]}
    assert counts == {"one": 3, "three": 5}


def test_keys_setup_only_file_is_valid(instance):
    mpk, msk, _, _ = instance
    kf = KeysFile(mpk=mpk, msk=msk, user_keys=())
    assert load_keys(save_keys(kf)) == kf


def test_keys_corrupted_point_names_element_index(instance):
    mpk, msk, keys, _ = instance
    good = json.loads(save_keys(KeysFile(mpk, msk, keys)))

    # valid hex, invalid point: unknown prefix byte
    obj = json.loads(json.dumps(good))
    obj["user_keys"][0]["elements"][2] = "05" + "00" * 32
    assert violation(obj, load_keys).path == "/user_keys/0/elements/2"

    # not hex at all: rejected by the schema, same path discipline
    obj = json.loads(json.dumps(good))
    obj["mpk"]["y"][1] = "zz" * 65
    assert violation(obj, load_keys).path == "/mpk/y/1"

    # x coordinate out of field range
    obj = json.loads(json.dumps(good))
    obj["mpk"]["w"]["alice"] = "02" + "ff" * 32
    assert violation(obj, load_keys).path == "/mpk/w/alice"


def test_keys_referential_rejections(instance):
    mpk, msk, keys, _ = instance
    good = json.loads(save_keys(KeysFile(mpk, msk, keys)))

    obj = json.loads(json.dumps(good))
    del obj["mpk"]["w"]["bob"]
    assert violation(obj, load_keys).path == "/mpk/w"

    obj = json.loads(json.dumps(good))
    obj["mpk"]["y"] = obj["mpk"]["y"][:-1]
    assert violation(obj, load_keys).path == "/mpk/y"

    obj = json.loads(json.dumps(good))
    del obj["msk"]["registry"]["carol"]
    assert violation(obj, load_keys).path == "/msk/registry"

    obj = json.loads(json.dumps(good))
    obj["msk"]["gamma"] = hex(int(mpk.curve.r))
    assert violation(obj, load_keys).path == "/msk/gamma"

    obj = json.loads(json.dumps(good))
    obj["user_keys"][0]["attributes"] = list(obj["user_keys"][0]["attributes"][:-1])
    assert violation(obj, load_keys).path == "/user_keys/0/attributes"

    obj = json.loads(json.dumps(good))
    obj["user_keys"].append(json.loads(json.dumps(obj["user_keys"][0])))
    assert violation(obj, load_keys).path == "/user_keys/3/user_id"

    obj = json.loads(json.dumps(good))
    obj["user_keys"][0]["user_id"] = "mallory"
    assert violation(obj, load_keys).path == "/user_keys/0/user_id"

    obj = json.loads(json.dumps(good))
    obj["user_keys"][1]["elements"].append("02" + "00" * 31 + "01")
    assert violation(obj, load_keys).path == "/user_keys/1/elements"


# -------------------------------------------------------------------- header


def test_header_roundtrip_no_revocation(instance):
    mpk, _, keys, rng = instance
    session, header = encapsulate(mpk, AccessPolicy({"dept:eng"}), rng)
    hf = header_from_abbe(header)
    assert len(hf.elements) == 3
    blob = save_header(hf)
    loaded = load_header(blob)
    assert loaded == hf
    assert save_header(loaded) == blob
    rebuilt = header_to_abbe(loaded, mpk.curve)
    assert rebuilt == header
    assert decapsulate(mpk, keys[1], rebuilt) == session


def test_header_roundtrip_with_revocations(instance):
    mpk, _, keys, rng = instance
    policy = AccessPolicy({"role:lead"}, {"bob", "carol"})
    session, header = encapsulate(mpk, policy, rng)
    hf = header_from_abbe(header)
    assert len(hf.elements) == 5
    assert hf.kdf == "abbe-kem-v1"
    rebuilt = header_to_abbe(load_header(save_header(hf)), mpk.curve)
    assert decapsulate(mpk, keys[0], rebuilt) == session


def test_header_element_count_must_match_policy(instance):
    mpk, _, _, rng = instance
    _, header = encapsulate(mpk, AccessPolicy({"site:hq"}, {"alice"}), rng)
    obj = json.loads(save_header(header_from_abbe(header)))

    short = json.loads(json.dumps(obj))
    short["elements"] = short["elements"][:-1]
    assert violation(short, load_header).path == "/elements"

    hf = load_header(canonical_json_bytes(obj))
    assert len(hf.elements) == 4


def test_header_schema_rejections(instance):
    mpk, _, _, rng = instance
    _, header = encapsulate(mpk, AccessPolicy({"dept:eng"}), rng)
    good = json.loads(save_header(header_from_abbe(header)))

    obj = json.loads(json.dumps(good))
    obj["kdf"] = "hkdf-sha512"
    assert violation(obj, load_header).path == "/kdf"

    obj = json.loads(json.dumps(good))
    obj["elements"][0] = obj["elements"][0][:-2]
    assert violation(obj, load_header).path == "/elements/0"

    obj = json.loads(json.dumps(good))
    obj["policy"]["attributes"] = []
    assert violation(obj, load_header).path == "/policy/attributes"


def test_header_decoding_rejects_invalid_points(instance):
    mpk, _, _, rng = instance
    _, header = encapsulate(mpk, AccessPolicy({"dept:eng"}), rng)
    hf = header_from_abbe(header)
    bad = HeaderFile(
        policy=hf.policy,
        elements=("05" + "00" * 64,) + hf.elements[1:],
        kdf=hf.kdf,
    )
    with pytest.raises(SchemaViolation) as err:
        header_to_abbe(bad, mpk.curve)
    assert err.value.path == "/elements/0"
