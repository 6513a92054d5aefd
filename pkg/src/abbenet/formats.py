"""The JSON file formats the command-line tools exchange.

Three artifacts, each with a published JSON-Schema (shipped as package data
under :mod:`abbenet.schemas`):

* **config** — curve description, attribute pool, user registry, and an
  access policy. This is the input to key generation.
* **keys** — master public key (with the curve embedded, so the file is
  self-contained), master secret key, and the per-user private keys.
* **header** — an encryption header: public policy plus hex-encoded group
  elements. Deliberately parseable without any key material; decoding the
  elements into group points is a separate step (:func:`header_to_abbe`)
  that needs the curve.

Serialization is canonical: sorted keys, no insignificant whitespace,
UTF-8. Equal values always serialize to identical bytes, which the room
layer relies on when hashing policies into room ids.

Loading validates against the schema first and then applies referential
rules (ids unique, attributes drawn from the pool, element counts
consistent with the policy). Every failure raises
:class:`~abbenet.errors.SchemaViolation` carrying the JSON path of the
first offending field; no partially-constructed value ever escapes.
"""

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from jsonschema import Draft202012Validator

from .abbe import (
    KDF_TAG,
    AbbeHeader,
    AccessPolicy,
    MasterPublicKey,
    MasterSecretKey,
    UserPrivateKey,
    UserRecord,
)
from .errors import InvalidEncoding, SchemaViolation, UnsupportedSecurityLevel
from .pairing import (
    curve_from_json_obj,
    curve_to_json_obj,
    decode_g1,
    decode_g2,
    decode_gt,
)

__all__ = [
    "ConfigFile",
    "HeaderFile",
    "KeysFile",
    "canonical_json_bytes",
    "header_from_abbe",
    "header_to_abbe",
    "load_config",
    "load_header",
    "load_keys",
    "save_config",
    "save_header",
    "save_keys",
]

KDF_NAME = KDF_TAG.decode()


def canonical_json_bytes(obj) -> bytes:
    """Deterministic UTF-8 JSON: sorted keys, minimal separators."""
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


@lru_cache(maxsize=None)
def _validator(name: str) -> Draft202012Validator:
    text = (
        resources.files("abbenet.schemas")
        .joinpath(f"{name}.schema.json")
        .read_text("utf-8")
    )
    schema = json.loads(text)
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def _json_path(parts) -> str:
    return "/" + "/".join(str(p) for p in parts)


def _parse(data: bytes, schema_name: str) -> dict:
    try:
        obj = json.loads(bytes(data).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaViolation("/", f"not UTF-8 JSON: {exc}") from exc
    errors = sorted(
        _validator(schema_name).iter_errors(obj),
        key=lambda e: [str(p) for p in e.absolute_path],
    )
    if errors:
        first = errors[0]
        raise SchemaViolation(_json_path(first.absolute_path), first.message)
    return obj


def _load_curve(obj, path):
    try:
        return curve_from_json_obj(obj)
    except (InvalidEncoding, UnsupportedSecurityLevel) as exc:
        raise SchemaViolation(path, str(exc)) from exc


def _point(decode, curve, text, path):
    try:
        return decode(curve, bytes.fromhex(text))
    except (ValueError, InvalidEncoding) as exc:
        raise SchemaViolation(path, str(exc)) from exc


def _scalar(text, r, path):
    value = int(text, 16)
    if not 0 < value < r:
        raise SchemaViolation(path, "scalar out of range [1, r-1]")
    return value


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class ConfigFile:
    curve: object
    attribute_pool: tuple
    users: tuple  # of UserRecord
    policy: AccessPolicy

    def __post_init__(self):
        object.__setattr__(self, "attribute_pool", tuple(self.attribute_pool))
        object.__setattr__(self, "users", tuple(self.users))


def load_config(data: bytes) -> ConfigFile:
    obj = _parse(data, "config")
    curve = _load_curve(obj["curve"], "/curve")
    pool = tuple(obj["attribute_pool"])
    pool_set = set(pool)

    users = []
    ids = set()
    for i, entry in enumerate(obj["users"]):
        if entry["id"] in ids:
            raise SchemaViolation(f"/users/{i}/id", f"duplicate user id {entry['id']!r}")
        ids.add(entry["id"])
        stray = set(entry["attributes"]) - pool_set
        if stray:
            raise SchemaViolation(
                f"/users/{i}/attributes", f"{sorted(stray)} not in attribute_pool"
            )
        users.append(UserRecord(entry["id"], tuple(entry["attributes"])))

    stray = set(obj["policy"]["attributes"]) - pool_set
    if stray:
        raise SchemaViolation("/policy/attributes", f"{sorted(stray)} not in attribute_pool")
    stray = set(obj["policy"]["revoked"]) - ids
    if stray:
        raise SchemaViolation("/policy/revoked", f"{sorted(stray)} are not user ids")

    return ConfigFile(
        curve=curve,
        attribute_pool=pool,
        users=tuple(users),
        policy=AccessPolicy(
            frozenset(obj["policy"]["attributes"]),
            frozenset(obj["policy"]["revoked"]),
        ),
    )


def save_config(cfg: ConfigFile) -> bytes:
    return canonical_json_bytes(
        {
            "curve": curve_to_json_obj(cfg.curve),
            "attribute_pool": list(cfg.attribute_pool),
            "users": [
                {"id": u.user_id, "attributes": list(u.attributes)}
                for u in cfg.users
            ],
            "policy": {
                "attributes": sorted(cfg.policy.required_attributes),
                "revoked": sorted(cfg.policy.revoked_users),
            },
        }
    )


# -------------------------------------------------------------------- keys


@dataclass(frozen=True)
class KeysFile:
    mpk: MasterPublicKey
    msk: MasterSecretKey = field(repr=False)
    user_keys: tuple = ()  # of UserPrivateKey

    def __post_init__(self):
        object.__setattr__(self, "user_keys", tuple(self.user_keys))


def load_keys(data: bytes) -> KeysFile:
    obj = _parse(data, "keys")

    m = obj["mpk"]
    curve = _load_curve(m["curve"], "/mpk/curve")
    r = int(curve.r)
    universe = tuple(m["universe"])
    user_ids = tuple(m["user_ids"])
    if len(m["y"]) != len(user_ids) + 1:
        raise SchemaViolation(
            "/mpk/y", f"expected {len(user_ids) + 1} points for {len(user_ids)} users"
        )
    y = tuple(
        _point(decode_g2, curve, text, f"/mpk/y/{i}")
        for i, text in enumerate(m["y"])
    )
    if set(m["w"]) != set(user_ids):
        raise SchemaViolation("/mpk/w", "per-user elements do not match user_ids")
    w = {
        uid: _point(decode_g1, curve, m["w"][uid], f"/mpk/w/{uid}")
        for uid in user_ids
    }
    omega = _point(decode_gt, curve, m["omega"], "/mpk/omega")
    if set(m["attr_omega"]) != set(universe):
        raise SchemaViolation("/mpk/attr_omega", "attribute elements do not match universe")
    attr_omega = {
        a: _point(decode_gt, curve, m["attr_omega"][a], f"/mpk/attr_omega/{a}")
        for a in universe
    }
    mpk = MasterPublicKey(
        curve=curve,
        universe=universe,
        user_ids=user_ids,
        y=y,
        w=w,
        omega=omega,
        attr_omega=attr_omega,
    )

    s = obj["msk"]
    if tuple(s["universe"]) != universe:
        raise SchemaViolation("/msk/universe", "differs from /mpk/universe")
    if set(s["delta"]) != set(universe):
        raise SchemaViolation("/msk/delta", "attribute scalars do not match universe")
    if set(s["registry"]) != set(user_ids):
        raise SchemaViolation("/msk/registry", "registered users do not match user_ids")
    registry = {}
    for uid in user_ids:
        stray = set(s["registry"][uid]) - set(universe)
        if stray:
            raise SchemaViolation(f"/msk/registry/{uid}", f"{sorted(stray)} not in universe")
        registry[uid] = frozenset(s["registry"][uid])
    msk = MasterSecretKey(
        curve=curve,
        gamma=_scalar(s["gamma"], r, "/msk/gamma"),
        omega=_scalar(s["omega"], r, "/msk/omega"),
        delta={a: _scalar(s["delta"][a], r, f"/msk/delta/{a}") for a in universe},
        universe=universe,
        registry=registry,
    )

    user_keys = []
    seen = set()
    for i, entry in enumerate(obj["user_keys"]):
        uid = entry["user_id"]
        if uid in seen:
            raise SchemaViolation(f"/user_keys/{i}/user_id", f"duplicate key entry for {uid!r}")
        seen.add(uid)
        if uid not in registry:
            raise SchemaViolation(f"/user_keys/{i}/user_id", f"{uid!r} is not a registered user")
        attrs = tuple(entry["attributes"])
        if frozenset(attrs) != registry[uid]:
            raise SchemaViolation(
                f"/user_keys/{i}/attributes", "do not match the registry entry"
            )
        if len(entry["elements"]) != 2 + len(attrs):
            raise SchemaViolation(
                f"/user_keys/{i}/elements",
                f"expected {2 + len(attrs)} elements for {len(attrs)} attributes",
            )
        elements = tuple(
            _point(decode_g1, curve, text, f"/user_keys/{i}/elements/{j}")
            for j, text in enumerate(entry["elements"])
        )
        user_keys.append(
            UserPrivateKey(user_id=uid, attributes=attrs, elements=elements)
        )

    return KeysFile(mpk=mpk, msk=msk, user_keys=tuple(user_keys))


def save_keys(kf: KeysFile) -> bytes:
    mpk, msk = kf.mpk, kf.msk
    return canonical_json_bytes(
        {
            "mpk": {
                "curve": curve_to_json_obj(mpk.curve),
                "universe": list(mpk.universe),
                "user_ids": list(mpk.user_ids),
                "y": [el.encoding.hex() for el in mpk.y],
                "w": {uid: mpk.w[uid].encoding.hex() for uid in mpk.user_ids},
                "omega": mpk.omega.encoding.hex(),
                "attr_omega": {
                    a: mpk.attr_omega[a].encoding.hex() for a in mpk.universe
                },
            },
            "msk": {
                "gamma": hex(msk.gamma),
                "omega": hex(msk.omega),
                "delta": {a: hex(msk.delta[a]) for a in msk.universe},
                "universe": list(msk.universe),
                # attribute lists in universe order so equal values dump
                # to equal bytes (registry values are unordered sets)
                "registry": {
                    uid: [a for a in msk.universe if a in msk.registry[uid]]
                    for uid in msk.registry
                },
            },
            "user_keys": [
                {
                    "user_id": k.user_id,
                    "attributes": list(k.attributes),
                    "elements": [el.encoding.hex() for el in k.elements],
                }
                for k in kf.user_keys
            ],
        }
    )


# ------------------------------------------------------------------ header


@dataclass(frozen=True)
class HeaderFile:
    policy: AccessPolicy
    elements: tuple  # hex strings; decoding needs a curve, parsing does not
    kdf: str = KDF_NAME

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))


def load_header(data: bytes) -> HeaderFile:
    obj = _parse(data, "header")
    revoked = obj["policy"]["revoked"]
    if len(obj["elements"]) != len(revoked) + 3:
        raise SchemaViolation(
            "/elements",
            f"expected {len(revoked) + 3} elements for {len(revoked)} revoked users",
        )
    return HeaderFile(
        policy=AccessPolicy(frozenset(obj["policy"]["attributes"]), frozenset(revoked)),
        elements=tuple(obj["elements"]),
        kdf=obj["kdf"],
    )


def save_header(hf: HeaderFile) -> bytes:
    return canonical_json_bytes(
        {
            "policy": {
                "attributes": sorted(hf.policy.required_attributes),
                "revoked": sorted(hf.policy.revoked_users),
            },
            "elements": list(hf.elements),
            "kdf": hf.kdf,
        }
    )


def header_from_abbe(header: AbbeHeader) -> HeaderFile:
    return HeaderFile(
        policy=header.policy,
        elements=tuple(el.encoding.hex() for el in header.elements),
    )


def header_to_abbe(hf: HeaderFile, curve) -> AbbeHeader:
    """Decode the header's elements on the given curve.

    The file-level element count was already checked against the policy at
    load time; here each hex string must decode to a valid G2 point.
    """
    elements = tuple(
        _point(decode_g2, curve, text, f"/elements/{i}")
        for i, text in enumerate(hf.elements)
    )
    return AbbeHeader(policy=hf.policy, elements=elements)
