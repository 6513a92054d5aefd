"""Virtual chatrooms: policy-encrypted messages grouped by access policy.

A room is not a server-side object — it is the set of messages whose
headers carry the same access policy. The room id is the SHA-256 of the
canonical policy serialization (attributes and revoked list sorted), so
any two parties derive the same id from the same policy without
coordination.

Each posted message draws a fresh session key through the KEM and seals
the plaintext with AES-256-GCM; the canonical serialization of the header
is the AEAD's associated data, so an envelope whose header was swapped or
edited fails authentication even for authorized readers. Receiving tries
decapsulation with the reader's key: an authorization failure is a normal
outcome (the sentinel ``NotRecipient``), not an error — this is how a
client decides which rooms it can see.

Envelopes serialize to canonical JSON (header object as in the header file
format, body fields base64) and travel as ordinary named-data payloads
under "/chat/<sender>/<seq>".
"""

import base64
import hashlib
import json
import time
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .abbe import AbbeHeader, AccessPolicy, decapsulate, encapsulate
from .errors import AuthFailure, NotAuthorized, SchemaViolation
from .formats import canonical_json_bytes, header_from_abbe, header_to_abbe, load_header, save_header
from .ndn import Name

__all__ = [
    "MessageEnvelope",
    "NotRecipient",
    "RoomId",
    "chat_name",
    "load_envelope",
    "post_message",
    "receive_message",
    "room_id",
    "save_envelope",
]

_NONCE_LEN = 12
_TAG_LEN = 16


class _NotRecipientType:
    """Singleton outcome for 'this key cannot read this envelope'."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotRecipient"

    def __bool__(self):
        return False


NotRecipient = _NotRecipientType()


@dataclass(frozen=True)
class RoomId:
    digest: bytes

    def __post_init__(self):
        if len(self.digest) != 32:
            raise ValueError("room ids are 32-byte digests")

    @property
    def hex(self) -> str:
        return self.digest.hex()

    def __str__(self):
        return self.hex


@dataclass(frozen=True)
class MessageEnvelope:
    header: AbbeHeader
    nonce: bytes
    ciphertext: bytes
    tag: bytes
    sender_id: str
    timestamp: int  # milliseconds


def room_id(policy: AccessPolicy) -> RoomId:
    """Deterministic, normalization-invariant id of the policy's room."""
    canon = canonical_json_bytes(
        {
            "attributes": sorted(policy.required_attributes),
            "revoked": sorted(policy.revoked_users),
        }
    )
    return RoomId(hashlib.sha256(canon).digest())


def _header_aad(header: AbbeHeader) -> bytes:
    return save_header(header_from_abbe(header))


def post_message(mpk, policy: AccessPolicy, sender_id: str, plaintext: bytes, rng, timestamp: int | None = None) -> MessageEnvelope:
    """Seal a message for everyone satisfying the policy; fresh key per call."""
    session_key, header = encapsulate(mpk, policy, rng)
    nonce = rng.randbytes(_NONCE_LEN)
    sealed = AESGCM(session_key).encrypt(nonce, bytes(plaintext), _header_aad(header))
    return MessageEnvelope(
        header=header,
        nonce=nonce,
        ciphertext=sealed[:-_TAG_LEN],
        tag=sealed[-_TAG_LEN:],
        sender_id=sender_id,
        timestamp=int(time.time() * 1000) if timestamp is None else int(timestamp),
    )


def receive_message(envelope: MessageEnvelope, key, mpk):
    """(room, plaintext) for a satisfying key, NotRecipient otherwise.

    AuthFailure means the key was authorized but the sealed body did not
    authenticate — a corrupted or header-swapped envelope.
    """
    try:
        session_key = decapsulate(mpk, key, envelope.header)
    except NotAuthorized:
        return NotRecipient
    try:
        plaintext = AESGCM(session_key).decrypt(
            envelope.nonce,
            envelope.ciphertext + envelope.tag,
            _header_aad(envelope.header),
        )
    except InvalidTag as exc:
        raise AuthFailure("envelope body does not authenticate") from exc
    return room_id(envelope.header.policy), plaintext


def chat_name(sender_id: str, seq: int) -> Name:
    """Conventional publish name for a sender's seq-th envelope."""
    return Name(("chat", sender_id, str(seq)))


def save_envelope(envelope: MessageEnvelope) -> bytes:
    header_obj = json.loads(_header_aad(envelope.header).decode())
    return canonical_json_bytes(
        {
            "header": header_obj,
            "nonce": base64.b64encode(envelope.nonce).decode(),
            "ciphertext": base64.b64encode(envelope.ciphertext).decode(),
            "tag": base64.b64encode(envelope.tag).decode(),
            "sender_id": envelope.sender_id,
            "timestamp": envelope.timestamp,
        }
    )


def _b64_field(obj, name, expected_len=None) -> bytes:
    value = obj.get(name)
    if not isinstance(value, str):
        raise SchemaViolation(f"/{name}", "expected a base64 string")
    try:
        raw = base64.b64decode(value, validate=True)
    except (ValueError, TypeError) as exc:
        raise SchemaViolation(f"/{name}", f"bad base64: {exc}") from exc
    if expected_len is not None and len(raw) != expected_len:
        raise SchemaViolation(f"/{name}", f"expected {expected_len} bytes")
    return raw


def load_envelope(data: bytes, curve) -> MessageEnvelope:
    try:
        obj = json.loads(bytes(data).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaViolation("/", f"not UTF-8 JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaViolation("/", "envelope must be a JSON object")
    expected = {"header", "nonce", "ciphertext", "tag", "sender_id", "timestamp"}
    if set(obj) != expected:
        raise SchemaViolation("/", f"envelope fields must be exactly {sorted(expected)}")

    try:
        header_file = load_header(canonical_json_bytes(obj["header"]))
    except SchemaViolation as exc:
        prefix = exc.path if exc.path != "/" else ""
        raise SchemaViolation("/header" + prefix, exc.reason) from exc
    header = header_to_abbe(header_file, curve)

    if not isinstance(obj["sender_id"], str) or not obj["sender_id"]:
        raise SchemaViolation("/sender_id", "expected a non-empty string")
    if not isinstance(obj["timestamp"], int) or obj["timestamp"] < 0:
        raise SchemaViolation("/timestamp", "expected non-negative integer milliseconds")

    return MessageEnvelope(
        header=header,
        nonce=_b64_field(obj, "nonce", _NONCE_LEN),
        ciphertext=_b64_field(obj, "ciphertext"),
        tag=_b64_field(obj, "tag", _TAG_LEN),
        sender_id=obj["sender_id"],
        timestamp=obj["timestamp"],
    )
