"""Hybrid payload encryption under a 32-byte session key.

AES-256-GCM over the whole payload: one fresh 12-byte nonce per object, one
16-byte tag, so an encrypted object is exactly 28 bytes larger than its
plaintext. The name of the header file that carries the wrapped session key
travels with the ciphertext as authenticated (not encrypted) data — swapping
it for another header's name breaks authentication.

On-disk container (``.aes``)::

    "ABBE1" | nonce (12) | name length (u16 BE) | header name (UTF-8) |
    ciphertext (= plaintext length) | tag (16)

File encryption and decryption stream in 1 MiB slices, so memory stays flat
for arbitrarily large payloads; the in-memory functions share the same
cipher construction.
"""

import os
import struct
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import AuthFailure

__all__ = [
    "CHUNK_SIZE",
    "EncryptedObject",
    "MAGIC",
    "OVERHEAD",
    "decrypt_file",
    "decrypt_object",
    "encrypt_file",
    "encrypt_object",
    "peek_header_name",
]

MAGIC = b"ABBE1"
NONCE_LEN = 12
TAG_LEN = 16
OVERHEAD = NONCE_LEN + TAG_LEN
KEY_LEN = 32
CHUNK_SIZE = 1 << 20


@dataclass(frozen=True)
class EncryptedObject:
    nonce: bytes
    ciphertext: bytes
    tag: bytes
    header_name: str


def _check_key(key: bytes):
    if not isinstance(key, (bytes, bytearray)) or len(key) != KEY_LEN:
        raise ValueError(f"session key must be {KEY_LEN} bytes")


def _name_bytes(header_name) -> bytes:
    encoded = str(header_name).encode("utf-8")
    if not encoded:
        raise ValueError("header name must be non-empty")
    if len(encoded) > 0xFFFF:
        raise ValueError("header name too long")
    return encoded


def _aad(name_bytes: bytes) -> bytes:
    # authenticate the whole preamble, not just the name
    return MAGIC + struct.pack(">H", len(name_bytes)) + name_bytes


def _encryptor(key: bytes, nonce: bytes, name_bytes: bytes):
    enc = Cipher(algorithms.AES(bytes(key)), modes.GCM(nonce)).encryptor()
    enc.authenticate_additional_data(_aad(name_bytes))
    return enc


def _decryptor(key: bytes, nonce: bytes, tag: bytes, name_bytes: bytes):
    dec = Cipher(algorithms.AES(bytes(key)), modes.GCM(nonce, tag)).decryptor()
    dec.authenticate_additional_data(_aad(name_bytes))
    return dec


def encrypt_object(key: bytes, plaintext: bytes, header_name, rng=None) -> EncryptedObject:
    """Encrypt an in-memory payload; ciphertext length equals plaintext length."""
    _check_key(key)
    name_bytes = _name_bytes(header_name)
    nonce = rng.randbytes(NONCE_LEN) if rng is not None else os.urandom(NONCE_LEN)
    enc = _encryptor(key, nonce, name_bytes)
    view = memoryview(bytes(plaintext))
    parts = [enc.update(view[i : i + CHUNK_SIZE]) for i in range(0, len(view), CHUNK_SIZE)]
    enc.finalize()
    return EncryptedObject(
        nonce=nonce,
        ciphertext=b"".join(parts),
        tag=enc.tag,
        header_name=str(header_name),
    )


def decrypt_object(key: bytes, obj: EncryptedObject) -> bytes:
    """Exact plaintext, or AuthFailure on a wrong key or any tampering."""
    _check_key(key)
    if len(obj.nonce) != NONCE_LEN or len(obj.tag) != TAG_LEN:
        raise ValueError("malformed encrypted object")
    dec = _decryptor(key, obj.nonce, obj.tag, _name_bytes(obj.header_name))
    view = memoryview(obj.ciphertext)
    try:
        parts = [dec.update(view[i : i + CHUNK_SIZE]) for i in range(0, len(view), CHUNK_SIZE)]
        dec.finalize()
    except InvalidTag as exc:
        raise AuthFailure("wrong key or tampered ciphertext") from exc
    return b"".join(parts)


def encrypt_file(key: bytes, src_path, dst_path, header_name, rng=None) -> int:
    """Stream-encrypt src into a ``.aes`` container at dst.

    Returns the number of plaintext bytes consumed. Peak memory is one
    chunk regardless of file size.
    """
    _check_key(key)
    name_bytes = _name_bytes(header_name)
    nonce = rng.randbytes(NONCE_LEN) if rng is not None else os.urandom(NONCE_LEN)
    enc = _encryptor(key, nonce, name_bytes)
    total = 0
    with open(src_path, "rb") as src, open(dst_path, "wb") as dst:
        dst.write(MAGIC)
        dst.write(nonce)
        dst.write(struct.pack(">H", len(name_bytes)))
        dst.write(name_bytes)
        while True:
            chunk = src.read(CHUNK_SIZE)
            if not chunk:
                break
            total += len(chunk)
            dst.write(enc.update(chunk))
        enc.finalize()
        dst.write(enc.tag)
    return total


def _read_preamble(stream):
    head = stream.read(len(MAGIC) + NONCE_LEN + 2)
    if len(head) != len(MAGIC) + NONCE_LEN + 2 or head[: len(MAGIC)] != MAGIC:
        raise AuthFailure("not an encrypted container")
    nonce = head[len(MAGIC) : len(MAGIC) + NONCE_LEN]
    (name_len,) = struct.unpack(">H", head[-2:])
    name_bytes = stream.read(name_len)
    if len(name_bytes) != name_len:
        raise AuthFailure("truncated container")
    return nonce, name_bytes


def peek_header_name(src_path) -> str:
    """The header name stored in a container, without decrypting anything.

    This is what a consumer reads first: it names the header file to fetch
    and decapsulate before the payload can be decrypted. The value is only
    trustworthy once decryption authenticates it.
    """
    with open(src_path, "rb") as src:
        _, name_bytes = _read_preamble(src)
    return name_bytes.decode("utf-8")


def decrypt_file(key: bytes, src_path, dst_path) -> str:
    """Stream-decrypt a ``.aes`` container; returns the authenticated header name.

    Raises AuthFailure on a wrong key or any modification of the container,
    removing the partial output file in that case.
    """
    _check_key(key)
    with open(src_path, "rb") as src:
        nonce, name_bytes = _read_preamble(src)
        if len(nonce) != NONCE_LEN:
            raise AuthFailure("truncated container")
        body_start = src.tell()
        src.seek(0, os.SEEK_END)
        body_len = src.tell() - body_start - TAG_LEN
        if body_len < 0:
            raise AuthFailure("truncated container")
        src.seek(body_start + body_len)
        tag = src.read(TAG_LEN)
        src.seek(body_start)
        dec = _decryptor(key, nonce, tag, name_bytes)
        try:
            with open(dst_path, "wb") as dst:
                remaining = body_len
                while remaining:
                    chunk = src.read(min(CHUNK_SIZE, remaining))
                    if not chunk:
                        raise AuthFailure("truncated container")
                    remaining -= len(chunk)
                    dst.write(dec.update(chunk))
                dec.finalize()
        except (InvalidTag, AuthFailure) as exc:
            try:
                os.unlink(dst_path)
            except OSError:
                pass
            if isinstance(exc, AuthFailure):
                raise
            raise AuthFailure("wrong key or tampered container") from exc
    return name_bytes.decode("utf-8")
