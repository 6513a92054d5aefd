"""Authenticated encryption roundtrips, tamper rejection, and streaming bounds.

The roundtrip oracle is a content hash: SHA-256 of the input must equal
SHA-256 of what comes back out, for the full set of boundary sizes.
"""

import dataclasses
import hashlib
import os
import struct
import tracemalloc

import pytest

from abbenet._drbg import DeterministicRandom
from abbenet.content import (
    CHUNK_SIZE,
    MAGIC,
    OVERHEAD,
    EncryptedObject,
    decrypt_file,
    decrypt_object,
    encrypt_file,
    encrypt_object,
    peek_header_name,
)
from abbenet.errors import AuthFailure

KEY = hashlib.sha256(b"content-test-key").digest()
NAME = "/headers/header.json"


def test_roundtrip_identity_boundary_sizes():
    for size in (0, 1, 4095, 4096, 4097):
        plaintext = os.urandom(size)
        obj = encrypt_object(KEY, plaintext, NAME)
        assert len(obj.ciphertext) == size
        assert len(obj.nonce) + len(obj.tag) == OVERHEAD
        recovered = decrypt_object(KEY, obj)
        assert hashlib.sha256(recovered).digest() == hashlib.sha256(plaintext).digest()
        assert recovered == plaintext


def test_roundtrip_50_mib(tmp_path):
    size = 50 << 20
    block = os.urandom(4096)
    src = tmp_path / "file50M"
    with open(src, "wb") as fh:
        for _ in range(size // len(block)):
            fh.write(block)
    digest = hashlib.sha256()
    for _ in range(size // len(block)):
        digest.update(block)

    enc_path = tmp_path / "file50M.aes"
    consumed = encrypt_file(KEY, src, enc_path, NAME)
    assert consumed == size
    name_bytes = NAME.encode()
    assert enc_path.stat().st_size == len(MAGIC) + 2 + len(name_bytes) + size + OVERHEAD

    out = tmp_path / "file50M.out"
    assert decrypt_file(KEY, enc_path, out) == NAME
    check = hashlib.sha256()
    with open(out, "rb") as fh:
        while True:
            chunk = fh.read(1 << 20)
            if not chunk:
                break
            check.update(chunk)
    assert check.digest() == digest.digest()


def test_streaming_memory_is_bounded(tmp_path):
    size = 50 << 20
    src = tmp_path / "big"
    with open(src, "wb") as fh:
        fh.write(b"\x5a" * size)
    enc_path = tmp_path / "big.aes"
    out = tmp_path / "big.out"

    tracemalloc.start()
    encrypt_file(KEY, src, enc_path, NAME)
    decrypt_file(KEY, enc_path, out)
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    assert peak < 16 << 20
    assert out.stat().st_size == size


def test_wrong_key_rejected():
    obj = encrypt_object(KEY, b"payload", NAME)
    with pytest.raises(AuthFailure):
        decrypt_object(hashlib.sha256(b"other").digest(), obj)


def test_any_bitflip_rejected():
    plaintext = os.urandom(2048)
    obj = encrypt_object(KEY, plaintext, NAME)
    for field, index in (("ciphertext", 1000), ("tag", 3), ("nonce", 0)):
        raw = bytearray(getattr(obj, field))
        raw[index] ^= 0x01
        tampered = dataclasses.replace(obj, **{field: bytes(raw)})
        with pytest.raises(AuthFailure):
            decrypt_object(KEY, tampered)


def test_header_name_is_authenticated(tmp_path):
    obj = encrypt_object(KEY, b"payload", NAME)
    renamed = EncryptedObject(obj.nonce, obj.ciphertext, obj.tag, "/headers/other.json")
    with pytest.raises(AuthFailure):
        decrypt_object(KEY, renamed)

    # same-length name swap inside the container file
    enc_path = tmp_path / "x.aes"
    src = tmp_path / "x"
    src.write_bytes(b"payload")
    encrypt_file(KEY, src, enc_path, "/headers/aaaa.json")
    raw = bytearray(enc_path.read_bytes())
    start = len(MAGIC) + 12 + 2
    raw[start : start + len("/headers/aaaa.json")] = b"/headers/bbbb.json"
    enc_path.write_bytes(bytes(raw))
    assert peek_header_name(enc_path) == "/headers/bbbb.json"
    with pytest.raises(AuthFailure):
        decrypt_file(KEY, enc_path, tmp_path / "x.out")
    assert not (tmp_path / "x.out").exists()


def test_empty_plaintext_valid():
    obj = encrypt_object(KEY, b"", NAME)
    assert obj.ciphertext == b""
    assert decrypt_object(KEY, obj) == b""


def test_nonces_fresh_and_seeded_runs_reproducible():
    a = encrypt_object(KEY, b"same data", NAME)
    b = encrypt_object(KEY, b"same data", NAME)
    assert a.nonce != b.nonce
    assert a.ciphertext != b.ciphertext

    c = encrypt_object(KEY, b"same data", NAME, rng=DeterministicRandom(b"nonce-seed"))
    d = encrypt_object(KEY, b"same data", NAME, rng=DeterministicRandom(b"nonce-seed"))
    assert c == d


def test_container_layout(tmp_path):
    src = tmp_path / "f"
    src.write_bytes(b"abc")
    enc_path = tmp_path / "f.aes"
    encrypt_file(KEY, src, enc_path, NAME, rng=DeterministicRandom(b"layout"))
    raw = enc_path.read_bytes()
    assert raw[:5] == MAGIC
    nonce = raw[5:17]
    (name_len,) = struct.unpack(">H", raw[17:19])
    assert raw[19 : 19 + name_len].decode() == NAME
    body = raw[19 + name_len :]
    assert len(body) == 3 + 16

    obj = EncryptedObject(nonce, body[:3], body[3:], NAME)
    assert decrypt_object(KEY, obj) == b"abc"
    assert peek_header_name(enc_path) == NAME


def test_malformed_containers_rejected(tmp_path):
    src = tmp_path / "f"
    src.write_bytes(os.urandom(100))
    enc_path = tmp_path / "f.aes"
    encrypt_file(KEY, src, enc_path, NAME)
    raw = enc_path.read_bytes()

    for bad in (b"", b"XYZ", b"NOTME" + raw[5:], raw[:20], raw[:-1]):
        bad_path = tmp_path / "bad.aes"
        bad_path.write_bytes(bad)
        with pytest.raises(AuthFailure):
            decrypt_file(KEY, bad_path, tmp_path / "bad.out")
        assert not (tmp_path / "bad.out").exists()


def test_key_and_object_validation():
    with pytest.raises(ValueError):
        encrypt_object(b"short", b"x", NAME)
    obj = encrypt_object(KEY, b"x", NAME)
    with pytest.raises(ValueError):
        decrypt_object(KEY, EncryptedObject(b"\x00" * 11, obj.ciphertext, obj.tag, NAME))
    with pytest.raises(ValueError):
        encrypt_object(KEY, b"x", "")
