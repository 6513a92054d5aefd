"""In-process named-data forwarding plane.

One forwarder models the single-node topology: producers and consumers
attach through *faces* and exchange exactly three packet kinds — interest,
data, nack. The forwarder is a single event-processing thread; faces feed
it through a queue, so the Content Store, PIT, and FIB are only ever
touched from that thread and need no locks.

Forwarding behavior per interest: Content Store hit answers directly;
a pending PIT entry aggregates the new face without forwarding; otherwise
a PIT entry is created and the interest goes out the longest-prefix FIB
match. Data coming back is delivered to every pending face, the PIT entry
is removed, and the segment is cached (FIFO eviction when full, capacity
overridable via the ABBE_NDN_CS_CAPACITY environment variable).

Producers sign every data segment: 64-byte deterministic Ed25519 signature
over SHA-256(name ‖ final_segment ‖ content); the producer id is the hex of
the 32-byte public key, so segments are self-certifying. Consumers verify
every segment during fetch.

Faces come in two transports with one interface: in-process queue pairs,
and localhost stream sockets for multi-process runs. Frames on a socket
are ``u32 length | u8 type (1=interest, 2=data, 3=nack) | u16 name length |
name UTF-8 | body``; an interest body is the 4-byte nonce, a data body is
``u32 final_segment | u16 sig length | sig | content`` where the sig field
carries the producer id (64 hex chars) followed by the raw signature.
Prefix registration from a remote process rides the same three frame
types: an interest under ``/localhost/rib/register/<prefix...>`` asks the
forwarder to route that prefix to the requesting face, answered by a
signed data packet (this mirrors how real forwarders expose their RIB as
a management namespace rather than extending the wire format).
"""

import hashlib
import itertools
import os
import queue
import socket
import struct
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .errors import NdnError, PrefixNotRegistered, SignatureInvalid, Timeout

__all__ = [
    "CHUNK_SIZE_DEFAULT",
    "Consumer",
    "Data",
    "Ed25519Scheme",
    "FibEntry",
    "Forwarder",
    "Interest",
    "Name",
    "PitEntry",
    "Producer",
    "RemoteNode",
    "decode_frame",
    "encode_frame",
]

CHUNK_SIZE_DEFAULT = 4096
MAX_CHUNK = 65536
WINDOW = 64
INTEREST_TIMEOUT = 4.0
INTEREST_RETRIES = 3
PIT_LIFETIME = 4.0
CS_CAPACITY_DEFAULT = 65536
CS_CAPACITY_ENV = "ABBE_NDN_CS_CAPACITY"
CONTROL_COMPONENTS = ("localhost", "rib", "register")

INTEREST_FRAME = 1
DATA_FRAME = 2
NACK_FRAME = 3
_MAX_FRAME = 1 << 20


# -------------------------------------------------------------------- names


@dataclass(frozen=True)
class Name:
    """Hierarchical content name: components plus an optional segment index.

    Canonical text form is "/c1/c2/..."; a segment renders as a trailing
    "/seg=<i>" and parses back, so text and structure are interchangeable.
    """

    components: tuple
    segment: int | None = None

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a name needs at least one component")
        for c in comps:
            if not isinstance(c, str) or not c:
                raise ValueError("name components must be non-empty strings")
            if "/" in c:
                raise ValueError("name components must not contain '/'")
            if c.startswith("seg="):
                raise ValueError("the 'seg=' component form is reserved")
        object.__setattr__(self, "components", comps)
        if self.segment is not None:
            if not isinstance(self.segment, int) or self.segment < 0:
                raise ValueError("segment index must be a non-negative integer")

    @classmethod
    def parse(cls, text: str) -> "Name":
        if not isinstance(text, str) or not text.startswith("/"):
            raise ValueError(f"names start with '/': {text!r}")
        parts = text.split("/")[1:]
        segment = None
        if parts and parts[-1].startswith("seg="):
            try:
                segment = int(parts[-1][4:])
            except ValueError:
                raise ValueError(f"bad segment suffix in {text!r}") from None
            parts = parts[:-1]
        return cls(tuple(parts), segment)

    def with_segment(self, index: int) -> "Name":
        return Name(self.components, index)

    def without_segment(self) -> "Name":
        return Name(self.components) if self.segment is not None else self

    def is_prefix_of(self, other: "Name") -> bool:
        n = len(self.components)
        return other.components[:n] == self.components

    def __str__(self):
        text = "/" + "/".join(self.components)
        if self.segment is not None:
            text += f"/seg={self.segment}"
        return text


def _as_name(value) -> Name:
    if isinstance(value, Name):
        return value
    if isinstance(value, str):
        return Name.parse(value)
    raise TypeError(f"expected a Name or its text form, got {type(value).__name__}")


# ------------------------------------------------------------------ packets


@dataclass(frozen=True)
class Interest:
    name: Name
    nonce: bytes

    def __post_init__(self):
        if len(self.nonce) != 4:
            raise ValueError("interest nonce must be 4 bytes")


@dataclass(frozen=True)
class Data:
    name: Name
    content: bytes
    final_segment: int
    producer_id: str
    signature: bytes

    def __post_init__(self):
        if len(self.content) > MAX_CHUNK:
            raise ValueError("data content exceeds the maximum chunk size")
        if self.final_segment < 0:
            raise ValueError("final_segment must be non-negative")


def _signing_digest(name: Name, final_segment: int, content: bytes) -> bytes:
    text = str(name).encode()
    h = hashlib.sha256()
    h.update(struct.pack(">H", len(text)))
    h.update(text)
    h.update(struct.pack(">I", final_segment))
    h.update(content)
    return h.digest()


class Ed25519Scheme:
    """Default segment signature scheme.

    Anything exposing generate/sign/verify with these shapes can stand in;
    signatures are 64 bytes and deterministic for a fixed key and message.
    """

    def generate(self, rng=None):
        seed = rng.randbytes(32) if rng is not None else os.urandom(32)
        private = Ed25519PrivateKey.from_private_bytes(seed)
        public = private.public_key().public_bytes(
            serialization.Encoding.Raw, serialization.PublicFormat.Raw
        )
        return private, public.hex()

    def sign(self, private, digest: bytes) -> bytes:
        return private.sign(digest)

    def verify(self, producer_id: str, signature: bytes, digest: bytes) -> bool:
        try:
            key = Ed25519PublicKey.from_public_bytes(bytes.fromhex(producer_id))
            key.verify(signature, digest)
            return True
        except (ValueError, InvalidSignature):
            return False


SCHEME = Ed25519Scheme()


def make_data(private, producer_id, name, content, final_segment, scheme=SCHEME) -> Data:
    digest = _signing_digest(name, final_segment, content)
    return Data(
        name=name,
        content=content,
        final_segment=final_segment,
        producer_id=producer_id,
        signature=scheme.sign(private, digest),
    )


def verify_data(data: Data, scheme=SCHEME) -> bool:
    digest = _signing_digest(data.name, data.final_segment, data.content)
    return scheme.verify(data.producer_id, data.signature, digest)


# --------------------------------------------------------------- wire frames


def encode_frame(kind: str, packet) -> bytes:
    if kind == "interest":
        ftype, body = INTEREST_FRAME, packet.nonce
        name = packet.name
    elif kind == "data":
        sig_field = packet.producer_id.encode("ascii") + packet.signature
        ftype = DATA_FRAME
        body = (
            struct.pack(">IH", packet.final_segment, len(sig_field))
            + sig_field
            + packet.content
        )
        name = packet.name
    elif kind == "nack":
        ftype, body, name = NACK_FRAME, b"", packet
    else:
        raise ValueError(f"unknown frame kind {kind!r}")
    name_bytes = str(name).encode()
    frame = struct.pack(">BH", ftype, len(name_bytes)) + name_bytes + body
    return struct.pack(">I", len(frame)) + frame


def decode_frame(frame: bytes):
    """Inverse of encode_frame, without the u32 length prefix."""
    if len(frame) < 3:
        raise ValueError("frame too short")
    ftype, name_len = struct.unpack(">BH", frame[:3])
    if len(frame) < 3 + name_len:
        raise ValueError("frame shorter than its name")
    name = Name.parse(frame[3 : 3 + name_len].decode("utf-8"))
    body = frame[3 + name_len :]
    if ftype == INTEREST_FRAME:
        if len(body) != 4:
            raise ValueError("interest body must be a 4-byte nonce")
        return "interest", Interest(name, body)
    if ftype == DATA_FRAME:
        if len(body) < 6:
            raise ValueError("data body too short")
        final_segment, sig_len = struct.unpack(">IH", body[:6])
        sig_field = body[6 : 6 + sig_len]
        if len(sig_field) != sig_len or sig_len < 64:
            raise ValueError("bad signature field")
        producer_id = sig_field[:64].decode("ascii")
        return "data", Data(
            name=name,
            content=body[6 + sig_len :],
            final_segment=final_segment,
            producer_id=producer_id,
            signature=sig_field[64:],
        )
    if ftype == NACK_FRAME:
        if body:
            raise ValueError("nack carries no body")
        return "nack", name
    raise ValueError(f"unknown frame type {ftype}")


def _read_exact(sock, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("peer closed")
        buf += chunk
    return buf


def _read_frame(sock):
    (length,) = struct.unpack(">I", _read_exact(sock, 4))
    if not 0 < length <= _MAX_FRAME:
        raise ValueError("unreasonable frame length")
    return decode_frame(_read_exact(sock, length))


# -------------------------------------------------------------------- faces


class _LocalFace:
    """Queue-pair face for endpoints living in the forwarder's process."""

    def __init__(self, forwarder, face_id):
        self.id = face_id
        self._forwarder = forwarder
        self._inbox = queue.Queue()

    # endpoint -> forwarder
    def send_interest(self, interest: Interest):
        self._forwarder.submit("interest", interest, self.id)

    def send_data(self, data: Data):
        self._forwarder.submit("data", data, self.id)

    # forwarder -> endpoint
    def deliver(self, kind, packet):
        self._inbox.put((kind, packet))

    def recv(self, timeout):
        try:
            return self._inbox.get(timeout=timeout)
        except queue.Empty:
            return None

    def close(self):
        self._forwarder.detach_face(self.id)


class _SocketFace:
    """Server-side face wrapping one accepted connection."""

    def __init__(self, forwarder, conn, face_id):
        self.id = face_id
        self._forwarder = forwarder
        self._conn = conn
        self._send_lock = threading.Lock()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        try:
            while True:
                kind, packet = _read_frame(self._conn)
                self._forwarder.submit(kind, packet, self.id)
        except (ConnectionError, OSError, ValueError):
            pass
        self._forwarder.detach_face(self.id)

    def deliver(self, kind, packet):
        try:
            with self._send_lock:
                self._conn.sendall(encode_frame(kind, packet))
        except OSError:
            self._forwarder.detach_face(self.id)

    def close(self):
        try:
            self._conn.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._conn.close()


class _ClientFace:
    """Client end of a socket face: same recv/send surface as a local face."""

    def __init__(self, host, port):
        self._sock = socket.create_connection((host, port))
        self._send_lock = threading.Lock()
        self._inbox = queue.Queue()
        self._open = True
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        try:
            while True:
                self._inbox.put(_read_frame(self._sock))
        except (ConnectionError, OSError, ValueError):
            self._open = False

    def _send(self, kind, packet):
        if not self._open:
            raise NdnError("face is closed")
        with self._send_lock:
            self._sock.sendall(encode_frame(kind, packet))

    def send_interest(self, interest: Interest):
        self._send("interest", interest)

    def send_data(self, data: Data):
        self._send("data", data)

    def recv(self, timeout):
        try:
            return self._inbox.get(timeout=timeout)
        except queue.Empty:
            return None

    def close(self):
        self._open = False
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class RemoteNode:
    """Attachment point for endpoints in another process: dials the
    forwarder's socket listener and hands back faces."""

    def __init__(self, host: str, port: int):
        self.host = host
        self.port = port

    def attach_face(self):
        return _ClientFace(self.host, self.port)


# ---------------------------------------------------------------- forwarder


@dataclass
class PitEntry:
    name: Name
    pending_faces: set = field(default_factory=set)
    expires_at: float = 0.0


@dataclass(frozen=True)
class FibEntry:
    prefix: Name
    next_face: int


def _resolve_cs_capacity(value):
    if value is None:
        raw = os.environ.get(CS_CAPACITY_ENV)
        value = int(raw) if raw else CS_CAPACITY_DEFAULT
    value = int(value)
    if value < 1:
        raise ValueError("content store capacity must be at least 1")
    return value


class Forwarder:
    """Single-node forwarding plane: CS + PIT + FIB behind an event queue.

    All table state is owned by the processing thread. Faces (local or
    socket) submit packets; endpoint attachment and route registration are
    the only cross-thread operations and take a small lock.
    """

    def __init__(self, cs_capacity=None):
        self.cs_capacity = _resolve_cs_capacity(cs_capacity)
        self.cs = OrderedDict()  # name text -> Data, FIFO by first insertion
        self.pit = {}  # name text -> PitEntry
        self.fib = []  # FibEntry list, longest prefix wins
        self.stats = {
            "cs_hits": 0,
            "pit_aggregations": 0,
            "forwarded_interests": 0,
            "nacks": 0,
            "data_delivered": 0,
            "unsolicited_dropped": 0,
            "cs_evictions": 0,
        }
        self._faces = {}
        self._face_ids = itertools.count(1)
        self._lock = threading.Lock()
        self._queue = queue.Queue()
        self._listeners = []
        self._last_pit_purge = 0.0
        self._control_key, self._control_id = SCHEME.generate()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._running = False

    # -- lifecycle

    def start(self):
        self._running = True
        self._thread.start()
        return self

    def stop(self):
        if self._running:
            self._running = False
            self._queue.put(None)
            self._thread.join()
        for srv in self._listeners:
            try:
                srv.close()
            except OSError:
                pass
        with self._lock:
            faces = list(self._faces.values())
        for face in faces:
            if isinstance(face, _SocketFace):
                face.close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    # -- attachment and routes

    def attach_face(self):
        with self._lock:
            face = _LocalFace(self, next(self._face_ids))
            self._faces[face.id] = face
        return face

    def _attach_socket(self, conn):
        with self._lock:
            face = _SocketFace(self, conn, next(self._face_ids))
            self._faces[face.id] = face
        return face

    def detach_face(self, face_id):
        with self._lock:
            face = self._faces.pop(face_id, None)
        if face is not None:
            self.submit("face_gone", face_id, face_id)

    def register_route(self, prefix, face_id):
        prefix = _as_name(prefix)
        if prefix.segment is not None:
            raise ValueError("route prefixes carry no segment suffix")
        self.submit("route", FibEntry(prefix, face_id), face_id)

    def listen(self, host="127.0.0.1", port=0):
        """Accept socket faces on a localhost port; returns (host, port)."""
        srv = socket.create_server((host, port))
        self._listeners.append(srv)
        threading.Thread(target=self._accept_loop, args=(srv,), daemon=True).start()
        return srv.getsockname()[:2]

    def _accept_loop(self, srv):
        while True:
            try:
                conn, _ = srv.accept()
            except OSError:
                return
            self._attach_socket(conn)

    # -- event processing

    def submit(self, kind, packet, face_id):
        self._queue.put((kind, packet, face_id))

    def _run(self):
        while True:
            item = self._queue.get()
            if item is None:
                return
            kind, packet, face_id = item
            if kind == "interest":
                self._on_interest(packet, face_id)
            elif kind == "data":
                self._on_data(packet, face_id)
            elif kind == "nack":
                self._on_nack(packet, face_id)
            elif kind == "route":
                self._on_route(packet)
            elif kind == "face_gone":
                self._on_face_gone(face_id)

    def _deliver(self, face_id, kind, packet):
        face = self._faces.get(face_id)
        if face is not None:
            face.deliver(kind, packet)

    def _purge_pit(self, now):
        if now - self._last_pit_purge < 1.0:
            return
        self._last_pit_purge = now
        dead = [k for k, e in self.pit.items() if e.expires_at <= now]
        for k in dead:
            del self.pit[k]

    def _on_interest(self, interest: Interest, in_face):
        name = interest.name
        if name.components[: len(CONTROL_COMPONENTS)] == CONTROL_COMPONENTS:
            self._on_control(interest, in_face)
            return
        now = time.monotonic()
        self._purge_pit(now)
        text = str(name)

        cached = self.cs.get(text)
        if cached is not None:
            self.stats["cs_hits"] += 1
            self._deliver(in_face, "data", cached)
            return

        entry = self.pit.get(text)
        if entry is not None and in_face not in entry.pending_faces:
            entry.pending_faces.add(in_face)
            entry.expires_at = now + PIT_LIFETIME
            self.stats["pit_aggregations"] += 1
            return
        # new name, or a retransmission from a face already waiting:
        # (re)forward via the longest matching prefix
        out_face = self._lookup_route(name, in_face)
        if out_face is None:
            if entry is not None:
                entry.pending_faces.discard(in_face)
                if not entry.pending_faces:
                    del self.pit[text]
            self.stats["nacks"] += 1
            self._deliver(in_face, "nack", name)
            return
        if entry is None:
            self.pit[text] = PitEntry(name, {in_face}, now + PIT_LIFETIME)
        else:
            entry.expires_at = now + PIT_LIFETIME
        self.stats["forwarded_interests"] += 1
        self._deliver(out_face, "interest", interest)

    def _lookup_route(self, name: Name, in_face):
        best = None
        best_len = -1
        for entry in self.fib:
            if entry.next_face == in_face or entry.next_face not in self._faces:
                continue
            if entry.prefix.is_prefix_of(name) and len(entry.prefix.components) > best_len:
                best, best_len = entry.next_face, len(entry.prefix.components)
        return best

    def _on_data(self, data: Data, in_face):
        text = str(data.name)
        entry = self.pit.pop(text, None)
        if entry is None:
            self.stats["unsolicited_dropped"] += 1
            return
        if text not in self.cs:
            if len(self.cs) >= self.cs_capacity:
                self.cs.popitem(last=False)
                self.stats["cs_evictions"] += 1
            self.cs[text] = data
        for face_id in entry.pending_faces:
            self.stats["data_delivered"] += 1
            self._deliver(face_id, "data", data)

    def _on_nack(self, name: Name, in_face):
        entry = self.pit.pop(str(name), None)
        if entry is None:
            return
        for face_id in entry.pending_faces:
            self._deliver(face_id, "nack", name)

    def _on_route(self, fib_entry: FibEntry):
        self.fib = [e for e in self.fib if e.prefix != fib_entry.prefix]
        self.fib.append(fib_entry)

    def _on_face_gone(self, face_id):
        self.fib = [e for e in self.fib if e.next_face != face_id]
        for text in list(self.pit):
            entry = self.pit[text]
            entry.pending_faces.discard(face_id)
            if not entry.pending_faces:
                del self.pit[text]

    def _on_control(self, interest: Interest, in_face):
        rest = interest.name.components[len(CONTROL_COMPONENTS) :]
        if not rest or interest.name.segment is not None:
            self._deliver(in_face, "nack", interest.name)
            return
        self._on_route(FibEntry(Name(rest), in_face))
        ack = make_data(
            self._control_key, self._control_id, interest.name, b"registered", 0
        )
        self._deliver(in_face, "data", ack)


# ---------------------------------------------------------------- endpoints


class Producer:
    """Publishing endpoint: splits payloads into signed segments and answers
    interests for them until closed."""

    def __init__(self, node, rng=None, scheme=SCHEME):
        self._scheme = scheme
        self._key, self.producer_id = scheme.generate(rng)
        self._face = node.attach_face()
        self._store = {}  # name text -> Data
        self._prefixes = []
        self._pending_reg = {}  # name text -> [threading.Event, ok flag]
        self.interest_log = {}  # name text -> times requested from this producer
        self._running = True
        self._thread = threading.Thread(target=self._serve, daemon=True)
        self._thread.start()

    def register_prefix(self, prefix, timeout=5.0):
        prefix = _as_name(prefix)
        if prefix.segment is not None:
            raise ValueError("route prefixes carry no segment suffix")
        control = Name(CONTROL_COMPONENTS + prefix.components)
        waiter = [threading.Event(), False]
        self._pending_reg[str(control)] = waiter
        self._face.send_interest(Interest(control, os.urandom(4)))
        if not waiter[0].wait(timeout) or not waiter[1]:
            raise NdnError(f"registration of {prefix} was not acknowledged")
        self._prefixes.append(prefix)

    def publish(self, name, payload: bytes, chunk_size: int = CHUNK_SIZE_DEFAULT) -> int:
        """Split payload into signed segments; returns the segment count."""
        name = _as_name(name)
        if name.segment is not None:
            raise ValueError("publish under an object name, not a segment name")
        if not 1 <= chunk_size <= MAX_CHUNK:
            raise ValueError(f"chunk size must be in [1, {MAX_CHUNK}]")
        if not any(p.is_prefix_of(name) for p in self._prefixes):
            raise PrefixNotRegistered(str(name))
        payload = bytes(payload)
        count = max(1, -(-len(payload) // chunk_size))
        final = count - 1
        for i in range(count):
            chunk = payload[i * chunk_size : (i + 1) * chunk_size]
            seg_name = name.with_segment(i)
            self._store[str(seg_name)] = make_data(
                self._key, self.producer_id, seg_name, chunk, final, self._scheme
            )
        return count

    def segments(self):
        """Snapshot of every published segment (verification oracle hook)."""
        return list(self._store.values())

    def _serve(self):
        while self._running:
            item = self._face.recv(timeout=0.1)
            if item is None:
                continue
            kind, packet = item
            if kind == "interest":
                text = str(packet.name)
                self.interest_log[text] = self.interest_log.get(text, 0) + 1
                data = self._store.get(text)
                if data is not None:
                    self._face.send_data(data)
                # unknown names are dropped: the consumer's deadline handles it
            elif kind in ("data", "nack"):
                waiter = self._pending_reg.pop(str(packet if kind == "nack" else packet.name), None)
                if waiter is not None:
                    waiter[1] = kind == "data"
                    waiter[0].set()

    def close(self):
        self._running = False
        self._thread.join()
        self._face.close()


class Consumer:
    """Fetching endpoint. One fetch at a time per Consumer; run several
    Consumer instances for concurrent downloads."""

    def __init__(
        self,
        node,
        rng=None,
        timeout: float = INTEREST_TIMEOUT,
        retries: int = INTEREST_RETRIES,
        window: int = WINDOW,
        scheme=SCHEME,
    ):
        self._face = node.attach_face()
        self._rng = rng
        self._timeout = timeout
        self._retries = retries
        self._window = window
        self._scheme = scheme

    def _nonce(self) -> bytes:
        return self._rng.randbytes(4) if self._rng is not None else os.urandom(4)

    def fetch(self, name, expected_producer: str | None = None) -> bytes:
        """Fetch and reassemble all segments of a published object.

        Pipelines up to the window size of outstanding interests, retries
        each segment up to the retry budget, verifies every signature.
        """
        base = _as_name(name)
        if base.segment is not None:
            raise ValueError("fetch an object name; segments are requested internally")
        segments = {}
        pending = {}  # segment index -> [deadline, attempts]
        final = None
        next_seg = 0

        def express(index, attempts):
            self._face.send_interest(Interest(base.with_segment(index), self._nonce()))
            pending[index] = [time.monotonic() + self._timeout, attempts]

        express(0, 1)
        while final is None or len(segments) <= final:
            if final is not None:
                while next_seg <= final and len(pending) < self._window:
                    if next_seg not in segments and next_seg not in pending:
                        express(next_seg, 1)
                    next_seg += 1
            now = time.monotonic()
            wait = min((d for d, _ in pending.values()), default=now + 0.05) - now
            item = self._face.recv(timeout=max(wait, 0.001))
            if item is not None:
                kind, packet = item
                if kind == "data":
                    accepted = self._accept(packet, base, segments, pending, expected_producer)
                    if accepted and final is None and packet.name.segment == 0:
                        final = packet.final_segment
                        next_seg = 1
                elif kind == "nack":
                    raise Timeout(str(packet), "noroute")
                continue
            now = time.monotonic()
            for index in list(pending):
                deadline, attempts = pending[index]
                if now < deadline:
                    continue
                if attempts >= self._retries:
                    raise Timeout(str(base.with_segment(index)), "deadline")
                express(index, attempts + 1)
        return b"".join(segments[i] for i in range(final + 1))

    def _accept(self, data: Data, base, segments, pending, expected_producer) -> bool:
        seg = data.name.segment
        if data.name.without_segment() != base or seg is None or seg not in pending:
            return False  # stray or duplicate delivery
        if expected_producer is not None and data.producer_id != expected_producer:
            raise SignatureInvalid(f"{data.name}: unexpected producer")
        if not verify_data(data, self._scheme):
            raise SignatureInvalid(str(data.name))
        del pending[seg]
        segments[seg] = data.content
        return True

    def close(self):
        self._face.close()
