"""Benchmark harness: four scaling experiments with CSV/Markdown reports.

Experiment 1 times master setup plus per-user key issuance as the user
count grows; experiment 2 fixes one user and grows the attribute count;
experiment 3 measures parallel plaintext downloads through one forwarder;
experiment 4 runs the full confidential pipeline (fetch header and sealed
file, recover the session key, decrypt, verify).

Absolute seconds depend entirely on the host, so every report carries
host metadata and downstream checks look at scaling ratios and shapes,
never at raw times. Each record is the median-of-3 run (selected by its
worst time, keeping every record internally consistent), and correctness
is gated before timing is reported: experiments 3 and 4 refuse to emit a
record unless every downloaded or decrypted payload hash-matches the
source, and experiment 3 additionally checks that the producer answered
each segment exactly once (interest aggregation and caching upstream).
"""

import csv
import hashlib
import io
import json
import os
import platform
import tempfile
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ._drbg import DeterministicRandom
from .abbe import AccessPolicy, UserRecord, decapsulate, encapsulate, keygen, setup
from .content import decrypt_file, encrypt_file, peek_header_name
from .formats import header_from_abbe, header_to_abbe, load_header, save_header
from .ndn import Consumer, Forwarder, Name, Producer
from .pairing import generate_curve

__all__ = [
    "BenchmarkRecord",
    "DESK_SIZES_MIB",
    "PAPER_SIZES_MIB",
    "emit_report",
    "experiment1",
    "experiment2",
    "experiment3",
    "experiment4",
    "host_metadata",
    "parse_report",
]

MIB = 1 << 20
DESK_SIZES_MIB = (5, 10, 50)
PAPER_SIZES_MIB = (50, 100, 500)


@dataclass
class BenchmarkRecord:
    experiment: int
    params: dict = field(default_factory=dict)  # users / attributes / file_mib
    per_user_seconds: list = field(default_factory=list)
    worst_seconds: float = 0.0

    def __post_init__(self):
        if not 1 <= self.experiment <= 4:
            raise ValueError("experiment must be 1..4")
        if not self.per_user_seconds:
            raise ValueError("a record needs at least one per-user time")
        if self.worst_seconds != max(self.per_user_seconds):
            raise ValueError("worst_seconds must be the per-user maximum")


def host_metadata() -> dict:
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "cpus": os.cpu_count() or 1,
        "generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _median_record(run, reps: int) -> BenchmarkRecord:
    """Middle-by-worst-time of `reps` runs; keeps one coherent record."""
    if reps < 1:
        raise ValueError("reps must be positive")
    outcomes = sorted((run() for _ in range(reps)), key=lambda r: r.worst_seconds)
    return outcomes[len(outcomes) // 2]


# ------------------------------------------------- key-generation scaling


def _assign_attributes(rng, pool, count, per_user):
    return [
        UserRecord(f"user{i:04d}", tuple(rng.sample(list(pool), per_user)))
        for i in range(count)
    ]


def experiment1(user_counts, attrs_per_user=3, pool_size=50, rng=None, reps=3):
    """Setup + issuance time as the population grows.

    Each user's entry is the elapsed time until their key exists (setup,
    then keys issued in order), so the worst time is the full provisioning
    time for that population — the single figure a capacity planner wants.
    """
    if not user_counts or list(user_counts) != sorted(user_counts):
        raise ValueError("user_counts must be non-empty and ascending")
    rng = rng if rng is not None else DeterministicRandom()
    curve = generate_curve()
    pool = tuple(f"attr{i:03d}" for i in range(pool_size))
    records = []
    for count in user_counts:
        users = _assign_attributes(rng, pool, count, attrs_per_user)

        def run(users=users, count=count):
            per_user = []
            start = time.perf_counter()
            _, msk = setup(curve, pool, users, rng)
            for user in users:
                keygen(msk, user)
                per_user.append(time.perf_counter() - start)
            return BenchmarkRecord(
                experiment=1,
                params={"users": count, "attributes": attrs_per_user, "file_mib": None},
                per_user_seconds=per_user,
                worst_seconds=per_user[-1],
            )

        records.append(_median_record(run, reps))
    return records


def experiment2(attr_counts, rng=None, reps=3):
    """Single user whose attribute set (and the universe) grows."""
    if not attr_counts or list(attr_counts) != sorted(attr_counts):
        raise ValueError("attr_counts must be non-empty and ascending")
    rng = rng if rng is not None else DeterministicRandom()
    curve = generate_curve()
    records = []
    for count in attr_counts:
        pool = tuple(f"attr{i:04d}" for i in range(count))
        user = UserRecord("user0000", pool)

        def run(pool=pool, user=user, count=count):
            start = time.perf_counter()
            _, msk = setup(curve, pool, [user], rng)
            keygen(msk, user)
            elapsed = time.perf_counter() - start
            return BenchmarkRecord(
                experiment=2,
                params={"users": 1, "attributes": count, "file_mib": None},
                per_user_seconds=[elapsed],
                worst_seconds=elapsed,
            )

        records.append(_median_record(run, reps))
    return records


# ----------------------------------------------------- transport pipeline


def _parallel_users(count, work):
    """Run `work(index)` on `count` threads with a common start line."""
    barrier = threading.Barrier(count)
    results = [None] * count
    failures = []

    def body(i):
        try:
            barrier.wait()
            results[i] = work(i)
        except BaseException as exc:  # surface thread failures to the caller
            failures.append(exc)

    threads = [threading.Thread(target=body, args=(i,)) for i in range(count)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if failures:
        raise failures[0]
    return results


def experiment3(user_counts, file_sizes_mib, rng=None, reps=3, chunk_size=4096):
    """Parallel plaintext downloads of one published object."""
    if not user_counts or not file_sizes_mib:
        raise ValueError("user_counts and file_sizes_mib must be non-empty")
    rng = rng if rng is not None else DeterministicRandom()
    records = []
    for size_mib in file_sizes_mib:
        payload = rng.randbytes(size_mib * MIB)
        digest = hashlib.sha256(payload).digest()
        name = Name(("bench", f"file{size_mib}mib"))
        for count in user_counts:

            def run(count=count, size_mib=size_mib):
                with Forwarder() as fwd:
                    producer = Producer(fwd)
                    producer.register_prefix("/bench")
                    segments = producer.publish(name, payload, chunk_size=chunk_size)
                    try:

                        def fetch(_i):
                            consumer = Consumer(fwd)
                            start = time.perf_counter()
                            data = consumer.fetch(name)
                            elapsed = time.perf_counter() - start
                            consumer.close()
                            if hashlib.sha256(data).digest() != digest:
                                raise RuntimeError("download differs from published object")
                            return elapsed

                        per_user = _parallel_users(count, fetch)
                        hits = producer.interest_log
                        if sum(hits.values()) != segments or max(hits.values()) != 1:
                            raise RuntimeError(
                                "producer saw a segment interest more than once"
                            )
                    finally:
                        producer.close()
                return BenchmarkRecord(
                    experiment=3,
                    params={"users": count, "attributes": None, "file_mib": size_mib},
                    per_user_seconds=per_user,
                    worst_seconds=max(per_user),
                )

            records.append(_median_record(run, reps))
    return records


def experiment4(user_counts, file_sizes_mib, rng=None, reps=3, chunk_size=4096):
    """Full pipeline per user: fetch sealed file + header, unwrap, decrypt, verify."""
    if not user_counts or not file_sizes_mib:
        raise ValueError("user_counts and file_sizes_mib must be non-empty")
    rng = rng if rng is not None else DeterministicRandom()
    curve = generate_curve()
    attrs = ("clearance", "project", "region")
    users = [UserRecord(f"user{i:04d}", attrs) for i in range(max(user_counts))]
    mpk, msk = setup(curve, attrs, users, rng)
    user_keys = [keygen(msk, u) for u in users]
    policy = AccessPolicy(frozenset(attrs), frozenset())
    header_name = "/headers/header.json"

    records = []
    with tempfile.TemporaryDirectory(prefix="abbenet-bench4-") as tmp:
        tmp = Path(tmp)
        for size_mib in file_sizes_mib:
            plain_path = tmp / f"plain{size_mib}.bin"
            with open(plain_path, "wb") as fh:
                for _ in range(size_mib):
                    fh.write(rng.randbytes(MIB))
            digest = hashlib.sha256(plain_path.read_bytes()).digest()

            session_key, header = encapsulate(mpk, policy, rng)
            header_bytes = save_header(header_from_abbe(header))
            aes_path = tmp / f"object{size_mib}.aes"
            encrypt_file(session_key, plain_path, aes_path, header_name, rng)
            aes_bytes = aes_path.read_bytes()
            aes_name = Name(("data", f"object{size_mib}.aes"))

            for count in user_counts:

                def run(count=count, size_mib=size_mib):
                    with Forwarder() as fwd:
                        producer = Producer(fwd)
                        producer.register_prefix("/data")
                        producer.register_prefix("/headers")
                        producer.publish(aes_name, aes_bytes, chunk_size=chunk_size)
                        producer.publish(Name.parse(header_name), header_bytes)
                        try:

                            def pipeline(i):
                                consumer = Consumer(fwd)
                                fetched = tmp / f"fetched{i}.aes"
                                out = tmp / f"out{i}.bin"
                                start = time.perf_counter()
                                fetched.write_bytes(consumer.fetch(aes_name))
                                pointer = peek_header_name(fetched)
                                hf = load_header(consumer.fetch(Name.parse(pointer)))
                                key = decapsulate(mpk, user_keys[i], header_to_abbe(hf, curve))
                                decrypt_file(key, fetched, out)
                                elapsed = time.perf_counter() - start
                                consumer.close()
                                ok = hashlib.sha256(out.read_bytes()).digest() == digest
                                out.unlink()
                                fetched.unlink()
                                if not ok:
                                    raise RuntimeError("decrypted file differs from source")
                                return elapsed

                            per_user = _parallel_users(count, pipeline)
                        finally:
                            producer.close()
                    return BenchmarkRecord(
                        experiment=4,
                        params={"users": count, "attributes": len(attrs), "file_mib": size_mib},
                        per_user_seconds=per_user,
                        worst_seconds=max(per_user),
                    )

                records.append(_median_record(run, reps))
    return records


# -------------------------------------------------------------- reporting

_COLUMNS = ("experiment", "params", "per_user_seconds", "worst_seconds")


def emit_report(records, metadata=None):
    """Render records as (CSV bytes, Markdown text); both carry host metadata."""
    records = list(records)
    if not records:
        raise ValueError("no records to report")
    metadata = dict(host_metadata() if metadata is None else metadata)

    buf = io.StringIO()
    for key in sorted(metadata):
        buf.write(f"# {key}={metadata[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_COLUMNS)
    for rec in records:
        writer.writerow(
            [
                rec.experiment,
                json.dumps(rec.params, sort_keys=True),
                json.dumps(rec.per_user_seconds),
                json.dumps(rec.worst_seconds),
            ]
        )
    csv_bytes = buf.getvalue().encode("utf-8")

    lines = [
        "# Benchmark report",
        "",
        *(f"- {key}: {metadata[key]}" for key in sorted(metadata)),
        "",
        "| experiment | users | attributes | file MiB | per-user seconds | worst time |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for rec in records:
        shown = ", ".join(f"{t:.4f}" for t in rec.per_user_seconds[:10])
        if len(rec.per_user_seconds) > 10:
            shown += ", …"
        cells = (
            str(rec.experiment),
            str(rec.params.get("users", "")),
            str(rec.params.get("attributes") or ""),
            str(rec.params.get("file_mib") or ""),
            shown,
            f"{rec.worst_seconds:.4f}",
        )
        lines.append("| " + " | ".join(cells) + " |")
    markdown = "\n".join(lines) + "\n"
    return csv_bytes, markdown


def parse_report(csv_bytes: bytes):
    """Inverse of emit_report's CSV half."""
    lines = [ln for ln in csv_bytes.decode("utf-8").splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or tuple(rows[0]) != _COLUMNS:
        raise ValueError("unrecognized report layout")
    return [
        BenchmarkRecord(
            experiment=int(row[0]),
            params=json.loads(row[1]),
            per_user_seconds=json.loads(row[2]),
            worst_seconds=json.loads(row[3]),
        )
        for row in rows[1:]
    ]
