"""Command-line toolset: key ceremony, file sealing, publish/fetch, benchmarks.

One binary with subcommands; symlinking it as ``abbe-<subcommand>``
(e.g. ``abbe-encrypt``) gives each tool its own name. Every tool that
draws randomness accepts ``--seed <hex>`` and then produces bit-identical
artifacts on every run; without a seed, system entropy is used.

Exit codes: 0 success, 1 usage error, 2 schema or validation error,
3 not an authorized recipient, 4 transport failure. All diagnostics go
to stderr; stdout carries only tool output (session-key hex, reports).
"""

import argparse
import contextlib
import enum
import sys
import time
from pathlib import Path

from . import abbe, bench, content, ndn
from ._drbg import DeterministicRandom
from .errors import AbbenetError, NdnError, NotAuthorized, SchemaViolation
from .formats import (
    KeysFile,
    canonical_json_bytes,
    header_from_abbe,
    header_to_abbe,
    load_config,
    load_header,
    load_keys,
    save_header,
    save_keys,
)
from .pairing import curve_to_json_obj, generate_curve

__all__ = ["ExitStatus", "main", "run"]


class ExitStatus(enum.IntEnum):
    OK = 0
    USAGE = 1
    SCHEMA = 2
    NOT_AUTHORIZED = 3
    TRANSPORT = 4


_SUBCOMMANDS = ("curvegen", "keygen", "encrypt", "decrypt", "put", "get", "bench")


def _seed_bytes(text: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an even-length hex string")


def _rng(seed):
    return DeterministicRandom(seed) if seed is not None else DeterministicRandom()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abbenet",
        description="Confidential content distribution tools: policy-based "
        "key encapsulation over named data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvegen", help="derive pairing curve parameters")
    p.add_argument("--out", required=True, help="where to write curve.json")
    p.add_argument("--seed", type=_seed_bytes, help="hex seed for the parameter search")

    p = sub.add_parser("keygen", help="run setup and issue every user key")
    p.add_argument("-c", "--config", required=True, help="config.json")
    p.add_argument("-o", "--out", required=True, help="where to write keys.json")
    p.add_argument("--seed", type=_seed_bytes, help="hex seed for key material")

    p = sub.add_parser("encrypt", help="draw a session key and wrap it for a policy")
    p.add_argument("-c", "--config", required=True, help="config.json (provides the policy)")
    p.add_argument("-k", "--keys", required=True, help="keys.json")
    p.add_argument("-o", "--out", required=True, help="where to write header.json")
    p.add_argument("-i", "--infile", help="optional plaintext file to seal as <infile>.aes")
    p.add_argument("-a", "--aes", help="container path (default: <infile>.aes)")
    p.add_argument("--header-name", help="header pointer stored in the container (default: --out)")
    p.add_argument("--seed", type=_seed_bytes, help="hex seed for session key and nonce")

    p = sub.add_parser("decrypt", help="recover the session key from a header")
    p.add_argument("-c", "--config", required=True, help="config.json")
    p.add_argument("-k", "--keys", required=True, help="keys.json")
    p.add_argument("-H", "--header", required=True, help="header.json")
    p.add_argument("-u", "--user", required=True, help="user id whose key to use")

    p = sub.add_parser("put", help="publish a file and serve it over a socket")
    p.add_argument("name", help="content name, e.g. /data/report.pdf")
    p.add_argument("file", help="file to publish")
    p.add_argument("--port", type=int, default=6363, help="listen port (0 = ephemeral)")
    p.add_argument("--chunk-size", type=int, default=4096, help="segment payload size")
    p.add_argument("--serve-for", type=float, help="stop after this many seconds")
    p.add_argument("--seed", type=_seed_bytes, help="hex seed for the signing identity")

    p = sub.add_parser("get", help="fetch a published object into a file")
    p.add_argument("name", help="content name to fetch")
    p.add_argument("-o", "--out", required=True, help="output file")
    p.add_argument("--connect", default="127.0.0.1:6363", help="forwarder host:port")
    p.add_argument("--timeout", type=float, default=4.0, help="per-interest timeout")

    p = sub.add_parser("bench", help="run a scaling experiment and write reports")
    p.add_argument("--experiment", type=int, required=True, choices=(1, 2, 3, 4))
    p.add_argument("--out", required=True, help="CSV path; Markdown lands beside it")
    p.add_argument("--paper-scale", action="store_true", help="original sizes/counts")
    p.add_argument("--seed", type=_seed_bytes, help="hex seed for workloads")
    p.add_argument("--reps", type=int, default=3, help="repetitions per point (median)")
    p.add_argument("--users", type=int, nargs="+", help="override user counts")
    p.add_argument("--attributes", type=int, nargs="+", help="override attribute counts")
    p.add_argument("--sizes-mib", type=int, nargs="+", help="override file sizes")
    return parser


def _check_same_curve(config_curve, keys_curve):
    if curve_to_json_obj(config_curve) != curve_to_json_obj(keys_curve):
        raise SchemaViolation("/curve", "config and keys files use different curves")


def _cmd_curvegen(args, stdin, stdout, stderr):
    curve = generate_curve() if args.seed is None else generate_curve(seed=args.seed)
    Path(args.out).write_bytes(canonical_json_bytes(curve_to_json_obj(curve)) + b"\n")
    return ExitStatus.OK


def _cmd_keygen(args, stdin, stdout, stderr):
    cfg = load_config(Path(args.config).read_bytes())
    rng = _rng(args.seed)
    mpk, msk = abbe.setup(cfg.curve, cfg.attribute_pool, cfg.users, rng)
    user_keys = tuple(abbe.keygen(msk, user) for user in cfg.users)
    Path(args.out).write_bytes(save_keys(KeysFile(mpk, msk, user_keys)))
    return ExitStatus.OK


def _cmd_encrypt(args, stdin, stdout, stderr):
    cfg = load_config(Path(args.config).read_bytes())
    keys = load_keys(Path(args.keys).read_bytes())
    _check_same_curve(cfg.curve, keys.mpk.curve)
    rng = _rng(args.seed)
    session_key, header = abbe.encapsulate(keys.mpk, cfg.policy, rng)
    Path(args.out).write_bytes(save_header(header_from_abbe(header)))
    if args.infile is not None:
        container = args.aes if args.aes is not None else args.infile + ".aes"
        pointer = args.header_name if args.header_name is not None else args.out
        content.encrypt_file(session_key, args.infile, container, pointer, rng)
    print(session_key.hex(), file=stdout)
    return ExitStatus.OK


def _cmd_decrypt(args, stdin, stdout, stderr):
    cfg = load_config(Path(args.config).read_bytes())
    keys = load_keys(Path(args.keys).read_bytes())
    _check_same_curve(cfg.curve, keys.mpk.curve)
    header = header_to_abbe(load_header(Path(args.header).read_bytes()), keys.mpk.curve)
    user_key = next((k for k in keys.user_keys if k.user_id == args.user), None)
    if user_key is None:
        print(f"keys file holds no key for user {args.user!r}", file=stderr)
        return ExitStatus.SCHEMA
    try:
        session_key = abbe.decapsulate(keys.mpk, user_key, header)
    except NotAuthorized:
        print(f"user {args.user!r} is not a recipient of this header", file=stderr)
        return ExitStatus.NOT_AUTHORIZED
    print(session_key.hex(), file=stdout)
    return ExitStatus.OK


def _cmd_put(args, stdin, stdout, stderr):
    payload = Path(args.file).read_bytes()
    name = ndn.Name.parse(args.name)
    with ndn.Forwarder() as fwd:
        host, port = fwd.listen(port=args.port)
        producer = ndn.Producer(fwd, rng=_rng(args.seed))
        producer.register_prefix(name)
        segments = producer.publish(name, payload, chunk_size=args.chunk_size)
        print(f"serving {name} ({segments} segments) at {host}:{port}", file=stdout)
        stdout.flush()
        try:
            if args.serve_for is not None:
                time.sleep(args.serve_for)
            else:
                while True:
                    time.sleep(3600)
        except KeyboardInterrupt:
            pass
        finally:
            producer.close()
    return ExitStatus.OK


def _cmd_get(args, stdin, stdout, stderr):
    host, _, port_text = args.connect.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"--connect expects host:port, got {args.connect!r}", file=stderr)
        return ExitStatus.USAGE
    consumer = ndn.Consumer(ndn.RemoteNode(host, int(port_text)), timeout=args.timeout)
    try:
        data = consumer.fetch(ndn.Name.parse(args.name))
    finally:
        consumer.close()
    Path(args.out).write_bytes(data)
    return ExitStatus.OK


def _cmd_bench(args, stdin, stdout, stderr):
    rng = _rng(args.seed)
    paper = args.paper_scale
    sizes = tuple(args.sizes_mib) if args.sizes_mib else (
        bench.PAPER_SIZES_MIB if paper else bench.DESK_SIZES_MIB
    )
    if args.experiment == 1:
        counts = args.users or ([1, 2, 5, 10, 20, 50, 100, 200, 500, 1000] if paper
                                else [1, 2, 5, 10, 20, 50, 100])
        records = bench.experiment1(counts, rng=rng, reps=args.reps)
    elif args.experiment == 2:
        counts = args.attributes or ([2, 5, 10, 20, 50, 100, 200, 500, 1000] if paper
                                     else [2, 5, 10, 20, 50, 100])
        records = bench.experiment2(counts, rng=rng, reps=args.reps)
    elif args.experiment == 3:
        records = bench.experiment3(args.users or [1, 2, 5, 10], sizes, rng=rng, reps=args.reps)
    else:
        records = bench.experiment4(args.users or [1, 2, 5, 10], sizes, rng=rng, reps=args.reps)
    csv_bytes, markdown = bench.emit_report(records)
    out = Path(args.out)
    out.write_bytes(csv_bytes)
    out.with_suffix(".md").write_text(markdown)
    stdout.write(markdown)
    return ExitStatus.OK


_HANDLERS = {
    "curvegen": _cmd_curvegen,
    "keygen": _cmd_keygen,
    "encrypt": _cmd_encrypt,
    "decrypt": _cmd_decrypt,
    "put": _cmd_put,
    "get": _cmd_get,
    "bench": _cmd_bench,
}


def run(argv, stdin=None, stdout=None, stderr=None) -> ExitStatus:
    """Dispatch one tool invocation; argv[0] is the program name."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr

    argv = [str(a) for a in argv]
    rest = argv[1:]
    prog = Path(argv[0]).name if argv else "abbenet"
    if prog.startswith("abbe-") and prog[len("abbe-"):] in _SUBCOMMANDS:
        rest = [prog[len("abbe-"):], *rest]

    parser = _build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(rest)
    except SystemExit as exc:
        return ExitStatus.OK if exc.code == 0 else ExitStatus.USAGE

    try:
        return _HANDLERS[args.command](args, stdin, stdout, stderr)
    except SchemaViolation as exc:
        print(f"{exc.path}: {exc.reason}", file=stderr)
        return ExitStatus.SCHEMA
    except NotAuthorized as exc:
        print(f"not a recipient: {exc}", file=stderr)
        return ExitStatus.NOT_AUTHORIZED
    except NdnError as exc:
        print(f"transport failure: {exc}", file=stderr)
        return ExitStatus.TRANSPORT
    except AbbenetError as exc:
        print(f"invalid input: {exc}", file=stderr)
        return ExitStatus.SCHEMA
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"usage error: {exc}", file=stderr)
        return ExitStatus.USAGE
    except OSError as exc:
        print(f"transport failure: {exc}", file=stderr)
        return ExitStatus.TRANSPORT
    except ValueError as exc:
        print(f"usage error: {exc}", file=stderr)
        return ExitStatus.USAGE


def main() -> int:
    return int(run(sys.argv))
