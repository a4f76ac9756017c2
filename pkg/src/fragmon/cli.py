"""Command-line client.

Every subcommand reads its inputs from files, sends one request to the
service and writes the response. Without ``--server`` the service runs
in-process.

Exit codes: 0 success, 1 validation error (bad flags, unreadable files,
rejected inputs), 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from typing import Optional, Sequence

import httpx

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INTERNAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _client(server: Optional[str]):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import create_app
    return TestClient(create_app(), raise_server_exceptions=False)


class RequestFailed(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status


def _post(client, path: str, body: dict) -> dict:
    r = client.post(path, json=body)
    if r.status_code >= 400:
        try:
            detail = r.json().get("detail")
        except ValueError:
            detail = r.text
        if not isinstance(detail, str):
            detail = json.dumps(detail)
        raise RequestFailed(r.status_code, detail)
    return r.json()


def _policy(args) -> dict:
    kind = args.policy
    return {
        "kind": kind,
        "on_length": {"dist": args.window_dist, "value": args.on},
        "off_length": {"dist": args.window_dist, "value": args.off},
        "toggle_probability": args.toggle_probability,
        "budget": args.budget,
        "rng_seed": args.policy_seed,
    }


def _add_policy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", default="windowed",
                   choices=["windowed", "bernoulli-toggle", "always-on", "always-off"])
    p.add_argument("--window-dist", default="geometric", choices=["geometric", "fixed"])
    p.add_argument("--on", type=float, default=20.0, help="on-window length (mean if geometric)")
    p.add_argument("--off", type=float, default=80.0, help="off-window length (mean if geometric)")
    p.add_argument("--toggle-probability", type=float, default=0.05)
    p.add_argument("--budget", type=float, default=0.25)
    p.add_argument("--policy-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fragmon", description="Fragmented monitoring: synthesize, collect, reconstruct.")
    parser.add_argument("--server", help="service base URL; default runs the service in-process")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="synthesize the condition set of a program")
    p.add_argument("--program", required=True)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--loop-bound", type=int, default=3)
    p.add_argument("--inline-depth", type=int, default=2)
    p.add_argument("--out", help="condition file (default stdout)")

    p = sub.add_parser("monitor", help="run a program under a recording policy, emit fragments")
    p.add_argument("--program", required=True)
    p.add_argument("--conditions", required=True)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed-start", type=int, default=0)
    p.add_argument("--installation", default="local")
    p.add_argument("--production", action="store_true", help="omit event indices")
    _add_policy_flags(p)
    p.add_argument("--out", help="fragment file (default stdout)")
    p.add_argument("--stats", help="write per-run overhead stats as JSON")

    p = sub.add_parser("reconstruct", help="concatenate fragments into likely traces")
    p.add_argument("--fragments", required=True, action="append", help="fragment file; repeatable")
    p.add_argument("--conditions", help="condition file the fragments must match")
    p.add_argument("--program", help="annotate traces with control-flow feasibility")
    p.add_argument("--max-chain", type=int, default=8)
    p.add_argument("--max-outputs", type=int, default=10_000)
    p.add_argument("--out", help="trace file (default stdout)")

    p = sub.add_parser("eval", help="run the whole pipeline and print metrics")
    p.add_argument("--program", help="subject program; default generates one from --seed")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--allow-faults", action="store_true")
    _add_policy_flags(p)
    p.add_argument("--max-chain", type=int, default=8)
    p.add_argument("--max-outputs", type=int, default=10_000)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--loop-bound", type=int, default=3)
    p.add_argument("--inline-depth", type=int, default=2)
    p.add_argument("--out", help="also write the metrics JSON here")
    p.add_argument("--corpus", help="write programs/, fragments/, traces/, reports/ under this directory")

    p = sub.add_parser("gen", help="generate a random subject program")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--methods", type=int, default=3)
    p.add_argument("--branch-depth", type=int, default=2)
    p.add_argument("--loop-nesting", type=int, default=1)
    p.add_argument("--min-fields", type=int, default=1)
    p.add_argument("--max-fields", type=int, default=3)
    p.add_argument("--interfaces", type=int, default=1)
    p.add_argument("--allow-faults", action="store_true")
    p.add_argument("--out", help="program file (default stdout)")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _cmd_synth(client, args) -> None:
    res = _post(client, "/synth", {"program": _read(args.program), "depth": args.depth,
                                   "loop_bound": args.loop_bound, "inline_depth": args.inline_depth})
    _write(args.out, res["file"])
    if args.out:
        print(f"{len(res['conditions'])} condition(s), cshash {res['cshash']}", file=sys.stderr)


def _cmd_monitor(client, args) -> None:
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    body = {
        "program": _read(args.program),
        "conditions": _read(args.conditions),
        "policy": _policy(args),
        "seeds": list(range(args.seed_start, args.seed_start + args.runs)),
        "installation": args.installation,
        "production": args.production,
    }
    res = _post(client, "/monitor", body)
    _write(args.out, res["fragments"])
    if args.stats:
        _write(args.stats, json.dumps(res["runs"], sort_keys=True) + "\n")
    if args.out:
        print(f"{res['fragment_count']} fragment(s), cshash {res['cshash']}", file=sys.stderr)


def _cmd_reconstruct(client, args) -> None:
    body = {
        "fragments": [_read(p) for p in args.fragments],
        "conditions": _read(args.conditions) if args.conditions else None,
        "program": _read(args.program) if args.program else None,
        "max_chain_length": args.max_chain,
        "max_outputs": args.max_outputs,
    }
    res = _post(client, "/reconstruct", body)
    _write(args.out, res["traces"])
    if args.out:
        print(f"{res['trace_count']} trace(s) from {res['fragment_count']} fragment(s)", file=sys.stderr)


def _cmd_eval(client, args) -> None:
    body = {
        "program": _read(args.program) if args.program else None,
        "seed": args.seed,
        "runs": args.runs,
        "policy": _policy(args),
        "bounds": {"max_chain_length": args.max_chain, "max_outputs": args.max_outputs,
                   "depth": args.depth, "loop_bound": args.loop_bound, "inline_depth": args.inline_depth},
        "allow_faults": args.allow_faults,
        "include_artifacts": bool(args.corpus),
    }
    res = _post(client, "/eval", body)
    line = json.dumps(res["metrics"], sort_keys=True, separators=(",", ":")) + "\n"
    sys.stdout.write(line)
    if args.out:
        _write(args.out, line)
    if args.corpus:
        name = os.path.splitext(os.path.basename(args.program))[0] if args.program else f"gen{args.seed}"
        root = args.corpus
        _write(os.path.join(root, "programs", f"{name}.subj"), res["program"])
        _write(os.path.join(root, "programs", f"{name}.conds"), res["conditions"])
        _write(os.path.join(root, "fragments", f"{name}.jsonl"), res["fragments"])
        _write(os.path.join(root, "traces", f"{name}.jsonl"), res["traces"])
        _write(os.path.join(root, "reports", f"{name}.json"), line)


def _cmd_gen(client, args) -> None:
    body = {
        "rng_seed": args.seed, "n_classes": args.classes, "n_methods_per_class": args.methods,
        "max_branch_depth": args.branch_depth, "max_loop_nesting": args.loop_nesting,
        "min_fields": args.min_fields, "max_fields": args.max_fields,
        "n_interfaces": args.interfaces, "allow_faults": args.allow_faults,
    }
    res = _post(client, "/gen", body)
    _write(args.out, res["source"])


def _cmd_serve(args) -> None:
    import uvicorn

    uvicorn.run("fragmon.service.app:app", host=args.host, port=args.port)


COMMANDS = {
    "synth": _cmd_synth,
    "monitor": _cmd_monitor,
    "reconstruct": _cmd_reconstruct,
    "eval": _cmd_eval,
    "gen": _cmd_gen,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            _cmd_serve(args)
            return EXIT_OK
        with _client(args.server) as client:
            COMMANDS[args.command](client, args)
        return EXIT_OK
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fragmon: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RequestFailed as exc:
        print(f"fragmon: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION if exc.status < 500 else EXIT_INTERNAL
    except httpx.HTTPError as exc:
        print(f"fragmon: error: cannot reach server: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
