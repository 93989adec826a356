"""Command-line front end.

Each subcommand builds the same request model the HTTP service accepts and
dispatches it to the in-process handlers (or to a remote service when
--server is given), so CLI and service behave identically.

Exit codes: 0 success, 1 infeasible or failed verification, 2 usage or parse
errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

from .model import ConfigError
from .rational import format_decimal, parse_scalar
from .service import app as handlers
from .service import schemas as sc

SCALAR_KEYS = {
    "optimal_power",
    "power",
    "max_power",
    "max_power_used",
    "power_bound",
    "separation",
    "completion",
    "powers",
    "pickups",
    "handoffs",
    "back",
    "forward",
    "epsilon",
    "sigma",
    "time",
    "optimal",
    "oracle",
    "gather_max",
    "broadcast_max",
}
OPAQUE_KEYS = {"instance", "strategy", "witness", "moves"}


def _maybe_decimal(value, digits: int):
    if isinstance(value, str):
        try:
            return format_decimal(parse_scalar(value), digits)
        except ValueError:
            return value
    if isinstance(value, list):
        return [_maybe_decimal(v, digits) for v in value]
    if isinstance(value, dict):
        return {k: _maybe_decimal(v, digits) for k, v in value.items()}
    return value


def _apply_decimal(doc, digits: int):
    if isinstance(doc, dict):
        out = {}
        for k, v in doc.items():
            if k in OPAQUE_KEYS:
                out[k] = v
            elif k in SCALAR_KEYS:
                out[k] = _maybe_decimal(v, digits)
            else:
                out[k] = _apply_decimal(v, digits)
        return out
    if isinstance(doc, list):
        return [_apply_decimal(v, digits) for v in doc]
    return doc


def _read_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SystemExit2(f"cannot read {path}: {exc}")


class SystemExit2(Exception):
    """Usage-level failure; maps to exit code 2."""


def _instance_doc(path: str) -> dict:
    text = _read_file(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemExit2(f"{path}: invalid JSON: {exc}")
    if not isinstance(doc, dict):
        raise SystemExit2(f"{path}: instance document must be a JSON object")
    return doc


def _meta(argv: list[str], files: list[str]) -> dict:
    hashes = {}
    for path in files:
        digest = hashlib.sha256(_read_file(path).encode()).hexdigest()
        hashes[path] = digest
    return {"argv": argv, "inputs": hashes}


ROUTES = {
    "line-convergecast": ("/line/convergecast", sc.LineConvergecastRequest, handlers.line_convergecast),
    "line-broadcast": ("/line/broadcast", sc.LineBroadcastRequest, handlers.line_broadcast),
    "decide": ("/decide", sc.DecideRequest, handlers.decide),
    "graph-approx": ("/graph/approx", sc.GraphApproxRequest, handlers.graph_approx),
    "simulate": ("/simulate/distributed", sc.DistSimulateRequest, handlers.dist_simulate),
    "verify": ("/verify", sc.VerifyRequest, handlers.verify),
    "gen-3p-star": ("/gen/3p-star", sc.Gen3pStarRequest, handlers.gen_3p_star),
    "gen-lowerbound": ("/gen/lowerbound", sc.GenLowerBoundRequest, handlers.gen_lowerbound),
    "gen-random-line": ("/gen/random-line", sc.GenRandomLineRequest, handlers.gen_random_line_doc),
    "gen-random-tree": ("/gen/random-tree", sc.GenRandomTreeRequest, handlers.gen_random_tree_doc),
    "bench": ("/bench", sc.BenchRequest, handlers.run_bench),
}


def _dispatch(route: str, request, server: str | None) -> dict:
    path, _, handler = ROUTES[route]
    if server is None:
        try:
            response = handler(request)
        except handlers.RequestFault as exc:
            raise SystemExit2(str(exc))
        return response.model_dump(by_alias=True, exclude_none=True)
    import httpx

    reply = httpx.post(server.rstrip("/") + path, json=request.model_dump(by_alias=True), timeout=600.0)
    if reply.status_code != 200:
        raise SystemExit2(f"server error {reply.status_code}: {reply.text}")
    return {k: v for k, v in reply.json().items() if v is not None}


def _exit_code(route: str, out: dict) -> int:
    if route == "decide":
        return 0 if out.get("feasible") else 1
    if route == "verify":
        return 0 if out.get("ok") else 1
    if route == "simulate":
        return 0 if out.get("achieved") else 1
    if route == "graph-approx":
        return 0 if out.get("verified") else 1
    if route == "bench":
        return 0 if out.get("failures", 1) == 0 else 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powercast",
        description="Optimal-power planning and simulation for mobile-agent convergecast/broadcast.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--decimal", type=int, metavar="K", help="also render scalars as decimals with K digits")
    common.add_argument("--server", metavar="URL", help="send the request to a running powercast service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("line-convergecast", parents=[common], help="optimal convergecast power on a line")
    p.add_argument("file")
    p.add_argument("--no-strategy", action="store_true", help="omit the emitted strategy")

    p = sub.add_parser("line-broadcast", parents=[common], help="optimal broadcast power on a line")
    p.add_argument("file")
    p.add_argument("--source", type=int, help="source agent index (defaults to the instance's)")
    p.add_argument("--no-strategy", action="store_true")

    p = sub.add_parser("decide", parents=[common], help="feasibility at a given budget")
    p.add_argument("file")
    p.add_argument("--power", required=True)
    p.add_argument("--mode", choices=["conv", "bcast"], default="conv")
    p.add_argument("--source", type=int)

    p = sub.add_parser("graph-approx", parents=[common], help="2/4-approximation on graphs")
    p.add_argument("file")
    p.add_argument("--mode", choices=["conv", "bcast"], default="conv")
    p.add_argument("--source", type=int)

    p = sub.add_parser("simulate", parents=[common], help="run a distributed tree protocol")
    p.add_argument("file", nargs="?")
    p.add_argument("--tree", dest="tree_file", help="alias for the positional instance file")
    p.add_argument("--algorithm", choices=["unknown-tree", "dist-broadcast"], required=True)
    p.add_argument("--budget", required=True)
    p.add_argument("--source", type=int)
    p.add_argument("--port-seed", type=int)
    p.add_argument("--trace", action="store_true", help="include the full event log")

    p = sub.add_parser("verify", parents=[common], help="simulate a strategy file and verify it")
    p.add_argument("file")
    p.add_argument("--strategy", required=True, metavar="STRATEGY_FILE")
    p.add_argument("--budget", required=True)
    p.add_argument("--mode", choices=["conv", "bcast"], default="conv")
    p.add_argument("--source", type=int)
    p.add_argument("--trace", action="store_true", help="include the full meeting trace")

    gen = sub.add_parser("gen", help="instance generators").add_subparsers(dest="generator", required=True)
    p = gen.add_parser("3p-star", parents=[common])
    p.add_argument("--mode", choices=["convergecast", "broadcast"], required=True)
    p.add_argument("--multiset", required=True, help="comma-separated integers, e.g. 6,7,7")
    p.add_argument("--witness", action="store_true", help="emit the witness strategy for --partition")
    p.add_argument("--partition", help="semicolon-separated triples, e.g. '6,7,7;5,8,7'")
    p = gen.add_parser("lowerbound", parents=[common])
    p.add_argument("--delta", required=True)
    p.add_argument("--power", required=True)
    p = gen.add_parser("random-line", parents=[common])
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p = gen.add_parser("random-tree", parents=[common])
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("bench", parents=[common], help="property sweeps and scaling measurements")
    p.add_argument("--suite", choices=["oracle-equivalence", "distributed-bounds", "scaling"], required=True)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _build_request(args: argparse.Namespace) -> tuple[str, object, list[str]]:
    cmd = args.command
    if cmd == "line-convergecast":
        doc = _instance_doc(args.file)
        return cmd, sc.LineConvergecastRequest(instance=doc, emit_strategy=not args.no_strategy), [args.file]
    if cmd == "line-broadcast":
        doc = _instance_doc(args.file)
        return cmd, sc.LineBroadcastRequest(instance=doc, source=args.source, emit_strategy=not args.no_strategy), [args.file]
    if cmd == "decide":
        doc = _instance_doc(args.file)
        return cmd, sc.DecideRequest(instance=doc, power=args.power, mode=args.mode, source=args.source), [args.file]
    if cmd == "graph-approx":
        doc = _instance_doc(args.file)
        return cmd, sc.GraphApproxRequest(instance=doc, mode=args.mode, source=args.source), [args.file]
    if cmd == "simulate":
        path = args.file or args.tree_file
        if path is None:
            raise SystemExit2("simulate needs an instance file")
        doc = _instance_doc(path)
        return cmd, sc.DistSimulateRequest(
            instance=doc,
            algorithm=args.algorithm,
            budget=args.budget,
            source=args.source,
            port_seed=args.port_seed,
            trace=args.trace,
        ), [path]
    if cmd == "verify":
        doc = _instance_doc(args.file)
        sdoc = _instance_doc(args.strategy)
        return cmd, sc.VerifyRequest(
            instance=doc,
            strategy=sdoc,
            budget=args.budget,
            mode=args.mode,
            source=args.source,
            include_trace=args.trace,
        ), [args.file, args.strategy]
    if cmd == "gen":
        g = args.generator
        if g == "3p-star":
            try:
                values = [int(x) for x in args.multiset.split(",") if x.strip()]
            except ValueError:
                raise SystemExit2("--multiset must be comma-separated integers")
            partition = None
            if args.partition:
                try:
                    partition = [
                        [int(x) for x in chunk.split(",")] for chunk in args.partition.split(";")
                    ]
                except ValueError:
                    raise SystemExit2("--partition must be semicolon-separated integer triples")
            return "gen-3p-star", sc.Gen3pStarRequest(
                mode=args.mode, multiset=values, emit_witness=args.witness, partition=partition
            ), []
        if g == "lowerbound":
            return "gen-lowerbound", sc.GenLowerBoundRequest(delta=args.delta, power=args.power), []
        if g == "random-line":
            return "gen-random-line", sc.GenRandomLineRequest(n=args.n, seed=args.seed), []
        return "gen-random-tree", sc.GenRandomTreeRequest(n=args.n, seed=args.seed), []
    if cmd == "bench":
        return cmd, sc.BenchRequest(suite=args.suite, seeds=args.seeds, jobs=args.jobs), []
    raise SystemExit2(f"unknown command {cmd}")


def _print_bench_csv(out: dict) -> None:
    import csv

    rows = out.get("rows", [])
    if not rows:
        return
    keys = sorted({k for row in rows for k in row})
    writer = csv.DictWriter(sys.stdout, fieldnames=keys)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        import uvicorn

        uvicorn.run("powercast.service.app:app", host=args.host, port=args.port)
        return 0
    try:
        route, request, files = _build_request(args)
        out = _dispatch(route, request, args.server)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out["_meta"] = _meta(argv if argv is not None else sys.argv[1:], files)
    if getattr(args, "decimal", None) is not None:
        out = _apply_decimal(out, args.decimal)
    if args.command == "bench" and args.format == "csv":
        _print_bench_csv(out)
    else:
        print(json.dumps(out, indent=2))
    return _exit_code(route, out)


if __name__ == "__main__":
    sys.exit(main())
