"""Command-line front end: a thin client of the scenario service.

By default the client talks to the FastAPI app in-process (no server
needed); --server points it at a running instance instead.  Exit codes:
0 success, 2 verification failure, 1 usage error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path

import httpx

from . import __version__, scenarios
from .errors import SchemaError

TASKS = ["connect", "convexify", "cone", "splitting", "curvature", "degree"]


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # in-process default: drive the ASGI app directly, no server needed
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geolab", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    for task in TASKS:
        p = sub.add_parser(task, help=f"run a {task} scenario")
        p.add_argument("--preset", help="named preset scenario")
        p.add_argument("--config", help="JSON scenario file (object or list)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=".", help="artifact output directory")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--server", default=None, help="base URL of a running service")
        p.add_argument("--scan", action="store_true", help="include the bound scan")
    return parser


def _gather_scenarios(args) -> list[dict]:
    if args.preset and args.config:
        raise SchemaError("use either --preset or --config, not both")
    if args.preset:
        s = scenarios.get_preset(args.preset)
        if s.task != args.command:
            raise SchemaError(
                f"preset {args.preset!r} runs task {s.task!r}, not {args.command!r}"
            )
        return [s.model_dump()]
    if args.config:
        items = scenarios.parse_config(Path(args.config))
        for s in items:
            if s.task != args.command:
                raise SchemaError(
                    f"scenario {s.name!r} runs task {s.task!r}, not {args.command!r}"
                )
        return [s.model_dump() for s in items]
    return [
        scenarios.Scenario(name=f"{args.command}-default", task=args.command).model_dump()
    ]


def _run_one(client: httpx.Client, scenario: dict, seed, out_dir: Path) -> int:
    resp = client.post("/run", json={"scenario": scenario, "seed": seed})
    if resp.status_code == 422:
        print(f"error: {resp.json().get('detail')}", file=sys.stderr)
        return scenarios.EXIT_USAGE
    resp.raise_for_status()
    body = resp.json()
    out_dir.mkdir(parents=True, exist_ok=True)
    for art in body["artifacts"]:
        (out_dir / art["name"]).write_text(art["content"])
    print(json.dumps({"scenario": scenario["name"], **_summary(body)}, sort_keys=True))
    return int(body["exit_code"])


def _summary(body: dict) -> dict:
    return {
        "exit_code": body["exit_code"],
        "artifacts": [a["name"] for a in body["artifacts"]],
        "report": body["report"],
    }


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return scenarios.EXIT_USAGE
    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return scenarios.EXIT_OK

    try:
        scs = _gather_scenarios(args)
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return scenarios.EXIT_USAGE

    out_dir = Path(args.out)
    with _client(args.server) as client:
        if args.jobs > 1 and len(scs) > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=args.jobs) as ex:
                codes = list(
                    ex.map(lambda s: _run_one(client, s, args.seed, out_dir), scs)
                )
        else:
            codes = [_run_one(client, s, args.seed, out_dir) for s in scs]
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
