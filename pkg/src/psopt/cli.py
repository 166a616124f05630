"""Command-line entry point; a thin client over the HTTP service.

By default the service app is mounted in-process, so no server needs to be
running. Pass --server to talk to a remote instance instead.

Exit codes: 0 success, 1 run/check failure (NaN loss, failed invariant),
2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_RUN_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psopt",
        description="Learning-rate-free parameter-scaled optimizer benchmarks")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; default is in-process")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one experiment config")
    p_run.add_argument("--config", required=True, help="path to a config JSON")
    p_run.add_argument("--out", required=True, help="output directory for traces")

    p_sweep = sub.add_parser("sweep", help="run a list of configs and tabulate")
    p_sweep.add_argument("--config", required=True,
                         help="JSON file: a list of configs or {\"configs\": [...]}")
    p_sweep.add_argument("--out", default=None, help="directory for the summary JSON")

    p_grad = sub.add_parser("gradcheck",
                            help="verify analytic gradients against finite differences")
    p_grad.add_argument("--h", type=float, default=1e-5)
    p_grad.add_argument("--points", type=int, default=10)

    p_inv = sub.add_parser("invariants", help="run an invariant suite")
    p_inv.add_argument("--suite", default="all")

    sub.add_parser("list", help="list available optimizers/objectives/schedules")
    return parser


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # mount the service in-process; no running server required
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import app
    return TestClient(app)


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        print(f"error: config file not found: {path}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON in {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fail_on_http_error(resp: httpx.Response) -> None:
    if resp.status_code == 422:
        detail = resp.json().get("detail")
        if isinstance(detail, list):  # pydantic validation errors carry a loc path
            for err in detail:
                loc = ".".join(str(p) for p in err.get("loc", []) if p != "body")
                print(f"config error at {loc}: {err.get('msg')}", file=sys.stderr)
        else:
            print(f"config error: {detail}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    if resp.status_code >= 400:
        print(f"error: service returned {resp.status_code}: {resp.text}",
              file=sys.stderr)
        raise SystemExit(EXIT_RUN_FAILURE)


def cmd_run(client: httpx.Client, args: argparse.Namespace) -> int:
    config = _load_json(args.config)
    resp = client.post("/run", json={"config": config})
    _fail_on_http_error(resp)
    body = resp.json()
    summary = body["summary"]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / f"trace_{summary['config_hash']}.csv"
    # flush the trace even for failed runs (partial trace contract)
    trace_path.write_text(body["trace_csv"])
    summary_path = out_dir / f"summary_{summary['config_hash']}.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    if args.verbose:
        print(json.dumps(summary, indent=2, sort_keys=True))
    print(f"trace written to {trace_path}")
    if summary["failed"]:
        print("run failed: non-finite loss encountered", file=sys.stderr)
        return EXIT_RUN_FAILURE
    return EXIT_OK


def cmd_sweep(client: httpx.Client, args: argparse.Namespace) -> int:
    payload = _load_json(args.config)
    configs = payload["configs"] if isinstance(payload, dict) else payload
    resp = client.post("/sweep", json={"configs": configs})
    _fail_on_http_error(resp)
    body = resp.json()
    print(body["table"])
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "sweep_results.json").write_text(
            json.dumps(body["results"], indent=2, sort_keys=True) + "\n")
    return EXIT_RUN_FAILURE if any(r["failed"] for r in body["results"]) else EXIT_OK


def _print_report(body: dict) -> int:
    for check in body["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"{status} {check['name']}: {check['detail']}")
    return EXIT_OK if body["all_passed"] else EXIT_RUN_FAILURE


def cmd_gradcheck(client: httpx.Client, args: argparse.Namespace) -> int:
    resp = client.post("/gradcheck", json={"h": args.h, "points": args.points})
    _fail_on_http_error(resp)
    return _print_report(resp.json())


def cmd_invariants(client: httpx.Client, args: argparse.Namespace) -> int:
    resp = client.post("/invariants", json={"suite": args.suite})
    _fail_on_http_error(resp)
    return _print_report(resp.json())


def cmd_list(client: httpx.Client, args: argparse.Namespace) -> int:
    resp = client.get("/list")
    _fail_on_http_error(resp)
    body = resp.json()
    for key in ("optimizers", "objectives", "scalings", "schedules",
                "invariant_suites"):
        print(f"{key}: {', '.join(body[key])}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "gradcheck": cmd_gradcheck,
    "invariants": cmd_invariants,
    "list": cmd_list,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    with make_client(args.server) as client:
        return COMMANDS[args.command](client, args)


if __name__ == "__main__":
    sys.exit(main())
