"""Command-line front end.

The CLI is a thin client of the HTTP service: it reads the scenario file,
ships it (plus flag overrides) to the service, and writes the returned
report JSON and trace CSV. By default the service runs in-process over an
ASGI transport, so no server needs to be started; ``--server URL`` targets
a remote instance launched with ``fbmgreeks serve``.

Exit codes: 0 success, 2 config error, 3 numerical error, 4 io error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

EXIT_CODES = {"config": 2, "numerical": 3, "io": 4}

_OVERRIDE_FLAGS = {
    "scenario": "scenario",
    "estimator": "estimator",
    "hurst": "hurst",
    "hurst2": "hurst2",
    "n2": "n2",
    "paths": "paths",
    "alpha": "alpha",
    "seed": "seed",
    "horizon": "horizon",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmgreeks",
        description="Monte Carlo Greeks for SDEs driven by fractional Brownian motion",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", nargs="?", help="scenario file (optional if flags suffice)")
        p.add_argument("--scenario", help="named preset, e.g. paper-8.2")
        p.add_argument("--estimator", help="pathwise-delta | pathwise-vega | weight-delta | finance-mu")
        p.add_argument("--hurst", help="Hurst parameter of the driver")
        p.add_argument("--hurst2", help="second Hurst parameter (finance-mu)")
        p.add_argument("--n2", help="dyadic grid order, N1 = 2^n2")
        p.add_argument("--paths", help="number of Monte Carlo paths")
        p.add_argument("--alpha", help="confidence level, e.g. 0.05")
        p.add_argument("--seed", help="64-bit master seed")
        p.add_argument("--horizon", help="time horizon T (default 1)")
        p.add_argument("--server", help="base URL of a running service (default: in-process)")

    run_p = sub.add_parser("run", help="execute a scenario and write report/trace files")
    add_common(run_p)
    run_p.add_argument("--out", default=".", help="output directory (default: current)")
    run_p.add_argument("--report", help="report JSON path (overrides --out and config)")
    run_p.add_argument("--trace", help="trace CSV path (overrides --out and config)")

    val_p = sub.add_parser("validate", help="parse a scenario and print its normalized form")
    add_common(val_p)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    return parser


class _InProcessClient:
    """Minimal sync facade over the ASGI app (no socket, no server)."""

    def post(self, endpoint, json):
        import asyncio

        from .service import app

        async def go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(transport=transport, base_url="http://service") as client:
                return await client.post(endpoint, json=json)

        return asyncio.run(go())

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    return _InProcessClient()


def _request_payload(args) -> dict:
    text = ""
    if args.config:
        text = Path(args.config).read_text()
    overrides = {}
    for flag, key in _OVERRIDE_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = str(value)
    return {"config_text": text, "overrides": overrides}


class _CliFailure(Exception):
    def __init__(self, category, message):
        self.category = category
        self.message = message


def _post(client, endpoint, payload):
    try:
        response = client.post(endpoint, json=payload)
    except httpx.HTTPError as exc:
        raise _CliFailure("io", f"cannot reach service: {exc}")
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json()["detail"]
        raise _CliFailure(detail["category"], detail["message"])
    except (KeyError, TypeError, ValueError):
        raise _CliFailure("io", f"service returned HTTP {response.status_code}") from None


def _cmd_run(args) -> int:
    payload = _request_payload(args)
    with _client(args.server) as client:
        probe = _post(client, "/validate", payload)
        body = _post(client, "/run", payload)

    report_path = Path(args.report) if args.report else None
    trace_path = Path(args.trace) if args.trace else None
    # config [output] paths apply unless flags override them
    normalized = probe["normalized"]
    for line in normalized.splitlines():
        if line.startswith("report = ") and report_path is None:
            report_path = Path(line.split("=", 1)[1].strip())
        if line.startswith("trace = ") and trace_path is None:
            trace_path = Path(line.split("=", 1)[1].strip())
    out_dir = Path(args.out)
    report_path = report_path or out_dir / "report.json"
    trace_path = trace_path or out_dir / "trace.csv"

    try:
        report_path.parent.mkdir(parents=True, exist_ok=True)
        trace_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(json.dumps(body["report"], indent=2) + "\n")
        with open(trace_path, "w") as fh:
            fh.write("i,theta,ci_low,ci_high\n")
            for row in body["trace"]:
                fh.write(
                    f"{row['i']},{row['theta']:.6g},{row['ci_low']:.6g},{row['ci_high']:.6g}\n"
                )
    except OSError as exc:
        raise _CliFailure("io", str(exc))

    print(body["summary"])
    print(f"report: {report_path}")
    print(f"trace:  {trace_path}")
    return 0


def _cmd_validate(args) -> int:
    payload = _request_payload(args)
    with _client(args.server) as client:
        body = _post(client, "/validate", payload)
    sys.stdout.write(body["normalized"])
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_serve(args)
    except _CliFailure as failure:
        print(f"error[{failure.category}]: {failure.message}", file=sys.stderr)
        return EXIT_CODES.get(failure.category, 1)
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]


if __name__ == "__main__":
    sys.exit(main())
