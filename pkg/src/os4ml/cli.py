"""Single-command bootstrap: ``os4ml up`` starts the whole platform in one
process; ``os4ml demo`` additionally preloads the bundled pet-adoption
dataset."""

from __future__ import annotations

import argparse
import secrets
import socket
import sys

import uvicorn

from .errors import PlatformError
from .server.app import create_app
from .server.service import PlatformServices
from .settings import load_config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="os4ml", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("up", "start the platform"),
        ("demo", "start the platform with the demo dataset preloaded"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", default=None, help="path to a YAML config file")
        cmd.add_argument("--port", type=int, default=None, help="override server.port")
        cmd.add_argument("--host", default=None, help="bind address (default 127.0.0.1)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except PlatformError as exc:
        print(f"config error: {exc.message}", file=sys.stderr)
        return 2
    if args.port is not None:
        config.port = args.port
    if args.host is not None:
        config.host = args.host
    if not config.auth_token:
        config.auth_token = secrets.token_urlsafe(24)
        print(f"generated API token: {config.auth_token}")

    try:
        services = PlatformServices(config)
    except (PlatformError, OSError) as exc:
        print(f"startup failed: {exc}", file=sys.stderr)
        return 2
    if args.command == "demo":
        bag = services.load_demo()
        print(f"demo databag loaded: {bag['id']} ({bag['name']})")

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((config.host, config.port))
        sock.listen(128)
    except OSError as exc:
        print(f"cannot bind {config.host}:{config.port}: {exc}", file=sys.stderr)
        services.close()
        return 2

    app = create_app(services)
    print(f"listening on http://{config.host}:{config.port}", flush=True)
    server = uvicorn.Server(
        uvicorn.Config(app, log_level="warning", access_log=False)
    )
    try:
        server.run(sockets=[sock])
    finally:
        services.close()
        sock.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
