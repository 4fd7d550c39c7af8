"""Helpers for tests that drive the real server process over HTTP."""

from __future__ import annotations

import socket
import subprocess
import sys
import time


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def write_config(tmp_path, port, token="cli-token", workers=2) -> str:
    tmp_path.mkdir(parents=True, exist_ok=True)
    path = tmp_path / "os4ml.yaml"
    path.write_text(
        f"server:\n  port: {port}\n"
        f"auth:\n  token: {token}\n"
        f"object_store:\n  root: {tmp_path / 'objectstore'}\n"
        f"data:\n  dir: {tmp_path / 'platform'}\n"
        f"engine:\n  workers: {workers}\n"
    )
    return str(path)


def start_server(args, timeout=20.0) -> subprocess.Popen:
    proc = subprocess.Popen(
        [sys.executable, "-m", "os4ml", *args],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        line = proc.stdout.readline()
        if "listening on" in line:
            return proc
        if proc.poll() is not None:
            raise AssertionError(f"server exited early: {proc.stdout.read()}")
    proc.kill()
    raise AssertionError("server did not report a listen address in time")


def stop(proc: subprocess.Popen):
    proc.terminate()
    try:
        proc.wait(timeout=10)
    except subprocess.TimeoutExpired:
        proc.kill()
