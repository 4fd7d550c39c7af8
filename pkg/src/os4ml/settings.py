"""Platform configuration: strict YAML file, overridden by OS4ML_* env vars."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import yaml

from .errors import ConfigParseError, StrictModeError

_SECTIONS = {
    "server": {"port"},
    "auth": {"token"},
    "object_store": {"root"},
    "data": {"dir"},
    "engine": {"workers"},
    "limits": {"max_upload_mb"},
}


@dataclass
class PlatformConfig:
    port: int = 8080
    host: str = "127.0.0.1"
    auth_token: str = ""
    object_store_root: str = "./data/objectstore"
    data_dir: str = "./data/platform"
    engine_workers: int | None = None
    max_upload_mb: int = 100


def _parse_file(path: Path) -> dict:
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ConfigParseError(
            f"{path}: {exc.problem}",
            line=mark.line + 1 if mark else None,
            column=mark.column + 1 if mark else None,
        ) from exc
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigParseError(f"{path}: config must be a mapping")
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise StrictModeError(f"{path}: unknown section(s) {sorted(unknown)}")
    for section, keys in _SECTIONS.items():
        body = raw.get(section) or {}
        if not isinstance(body, dict):
            raise ConfigParseError(f"{path}: section {section!r} must be a mapping")
        bad = set(body) - keys
        if bad:
            raise StrictModeError(f"{path}: unknown key(s) {sorted(bad)} in section {section!r}")
    return raw


def load_config(
    path: str | Path | None = None, env: Mapping[str, str] | None = None
) -> PlatformConfig:
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        raw = _parse_file(Path(path))

    def pick(section: str, key: str, env_name: str, default):
        value = (raw.get(section) or {}).get(key, default)
        if env_name in env:
            value = env[env_name]
        return value

    def as_int(value, name):
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigParseError(f"{name} must be an integer, got {value!r}") from None

    workers = pick("engine", "workers", "OS4ML_ENGINE_WORKERS", None)
    return PlatformConfig(
        port=as_int(pick("server", "port", "OS4ML_SERVER_PORT", 8080), "server.port"),
        auth_token=str(pick("auth", "token", "OS4ML_AUTH_TOKEN", "") or ""),
        object_store_root=str(
            pick("object_store", "root", "OS4ML_OBJECT_STORE_ROOT", "./data/objectstore")
        ),
        data_dir=str(pick("data", "dir", "OS4ML_DATA_DIR", "./data/platform")),
        engine_workers=None if workers in (None, "") else as_int(workers, "engine.workers"),
        max_upload_mb=as_int(
            pick("limits", "max_upload_mb", "OS4ML_LIMITS_MAX_UPLOAD_MB", 100),
            "limits.max_upload_mb",
        ),
    )
