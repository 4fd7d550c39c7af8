"""Content-addressed blob storage shared by the workflow engine and services.

Blobs are immutable and addressed by the lowercase hex SHA-256 of their
bytes. Layout on disk: ``<root>/<bucket>/<first-2-hex>/<digest>`` with a
``.meta`` sidecar holding media type and creation time. Writes go to a temp
name in the same directory and are atomically renamed, so a crash never
leaves a partial blob under its final name.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import CorruptionError, InvalidBucketError, NotFoundError, StorageIOError

BUCKETS = ("datasets", "models", "artifacts")

_DIGEST_RE = re.compile(r"^[0-9a-f]{64}$")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


@dataclass(frozen=True)
class Artifact:
    digest: str
    bucket: str
    size_bytes: int
    created_at: str
    media_type: str

    def to_payload(self) -> dict:
        return {
            "digest": self.digest,
            "bucket": self.bucket,
            "size_bytes": self.size_bytes,
            "created_at": self.created_at,
            "media_type": self.media_type,
        }


class ObjectStore:
    """Filesystem-backed store; safe for concurrent puts/gets via atomic rename."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for bucket in BUCKETS:
            (self.root / bucket).mkdir(parents=True, exist_ok=True)

    def _check_bucket(self, bucket: str) -> None:
        if bucket not in BUCKETS:
            raise InvalidBucketError(f"unknown bucket {bucket!r}; expected one of {list(BUCKETS)}")

    def _blob_path(self, bucket: str, digest: str) -> Path:
        return self.root / bucket / digest[:2] / digest

    def _meta_path(self, bucket: str, digest: str) -> Path:
        return self._blob_path(bucket, digest).with_name(digest + ".meta")

    @staticmethod
    def _atomic_write(path: Path, data: bytes) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except OSError as exc:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise StorageIOError(f"failed writing {path}: {exc}") from exc

    def put(self, bucket: str, data: bytes, media_type: str) -> Artifact:
        """Store bytes; idempotent for identical content (one copy per digest)."""
        self._check_bucket(bucket)
        digest = sha256_hex(data)
        blob_path = self._blob_path(bucket, digest)
        meta_path = self._meta_path(bucket, digest)
        if blob_path.exists() and meta_path.exists():
            return self._artifact_from_meta(bucket, digest)
        if not blob_path.exists():
            self._atomic_write(blob_path, data)
        meta = {
            "media_type": media_type,
            "created_at": utc_now_iso(),
            "size_bytes": len(data),
        }
        self._atomic_write(meta_path, json.dumps(meta, sort_keys=True).encode())
        return Artifact(digest, bucket, len(data), meta["created_at"], media_type)

    def _artifact_from_meta(self, bucket: str, digest: str) -> Artifact:
        meta = json.loads(self._meta_path(bucket, digest).read_bytes())
        return Artifact(digest, bucket, meta["size_bytes"], meta["created_at"], meta["media_type"])

    def get(self, bucket: str, digest: str) -> bytes:
        """Read bytes; integrity against the digest is verified on every read."""
        self._check_bucket(bucket)
        if not _DIGEST_RE.match(digest):
            raise NotFoundError(f"malformed digest {digest!r}")
        path = self._blob_path(bucket, digest)
        if not path.exists():
            raise NotFoundError(f"no artifact {digest} in bucket {bucket}")
        data = path.read_bytes()
        if sha256_hex(data) != digest:
            raise CorruptionError(f"artifact {digest} in {bucket} failed integrity check")
        return data

    def exists(self, bucket: str, digest: str) -> bool:
        self._check_bucket(bucket)
        return self._blob_path(bucket, digest).exists()

    def list(self, bucket: str) -> list[Artifact]:
        """All artifacts in the bucket, sorted by created_at then digest."""
        self._check_bucket(bucket)
        found = []
        for blob_path in (self.root / bucket).glob("??/*"):
            name = blob_path.name
            if not _DIGEST_RE.match(name):
                continue
            meta_path = self._meta_path(bucket, name)
            if not meta_path.exists():
                # crash window between blob and meta rename: heal with defaults
                size = blob_path.stat().st_size
                meta = {
                    "media_type": "application/octet-stream",
                    "created_at": utc_now_iso(),
                    "size_bytes": size,
                }
                self._atomic_write(meta_path, json.dumps(meta, sort_keys=True).encode())
            found.append(self._artifact_from_meta(bucket, name))
        found.sort(key=lambda a: (a.created_at, a.digest))
        return found

    def delete(self, bucket: str, digest: str) -> None:
        """Remove a blob; reference checks are the caller layer's job."""
        self._check_bucket(bucket)
        path = self._blob_path(bucket, digest)
        if not path.exists():
            raise NotFoundError(f"no artifact {digest} in bucket {bucket}")
        path.unlink()
        meta_path = self._meta_path(bucket, digest)
        if meta_path.exists():
            meta_path.unlink()
