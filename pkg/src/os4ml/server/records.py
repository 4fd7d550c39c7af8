"""Durable domain records: one JSON document per id, written atomically.

No external database, honoring self-hosting: every record survives a
process kill because the rename is the commit point.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from pathlib import Path

from ..errors import NotFoundError


class DocumentStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, doc_id: str) -> Path:
        return self.root / f"{doc_id}.json"

    def put(self, doc_id: str, payload: dict) -> None:
        data = json.dumps(payload, sort_keys=True, indent=1).encode()
        with self._lock:
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, self._path(doc_id))

    def get(self, doc_id: str) -> dict:
        path = self._path(doc_id)
        if not path.exists():
            raise NotFoundError(f"no record {doc_id}")
        return json.loads(path.read_bytes())

    def exists(self, doc_id: str) -> bool:
        return self._path(doc_id).exists()

    def delete(self, doc_id: str) -> None:
        path = self._path(doc_id)
        if not path.exists():
            raise NotFoundError(f"no record {doc_id}")
        path.unlink()

    def list(self) -> list[dict]:
        docs = [
            json.loads(p.read_bytes())
            for p in self.root.glob("*.json")
        ]
        docs.sort(key=lambda d: (d.get("created_at", ""), d.get("id", "")))
        return docs
