"""Content-addressed result cache with atomic writes.

Keys are SHA-256 of (kind, group hash, canonical parameter JSON).  A corrupted
or unreadable file is a miss and gets overwritten; an unwritable directory
degrades to in-memory caching with a warning.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import warnings
from pathlib import Path

from .records import dumps_canonical

ENV_CACHE_ROOT = "SCHOTTKYLAB_CACHE"


class Cache:
    def __init__(self, root: str | Path | None = None):
        if root is None:
            root = os.environ.get(ENV_CACHE_ROOT)
        self.root = Path(root) if root else None
        self.memory: dict[str, dict] = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(kind: str, group_hash: str, params: dict) -> str:
        blob = f"{kind}|{group_hash}|{dumps_canonical(params)}"
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def _path(self, kind: str, digest: str) -> Path:
        return self.root / kind / f"{digest}.json"

    def lookup(self, kind: str, group_hash: str, params: dict, compute):
        """Content-addressed read; on miss, compute and persist atomically."""
        digest = self.key(kind, group_hash, params)
        if digest in self.memory:
            self.hits += 1
            return self.memory[digest], True
        if self.root is not None:
            path = self._path(kind, digest)
            if path.is_file():
                try:
                    doc = json.loads(path.read_text())
                    if doc.get("_key") == digest:
                        self.memory[digest] = doc["payload"]
                        self.hits += 1
                        return doc["payload"], True
                except (json.JSONDecodeError, KeyError, OSError):
                    pass  # corrupted: recompute and overwrite
        payload = compute()
        self.misses += 1
        self.memory[digest] = payload
        if self.root is not None:
            self._persist(kind, digest, payload)
        return payload, False

    def _persist(self, kind: str, digest: str, payload) -> None:
        path = self._path(kind, digest)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            body = dumps_canonical({"_key": digest, "payload": payload})
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            try:
                with os.fdopen(fd, "w") as fh:
                    fh.write(body)
                os.replace(tmp, path)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        except OSError as exc:
            warnings.warn(f"cache unwritable ({exc}); falling back to memory",
                          RuntimeWarning, stacklevel=2)
