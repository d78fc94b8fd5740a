"""Disk-based TTL cache for oracle integrations."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from pathlib import Path

from . import __version__
from .config import CACHE_DIR, TTL_ORACLE
from .oracle import IntegratorConfig, PropagationResult
from .spin import ModelParams

log = logging.getLogger(__name__)

NS_ORACLE = "oracle"


def _key_hash(key: str) -> str:
    return hashlib.sha256(key.encode()).hexdigest()[:16]


def oracle_key(p: ModelParams, t: float, cfg: IntegratorConfig) -> str:
    """Stable key over everything an integration depends on."""
    payload = {"version": __version__, "params": p.to_dict(), "t": t, "integrator": cfg.to_dict()}
    return json.dumps(payload, sort_keys=True, default=repr)


class OracleCache:
    """JSON files under ``base_dir/<namespace>/``, one per key, with TTL expiry."""

    def __init__(self, base_dir: Path | None = None, enabled: bool = True):
        self.base_dir = base_dir or CACHE_DIR
        self.enabled = enabled
        self._hits = 0
        self._misses = 0
        if enabled:
            self.base_dir.mkdir(parents=True, exist_ok=True)

    def get(self, namespace: str, key: str) -> dict | None:
        if not self.enabled:
            return None
        path = self._path(namespace, key)
        if not path.exists():
            self._misses += 1
            return None
        try:
            entry = json.loads(path.read_text())
            if time.time() > entry.get("expires_at", 0) or entry.get("key") != key:
                path.unlink(missing_ok=True)
                self._misses += 1
                return None
            self._hits += 1
            return entry["data"]
        except (json.JSONDecodeError, KeyError):
            path.unlink(missing_ok=True)
            self._misses += 1
            return None

    def set(self, namespace: str, key: str, data: dict, ttl: int = TTL_ORACLE) -> None:
        if not self.enabled:
            return
        path = self._path(namespace, key)
        path.parent.mkdir(parents=True, exist_ok=True)
        entry = {"key": key, "expires_at": time.time() + ttl, "data": data}
        path.write_text(json.dumps(entry))

    def get_propagation(self, p: ModelParams, t: float, cfg: IntegratorConfig) -> PropagationResult | None:
        data = self.get(NS_ORACLE, oracle_key(p, t, cfg))
        if data is None:
            return None
        log.debug("oracle cache hit at %s t=%g", p.to_dict(), t)
        return PropagationResult.from_dict(data)

    def set_propagation(
        self, p: ModelParams, t: float, cfg: IntegratorConfig, result: PropagationResult
    ) -> None:
        self.set(NS_ORACLE, oracle_key(p, t, cfg), result.to_dict())

    def invalidate(self, namespace: str | None = None) -> None:
        if not self.base_dir.exists():
            return
        dirs = [self.base_dir / namespace] if namespace else [d for d in self.base_dir.iterdir() if d.is_dir()]
        for ns_dir in dirs:
            for f in ns_dir.glob("*.json"):
                f.unlink(missing_ok=True)

    def stats(self) -> dict:
        return {
            "entries": sum(1 for _ in self.base_dir.rglob("*.json")) if self.base_dir.exists() else 0,
            "hits": self._hits,
            "misses": self._misses,
        }

    def _path(self, namespace: str, key: str) -> Path:
        return self.base_dir / namespace / f"{_key_hash(key)}.json"
