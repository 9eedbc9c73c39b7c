"""Seeded random streams, worker limits and content hashing."""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

__all__ = ["make_rng", "as_rng", "worker_count", "content_hash"]


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator with one independent stream per (seed, *keys)."""
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return np.random.Generator(np.random.Philox(ss))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return make_rng(0)
    return make_rng(int(rng))


def worker_count(default: int | None = None) -> int:
    """Worker cap from LIEGRAPH_THREADS, else the CPU count."""
    env = os.environ.get("LIEGRAPH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return default if default is not None else max(1, os.cpu_count() or 1)


def content_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
