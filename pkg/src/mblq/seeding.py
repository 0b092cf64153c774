"""Deterministic random-stream derivation for parallel sweeps.

Every worker stream is a pure function of (master_seed, index path): the path
is fed to numpy's SeedSequence as a spawn key, so the stream a realization
receives depends only on its indices, never on scheduling order or worker
count.  Re-running any subset of realizations reproduces their draws exactly.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seed_sequence", "derive_rng", "stream_key_hex"]


def derive_seed_sequence(master_seed: int, *path: int) -> np.random.SeedSequence:
    """SeedSequence for the stream addressed by (master_seed, *path)."""
    return np.random.SeedSequence(master_seed, spawn_key=tuple(int(p) for p in path))


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream addressed by (master_seed, *path)."""
    return np.random.default_rng(derive_seed_sequence(master_seed, *path))


def stream_key_hex(master_seed: int, *path: int) -> str:
    """Hex digest of the derived 128-bit stream state, for run manifests."""
    seq = derive_seed_sequence(master_seed, *path)
    words = seq.generate_state(4, dtype=np.uint32)
    return "".join(f"{w:08x}" for w in words)
