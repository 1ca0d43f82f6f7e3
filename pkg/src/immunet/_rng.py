"""Deterministic random-stream derivation.

Every stochastic operation derives its generator from a master seed plus an
integer key tuple, so any unit of work (a replicate, an acceptance draw, a
greedy iteration) owns an independent stream addressable at random. Results
are therefore bit-identical regardless of execution order or parallelism.

Key tag constants keep the different purposes in disjoint namespaces.
"""

from __future__ import annotations

import numpy as np

# first key element: what the stream is for
LIVE = 0       # live-edge coin flips, keyed (LIVE, replicate)
ACCEPT = 1     # vaccine-acceptance draws, keyed (ACCEPT, replicate, group, instance)
ITERATION = 2  # per-iteration master seeds inside greedy
FINAL = 3      # final post-selection estimate


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 generator for (master_seed, key)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=key))
    )


def derive_seed(master_seed: int, *key: int) -> int:
    """Collapse (master_seed, key) into a fresh 64-bit master seed."""
    ss = np.random.SeedSequence(master_seed, spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])
