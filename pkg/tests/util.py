"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np

from immunet.graph import ProbGraph

P_CHOICES = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)


def random_instance(
    rng: np.random.Generator,
    n_range: tuple[int, int] = (6, 8),
    m_range: tuple[int, int] = (6, 12),
    p_choices: tuple[float, ...] = P_CHOICES,
    seeds: tuple[int, ...] = (0,),
) -> ProbGraph:
    """Small random directed graph with probabilities from a fixed menu."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    m = int(rng.integers(m_range[0], min(m_range[1], len(pairs)) + 1))
    idx = rng.choice(len(pairs), size=m, replace=False)
    arcs = [
        (pairs[i][0], pairs[i][1], float(rng.choice(p_choices))) for i in sorted(idx)
    ]
    return ProbGraph(n, arcs, seeds=seeds)


def closure_reachable(g: ProbGraph, live: np.ndarray, removed=()) -> set[int]:
    """Reachability oracle via boolean adjacency closure (independent of BFS)."""
    removed = set(removed)
    adj = np.zeros((g.n, g.n), dtype=bool)
    for i, (u, v) in enumerate(zip(g.src, g.dst)):
        if live[i] and u not in removed and v not in removed:
            adj[u, v] = True
    reach = np.zeros(g.n, dtype=bool)
    for s in g.seeds:
        if s not in removed:
            reach[s] = True
    for _ in range(g.n):
        reach = reach | (reach[:, None] & adj).any(axis=0)
    return {int(u) for u in np.nonzero(reach)[0]}
