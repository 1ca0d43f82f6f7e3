"""Step-by-step SIR simulator, kept independent of the live-edge machinery.

Used as the reference when checking that live-edge SIR sampling reproduces the
per-node infection probabilities of the classic discrete-time process: every
step, each infected node attempts each susceptible neighbor once with the arc
probability, then recovers with probability gamma.
"""

from __future__ import annotations

import numpy as np

from immunet.graph import ProbGraph


def simulate_sir_once(g: ProbGraph, gamma: float, rng: np.random.Generator) -> np.ndarray:
    """One run; returns the bool array of ever-infected nodes."""
    infected = np.zeros(g.n, dtype=bool)
    active = list(g.seeds)
    for s in active:
        infected[s] = True
    out = [[] for _ in range(g.n)]
    for u, v, p in zip(g.src, g.dst, g.p):
        out[int(u)].append((int(v), float(p)))

    while active:
        next_active = []
        for u in active:
            for v, p in out[u]:
                if not infected[v] and rng.random() < p:
                    infected[v] = True
                    next_active.append(v)
            if rng.random() >= gamma:   # stays active for another round
                next_active.append(u)
        active = next_active
    return infected


def infection_probabilities(
    g: ProbGraph, gamma: float, replicates: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-node infection probability estimates and their standard errors."""
    rng = np.random.default_rng(seed)
    counts = np.zeros(g.n)
    for _ in range(replicates):
        counts += simulate_sir_once(g, gamma, rng)
    p = counts / replicates
    stderr = np.sqrt(p * (1.0 - p) / replicates)
    return p, stderr
