"""Effective degrees and computable approximation factors.

The effective degree of a node, ``lambda_u = (1 - p_u)^(-d_u/2) - 1`` with
``p_u`` its largest incident transmission probability and ``d_u`` its number
of distinct neighbors, bounds how strongly the saved-utility objective can
deviate from submodularity around that node. Through
``phi(lambda) = lambda / (e^lambda - 1)`` it yields a data-dependent
guarantee for greedy selection: with budget ``k`` and ``n_s`` nodes above a
threshold ``lambda'`` that are forced into the solution first, greedy achieves
at least ``1 - exp(-(1 - n_s/k) * phi(lambda'))`` of the optimum.

``d_u/2`` is used as a real exponent (no integer rounding). Nodes with
``p_u = 1`` get ``lambda = +inf``, which makes their contribution to any
factor vacuous (``phi = 0``) rather than an error.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .cascade import IC, CascadeModel
from .errors import ConfigError, DomainError
from .graph import ProbGraph

__all__ = [
    "phi",
    "effective_degree_ic",
    "effective_degree_sir",
    "effective_degree_link",
    "effective_degrees",
    "link_effective_degrees",
    "EffectiveDegreeProfile",
    "BoundReport",
    "optimize_threshold",
    "factor_vs_r0",
    "household_lambda",
    "household_factor",
    "household_profile",
    "recommended_replicates",
]


def phi(lam):
    """The submodularity-recovery coefficient ``lam / (e^lam - 1)``.

    Strictly decreasing from ``phi(0) = 1`` (the limit) to ``phi(inf) = 0``.
    Accepts scalars or arrays; negative input is a domain error.
    """
    arr = np.asarray(lam, dtype=np.float64)
    if np.any(arr < 0):
        raise DomainError("phi is defined for nonnegative arguments only")
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(arr == 0.0, 1.0, arr / np.expm1(arr))
    out = np.where(np.isinf(arr), 0.0, out)
    if np.isscalar(lam) or arr.ndim == 0:
        return float(out)
    return out


def _lambda_ic(p_max: np.ndarray, degree: np.ndarray) -> np.ndarray:
    """(1 - p)^(-d/2) - 1, with +inf at p = 1 (d > 0) and 0 at d = 0."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lam = np.expm1(-0.5 * degree * np.log1p(-p_max))
    lam = np.where(degree == 0, 0.0, lam)
    lam = np.where((p_max >= 1.0) & (degree > 0), np.inf, lam)
    return lam


def _lambda_sir(p_max: np.ndarray, degree: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Geometric-series effective degree for recovery rate gamma.

    With ``B = (1-p)^(-d/2)``: ``gamma*B / (1 - (1-gamma)*B) - 1``, which
    equals ``lambda_ic / (1 - (1-gamma)*B)``; +inf once ``(1-gamma)*B >= 1``
    (divergent attempt series).
    """
    lam_ic = _lambda_ic(p_max, degree)
    denom = 1.0 - (1.0 - gamma) * (lam_ic + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(denom > 0, lam_ic / denom, np.inf)
    lam = np.where(np.isinf(lam_ic), np.inf, lam)
    lam = np.where(degree == 0, 0.0, lam)
    return lam


@dataclass(frozen=True)
class EffectiveDegreeProfile:
    """Per-node (or per-arc, for link immunization) effective degrees.

    ``nodes[i]`` identifies what ``lambdas[i]`` refers to; +inf entries are
    allowed and simply make the bound at that entry vacuous.
    """

    lambdas: np.ndarray
    model: str                    # "ic", "sir", or "link"
    nodes: np.ndarray | None = None

    def sorted_desc(self) -> np.ndarray:
        return np.sort(self.lambdas)[::-1]

    def max(self) -> float:
        return float(np.max(self.lambdas, initial=0.0))


def _degree_and_pmax(g: ProbGraph, nodes: np.ndarray | None):
    """Distinct-neighbor counts (undirected view) and max incident probability.

    Noncandidate arcs (utility collectors and similar plumbing) are skipped.
    On derived graphs carrying origin labels, neighbors are deduplicated by
    the node they represent, so e.g. two layer copies of the same contact
    count once.
    """
    cand = ~g.noncandidate
    src, dst, p = g.src[cand], g.dst[cand], g.p[cand]
    label = np.arange(g.n) if g.origin is None else g.origin
    endpoints = np.concatenate([src, dst])
    neighbor = np.concatenate([label[dst], label[src]])
    if len(endpoints):
        pairs = np.unique(np.stack([endpoints, neighbor], axis=1), axis=0)
        degree = np.bincount(pairs[:, 0], minlength=g.n).astype(np.float64)
    else:
        degree = np.zeros(g.n)
    p_max = np.zeros(g.n)
    np.maximum.at(p_max, src, p)
    np.maximum.at(p_max, dst, p)
    if nodes is not None:
        return degree[nodes], p_max[nodes]
    return degree, p_max


def effective_degrees(
    g: ProbGraph, model: CascadeModel = IC, nodes: Iterable[int] | None = None
) -> EffectiveDegreeProfile:
    """Effective-degree profile of ``g`` under the given cascade model.

    ``nodes`` restricts the profile (e.g. to immunization candidates).
    """
    node_arr = None if nodes is None else np.fromiter((int(u) for u in nodes), dtype=np.int64)
    degree, p_max = _degree_and_pmax(g, node_arr)
    if model.kind == "ic":
        lam = _lambda_ic(p_max, degree)
        return EffectiveDegreeProfile(lam, "ic", node_arr)
    gamma = model.gamma_array(g.n)
    gamma = gamma if node_arr is None else gamma[node_arr]
    lam = _lambda_sir(p_max, degree, gamma)
    return EffectiveDegreeProfile(lam, "sir", node_arr)


def effective_degree_ic(g: ProbGraph, u: int) -> float:
    """Effective degree of one node: ``(1 - p_u)^(-d_u/2) - 1``."""
    degree, p_max = _degree_and_pmax(g, np.array([u], dtype=np.int64))
    return float(_lambda_ic(p_max, degree)[0])


def effective_degree_sir(g: ProbGraph, u: int, gamma: float) -> float:
    """Effective degree of one node under SIR with recovery rate ``gamma``."""
    model = CascadeModel("sir", gamma)
    degree, p_max = _degree_and_pmax(g, np.array([u], dtype=np.int64))
    return float(_lambda_sir(p_max, degree, np.array([gamma]))[0])


def effective_degree_link(p: float) -> float:
    """Effective degree of an immunizable link: ``p / (1 - p)``."""
    if not 0 <= p <= 1:
        raise DomainError(f"link probability {p} outside [0, 1]")
    if p == 1.0:
        return math.inf
    return p / (1.0 - p)


def link_effective_degrees(g: ProbGraph) -> EffectiveDegreeProfile:
    """Per-arc link profile, aligned with the candidates returned by
    :func:`immunet.graph.split_for_link_immunization`."""
    with np.errstate(divide="ignore"):
        lam = np.where(g.p < 1.0, g.p / (1.0 - g.p), np.inf)
    return EffectiveDegreeProfile(lam, "link", np.arange(g.num_arcs))


# ---------------------------------------------------------------------------
# threshold optimization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """Best guaranteed approximation factor for a profile at budget ``k``.

    ``table`` holds one row per threshold choice ``i`` (the i-th largest
    effective degree): ``(i, lambda_prime, n_s, factor)`` where ``n_s = i-1``
    nodes exceed the threshold and must be pre-selected. ``factor`` is the
    maximum over the table. ``bicriteria`` trades budget for quality: spend
    ``(1 + n_s/k) * k`` selections for factor ``1 - exp(-phi(lambda'))``.
    """

    lambda_prime: float
    n_s: int
    k: int
    factor: float
    bicriteria: tuple[float, float]
    table: tuple[tuple[int, float, int, float], ...]

    def to_csv(self, f: IO[str]) -> None:
        writer = csv.writer(f)
        writer.writerow(["i", "lambda_prime", "n_s", "factor"])
        for i, lam, n_s, factor in self.table:
            writer.writerow([i, repr(lam), n_s, repr(factor)])
        writer.writerow(["best", repr(self.lambda_prime), self.n_s, repr(self.factor)])


def optimize_threshold(profile: EffectiveDegreeProfile, k: int) -> BoundReport:
    """Scan thresholds down the sorted profile and keep the best factor.

    Trying the i-th largest effective degree as the threshold pre-selects the
    ``i-1`` nodes above it and leaves ``k-i+1`` greedy picks, for a factor of
    ``1 - exp(-(1 - (i-1)/k) * phi(lambda_i))``. Ties prefer the smallest
    ``n_s``.
    """
    if k < 1:
        raise ConfigError(f"budget must be >= 1, got {k}")
    lams = profile.sorted_desc()
    if len(lams) == 0:
        raise ConfigError("cannot optimize over an empty profile")
    rows = []
    best = None
    for i in range(1, min(k, len(lams)) + 1):
        lam_prime = float(lams[i - 1])
        n_s = i - 1
        factor = 1.0 - math.exp(-(1.0 - n_s / k) * phi(lam_prime))
        rows.append((i, lam_prime, n_s, factor))
        if best is None or factor > best[3]:
            best = rows[-1]
    assert best is not None
    _, lam_prime, n_s, factor = best
    bicriteria = (1.0 + n_s / k, 1.0 - math.exp(-phi(lam_prime)))
    return BoundReport(lam_prime, n_s, k, factor, bicriteria, tuple(rows))


def factor_vs_r0(dbar: float, s: float, r0: float) -> float:
    """Closed-form factor for a graph of average degree ``dbar``, maximum
    degree ``s * dbar``, and uniform edge probability ``r0 / dbar``.

    Decreasing in both ``r0`` and ``s``; approaches ``1 - 1/e`` as ``r0 -> 0``.
    """
    if dbar <= 0:
        raise DomainError(f"average degree must be positive, got {dbar}")
    if s < 1:
        raise DomainError(f"degree skew must be >= 1, got {s}")
    if r0 < 0 or r0 >= dbar:
        raise DomainError(f"r0 must lie in [0, dbar); got r0={r0}, dbar={dbar}")
    lam = float(_lambda_ic(np.array([r0 / dbar]), np.array([s * dbar]))[0])
    return 1.0 - math.exp(-phi(lam))


# ---------------------------------------------------------------------------
# households
# ---------------------------------------------------------------------------


def household_lambda(p: float, external_degree: float) -> float:
    """Effective degree of a household with ``external_degree`` weak incident
    edges of probability at most ``p``: ``(1 - p)^(-d_H/2) - 1``."""
    if not 0 <= p <= 1:
        raise DomainError(f"probability {p} outside [0, 1]")
    if external_degree < 0:
        raise DomainError(f"external degree must be nonnegative, got {external_degree}")
    return float(_lambda_ic(np.array([p]), np.array([external_degree]))[0])


def household_factor(lam: float, a: int) -> float:
    """Guaranteed factor when the budget buys ``k/a`` whole households of size
    ``a``: ``1 - exp(-phi(lam)/a)``, at most ``1 - exp(-1/a)``."""
    if a < 1:
        raise DomainError(f"household size must be >= 1, got {a}")
    if lam < 0:
        raise DomainError(f"household effective degree must be nonnegative, got {lam}")
    return 1.0 - math.exp(-phi(lam) / a)


def household_profile(g: ProbGraph, p_threshold: float):
    """Partition nodes into households (connected components of the subgraph of
    arcs with ``p > p_threshold``) and compute each household's effective degree
    from its external edges.

    Returns ``(households, lambdas)`` with households as sorted node tuples.
    """
    parent = list(range(g.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, p in zip(g.src, g.dst, g.p):
        if p > p_threshold:
            ru, rv = find(int(u)), find(int(v))
            if ru != rv:
                parent[ru] = rv

    comp: dict[int, list[int]] = {}
    for u in range(g.n):
        comp.setdefault(find(u), []).append(u)
    households = [tuple(sorted(members)) for members in comp.values()]
    households.sort()

    index = {}
    for h, members in enumerate(households):
        for u in members:
            index[u] = h
    external_edges = np.zeros(len(households))
    external_pmax = np.zeros(len(households))
    seen = set()
    for u, v, p in zip(g.src, g.dst, g.p):
        u, v = int(u), int(v)
        if p > p_threshold or index[u] == index[v]:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        for h in (index[u], index[v]):
            external_edges[h] += 1
            external_pmax[h] = max(external_pmax[h], float(p))
    lams = _lambda_ic(external_pmax, external_edges)
    return households, lams


# ---------------------------------------------------------------------------
# sample-size guidance
# ---------------------------------------------------------------------------


def recommended_replicates(
    total_utility: float, k: int, m: int, eps_abs: float, delta: float
) -> int:
    """Replicates sufficient for every estimate in a greedy run to stay within
    ``eps_abs`` at confidence ``1 - delta``.

    A union bound over ``m * k`` evaluations of a statistic bounded by the
    total utility gives ``ceil(U^2 * ln(2mk/delta) / (2 * eps_abs^2))``.
    """
    if eps_abs <= 0:
        raise ConfigError(f"eps_abs must be positive, got {eps_abs}")
    if not 0 < delta < 1:
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    if k < 1 or m < 1:
        raise ConfigError("k and m must be >= 1")
    if total_utility < 0:
        raise ConfigError(f"total utility must be nonnegative, got {total_utility}")
    bound = total_utility**2 * math.log(2.0 * m * k / delta) / (2.0 * eps_abs**2)
    return max(1, math.ceil(bound))
