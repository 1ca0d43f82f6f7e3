"""Probabilistic contact graphs: model type, random generators, transforms, file I/O.

A :class:`ProbGraph` is a directed graph on dense node ids ``0..n-1`` where
each arc carries an independent transmission probability, each node carries a
nonnegative utility (the value of keeping it uninfected), and a fixed set of
seed nodes is initially infected. Undirected inputs are stored expanded to two
arcs with independent coins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import networkx as nx
import numpy as np

from .errors import (
    ConfigError,
    GraphError,
    GraphFormatError,
    InvalidProbabilityError,
)

__all__ = [
    "ProbGraph",
    "GenConfig",
    "LayeredSpec",
    "HouseholdSpec",
    "generate",
    "build_layered",
    "split_for_link_immunization",
    "build_households",
    "thin_by_susceptibility",
    "load",
    "save",
]

# per-arc, per-step probability override: (u, v, step, base_p) -> p
TemporalRates = Callable[[int, int, int, float], float]


class ProbGraph:
    """Immutable directed graph with per-arc transmission probabilities.

    Attributes exposed as read-only numpy arrays: ``src``, ``dst``, ``p``
    (aligned per arc), ``utility`` (per node). ``seeds`` is a frozenset of
    initially infected nodes. ``noncandidate`` is a per-arc bool mask marking
    plumbing arcs (e.g. utility-collector arcs) that must not contribute to
    effective-degree computations. ``origin``, when present, maps each node of
    a derived graph (layered copies) back to the node it represents, so degree
    counting can deduplicate copies of the same neighbor.

    Instances never mutate after construction and are safe to share across
    threads.
    """

    def __init__(
        self,
        n: int,
        arcs: Iterable[tuple[int, int, float]],
        *,
        utility: Sequence[float] | np.ndarray | None = None,
        seeds: Iterable[int] = (),
        directed: bool = True,
        noncandidate_arcs: Iterable[int] = (),
        origin: Sequence[int] | np.ndarray | None = None,
    ):
        if n < 0:
            raise GraphError(f"node count must be nonnegative, got {n}")
        arcs = list(arcs)
        m = len(arcs)
        self.n = int(n)
        self.src = np.array([a[0] for a in arcs], dtype=np.int64)
        self.dst = np.array([a[1] for a in arcs], dtype=np.int64)
        self.p = np.array([a[2] for a in arcs], dtype=np.float64)

        if m:
            if self.src.min(initial=0) < 0 or self.dst.min(initial=0) < 0:
                raise GraphError("arc endpoints must be nonnegative node ids")
            if self.src.max(initial=-1) >= n or self.dst.max(initial=-1) >= n:
                raise GraphError("arc endpoint exceeds node count")
            if np.any(self.src == self.dst):
                bad = int(self.src[self.src == self.dst][0])
                raise GraphError(f"self-loop at node {bad}")
            pairs = self.src * n + self.dst
            if len(np.unique(pairs)) != m:
                raise GraphError("duplicate arcs present")
        if np.any(~np.isfinite(self.p)) or np.any(self.p < 0) or np.any(self.p > 1):
            raise InvalidProbabilityError("arc probabilities must lie in [0, 1]")

        if utility is None:
            self.utility = np.ones(n, dtype=np.float64)
        else:
            self.utility = np.asarray(utility, dtype=np.float64).copy()
            if self.utility.shape != (n,):
                raise GraphError(f"utility must have length {n}")
            if np.any(~np.isfinite(self.utility)) or np.any(self.utility < 0):
                raise GraphError("utilities must be finite and nonnegative")

        self.seeds = frozenset(int(s) for s in seeds)
        if any(s < 0 or s >= n for s in self.seeds):
            raise GraphError("seed outside node range")

        self.directed = bool(directed)
        self.noncandidate = np.zeros(m, dtype=bool)
        for i in noncandidate_arcs:
            if i < 0 or i >= m:
                raise GraphError(f"noncandidate arc index {i} out of range")
            self.noncandidate[i] = True

        if origin is None:
            self.origin = None
        else:
            self.origin = np.asarray(origin, dtype=np.int64).copy()
            if self.origin.shape != (n,):
                raise GraphError(f"origin must have length {n}")

        if not self.directed:
            self._check_symmetric()

        for a in (self.src, self.dst, self.p, self.utility, self.noncandidate):
            a.setflags(write=False)
        if self.origin is not None:
            self.origin.setflags(write=False)
        self._out_indptr: np.ndarray | None = None
        self._out_order: np.ndarray | None = None

    def _check_symmetric(self) -> None:
        fwd = {(int(u), int(v)): float(p) for u, v, p in zip(self.src, self.dst, self.p)}
        for (u, v), p in fwd.items():
            if fwd.get((v, u)) != p:
                raise GraphError(
                    f"undirected graph requires symmetric arcs with equal p; "
                    f"mismatch at ({u}, {v})"
                )

    @classmethod
    def undirected(
        cls,
        n: int,
        edges: Iterable[tuple[int, int, float]],
        *,
        utility: Sequence[float] | None = None,
        seeds: Iterable[int] = (),
    ) -> "ProbGraph":
        """Build from undirected edges; each expands to two arcs with independent coins."""
        arcs: list[tuple[int, int, float]] = []
        for u, v, p in edges:
            arcs.append((u, v, p))
            arcs.append((v, u, p))
        return cls(n, arcs, utility=utility, seeds=seeds, directed=False)

    # -- basic accessors ---------------------------------------------------

    @property
    def num_arcs(self) -> int:
        return len(self.src)

    def arc_list(self) -> list[tuple[int, int, float]]:
        return [(int(u), int(v), float(p)) for u, v, p in zip(self.src, self.dst, self.p)]

    @property
    def total_utility(self) -> float:
        return float(self.utility.sum())

    def out_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, arc_index) arrays grouping arc indices by source node."""
        if self._out_indptr is None:
            order = np.argsort(self.src, kind="stable")
            counts = np.bincount(self.src, minlength=self.n)
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            self._out_order = order
            self._out_indptr = indptr
        return self._out_indptr, self._out_order  # type: ignore[return-value]

    def seed_array(self) -> np.ndarray:
        return np.fromiter(sorted(self.seeds), dtype=np.int64, count=len(self.seeds))

    # -- derived copies ----------------------------------------------------

    def with_probabilities(self, p: Sequence[float] | np.ndarray) -> "ProbGraph":
        """Same topology with replaced arc probabilities (cheap: skips topology checks)."""
        p = np.asarray(p, dtype=np.float64)
        if p.shape != self.p.shape:
            raise GraphError("probability array length mismatch")
        if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise InvalidProbabilityError("arc probabilities must lie in [0, 1]")
        g = object.__new__(ProbGraph)
        g.n = self.n
        g.src, g.dst = self.src, self.dst
        g.p = p.copy()
        g.p.setflags(write=False)
        g.utility, g.seeds, g.directed = self.utility, self.seeds, self.directed
        g.noncandidate, g.origin = self.noncandidate, self.origin
        g._out_indptr, g._out_order = self._out_indptr, self._out_order
        return g

    def with_uniform_p(self, p: float) -> "ProbGraph":
        return self.with_probabilities(np.full(self.num_arcs, p))

    def with_seeds(self, seeds: Iterable[int]) -> "ProbGraph":
        g = self.with_probabilities(self.p)
        g.seeds = frozenset(int(s) for s in seeds)
        if any(s < 0 or s >= g.n for s in g.seeds):
            raise GraphError("seed outside node range")
        return g

    def structurally_equal(self, other: "ProbGraph") -> bool:
        """Equality of (n, directedness, seeds, utilities, arc multiset with p)."""
        if self.n != other.n or self.directed != other.directed:
            return False
        if self.seeds != other.seeds:
            return False
        if not np.array_equal(self.utility, other.utility):
            return False
        return sorted(self.arc_list()) == sorted(other.arc_list())

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"ProbGraph(n={self.n}, arcs={self.num_arcs}, {kind}, seeds={len(self.seeds)})"


# ---------------------------------------------------------------------------
# random generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenConfig:
    """Random-graph ensemble configuration.

    ``avg_degree`` is the target mean degree; every edge gets the uniform
    transmission probability ``r0 / avg_degree`` so that a node's expected
    number of secondary infections in a fully susceptible population is
    ``r0``.
    """

    model: str            # "er", "ws", or "ba"
    n: int
    avg_degree: float
    r0: float
    rng_seed: int = 0
    ws_beta: float = 0.1            # WS rewiring probability
    ba_attach: int | None = None    # BA attachment count; default round(avg_degree/2)


def generate(config: GenConfig) -> ProbGraph:
    """Generate an ER/WS/BA graph with uniform p = r0/avg_degree.

    Deterministic in ``config.rng_seed``: the same config yields a
    byte-identical edge list on every run and platform. Topology does not
    depend on ``r0``, which only sets the uniform probability.
    """
    model = config.model.lower()
    if config.n < 2:
        raise ConfigError(f"need at least 2 nodes, got {config.n}")
    if not config.avg_degree or config.avg_degree < 0 or config.avg_degree >= config.n:
        raise ConfigError(f"average degree {config.avg_degree} unachievable for n={config.n}")
    if config.r0 < 0:
        raise ConfigError(f"r0 must be nonnegative, got {config.r0}")
    p = config.r0 / config.avg_degree
    if p > 1:
        raise InvalidProbabilityError(
            f"r0/avg_degree = {p} exceeds 1; lower r0 or raise the degree"
        )

    if model == "er":
        p_edge = config.avg_degree / (config.n - 1)
        G = nx.fast_gnp_random_graph(config.n, p_edge, seed=config.rng_seed)
    elif model == "ws":
        k = round(config.avg_degree)
        if abs(k - config.avg_degree) > 1e-9 or k % 2 != 0 or k < 2:
            raise ConfigError(
                f"watts-strogatz needs an even integer average degree, got {config.avg_degree}"
            )
        if not 0 <= config.ws_beta <= 1:
            raise ConfigError(f"rewiring probability {config.ws_beta} outside [0, 1]")
        G = nx.watts_strogatz_graph(config.n, k, config.ws_beta, seed=config.rng_seed)
    elif model == "ba":
        attach = config.ba_attach
        if attach is None:
            attach = round(config.avg_degree / 2)
        if attach < 1 or attach >= config.n:
            raise ConfigError(f"barabasi-albert attachment count {attach} unachievable")
        G = nx.barabasi_albert_graph(config.n, attach, seed=config.rng_seed)
    else:
        raise ConfigError(f"unknown graph model {config.model!r} (expected er, ws, or ba)")

    edges = sorted((u, v) if u < v else (v, u) for u, v in G.edges())
    return ProbGraph.undirected(config.n, [(u, v, p) for u, v in edges])


# ---------------------------------------------------------------------------
# layered construction (leaky / temporal vaccination)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LayeredSpec:
    """Time-expanded construction over ``steps + 1`` layers.

    ``eps`` is the per-step probability that a previously protected copy loses
    protection (waning). ``utility_mode`` chooses what counts as saved:
    ``final_layer`` scores only the last layer's copies; ``any_time`` attaches
    a zero-degree collector node per original node (via probability-1 arcs
    from every layer copy) so a node scores iff it is never infected within
    the horizon. ``temporal_rates``, when given, overrides each arc's
    probability per step as ``fn(u, v, step, base_p)``.
    """

    steps: int
    eps: float
    utility_mode: str = "final_layer"
    temporal_rates: TemporalRates | None = None


def build_layered(g: ProbGraph, spec: LayeredSpec):
    """Time-expand ``g`` and return ``(layered_graph, groups)``.

    Layer ``t`` copy of node ``u`` has id ``t*n + u``. Arcs run only between
    consecutive layers. Each non-seed node yields one group over all of its
    copies with a leaky-chain acceptance policy: layer-0 copy always accepts,
    each later copy stays protected with probability ``1 - eps`` given the
    previous one was. Seeds map to layer 0. Collector arcs (any_time mode) are
    flagged noncandidate so they never enter effective-degree computations.
    """
    from .immunize import Group, LeakyChain  # local import: immunize depends on graph

    T = spec.steps
    if T < 1:
        raise ConfigError(f"need at least 1 step, got {T}")
    if not 0 <= spec.eps <= 1:
        raise ConfigError(f"eps {spec.eps} outside [0, 1]")
    if spec.utility_mode not in ("final_layer", "any_time"):
        raise ConfigError(f"unknown utility mode {spec.utility_mode!r}")

    n = g.n
    arcs: list[tuple[int, int, float]] = []
    for tau in range(T):
        for u, v, p in zip(g.src, g.dst, g.p):
            pp = p if spec.temporal_rates is None else spec.temporal_rates(int(u), int(v), tau, float(p))
            arcs.append((tau * n + int(u), (tau + 1) * n + int(v), float(pp)))

    noncandidate: list[int] = []
    if spec.utility_mode == "final_layer":
        total = (T + 1) * n
        utility = np.zeros(total)
        utility[T * n:] = g.utility
        origin = np.tile(np.arange(n), T + 1)
    else:
        total = (T + 2) * n
        utility = np.zeros(total)
        utility[(T + 1) * n:] = g.utility
        origin = np.tile(np.arange(n), T + 2)
        for u in range(n):
            collector = (T + 1) * n + u
            for tau in range(T + 1):
                noncandidate.append(len(arcs))
                arcs.append((tau * n + u, collector, 1.0))

    layered = ProbGraph(
        total,
        arcs,
        utility=utility,
        seeds=g.seeds,
        directed=True,
        noncandidate_arcs=noncandidate,
        origin=origin,
    )
    groups = [
        Group(u, tuple(tau * n + u for tau in range(T + 1)), LeakyChain(spec.eps))
        for u in range(n)
        if u not in g.seeds
    ]
    return layered, groups


# ---------------------------------------------------------------------------
# link-immunization split
# ---------------------------------------------------------------------------


def split_for_link_immunization(g: ProbGraph):
    """Insert a zero-utility midpoint node on every arc.

    Arc ``(u, v, p)`` becomes ``u -> w`` with probability ``p`` and ``w -> v``
    with probability 1, so reachability between original nodes is distributed
    exactly as before. Removing ``w`` is equivalent to immunizing the link.
    Returns ``(split_graph, candidates)`` where ``candidates[i]`` is the node
    inserted on arc ``i``.
    """
    n, m = g.n, g.num_arcs
    arcs: list[tuple[int, int, float]] = []
    candidates: list[int] = []
    for i, (u, v, p) in enumerate(zip(g.src, g.dst, g.p)):
        w = n + i
        arcs.append((int(u), w, float(p)))
        arcs.append((w, int(v), 1.0))
        candidates.append(w)
    utility = np.concatenate([g.utility, np.zeros(m)])
    origin = None
    if g.origin is not None:
        origin = np.concatenate([g.origin, np.arange(n, n + m)])
    split = ProbGraph(
        n + m, arcs, utility=utility, seeds=g.seeds, directed=True, origin=origin
    )
    return split, candidates


# ---------------------------------------------------------------------------
# household construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HouseholdSpec:
    """Clique households of ``size`` nodes with ties ``strength`` times stronger
    than outside contacts; all weights rescaled so the mean expected degree
    (sum of incident transmission probabilities, averaged over nodes) equals
    ``r0``."""

    size: int
    strength: float
    r0: float


def build_households(g: ProbGraph, spec: HouseholdSpec) -> ProbGraph:
    """Overlay consecutive-id households on the topology of ``g``.

    Nodes ``[0..size)``, ``[size..2*size)``, ... form households (the last one
    takes any remainder). Household pairs become clique edges. Input arc
    probabilities are discarded: within-household edges get relative weight
    ``strength``, all others 1, then a single scale factor sets the mean
    expected degree to ``r0`` exactly.
    """
    a, b = spec.size, spec.strength
    if a < 1:
        raise ConfigError(f"household size must be >= 1, got {a}")
    if b <= 0:
        raise ConfigError(f"strength ratio must be positive, got {b}")
    if spec.r0 <= 0:
        raise ConfigError(f"target r0 must be positive, got {spec.r0}")

    n = g.n
    household = np.arange(n) // a
    edges = {(int(u), int(v)) for u, v in zip(g.src, g.dst) if u < v}
    for h in range(int(household.max()) + 1 if n else 0):
        members = np.nonzero(household == h)[0]
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                edges.add((int(members[i]), int(members[j])))

    pairs = sorted(edges)
    weights = np.array(
        [b if household[u] == household[v] else 1.0 for u, v in pairs]
    )
    if not pairs:
        raise ConfigError("household construction needs at least one edge")
    # mean expected degree = (2 * sum of pair weights * scale) / n
    scale = spec.r0 * n / (2.0 * weights.sum())
    p = weights * scale
    if p.max() > 1:
        raise InvalidProbabilityError(
            f"household rescaling yields probability {p.max():.6g} > 1; "
            "reduce r0 or the strength ratio"
        )
    return ProbGraph.undirected(
        n,
        [(u, v, float(w)) for (u, v), w in zip(pairs, p)],
        utility=g.utility,
        seeds=g.seeds,
    )


# ---------------------------------------------------------------------------
# susceptibility thinning
# ---------------------------------------------------------------------------


def thin_by_susceptibility(
    g: ProbGraph, s: float | Sequence[float] | np.ndarray, rng_seed: int
) -> ProbGraph:
    """Keep each node independently with probability ``s`` (seeds always kept).

    Pre-sampling which nodes are already immune and deleting them turns the
    reproduction number of the result into the effective reproduction number
    of the original partially immune population. Survivors are relabeled
    densely in ascending original-id order.
    """
    s_arr = np.broadcast_to(np.asarray(s, dtype=np.float64), (g.n,)).copy()
    if np.any(s_arr < 0) or np.any(s_arr > 1):
        raise InvalidProbabilityError("susceptibilities must lie in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    keep = rng.random(g.n) < s_arr
    for seed in g.seeds:
        keep[seed] = True

    new_id = np.cumsum(keep) - 1
    arc_keep = keep[g.src] & keep[g.dst]
    arcs = [
        (int(new_id[u]), int(new_id[v]), float(p))
        for u, v, p in zip(g.src[arc_keep], g.dst[arc_keep], g.p[arc_keep])
    ]
    kept_nodes = np.nonzero(keep)[0]
    origin = None
    if g.origin is not None:
        origin = g.origin[kept_nodes]
    noncand = np.nonzero(g.noncandidate[arc_keep])[0]
    return ProbGraph(
        int(keep.sum()),
        arcs,
        utility=g.utility[kept_nodes],
        seeds={int(new_id[s_]) for s_ in g.seeds},
        directed=g.directed,
        noncandidate_arcs=noncand,
        origin=origin,
    )


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------
#
# Line-oriented text format, '#' starts a comment:
#   graph <n> <directed|undirected>
#   node <id> <utility>        (optional; default utility 1.0)
#   seed <id>
#   edge <u> <v> <p>           (undirected graphs: one line per edge)


def save(g: ProbGraph, path: str | Path) -> None:
    """Write a graph file. Deterministic: nodes, then seeds, then edges, all
    ascending; probabilities as shortest round-trip decimals. Node lines are
    emitted only for non-default utilities. Arc flags and origin labels are
    not serialized."""
    lines = [f"graph {g.n} {'directed' if g.directed else 'undirected'}"]
    for u in range(g.n):
        if g.utility[u] != 1.0:
            lines.append(f"node {u} {float(g.utility[u])!r}")
    for s in sorted(g.seeds):
        lines.append(f"seed {s}")
    if g.directed:
        for u, v, p in sorted(g.arc_list()):
            lines.append(f"edge {u} {v} {p!r}")
    else:
        for u, v, p in sorted(a for a in g.arc_list() if a[0] < a[1]):
            lines.append(f"edge {u} {v} {p!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load(path: str | Path) -> ProbGraph:
    """Parse a graph file; errors carry the offending line number."""
    text = Path(path).read_text()
    n = None
    directed = True
    utilities: dict[int, float] = {}
    seeds: list[int] = []
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kind = fields[0]
        if kind == "graph":
            if n is not None:
                raise GraphFormatError("duplicate graph header", lineno)
            if len(fields) != 3 or fields[2] not in ("directed", "undirected"):
                raise GraphFormatError(
                    "expected 'graph <n> <directed|undirected>'", lineno
                )
            n = _parse_int(fields[1], lineno, "node count")
            directed = fields[2] == "directed"
            continue
        if n is None:
            raise GraphFormatError("graph header must come first", lineno)
        if kind == "node":
            if len(fields) != 3:
                raise GraphFormatError("expected 'node <id> <utility>'", lineno)
            u = _parse_int(fields[1], lineno, "node id")
            _check_node(u, n, lineno)
            utilities[u] = _parse_float(fields[2], lineno, "utility")
        elif kind == "seed":
            if len(fields) != 2:
                raise GraphFormatError("expected 'seed <id>'", lineno)
            u = _parse_int(fields[1], lineno, "seed id")
            _check_node(u, n, lineno)
            seeds.append(u)
        elif kind == "edge":
            if len(fields) != 4:
                raise GraphFormatError("expected 'edge <u> <v> <p>'", lineno)
            u = _parse_int(fields[1], lineno, "edge endpoint")
            v = _parse_int(fields[2], lineno, "edge endpoint")
            _check_node(u, n, lineno)
            _check_node(v, n, lineno)
            p = _parse_float(fields[3], lineno, "probability")
            if not 0 <= p <= 1:
                raise InvalidProbabilityError(
                    f"line {lineno}: probability {p} outside [0, 1]"
                )
            if u == v:
                raise GraphFormatError(f"self-loop at node {u}", lineno)
            key = (u, v) if directed else (min(u, v), max(u, v))
            if key in seen:
                raise GraphFormatError(f"duplicate edge {u} {v}", lineno)
            seen.add(key)
            edges.append((u, v, p))
        else:
            raise GraphFormatError(f"unknown directive {kind!r}", lineno)

    if n is None:
        raise GraphFormatError("missing graph header", line=None)
    utility = np.ones(n)
    for u, a in utilities.items():
        utility[u] = a
    if directed:
        return ProbGraph(n, edges, utility=utility, seeds=seeds, directed=True)
    return ProbGraph.undirected(n, edges, utility=utility, seeds=seeds)


def _parse_int(token: str, lineno: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphFormatError(f"bad {what} {token!r}", lineno) from None


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise GraphFormatError(f"bad {what} {token!r}", lineno) from None
    if not math.isfinite(value):
        raise GraphFormatError(f"bad {what} {token!r}", lineno)
    return value


def _check_node(u: int, n: int, lineno: int) -> None:
    if u < 0 or u >= n:
        raise GraphFormatError(f"node id {u} outside 0..{n - 1}", lineno)
