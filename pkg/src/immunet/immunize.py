"""Greedy selection of immunization groups.

A group is a set of nodes plus an acceptance policy: when the group is chosen,
the policy decides (independently of the epidemic) which members actually get
removed. Greedy repeatedly picks the group with the highest estimated marginal
saved utility. Within one iteration all candidates are scored on the same
replicate streams (common random numbers), so the argmax compares like with
like; each iteration draws fresh streams.

The objective is not submodular, so no lazy evaluation is used and recorded
gains need not be non-increasing.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from . import _rng, cascade
from .cascade import IC, CascadeModel
from .errors import BudgetError, ConfigError, GraphFormatError, ThresholdError
from .graph import ProbGraph

__all__ = [
    "Deterministic",
    "Independent",
    "LeakyChain",
    "Policy",
    "Group",
    "Gain",
    "Selection",
    "sample_acceptance",
    "singleton_groups",
    "iteration_seed",
    "MonteCarloEstimator",
    "ExactEvaluator",
    "greedy",
    "prefix_greedy",
    "load_groups",
    "save_groups",
]


# ---------------------------------------------------------------------------
# acceptance policies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Deterministic:
    """Every member accepts."""

    def realize(self, members: tuple[int, ...], rng: np.random.Generator) -> list[int]:
        return list(members)


@dataclass(frozen=True)
class Independent:
    """Each member accepts independently; ``q`` is a scalar or one value per member."""

    q: float | tuple[float, ...] = 1.0

    def __post_init__(self):
        qs = self.q if isinstance(self.q, tuple) else (self.q,)
        if any(not 0 <= q <= 1 for q in qs):
            raise ConfigError("acceptance probabilities must lie in [0, 1]")

    def realize(self, members: tuple[int, ...], rng: np.random.Generator) -> list[int]:
        q = np.broadcast_to(np.asarray(self.q, dtype=np.float64), (len(members),))
        coins = rng.random(len(members))
        return [u for u, c, qq in zip(members, coins, q) if c < qq]


@dataclass(frozen=True)
class LeakyChain:
    """Waning protection along an ordered member chain.

    The first member always accepts; each subsequent member accepts with
    probability ``1 - eps`` given its predecessor did, and never otherwise.
    Used for layer copies of one node: protection at step t holds with
    probability ``(1 - eps)^t``.
    """

    eps: float

    def __post_init__(self):
        if not 0 <= self.eps <= 1:
            raise ConfigError(f"eps {self.eps} outside [0, 1]")

    def realize(self, members: tuple[int, ...], rng: np.random.Generator) -> list[int]:
        accepted = [members[0]]
        for u in members[1:]:
            if rng.random() >= 1.0 - self.eps:
                break
            accepted.append(u)
        return accepted


Policy = Union[Deterministic, Independent, LeakyChain]


@dataclass(frozen=True)
class Group:
    """Immunization unit: ordered member nodes plus an acceptance policy."""

    id: int
    members: tuple[int, ...]
    policy: Policy = field(default_factory=Deterministic)

    def __post_init__(self):
        if not self.members:
            raise ConfigError(f"group {self.id} has no members")


def singleton_groups(g: ProbGraph, include_seeds: bool = False) -> list[Group]:
    """One deterministic single-node group per (non-seed) node, id = node id."""
    nodes = range(g.n) if include_seeds else (u for u in range(g.n) if u not in g.seeds)
    return [Group(u, (u,), Deterministic()) for u in nodes]


def sample_acceptance(
    group: Group, multiplicity: int, replicate_index: int, master_seed: int
) -> frozenset[int]:
    """Accepted members after ``multiplicity`` independent offers of the group.

    Each offer draws from its own stream keyed by (seed, replicate, group,
    offer index), so adding an offer never reshuffles earlier ones.
    """
    if multiplicity < 1:
        raise ConfigError(f"multiplicity must be >= 1, got {multiplicity}")
    accepted: set[int] = set()
    for instance in range(1, multiplicity + 1):
        rng = _rng.stream(master_seed, _rng.ACCEPT, replicate_index, group.id, instance)
        accepted.update(group.policy.realize(group.members, rng))
    return frozenset(accepted)


# ---------------------------------------------------------------------------
# selection record
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gain:
    mean: float
    stderr: float


@dataclass(frozen=True)
class Selection:
    """Ordered multiset of chosen group ids with per-iteration gain estimates.

    ``forced`` counts leading entries pre-selected by an effective-degree
    threshold rather than by greedy comparison. Gains are differences of
    common-random-number estimates and are reproducible from ``master_seed``
    via :func:`iteration_seed`.
    """

    chosen: tuple[int, ...]
    gains: tuple[Gain, ...]
    k: int
    master_seed: int
    forced: int = 0
    bicriteria: bool = False

    def multiplicities(self) -> dict[int, int]:
        return dict(Counter(self.chosen))

    def plan(self, groups: Iterable[Group]) -> list[tuple[Group, int]]:
        """(group, multiplicity) pairs for estimation, in ascending group id."""
        by_id = {g.id: g for g in groups}
        return [(by_id[gid], mult) for gid, mult in sorted(self.multiplicities().items())]


def iteration_seed(master_seed: int, iteration: int) -> int:
    """Master seed used for all evaluations within one greedy iteration."""
    return _rng.derive_seed(master_seed, _rng.ITERATION, iteration)


# ---------------------------------------------------------------------------
# evaluators
# ---------------------------------------------------------------------------


class MonteCarloEstimator:
    """Scores candidate selections by shared live-edge replicates.

    One iteration context samples ``replicates`` live-edge graphs and caches
    per-offer acceptance draws, so every candidate is evaluated on identical
    randomness. ``values()`` results match :func:`immunet.cascade.estimate_pi`
    with the same seed bit for bit.
    """

    def __init__(self, replicates: int, master_seed: int = 0, workers: int = 1):
        if replicates < 1:
            raise ConfigError(f"replicate count must be >= 1, got {replicates}")
        self.replicates = replicates
        self.master_seed = master_seed
        self.workers = workers

    def start(self, g: ProbGraph, model: CascadeModel, seed: int) -> "_MonteCarloContext":
        return _MonteCarloContext(g, model, seed, self.replicates)


class _MonteCarloContext:
    def __init__(self, g: ProbGraph, model: CascadeModel, seed: int, replicates: int):
        self.g = g
        self.seed = seed
        self.replicates = replicates
        self._samples = [
            cascade.sample_live_edges(g, model, r, seed) for r in range(replicates)
        ]
        self._base = [
            cascade._reach_mask(g, s.live, None) for s in self._samples
        ]
        self._accept_cache: dict[tuple[int, int], list[frozenset[int]]] = {}

    def _accepted(self, group: Group, instance: int) -> list[frozenset[int]]:
        key = (group.id, instance)
        if key not in self._accept_cache:
            sets = []
            for r in range(self.replicates):
                rng = _rng.stream(self.seed, _rng.ACCEPT, r, group.id, instance)
                sets.append(frozenset(group.policy.realize(group.members, rng)))
            self._accept_cache[key] = sets
        return self._accept_cache[key]

    def values(self, instances: Sequence[tuple[Group, int]]) -> np.ndarray:
        """Per-replicate saved utility of a plan of (group, multiplicity) pairs."""
        g = self.g
        per_offer = [
            self._accepted(group, instance)
            for group, mult in instances
            for instance in range(1, mult + 1)
        ]
        out = np.empty(self.replicates)
        removed = np.zeros(g.n, dtype=bool)
        for r in range(self.replicates):
            removed[:] = False
            for sets in per_offer:
                for u in sets[r]:
                    removed[u] = True
            cur = cascade._reach_mask(g, self._samples[r].live, removed)
            out[r] = g.utility @ (self._base[r] & ~cur)
        return out


class ExactEvaluator:
    """Scores candidates by exact enumeration (deterministic policies only).

    Values are exact, so gains carry zero stderr. Limited to graphs within the
    enumeration arc cap.
    """

    def __init__(self, arc_cap: int | None = None):
        self.arc_cap = arc_cap
        self.master_seed = 0  # recorded in selections; exact values ignore it
        self._engines: dict[int, object] = {}

    def start(self, g: ProbGraph, model: CascadeModel, seed: int) -> "_ExactContext":
        from .oracle import DEFAULT_ARC_CAP, ExactEngine

        if model.kind != "ic":
            raise ConfigError("exact evaluation supports the ic model only")
        key = id(g)
        if key not in self._engines:
            cap = DEFAULT_ARC_CAP if self.arc_cap is None else self.arc_cap
            self._engines[key] = ExactEngine(g, arc_cap=cap)
        return _ExactContext(self._engines[key])


class _ExactContext:
    def __init__(self, engine):
        self.engine = engine

    def values(self, instances: Sequence[tuple[Group, int]]) -> np.ndarray:
        removed: set[int] = set()
        for group, _mult in instances:
            if not isinstance(group.policy, Deterministic):
                raise ConfigError(
                    "exact evaluation requires deterministic acceptance policies"
                )
            removed.update(group.members)
        return np.array([self.engine.pi(removed).value])


# ---------------------------------------------------------------------------
# greedy
# ---------------------------------------------------------------------------


def _gain(diffs: np.ndarray) -> Gain:
    mean = float(diffs.mean())
    stderr = float(diffs.std(ddof=1) / np.sqrt(len(diffs))) if len(diffs) > 1 else 0.0
    return Gain(mean, stderr)


def greedy(
    g: ProbGraph,
    groups: Sequence[Group],
    k: int,
    model: CascadeModel = IC,
    estimator: MonteCarloEstimator | ExactEvaluator | None = None,
    allow_multiset: bool = False,
) -> Selection:
    """Pick ``k`` groups by estimated marginal saved utility.

    Ties break to the smallest group id. With ``allow_multiset`` a group may
    be chosen repeatedly; each extra offer redraws acceptance independently.
    A noisy negative best gain is still taken (the objective is monotone, so
    skipping a pick can never help).
    """
    groups = sorted(groups, key=lambda grp: grp.id)
    if len(set(grp.id for grp in groups)) != len(groups):
        raise ConfigError("group ids must be unique")
    if k < 1:
        raise ConfigError(f"budget must be >= 1, got {k}")
    if not groups:
        raise ConfigError("no candidate groups")
    if not allow_multiset and k > len(groups):
        raise BudgetError(
            f"budget {k} exceeds the {len(groups)} available groups"
        )
    if estimator is None:
        estimator = MonteCarloEstimator(cascade.default_replicates(g))

    return _run_greedy(g, groups, k, model, estimator, allow_multiset,
                       forced=(), bicriteria=False, total_k=k)


def _run_greedy(
    g: ProbGraph,
    groups: Sequence[Group],
    free_iterations: int,
    model: CascadeModel,
    estimator,
    allow_multiset: bool,
    forced: Sequence[Group],
    bicriteria: bool,
    total_k: int,
) -> Selection:
    if not allow_multiset and free_iterations > len(groups):
        raise BudgetError(
            f"budget requires {free_iterations} greedy picks but only "
            f"{len(groups)} groups remain"
        )
    by_id = {grp.id: grp for grp in groups}
    for grp in forced:
        by_id.setdefault(grp.id, grp)
    chosen: list[int] = []
    counts: Counter[int] = Counter()
    gains: list[Gain] = []

    def current_instances() -> list[tuple[Group, int]]:
        return [(by_id[gid], mult) for gid, mult in sorted(counts.items())]

    iteration = 0
    for grp in forced:
        ctx = estimator.start(g, model, iteration_seed(estimator.master_seed, iteration))
        base = ctx.values(current_instances())
        trial = ctx.values(current_instances() + [(grp, counts[grp.id] + 1)])
        gains.append(_gain(trial - base))
        counts[grp.id] += 1
        chosen.append(grp.id)
        iteration += 1

    for _ in range(free_iterations):
        ctx = estimator.start(g, model, iteration_seed(estimator.master_seed, iteration))
        base = ctx.values(current_instances())
        best_gain: Gain | None = None
        best_id: int | None = None
        for grp in groups:
            if not allow_multiset and counts[grp.id] > 0:
                continue
            trial_counts = counts.copy()
            trial_counts[grp.id] += 1
            trial = ctx.values(
                [(by_id[gid], mult) for gid, mult in sorted(trial_counts.items())]
            )
            gain = _gain(trial - base)
            if best_gain is None or gain.mean > best_gain.mean:
                best_gain, best_id = gain, grp.id
        assert best_id is not None and best_gain is not None
        counts[best_id] += 1
        chosen.append(best_id)
        gains.append(best_gain)
        iteration += 1

    return Selection(
        tuple(chosen),
        tuple(gains),
        total_k,
        estimator.master_seed,
        forced=len(forced),
        bicriteria=bicriteria,
    )


def prefix_greedy(
    g: ProbGraph,
    k: int,
    lambda_prime: float,
    model: CascadeModel = IC,
    estimator: MonteCarloEstimator | ExactEvaluator | None = None,
    *,
    bicriteria: bool = False,
) -> Selection:
    """Force all nodes above the effective-degree threshold, then run greedy.

    Candidates are singleton groups over non-seed nodes. In prefix mode the
    ``n_s`` high-degree nodes spend part of the budget (requires ``n_s < k``);
    in bicriteria mode they are selected on top of it, for ``n_s + k`` picks
    total.
    """
    from .bounds import effective_degrees

    if k < 1:
        raise ConfigError(f"budget must be >= 1, got {k}")
    if estimator is None:
        estimator = MonteCarloEstimator(cascade.default_replicates(g))

    groups = singleton_groups(g)
    candidates = np.array([grp.id for grp in groups], dtype=np.int64)
    profile = effective_degrees(g, model, nodes=candidates)
    order = np.argsort(-profile.lambdas, kind="stable")
    high = [int(candidates[i]) for i in order if profile.lambdas[i] > lambda_prime]
    n_s = len(high)
    if not bicriteria and n_s >= k:
        raise ThresholdError(
            f"{n_s} nodes exceed threshold {lambda_prime}, leaving no budget from k={k}",
            n_s=n_s,
        )

    by_id = {grp.id: grp for grp in groups}
    forced = [by_id[u] for u in high]
    free = k if bicriteria else k - n_s
    remaining = [grp for grp in groups if grp.id not in set(high)]
    return _run_greedy(
        g, remaining, free, model, estimator, allow_multiset=False,
        forced=forced, bicriteria=bicriteria, total_k=k,
    )


# ---------------------------------------------------------------------------
# groups file I/O
# ---------------------------------------------------------------------------
#
# Line-oriented text format, '#' starts a comment:
#   group <gid> <deterministic|independent|leaky eps=<float>>
#   member <gid> <node> [q=<float>]


def save_groups(groups: Iterable[Group], path: str | Path) -> None:
    """Deterministic writer: groups ascending by id, members in stored order
    (member order is semantic for leaky chains)."""
    lines = []
    for grp in sorted(groups, key=lambda grp: grp.id):
        if isinstance(grp.policy, Deterministic):
            lines.append(f"group {grp.id} deterministic")
            for u in grp.members:
                lines.append(f"member {grp.id} {u}")
        elif isinstance(grp.policy, Independent):
            lines.append(f"group {grp.id} independent")
            q = np.broadcast_to(np.asarray(grp.policy.q), (len(grp.members),))
            for u, qq in zip(grp.members, q):
                lines.append(f"member {grp.id} {u} q={float(qq)!r}")
        elif isinstance(grp.policy, LeakyChain):
            lines.append(f"group {grp.id} leaky eps={grp.policy.eps!r}")
            for u in grp.members:
                lines.append(f"member {grp.id} {u}")
        else:
            raise ConfigError(f"cannot serialize policy {grp.policy!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_groups(path: str | Path) -> list[Group]:
    """Parse a groups file; errors carry the offending line number."""
    kinds: dict[int, tuple[str, float | None]] = {}
    members: dict[int, list[int]] = {}
    qs: dict[int, list[float]] = {}
    order: list[int] = []

    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "group":
            if len(fields) < 3:
                raise GraphFormatError("expected 'group <gid> <policy>'", lineno)
            gid = _parse_int(fields[1], lineno)
            if gid in kinds:
                raise GraphFormatError(f"duplicate group {gid}", lineno)
            kind = fields[2]
            if kind in ("deterministic", "independent"):
                if len(fields) != 3:
                    raise GraphFormatError(f"unexpected arguments after {kind}", lineno)
                kinds[gid] = (kind, None)
            elif kind == "leaky":
                if len(fields) != 4 or not fields[3].startswith("eps="):
                    raise GraphFormatError("leaky policy needs eps=<float>", lineno)
                kinds[gid] = (kind, _parse_float(fields[3][4:], lineno))
            else:
                raise GraphFormatError(f"unknown policy {kind!r}", lineno)
            members[gid] = []
            qs[gid] = []
            order.append(gid)
        elif fields[0] == "member":
            if len(fields) not in (3, 4):
                raise GraphFormatError("expected 'member <gid> <node> [q=<float>]'", lineno)
            gid = _parse_int(fields[1], lineno)
            if gid not in kinds:
                raise GraphFormatError(f"member before group {gid}", lineno)
            node = _parse_int(fields[2], lineno)
            q = 1.0
            if len(fields) == 4:
                if not fields[3].startswith("q="):
                    raise GraphFormatError("expected q=<float>", lineno)
                if kinds[gid][0] != "independent":
                    raise GraphFormatError(
                        "q= is only valid for independent policies", lineno
                    )
                q = _parse_float(fields[3][2:], lineno)
            members[gid].append(node)
            qs[gid].append(q)
        else:
            raise GraphFormatError(f"unknown directive {fields[0]!r}", lineno)

    groups = []
    for gid in order:
        kind, eps = kinds[gid]
        if not members[gid]:
            raise GraphFormatError(f"group {gid} has no members", line=None)
        if kind == "deterministic":
            policy: Policy = Deterministic()
        elif kind == "independent":
            policy = Independent(tuple(qs[gid]))
        else:
            assert eps is not None
            policy = LeakyChain(eps)
        groups.append(Group(gid, tuple(members[gid]), policy))
    return groups


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphFormatError(f"bad integer {token!r}", lineno) from None


def _parse_float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise GraphFormatError(f"bad number {token!r}", lineno) from None
