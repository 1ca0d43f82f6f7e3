"""Command-line interface: generation, bound sweeps, greedy runs, estimation,
exact checks. All output is CSV (or plain key=value lines for the oracle
command); plotting is out of scope.

Exit codes: 0 success, 2 usage or validation error, 3 exact-method size cap.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _rng, bounds, cascade, graph, immunize, oracle
from .errors import ConfigError, ImmunetError, SizeCapError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SIZE_CAP = 3


def _parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]

def _parse_ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _parse_grid(text: str) -> list[float]:
    """Either a comma list or min:max:step (inclusive of max within 1e-9)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must be min:max:step")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise ConfigError(f"bad grid {text!r}")
        out = []
        i = 0
        while lo + i * step <= hi + 1e-9:
            out.append(lo + i * step)
            i += 1
        return out
    return _parse_floats(text)


def _model(args) -> cascade.CascadeModel:
    if getattr(args, "gamma", None) is not None:
        return cascade.CascadeModel("sir", args.gamma)
    return cascade.IC


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    config = graph.GenConfig(
        model=args.model,
        n=args.n,
        avg_degree=args.avg_degree,
        r0=args.r0,
        rng_seed=args.seed,
        ws_beta=args.ws_beta,
        ba_attach=args.ba_attach,
    )
    g = graph.generate(config)
    if args.seed_nodes is not None:
        seeds = _parse_ints(args.seed_nodes)
    else:
        count = max(1, round(args.seed_frac * g.n))
        rng = _rng.stream(args.seed, 101)  # tag disjoint from cascade/acceptance streams
        seeds = sorted(rng.choice(g.n, size=count, replace=False).tolist())
    g = g.with_seeds(seeds)
    graph.save(g, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bound
# ---------------------------------------------------------------------------


def cmd_bound(args) -> int:
    g = graph.load(args.graph)
    if args.link:
        profile = bounds.link_effective_degrees(g)
    else:
        profile = bounds.effective_degrees(g, _model(args))
    report = bounds.optimize_threshold(profile, args.k)
    writer = csv.writer(sys.stdout)
    writer.writerow(
        ["lambda_prime", "n_s", "k", "factor", "bicriteria_budget", "bicriteria_factor"]
    )
    writer.writerow(
        [
            repr(report.lambda_prime),
            report.n_s,
            report.k,
            repr(report.factor),
            repr(report.bicriteria[0]),
            repr(report.bicriteria[1]),
        ]
    )
    if args.out:
        with open(args.out, "w", newline="") as f:
            report.to_csv(f)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    models: tuple[str, ...]
    n: int
    avg_degrees: tuple[float, ...]
    r0_grid: tuple[float, ...]
    ks: tuple[int, ...]
    reps: int
    gammas: tuple[float, ...] | None  # None -> plain cascade sweep
    master_seed: int

    def __post_init__(self):
        if not (self.models and self.avg_degrees and self.r0_grid and self.ks):
            raise ConfigError("sweep grids must be non-empty")
        if self.reps < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.reps}")


def run_sweep(config: SweepConfig) -> list[dict]:
    """Approximation factor per (model, degree, r0[, gamma], k, repetition).

    One topology is generated per (model, degree, repetition); the uniform
    probability is then set per r0 (and per gamma in SIR mode, where the
    per-attempt rate is r0*gamma/avg_degree).
    """
    rows = []
    for mi, model in enumerate(sorted(config.models)):
        for di, dbar in enumerate(sorted(config.avg_degrees)):
            for rep in range(config.reps):
                seed = _rng.derive_seed(config.master_seed, mi, di, rep)
                g = graph.generate(
                    graph.GenConfig(model, config.n, dbar, r0=0.0, rng_seed=seed)
                )
                for r0 in config.r0_grid:
                    for gamma in config.gammas or (None,):
                        if gamma is None:
                            gg = g.with_uniform_p(r0 / dbar)
                            profile = bounds.effective_degrees(gg)
                        else:
                            gg = g.with_uniform_p(r0 * gamma / dbar)
                            profile = bounds.effective_degrees(
                                gg, cascade.CascadeModel("sir", gamma)
                            )
                        for k in config.ks:
                            report = bounds.optimize_threshold(profile, k)
                            row = {
                                "model": model,
                                "n": config.n,
                                "avg_degree": dbar,
                                "R0": r0,
                                "k": k,
                                "rep": rep,
                                "factor": report.factor,
                                "lambda_prime": report.lambda_prime,
                                "n_s": report.n_s,
                            }
                            if gamma is not None:
                                row["gamma"] = gamma
                            rows.append(row)
    return rows


def _write_sweep_csv(rows: list[dict], out, sir: bool) -> None:
    cols = ["model", "n", "avg_degree", "R0"]
    if sir:
        cols.append("gamma")
    cols += ["k", "rep", "factor", "lambda_prime", "n_s"]
    cell_key = [c for c in cols if c != "rep" and c not in ("factor", "lambda_prime", "n_s")]

    writer = csv.writer(out)
    writer.writerow(cols)
    cells: dict[tuple, list[dict]] = {}
    for row in rows:
        cells.setdefault(tuple(row[c] for c in cell_key), []).append(row)

    def fmt(value) -> str:
        return repr(value) if isinstance(value, float) else str(value)

    for key in sorted(cells):
        cell = sorted(cells[key], key=lambda r: r["rep"])
        for row in cell:
            writer.writerow([fmt(row[c]) for c in cols])
        stats = {}
        for col in ("factor", "lambda_prime", "n_s"):
            vals = np.array([float(r[col]) for r in cell])
            stats[col] = (
                float(vals.mean()),
                float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
            )
        for agg, idx in (("mean", 0), ("std", 1)):
            writer.writerow(
                [fmt(v) for v in key]
                + [agg]
                + [fmt(stats[col][idx]) for col in ("factor", "lambda_prime", "n_s")]
            )


def cmd_sweep(args) -> int:
    config = SweepConfig(
        models=tuple(args.model.split(",")),
        n=args.n,
        avg_degrees=tuple(_parse_floats(args.avg_degree)),
        r0_grid=tuple(_parse_grid(args.r0)),
        ks=tuple(_parse_ints(args.k)),
        reps=args.reps,
        gammas=tuple(_parse_floats(args.gamma)) if args.gamma else None,
        master_seed=args.seed,
    )
    rows = run_sweep(config)
    out, close = _open_out(args.out)
    try:
        _write_sweep_csv(rows, out, sir=config.gammas is not None)
    finally:
        if close:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# greedy
# ---------------------------------------------------------------------------


def cmd_greedy(args) -> int:
    g = graph.load(args.graph)
    if args.groups:
        groups = immunize.load_groups(args.groups)
    else:
        groups = immunize.singleton_groups(g)
    model = _model(args)
    estimator = immunize.MonteCarloEstimator(
        args.replicates, master_seed=args.seed, workers=args.workers
    )
    selection = immunize.greedy(
        g, groups, args.k, model, estimator, allow_multiset=args.multiset
    )
    total = cascade.estimate_pi(
        g,
        model,
        groups=selection.plan(groups),
        replicates=args.replicates,
        master_seed=_rng.derive_seed(args.seed, _rng.FINAL),
        workers=args.workers,
    )
    out, close = _open_out(args.out)
    try:
        writer = csv.writer(out)
        writer.writerow(["iteration", "group_id", "multiplicity", "gain", "gain_stderr"])
        counts: dict[int, int] = {}
        for i, (gid, gain) in enumerate(zip(selection.chosen, selection.gains)):
            counts[gid] = counts.get(gid, 0) + 1
            writer.writerow([i, gid, counts[gid], repr(gain.mean), repr(gain.stderr)])
        writer.writerow(["total", "", "", repr(total.mean), repr(total.stderr)])
    finally:
        if close:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def cmd_estimate(args) -> int:
    g = graph.load(args.graph)
    model = _model(args)
    if args.sigma:
        result = cascade.estimate_sigma(
            g, model, replicates=args.replicates, master_seed=args.seed,
            workers=args.workers,
        )
        quantity = "sigma"
    else:
        removed = _parse_ints(args.removed) if args.removed else []
        result = cascade.estimate_pi(
            g, model, removed, replicates=args.replicates, master_seed=args.seed,
            workers=args.workers,
        )
        quantity = "pi"
    writer = csv.writer(sys.stdout)
    writer.writerow(["quantity", "mean", "stderr", "replicates", "master_seed"])
    writer.writerow(
        [quantity, repr(result.mean), repr(result.stderr), result.replicates, result.master_seed]
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    if args.fixture:
        if args.fixture == "counterexample-a":
            g = oracle.counterexample_a()
        elif args.fixture == "counterexample-b":
            g = oracle.counterexample_b(args.a)
        else:
            raise ConfigError(f"unknown fixture {args.fixture!r}")
    elif args.graph:
        g = graph.load(args.graph)
    else:
        raise ConfigError("oracle needs --fixture or --graph")

    engine = oracle.ExactEngine(g, arc_cap=args.arc_cap)
    if args.removed is not None:
        removed = _parse_ints(args.removed)
        print(f"pi={engine.pi(removed).value!r}")
    if args.k is not None:
        best, value = oracle.exhaustive_opt(g, args.k, arc_cap=args.arc_cap, engine=engine)
        inner = ",".join(str(u) for u in sorted(best))
        print(f"S*={{{inner}}}")
        print(f"pi={value!r}")
    if args.removed is None and args.k is None:
        print(f"sigma={engine.sigma().value!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="immunet",
        description="Network immunization planning under stochastic cascades.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random graph file")
    p.add_argument("--model", required=True, help="er, ws, or ba")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--avg-degree", type=float, required=True)
    p.add_argument("--r0", type=float, required=True)
    p.add_argument("--ws-beta", type=float, default=0.1)
    p.add_argument("--ba-attach", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seed-nodes", help="comma list of initially infected nodes")
    p.add_argument("--seed-frac", type=float, default=0.01,
                   help="fraction of nodes infected uniformly at random (default 0.01)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bound", help="approximation factor for a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma", type=float, default=None, help="SIR recovery rate")
    p.add_argument("--link", action="store_true", help="link-immunization profile")
    p.add_argument("--out", help="write the full threshold table as CSV")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="factor sweep over random-graph ensembles")
    p.add_argument("--model", required=True, help="comma list of er, ws, ba")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--avg-degree", required=True, help="comma list, e.g. 10,20,30")
    p.add_argument("--r0", required=True, help="comma list or min:max:step")
    p.add_argument("--k", required=True, help="comma list of budgets")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--gamma", help="comma list of SIR recovery rates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("greedy", help="greedy group selection on a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--groups", help="groups file (default: singleton non-seed groups)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=None, help="SIR recovery rate")
    p.add_argument("--multiset", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_greedy)

    p = sub.add_parser("estimate", help="Monte Carlo spread / saved-utility estimate")
    p.add_argument("--graph", required=True)
    p.add_argument("--removed", help="comma list of nodes removed deterministically")
    p.add_argument("--sigma", action="store_true", help="estimate spread instead")
    p.add_argument("--gamma", type=float, default=None, help="SIR recovery rate")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("oracle", help="exact enumeration on tiny instances")
    p.add_argument("--fixture", help="counterexample-a or counterexample-b")
    p.add_argument("--a", type=int, default=3, help="leaf count for counterexample-b")
    p.add_argument("--graph", help="graph file instead of a fixture")
    p.add_argument("--k", type=int, default=None, help="exhaustive optimum budget")
    p.add_argument("--removed", help="comma list: report exact pi of this set")
    p.add_argument("--arc-cap", type=int, default=oracle.DEFAULT_ARC_CAP)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP
    except (ImmunetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
