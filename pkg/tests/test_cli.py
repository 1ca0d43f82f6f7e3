import csv
import io

import numpy as np
import pytest

from immunet import cli
from immunet.graph import ProbGraph, load, save
from immunet.oracle import exact_pi


def run(capsys, *argv) -> tuple[int, str]:
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def read_csv(text: str) -> list[list[str]]:
    return list(csv.reader(io.StringIO(text)))


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def test_gen_writes_loadable_graph(tmp_path, capsys):
    out = tmp_path / "g.txt"
    code, _ = run(
        capsys, "gen", "--model", "er", "--n", "200", "--avg-degree", "8",
        "--r0", "1.0", "--seed", "5", "--out", str(out),
    )
    assert code == 0
    g = load(out)
    assert g.n == 200
    assert np.all(g.p == 0.125)
    assert len(g.seeds) == 2  # default 1% of nodes


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for out in (a, b):
        assert run(
            capsys, "gen", "--model", "ws", "--n", "100", "--avg-degree", "6",
            "--r0", "1.2", "--seed", "9", "--out", str(out),
        )[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_explicit_seed_nodes(tmp_path, capsys):
    out = tmp_path / "g.txt"
    code, _ = run(
        capsys, "gen", "--model", "er", "--n", "50", "--avg-degree", "4",
        "--r0", "0.5", "--seed-nodes", "1,2,3", "--out", str(out),
    )
    assert code == 0 and load(out).seeds == {1, 2, 3}


# ---------------------------------------------------------------------------
# bound
# ---------------------------------------------------------------------------


def test_bound_link_factor(tmp_path, capsys):
    path = tmp_path / "g.txt"
    save(ProbGraph.undirected(6, [(i, (i + 1) % 6, 0.5) for i in range(6)], seeds={0}), path)
    code, out = run(capsys, "bound", "--graph", str(path), "--k", "100", "--link")
    assert code == 0
    rows = read_csv(out)
    assert rows[0][0] == "lambda_prime"
    factor = float(rows[1][3])
    assert abs(factor - 0.441) < 0.002


def test_bound_table_output(tmp_path, capsys):
    path = tmp_path / "g.txt"
    save(ProbGraph.undirected(5, [(0, i, 0.3) for i in range(1, 5)], seeds={0}), path)
    table = tmp_path / "table.csv"
    code, _ = run(
        capsys, "bound", "--graph", str(path), "--k", "3", "--out", str(table)
    )
    assert code == 0
    rows = read_csv(table.read_text())
    assert rows[0] == ["i", "lambda_prime", "n_s", "factor"]
    assert rows[-1][0] == "best"


def test_bound_sir_gamma(tmp_path, capsys):
    path = tmp_path / "g.txt"
    save(ProbGraph.undirected(5, [(0, i, 0.3) for i in range(1, 5)], seeds={0}), path)
    code_ic, out_ic = run(capsys, "bound", "--graph", str(path), "--k", "2")
    code_sir, out_sir = run(capsys, "bound", "--graph", str(path), "--k", "2", "--gamma", "0.5")
    assert code_ic == 0 and code_sir == 0
    f_ic = float(read_csv(out_ic)[1][3])
    f_sir = float(read_csv(out_sir)[1][3])
    assert f_sir < f_ic  # slower recovery weakens the factor


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


SWEEP_ARGS = (
    "sweep", "--model", "ws,er,ba", "--n", "300", "--avg-degree", "10",
    "--r0", "0.5:1.5:0.5", "--k", "20,50", "--reps", "2", "--seed", "3",
)


def test_sweep_csv_structure(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _ = run(capsys, *SWEEP_ARGS, "--out", str(out))
    assert code == 0
    rows = read_csv(out.read_text())
    assert rows[0] == ["model", "n", "avg_degree", "R0", "k", "rep", "factor", "lambda_prime", "n_s"]
    data = [r for r in rows[1:] if r[5] not in ("mean", "std")]
    aggregates = [r for r in rows[1:] if r[5] in ("mean", "std")]
    assert len(data) == 3 * 3 * 2 * 2      # models x r0 x k x reps
    assert len(aggregates) == 2 * 3 * 3 * 2  # mean+std per cell
    # factor nonincreasing in R0 within each (model, k, rep)
    series: dict[tuple, list[tuple[float, float]]] = {}
    for r in data:
        series.setdefault((r[0], r[4], r[5]), []).append((float(r[3]), float(r[6])))
    for points in series.values():
        points.sort()
        factors = [f for _, f in points]
        assert all(a >= b - 1e-12 for a, b in zip(factors, factors[1:]))


def test_sweep_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *SWEEP_ARGS, "--out", str(a))[0] == 0
    assert run(capsys, *SWEEP_ARGS, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_sir_gamma_column(tmp_path, capsys):
    out = tmp_path / "sir.csv"
    code, _ = run(
        capsys, "sweep", "--model", "ws", "--n", "200", "--avg-degree", "10",
        "--r0", "1.0", "--k", "20", "--reps", "1", "--gamma", "0.5,1.0",
        "--seed", "1", "--out", str(out),
    )
    assert code == 0
    rows = read_csv(out.read_text())
    assert rows[0][4] == "gamma"
    data = [r for r in rows[1:] if r[6] not in ("mean", "std")]
    factors = {float(r[4]): float(r[7]) for r in data}
    assert factors[1.0] > factors[0.5]


# ---------------------------------------------------------------------------
# greedy / estimate / oracle
# ---------------------------------------------------------------------------


def chain_graph_file(tmp_path):
    g = ProbGraph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], seeds={0})
    path = tmp_path / "chain.txt"
    save(g, path)
    return path


def test_greedy_cli(tmp_path, capsys):
    path = chain_graph_file(tmp_path)
    out = tmp_path / "sel.csv"
    code, _ = run(
        capsys, "greedy", "--graph", str(path), "--k", "2", "--replicates", "50",
        "--seed", "4", "--out", str(out),
    )
    assert code == 0
    rows = read_csv(out.read_text())
    assert rows[0] == ["iteration", "group_id", "multiplicity", "gain", "gain_stderr"]
    assert rows[1][1] == "1"              # blocking node 1 saves 3 nodes
    assert float(rows[1][3]) == 3.0
    assert rows[-1][0] == "total"
    assert float(rows[-1][3]) == 3.0


def test_greedy_cli_with_groups_file(tmp_path, capsys):
    path = chain_graph_file(tmp_path)
    groups = tmp_path / "groups.txt"
    groups.write_text(
        "group 0 deterministic\nmember 0 1\n"
        "group 1 independent\nmember 1 2 q=0.5\nmember 1 3 q=0.5\n"
    )
    out = tmp_path / "sel.csv"
    code, _ = run(
        capsys, "greedy", "--graph", str(path), "--groups", str(groups),
        "--k", "2", "--replicates", "40", "--seed", "1", "--out", str(out),
    )
    assert code == 0
    rows = read_csv(out.read_text())
    assert rows[1][1] == "0"  # the certain upstream blocker wins


def test_estimate_cli(tmp_path, capsys):
    path = chain_graph_file(tmp_path)
    code, out = run(
        capsys, "estimate", "--graph", str(path), "--removed", "1",
        "--replicates", "30", "--seed", "2",
    )
    assert code == 0
    rows = read_csv(out)
    assert rows[0][0] == "quantity" and rows[1][0] == "pi"
    assert float(rows[1][1]) == 3.0 and float(rows[1][2]) == 0.0
    code, out = run(
        capsys, "estimate", "--graph", str(path), "--sigma",
        "--replicates", "30", "--seed", "2",
    )
    assert float(read_csv(out)[1][1]) == 4.0


def test_oracle_cli_fixture(capsys):
    code, out = run(capsys, "oracle", "--fixture", "counterexample-a", "--k", "2")
    assert code == 0
    assert "S*={1,2}" in out
    assert "pi=4.0" in out


def test_oracle_cli_removed(capsys):
    code, out = run(
        capsys, "oracle", "--fixture", "counterexample-b", "--a", "4", "--removed", "2"
    )
    assert code == 0
    assert "pi=5.0" in out  # 1 + a


def test_oracle_cli_graph_file(tmp_path, capsys):
    path = chain_graph_file(tmp_path)
    code, out = run(capsys, "oracle", "--graph", str(path))
    assert code == 0
    assert "sigma=4.0" in out


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------


def test_unknown_flag_exits_2(capsys):
    assert cli.main(["bound", "--wobble"]) == 2
    assert cli.main([]) == 2


def test_missing_file_exits_2(tmp_path, capsys):
    assert cli.main(["bound", "--graph", str(tmp_path / "absent.txt"), "--k", "2"]) == 2


def test_validation_error_exits_2(tmp_path, capsys):
    out = tmp_path / "g.txt"
    code = cli.main([
        "gen", "--model", "er", "--n", "100", "--avg-degree", "2",
        "--r0", "5.0", "--out", str(out),
    ])
    assert code == 2


def test_size_cap_exits_3(tmp_path, capsys):
    g = ProbGraph.undirected(30, [(i, i + 1, 0.5) for i in range(29)], seeds={0})
    path = tmp_path / "big.txt"
    save(g, path)
    assert cli.main(["oracle", "--graph", str(path), "--k", "1"]) == 3
