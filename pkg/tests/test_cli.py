import json

import pytest

from gnrp.cli import dispatch, parse_grid
from gnrp.generator import ModelParams, generate


def run(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------------------
# grid parsing


def test_parse_grid():
    assert parse_grid("0.6:1.4:0.2") == (0.6, 0.8, 1.0, 1.2, 1.4)
    assert parse_grid("1.0") == (1.0,)
    assert parse_grid("0.6:1.5:0.4") == (0.6, 1.0, 1.4)  # stop not on the grid
    assert parse_grid("2:2:1") == (2.0,)
    with pytest.raises(ValueError):
        parse_grid("1:2:0")
    with pytest.raises(ValueError):
        parse_grid("3:1:0.5")
    with pytest.raises(ValueError):
        parse_grid("1:2")


# ---------------------------------------------------------------------------
# generate


def test_generate_deterministic_files(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    base = ["generate", "--n", "10", "--r", "0.4", "--p", "1", "--seed", "7"]
    assert dispatch(base + ["--out", str(a)]) == 0
    assert dispatch(base + ["--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["schema_version"] == 1
    assert len(doc["points"]) == 10


def test_generate_stdout_and_edgelist(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", "--n", "8", "--r", "0.3", "--p", "1",
                       "--seed", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["params"]["seed"] == 3
    path = tmp_path / "e.txt"
    code, out, _ = run(capsys, "generate", "--n", "8", "--r", "0.3", "--p", "1",
                       "--seed", "3", "--out", str(path), "--format", "edgelist")
    assert code == 0 and "wrote" in out
    lines = path.read_text().splitlines()
    assert lines == [f"{u} {v}" for u, v, _ in doc["edges"]]


def test_generate_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("GNRP_SEED", "55")
    code, out, _ = run(capsys, "generate", "--n", "6", "--r", "0.2", "--p", "0.5")
    assert code == 0
    assert json.loads(out)["params"]["seed"] == 55


def test_generate_usage_errors(capsys):
    code, _, err = run(capsys, "generate", "--n", "10", "--r", "0.4")  # no --p
    assert code == 2
    code, _, err = run(capsys, "generate", "--n", "10", "--r", "0.7", "--p", "1")
    assert code == 2 and "error" in err  # r out of range


# ---------------------------------------------------------------------------
# analyze


@pytest.fixture()
def triangle_path(tmp_path):
    # three mutually close points, p=1: a triangle
    path = tmp_path / "tri.json"
    inst = generate(ModelParams(n=3, r=0.45, p=1.0, seed=0))
    assert inst.n_kept_edges == 3
    inst.save_json(path)
    return path


def test_analyze_triangle(triangle_path, capsys):
    code, out, _ = run(capsys, "analyze", "--in", str(triangle_path),
                       "--props", "conn,diam")
    assert code == 0
    doc = json.loads(out)
    assert doc["connected"] is True
    assert doc["diameter"] == 1
    assert "clique_lower" not in doc  # only requested props run


def test_analyze_all_props(tmp_path, capsys):
    path = tmp_path / "inst.json"
    generate(ModelParams(n=400, r=0.2, p=0.9, seed=4)).save_json(path)
    code, out, _ = run(capsys, "analyze", "--in", str(path))
    assert code == 0
    doc = json.loads(out)
    assert doc["alpha_lower"] <= doc["alpha_upper"]
    assert doc["chi_lower"] <= doc["chi_upper"]
    assert doc["clique_lower"] >= 1
    assert isinstance(doc["hamiltonian"], bool)
    assert "verifier_failures" not in doc


def test_analyze_roundtrip_matches_memory(tmp_path, capsys):
    # generate -> save -> load -> analyze equals the in-memory instance
    params = ModelParams(n=300, r=0.15, p=0.7, seed=11)
    inst = generate(params)
    path = tmp_path / "x.json"
    inst.save_json(path)
    code, out, _ = run(capsys, "analyze", "--in", str(path), "--props", "conn")
    assert code == 0
    doc = json.loads(out)
    from gnrp.graph_core import components, is_connected, isolated_count
    assert doc["connected"] == is_connected(inst.graph)
    assert doc["isolated"] == isolated_count(inst.graph)
    assert doc["components"] == len(components(inst.graph))


def test_analyze_unknown_prop(triangle_path, capsys):
    code, _, err = run(capsys, "analyze", "--in", str(triangle_path),
                       "--props", "conn,badger")
    assert code == 2 and "badger" in err


# ---------------------------------------------------------------------------
# sweep


def test_sweep_row_count_and_files(tmp_path, capsys):
    out_csv = tmp_path / "rec.csv"
    out_json = tmp_path / "sum.json"
    code, out, _ = run(
        capsys, "sweep", "--theorem", "connectivity", "--n", "500", "--r", "0.08",
        "--c", "0.6:1.4:0.2", "--trials", "4", "--seed", "17",
        "--out", str(out_csv), "--summary", str(out_json), "--workers", "1",
    )
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "# schema_version=1"
    assert len(lines) == 2 + 5 * 4  # header lines + points x trials
    doc = json.loads(out_json.read_text())
    assert len(doc["points"]) == 5
    assert "success=" in out


def test_sweep_requires_one_grid(tmp_path, capsys):
    code, _, err = run(capsys, "sweep", "--theorem", "connectivity", "--n", "100",
                       "--r", "0.1", "--out", str(tmp_path / "x.csv"))
    assert code == 2
    code, _, err = run(capsys, "sweep", "--theorem", "connectivity", "--n", "100",
                       "--r", "0.1", "--c", "1.0", "--p", "0.5",
                       "--out", str(tmp_path / "x.csv"))
    assert code == 2


def test_sweep_deterministic_across_workers(tmp_path, capsys):
    args = ["sweep", "--theorem", "alpha", "--n", "400", "--r", "0.1",
            "--p", "0.3:0.7:0.4", "--trials", "3", "--seed", "23"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert dispatch(args + ["--out", str(a), "--workers", "1"]) == 0
    assert dispatch(args + ["--out", str(b), "--workers", "2"]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_sweep_infeasible_point_reported(tmp_path, capsys):
    code, out, _ = run(
        capsys, "sweep", "--theorem", "connectivity", "--n", "200", "--r", "0.05",
        "--c", "9000", "--trials", "2", "--seed", "1",
        "--out", str(tmp_path / "x.csv"),
    )
    assert code == 0
    assert "INFEASIBLE_POINT" in out


# ---------------------------------------------------------------------------
# verify


def test_verify_single_criterion(capsys):
    code, out, _ = run(capsys, "verify", "--criteria", "1")
    assert code == 0
    assert "PASS criterion  1" in out
    assert "all 1 criteria passed" in out


def test_usage_exit_codes(capsys):
    assert dispatch([]) == 2  # no subcommand
    assert dispatch(["frobnicate"]) == 2
    capsys.readouterr()
