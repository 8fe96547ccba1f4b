import json

import pytest

from bqpcut.cli import EXIT_DATA, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, main

from test_formats import ONE_DIM_TEXT


@pytest.fixture
def one_dim_file(tmp_path):
    path = tmp_path / "one.txt"
    path.write_text(ONE_DIM_TEXT)
    return path


def test_solve_optimal(one_dim_file, capsys):
    assert main(["solve", str(one_dim_file), "--json"]) == EXIT_OK
    info = json.loads(capsys.readouterr().out)
    assert info["status"] == "Optimal" and info["objective"] == 2.0 and info["y"] == [1]


def test_solve_infeasible(tmp_path):
    path = tmp_path / "inf.txt"
    path.write_text("1 1\nA 1 1 2\nb 1 1\n")
    assert main(["solve", str(path)]) == EXIT_INFEASIBLE
    assert main(["solve", str(path), "--least-violation"]) == EXIT_INFEASIBLE


def test_usage_and_data_errors(tmp_path, one_dim_file):
    with pytest.raises(SystemExit) as ei:
        main(["solve"])
    assert ei.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as ei:
        main(["solve", str(one_dim_file), "--mode", "nope"])
    assert ei.value.code == EXIT_USAGE
    assert main(["solve", str(tmp_path / "missing.txt")]) == EXIT_DATA
    bad = tmp_path / "bad.txt"
    bad.write_text("1 1\nA 1 1 0.5\nb 1 1\n")
    assert main(["solve", str(bad)]) == EXIT_DATA


def test_transform_one_dim(one_dim_file, tmp_path):
    out = tmp_path / "g.txt"
    assert main(["transform", str(one_dim_file), "--out", str(out), "--sigma", "3"]) == EXIT_OK
    body = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert body == ["2 1", "1 2 -1"]


def test_generate_and_solve_kcluster(tmp_path, capsys):
    path = tmp_path / "pet.txt"
    assert main(["generate", "kcluster", "--petersen", "--k", "5", "--out", str(path)]) == EXIT_OK
    capsys.readouterr()
    assert main(["solve", str(path), "--json"]) == EXIT_OK
    # stored as a minimisation, shown as the edge count
    assert json.loads(capsys.readouterr().out)["objective"] == 5


def test_bounds_command(one_dim_file, capsys):
    assert main(["bounds", str(one_dim_file)]) == EXIT_OK
    assert "projected" in capsys.readouterr().out


def test_bench_command(tmp_path):
    suite = tmp_path / "s.json"
    suite.write_text('{"instances": [{"kind": "cbqp", "n": 5, "seed": 1}], "modes": ["gw"]}')
    assert main(["bench", str(suite), "--out", str(tmp_path / "o"), "--workers", "1"]) == EXIT_OK
    assert (tmp_path / "o" / "records.csv").exists()
