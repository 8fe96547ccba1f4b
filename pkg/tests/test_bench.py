import csv
import json

import pytest

from bqpcut.bench import bench_run, load_suite, profile_table, workers_from_env

SUITE = {
    "instances": [
        {"kind": "rgi", "family": "One", "n": 6, "m": 1, "A_interval": [-1, 1], "F_interval": [-3, 3], "seed": 1},
        {"kind": "rgi", "family": "One", "n": 6, "m": 1, "A_interval": [-1, 1], "F_interval": [-1, 1], "seed": 2,
         "parity_conflict": True},
        {"kind": "cbqp", "n": 7, "seed": 4},
    ],
    "seed": 0,
}


@pytest.fixture
def suite_file(tmp_path):
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(SUITE))
    return path


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_smoke_suite(suite_file, tmp_path):
    out = tmp_path / "out"
    records = bench_run(load_suite(suite_file), out_dir=out, workers=1)
    assert len(records) == 12
    rows = read_csv(out / "records.csv")
    for mode in ("las", "cli", "gw", "auto"):
        assert sum(r["mode"] == mode for r in rows) == 3
    assert not any(r["error"] for r in rows)
    # the parity instance is infeasible under every mode
    assert {r["status"] for r in rows if r["instance"].endswith("_parity")} == {"Infeasible"}
    ratios = read_csv(out / "sigma_ratios.csv")
    assert ratios[-1]["instance"] == "average"
    for r in ratios[:-1]:
        assert float(r["cli_over_las_pct"]) <= 100
        if r["gw_over_las_pct"]:
            assert float(r["gw_over_las_pct"]) <= 100
    for mode in ("las", "auto"):
        assert (out / f"profile_{mode}.csv").exists()
    assert (out / "timings.csv").exists()


def test_records_identical_on_rerun(suite_file, tmp_path):
    suite = load_suite(suite_file)
    bench_run(suite, out_dir=tmp_path / "a", modes=["gw", "auto"], workers=1)
    bench_run(suite, out_dir=tmp_path / "b", modes=["gw", "auto"], workers=1)
    for name in ("records.csv", "sigma_ratios.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_empty_suite(tmp_path):
    path = tmp_path / "s.json"
    path.write_text('{"instances": []}')
    records = bench_run(load_suite(path), out_dir=tmp_path / "o", workers=1)
    assert records == []
    assert read_csv(tmp_path / "o" / "records.csv") == []


def test_unknown_entry_kind(tmp_path):
    path = tmp_path / "s.json"
    path.write_text('{"instances": [{"kind": "qap"}]}')
    with pytest.raises(ValueError):
        load_suite(path)


def test_profile_counts_only_solved():
    from bqpcut.bench import ResultRecord

    recs = [ResultRecord("a", 1, 1, "gw", 1.0, 1.0, "Optimal", 0.0, 1, 0, 0.5),
            ResultRecord("b", 1, 1, "gw", 1.0, 1.0, "TimeLimit", None, 1, 0, 9.0)]
    assert profile_table(recs, "gw") == [(0.5, 50.0)]


def test_workers_env(monkeypatch):
    monkeypatch.setenv("BQPCUT_WORKERS", "3")
    assert workers_from_env() == 3
    monkeypatch.setenv("BQPCUT_WORKERS", "x")
    assert workers_from_env() == 1
