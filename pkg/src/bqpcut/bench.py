"""Benchmark harness: run a suite under several penalty modes.

Outputs (in ``out_dir``):

- ``records.csv``: one row per (instance, mode); no wall-clock columns, so
  reruns with the same seeds give byte-identical files;
- ``timings.csv``: wall time per row;
- ``profile_<mode>.csv``: (time, % solved) pairs for performance profiles;
- ``sigma_ratios.csv``: penalty parameters of each construction on shared
  bounds, with sigma_cli / sigma_las and sigma_gw / sigma_las in percent.

The worker count comes from the BQPCUT_WORKERS environment variable
(default 1).
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Bqp01Instance, Status
from .formats import read_instance
from .instances import (
    RgiSpec,
    build_k_cluster,
    gen_rgi,
    petersen_graph,
    random_cbqp,
    random_graph,
    with_parity_conflict,
)
from .pipeline import PenaltyMode, PipelineConfig, penalty_comparison, solve_bqp

log = logging.getLogger(__name__)

WORKERS_ENV = "BQPCUT_WORKERS"
RECORD_FIELDS = ["instance", "n", "m", "mode", "sigma", "rho", "status", "objective", "nodes", "seed", "error"]


@dataclass
class ResultRecord:
    instance: str
    n: int
    m: int
    mode: str
    sigma: Optional[float]
    rho: Optional[float]
    status: str
    objective: Optional[float]
    nodes: int
    seed: int
    wall_time: float = 0.0
    error: str = ""


def _instance_from_entry(e: dict, base: Path) -> Bqp01Instance:
    kind = e.get("kind", "rgi")
    if kind == "rgi":
        spec = RgiSpec(e["family"], e["n"], e["m"], tuple(e["A_interval"]), tuple(e["F_interval"]),
                       e.get("b_v", 0), e.get("seed", 0))
        p = gen_rgi(spec)
        if e.get("parity_conflict"):
            p = with_parity_conflict(p, spec.seed)
        return p
    if kind == "kcluster":
        if e.get("graph") == "petersen":
            adj = petersen_graph()
        else:
            adj = random_graph(e["n"], e.get("density", 0.5), e.get("seed", 0))
        return build_k_cluster(adj, e["k"], name=e.get("name", ""))
    if kind == "cbqp":
        return random_cbqp(e["n"], e.get("k"), e.get("seed", 0))
    if kind == "file":
        path = Path(e["path"])
        return read_instance(path if path.is_absolute() else base / path)
    raise ValueError(f"unknown suite entry kind {kind!r}")


def load_suite(path) -> dict:
    """Parse a suite JSON file into {"instances": [(name, Bqp01Instance)], ...}."""
    path = Path(path)
    data = json.loads(path.read_text())
    entries = data.get("instances", [])
    insts = []
    for k, e in enumerate(entries):
        p = _instance_from_entry(e, path.parent)
        insts.append((e.get("name") or p.name or f"inst{k}", p))
    return {
        "instances": insts,
        "modes": data.get("modes", ["las", "cli", "gw", "auto"]),
        "time_limit": data.get("time_limit", 600.0),
        "seed": data.get("seed", 0),
    }


def workers_from_env() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _run_one(args) -> ResultRecord:
    name, p, mode, cfg = args
    t0 = time.perf_counter()
    try:
        out = solve_bqp(p, replace(cfg, penalty_mode=mode))
    except Exception as exc:  # recorded, the run goes on
        log.exception("instance %s mode %s failed", name, mode)
        return ResultRecord(name, p.n, p.m, mode, None, None, "Error", None, 0, cfg.solver.seed,
                            time.perf_counter() - t0, f"{type(exc).__name__}: {exc}")
    pp = out.parameters_used
    sol = out.solution
    return ResultRecord(
        name, p.n, p.m, mode,
        None if pp is None else pp.sigma,
        None if pp is None else pp.rho,
        sol.status.value,
        sol.objective,
        out.maxcut_report.nodes if out.maxcut_report is not None else 0,
        cfg.solver.seed,
        time.perf_counter() - t0,
    )


def _ratio_one(args):
    name, p, cfg = args
    try:
        return name, penalty_comparison(p, cfg.bound_budget), ""
    except Exception as exc:
        return name, None, f"{type(exc).__name__}: {exc}"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def profile_table(records, mode: str) -> list:
    """(time, % solved) steps for one mode; unsolved rows never count."""
    rows = [r for r in records if r.mode == mode]
    if not rows:
        return []
    solved = sorted(r.wall_time for r in rows if r.status in (Status.OPTIMAL.value, Status.INFEASIBLE.value))
    return [(t, 100.0 * (k + 1) / len(rows)) for k, t in enumerate(solved)]


def bench_run(suite, cfg: PipelineConfig = PipelineConfig(), out_dir=None, modes=None,
              workers: Optional[int] = None, ratios: bool = True) -> list:
    """Run every instance under every mode; write the outputs when ``out_dir`` is given."""
    if isinstance(suite, dict):
        insts = suite["instances"]
        modes = modes or suite.get("modes")
        cfg = replace(cfg, solver=replace(cfg.solver, time_limit=suite.get("time_limit", cfg.solver.time_limit),
                                          seed=suite.get("seed", cfg.solver.seed)))
    else:
        insts = list(suite)
    modes = [PenaltyMode(m).value for m in (modes or ["las", "cli", "gw", "auto"])]
    workers = workers or workers_from_env()
    tasks = [(name, p, mode, cfg) for name, p in insts for mode in modes]
    rtasks = [(name, p, cfg) for name, p in insts] if ratios else []
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(_run_one, tasks))
            ratio_rows = list(ex.map(_ratio_one, rtasks))
    else:
        records = [_run_one(t) for t in tasks]
        ratio_rows = [_ratio_one(t) for t in rtasks]

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        rows = [[getattr(r, f) for f in RECORD_FIELDS] for r in records]
        _write(out / "records.csv", _csv_text(RECORD_FIELDS, rows))
        _write(out / "timings.csv", _csv_text(["instance", "mode", "wall_time"],
                                              [(r.instance, r.mode, r.wall_time) for r in records]))
        for mode in modes:
            _write(out / f"profile_{mode}.csv", _csv_text(["time", "pct_solved"], profile_table(records, mode)))
        if ratios:
            _write(out / "sigma_ratios.csv", _ratio_csv(ratio_rows))
    return records


def _ratio_csv(ratio_rows) -> str:
    header = ["instance", "sigma_las", "sigma_cli", "sigma_gw", "cli_over_las_pct", "gw_over_las_pct", "error"]
    rows, cli_r, gw_r = [], [], []
    for name, cmp_, err in ratio_rows:
        if cmp_ is None:
            rows.append([name, None, None, None, None, None, err])
            continue
        rc, rg = cmp_.ratio_cli, cmp_.ratio_gw
        cli_r.append(rc)
        if rg is not None:
            gw_r.append(rg)
        rows.append([name, cmp_.las.sigma, cmp_.cli.sigma, None if cmp_.gw is None else cmp_.gw.sigma,
                     100 * rc, None if rg is None else 100 * rg, ""])
    if rows:
        rows.append(["average", None, None, None,
                     100 * float(np.mean(cli_r)) if cli_r else None,
                     100 * float(np.mean(gw_r)) if gw_r else None, ""])
    return _csv_text(header, rows)


def records_as_dicts(records) -> list:
    return [asdict(r) for r in records]
