"""CSV/JSON writers for run results and figure series.

Every float is written with 17 significant digits so files round-trip
exactly and reruns compare byte for byte.
"""

from __future__ import annotations

import csv
import json
import time
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"{path.name}: row has {len(row)} fields, header has {len(header)}")
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open() as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in row] for row in r]
    return header, np.array(rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def write_summary(path: Path, kind: str, seed: int, payload: dict) -> Path:
    record = {
        "experiment": kind,
        "seed": seed,
        "version": __version__,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        **_jsonable(payload),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, sort_keys=False) + "\n")
    return path


# -- Burgers ------------------------------------------------------------------

TRAJECTORY_COLS = ("t", "grid_index", "x", "u_classical", "u_variational")
BURGERS_METRIC_COLS = ("t", "infidelity", "min_cost", "circuit_evals", "lambda")


def write_burgers(out: Path, cfg, traj) -> list[Path]:
    x = cfg.grid
    rows = []
    for k, st in enumerate(traj.states):
        u_var = st.u
        for i in range(x.size):
            rows.append((k * cfg.dt, i, x[i], traj.classical[k, i], u_var[i]))
    metrics = [(k * cfg.dt, traj.infidelity[k], traj.min_cost[k], traj.circuit_evals[k], st.lam)
               for k, st in enumerate(traj.states)]
    return [
        write_csv(out / "trajectory.csv", TRAJECTORY_COLS, rows),
        write_csv(out / "metrics.csv", BURGERS_METRIC_COLS, metrics),
    ]


def write_fig3(out: Path, cfg, trajs: dict) -> Path:
    rows = [(name, k * cfg.dt, f) for name, tr in trajs.items() for k, f in enumerate(tr.infidelity)]
    return write_csv(out / "fig3.csv", ("optimizer", "t", "infidelity"), rows)


def write_fig4(out: Path, step_results: dict) -> Path:
    rows = []
    for name, res in step_results.items():
        costs = res.trace.costs()
        exact = [r.info.get("exact_cost", np.nan) for r in res.trace.records]
        run_min = np.minimum.accumulate(costs) if costs.size else costs
        for u, (c, m, e) in enumerate(zip(costs, run_min, exact)):
            rows.append((name, u, c, m, e))
    return write_csv(out / "fig4.csv", ("optimizer", "update", "cost", "running_min", "exact_cost"), rows)


# -- NLSE ---------------------------------------------------------------------

CONVERGENCE_COLS = ("C_E", "dE", "infidelity", "E_P", "E_I", "E_K")


def write_nlse(out: Path, cfg, result) -> list[Path]:
    spec = cfg.ansatz
    psi_var = spec.statevector(result.trace.params.values)
    # global sign is unobservable; align with the reference for readability
    if np.dot(psi_var, result.ground.psi) < 0:
        psi_var = -psi_var
    gs_rows = [(x, a, b) for x, a, b in zip(cfg.grid, result.ground.psi, psi_var)]
    return [
        write_csv(out / "convergence.csv", CONVERGENCE_COLS, result.series),
        write_csv(out / "groundstate.csv", ("x", "psi_gs", "psi_var"), gs_rows),
    ]


def write_fig6(out: Path, results: dict) -> Path:
    rows = [(name, *row[:3]) for name, res in results.items() for row in res.series]
    return write_csv(out / "fig6.csv", ("optimizer", "C_E", "dE", "infidelity"), rows)
