"""Cell execution, worker pool, and the results.csv / summary.json writers."""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..learner import ConstantsConfig, averaging_baseline, init_params, run_main, schedule
from ..metrics import disagreement, err_d
from ..oracle import Oracle, derive_seed
from ..vecmath import angle
from .config import CellSpec, RunConfig, build_noise

log = logging.getLogger(__name__)

# wall_ms stays last so determinism checks can drop it with a single cut
COLUMNS = (
    "cell", "point", "seed", "cell_seed", "mode", "eps", "delta", "d", "s", "marginal",
    "noise", "nu", "row", "phase", "angle", "labels", "ex_calls", "error", "error_method",
    "err_d", "support", "config_fingerprint", "errors", "wall_ms",
)
QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)
_MASK = 0xFFFFFFFFFFFFFFFF


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def active_label_budget(eps, delta, s, d, consts: ConstantsConfig) -> int:
    """Labels one active run_main consumes: m + T_init + sum_k T_k."""
    _, phases = schedule(eps, delta, s, d, consts)
    ip = init_params(delta / 2.0, s, d, consts)
    return ip.m + ip.T + sum(p.T for p in phases)


@dataclass
class CellOutcome:
    rows: list
    summary: dict


def run_cell(cell: CellSpec, fingerprint: str = "") -> CellOutcome:
    base = {
        "cell": cell.index, "point": cell.point, "seed": cell.replicate, "cell_seed": cell.seed,
        "mode": cell.mode, "eps": cell.eps, "delta": cell.delta, "d": cell.d, "s": cell.s,
        "marginal": cell.marginal, "noise": cell.noise["kind"], "nu": float(cell.noise["nu"]),
        "config_fingerprint": fingerprint,
    }
    rows = []
    summary = dict(base)
    t0 = time.perf_counter()
    oracle = None
    try:
        consts = ConstantsConfig(**cell.constants)
        oracle = Oracle.build(cell.marginal, cell.d, cell.s, build_noise(cell.noise), cell.seed)
        metric_seed = derive_seed(cell.seed, "metric") & _MASK
        if cell.mode == "baseline":
            m = cell.baseline_m or active_label_budget(cell.eps, cell.delta, cell.s, cell.d, consts)
            u_tilde = averaging_baseline(oracle, m, cell.s)
            K = None
        else:
            u_tilde, result = run_main(cell.eps, cell.delta, cell.s, oracle, consts,
                                       passive=cell.mode == "passive", metric_n=cell.metric_n,
                                       metric_seed=metric_seed)
            K = result.K
            for rec in result.phases:
                rows.append(dict(base, row="phase", phase=rec.k, angle=rec.angle, labels=rec.labels,
                                 ex_calls=rec.ex_calls, error=rec.error,
                                 error_method=rec.error_method, wall_ms=rec.wall_ms))
        err = disagreement(u_tilde, oracle.u, oracle.spec, cell.metric_n, rng=metric_seed)
        emp = err_d(u_tilde, oracle, cell.metric_n)
        final = dict(base, row="final", phase=K, angle=angle(u_tilde, oracle.u),
                     labels=oracle.counters.label_queries, ex_calls=oracle.counters.ex_calls,
                     error=err.value, error_method=err.method, err_d=emp.value,
                     support=";".join(map(str, np.flatnonzero(u_tilde))), errors="",
                     wall_ms=(time.perf_counter() - t0) * 1e3)
        summary.update(K=K, final_angle=final["angle"], final_error=err.value,
                       err_d=emp.value, labels=final["labels"], ex_calls=final["ex_calls"],
                       failed=False, errors="")
    except Exception as exc:  # recorded per cell; the run continues
        log.exception("cell %d failed", cell.index)
        msg = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        labels = oracle.counters.label_queries if oracle is not None else 0
        ex = oracle.counters.ex_calls if oracle is not None else 0
        final = dict(base, row="final", labels=labels, ex_calls=ex, errors=msg,
                     phase=getattr(exc, "phase", None),
                     wall_ms=(time.perf_counter() - t0) * 1e3)
        summary.update(K=None, final_angle=None, final_error=None, err_d=None, labels=labels,
                       ex_calls=ex, failed=True, errors=msg)
    rows.append(final)
    return CellOutcome(rows, summary)


def _run_star(args):
    return run_cell(*args)


def execute(cells: list[CellSpec], fingerprint: str, workers: int = 1) -> list[CellOutcome]:
    """Run cells on a bounded process pool; results come back in cell order."""
    jobs = [(c, fingerprint) for c in cells]
    if workers <= 1 or len(cells) <= 1:
        return [run_cell(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_star, jobs))


def write_csv(path, outcomes: list[CellOutcome]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for out in outcomes:
            for row in out.rows:
                writer.writerow([_fmt(row.get(c)) for c in COLUMNS])


def _quantiles(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None
    qs = np.quantile(np.asarray(vals, dtype=np.float64), QUANTILES)
    return {f"q{int(round(q * 100))}": float(x) for q, x in zip(QUANTILES, qs)}


def summarize(outcomes: list[CellOutcome], cfg: RunConfig) -> dict:
    cells = [o.summary for o in outcomes]
    groups = {}
    for c in cells:
        groups.setdefault((c["point"], c["mode"]), []).append(c)
    group_rows = []
    for (point, mode), members in sorted(groups.items()):
        first = members[0]
        row = {k: first[k] for k in ("point", "mode", "eps", "delta", "d", "s", "marginal",
                                     "noise", "nu")}
        row["n"] = len(members)
        row["failed"] = sum(m["failed"] for m in members)
        for key in ("labels", "ex_calls", "final_error", "final_angle", "err_d"):
            row[key] = _quantiles([m[key] for m in members])
        group_rows.append(row)
    return {
        "config_fingerprint": cfg.fingerprint(),
        "master_seed": cfg.master_seed,
        "cells": cells,
        "groups": group_rows,
    }


def write_outputs(out_dir, outcomes: list[CellOutcome], cfg: RunConfig):
    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, "results.csv"), outcomes)
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summarize(outcomes, cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


__all__ = ["COLUMNS", "CellOutcome", "active_label_budget", "execute", "run_cell",
           "summarize", "write_csv", "write_outputs"]
