"""JSON and CSV writers shared by the command-line tools."""

from __future__ import annotations

import csv
import json
from itertools import combinations
from pathlib import Path

from .darkstate import aleph_state
from .entanglement import ConcurrenceMap, concurrence_map
from .hilbert import DensityMatrix, overlap

__all__ = [
    "dump_json",
    "trajectory_rows",
    "write_trajectory_csv",
    "write_concurrence_csv",
    "write_rows_csv",
    "state_summary",
]


def dump_json(obj, path: Path | None = None) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def trajectory_rows(traj, graph=None, pair_columns: bool = False) -> tuple[list[str], list[list]]:
    """Table of ``t, trace, excitation_number, p_overlap, purity`` and,
    optionally, ``c_k_j`` for every pair. ``p_overlap`` is filled only when
    ``graph`` is given (it must be bipartite)."""
    header = ["t", "trace", "excitation_number", "p_overlap", "purity"]
    n = traj[0][1].basis.n
    pairs = list(combinations(range(1, n + 1), 2)) if pair_columns else []
    header += [f"c_{k}_{j}" for k, j in pairs]
    aleph = aleph_state(graph, traj[0][1].basis) if graph is not None else None
    rows = []
    for t, rho in traj:
        row = [t, rho.trace, rho.excitation_number(),
               overlap(rho, aleph) if aleph is not None else "", rho.purity()]
        if pairs:
            cmap = concurrence_map(rho)
            row += [cmap[p] for p in pairs]
        rows.append(row)
    return header, rows


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_trajectory_csv(path, traj, graph=None, pair_columns: bool = False):
    write_rows_csv(path, *trajectory_rows(traj, graph, pair_columns))


def write_concurrence_csv(path, cmap: ConcurrenceMap):
    write_rows_csv(path, ["k", "j", "concurrence"], cmap.rows())


def state_summary(rho: DensityMatrix, aleph=None) -> dict:
    cmap = concurrence_map(rho)
    out = {
        "trace": rho.trace,
        "excitation_number": rho.excitation_number(),
        "purity": rho.purity(),
        "concurrence": [{"k": k, "j": j, "concurrence": c} for k, j, c in cmap.rows()],
    }
    if aleph is not None:
        out["p_overlap"] = overlap(rho, aleph)
    return out
