"""Command-line entry point.

    xynet simulate|predict|verify|conjecture|map-polariton --config CFG
          [--out DIR] [--seed INT] [--strict]

Exit codes: 0 success, 1 scientific mismatch or bound violation,
2 configuration / validation error, 3 numerical failure. Every command
validates its whole configuration before computing, and writes files only
after all computation succeeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import darkstate, optimizer, polariton, reports
from .dynamics import (
    MAX_SUPEROP_DIM,
    ConvergenceError,
    DimensionCapError,
    NumericalInstabilityError,
    build_liouvillian,
    evolve,
    steady_state,
)
from .entanglement import concurrence_map
from .hilbert import DensityMatrix, PureState, basis_state, build_basis, overlap, state_from_json
from .topology import (
    NetworkGraph,
    OddCycleError,
    Resonance,
    classify_topology,
    graph_from_json,
    graph_to_json,
    resonance_check,
    validate_graph,
)

logger = logging.getLogger("xynet")

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
STEADY_METHODS = ("auto", "kernel_projection", "long_time")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    graph: NetworkGraph | None
    initial_state: object = "aleph"
    t_final: float = 50.0
    dt: float | None = None
    stride: int = 1
    steady_method: str = "auto"
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    tolerance: float = 1e-5
    pair_columns: bool = False
    conjecture: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def load_config(path, seed: int | None = None, need_graph: bool = True) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    try:
        g = graph_from_json(raw["graph"]) if need_graph or "graph" in raw else None
        evo = raw.get("evolution", {})
        cfg = RunConfig(
            graph=g,
            initial_state=raw.get("initial_state", "aleph"),
            t_final=float(evo.get("t_final", 50.0)),
            dt=None if evo.get("dt") is None else float(evo["dt"]),
            stride=int(evo.get("stride", 1)),
            steady_method=raw.get("steady_method", "auto"),
            outputs=dict(raw.get("outputs", {})),
            seed=int(raw.get("seed", 0) if seed is None else seed),
            tolerance=float(raw.get("tolerance", 1e-5)),
            pair_columns=bool(raw.get("outputs", {}).get("pair_columns", False)),
            conjecture=dict(raw.get("conjecture", {})),
            raw=raw,
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    if not cfg.t_final > 0:
        raise ConfigError("evolution.t_final must be positive")
    if cfg.stride < 1:
        raise ConfigError("evolution.stride must be >= 1")
    if cfg.steady_method not in STEADY_METHODS:
        raise ConfigError(f"steady_method must be one of {STEADY_METHODS}")
    if cfg.graph is not None:
        v = validate_graph(cfg.graph)
        if not v.ok:
            raise ConfigError("invalid graph: " + "; ".join(v.violations))
        if "initial_state" in raw:
            initial_state(cfg)
    return cfg


def initial_state(cfg: RunConfig) -> DensityMatrix:
    """Resolve the configured initial state on the smallest adequate basis."""
    g, spec = cfg.graph, cfg.initial_state
    try:
        if spec == "vacuum":
            return PureState(build_basis(g.n, 1), basis_state(build_basis(g.n, 1))).density_matrix()
        if spec == "aleph":
            return darkstate.aleph_state(g).density_matrix()
        if isinstance(spec, dict) and "single" in spec:
            k = int(spec["single"])
            _check_sites(g, [k])
            return PureState(build_basis(g.n, 1), basis_state(build_basis(g.n, 1), [k])).density_matrix()
        if isinstance(spec, dict) and "optm" in spec:
            sites = [int(k) for k in spec["optm"]]
            _check_sites(g, sites)
            return darkstate.optimal_initial_state(g, sites).density_matrix()
        if isinstance(spec, dict) and "excited" in spec:
            sites = sorted({int(k) for k in spec["excited"]})
            _check_sites(g, sites)
            b = build_basis(g.n, max(1, len(sites)))
            return PureState(b, basis_state(b, sites)).density_matrix()
        if isinstance(spec, dict) and "amplitudes" in spec:
            psi = state_from_json(spec)
            if psi.basis.n != g.n:
                raise ConfigError("custom state has the wrong number of qubits")
            return psi.density_matrix()
    except ConfigError:
        raise
    except OddCycleError as exc:
        raise ConfigError(f"initial state needs a bipartite graph: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid initial_state: {exc}") from exc
    raise ConfigError(f"unknown initial_state {spec!r}")


def _check_sites(g: NetworkGraph, sites):
    if not sites or any(not 1 <= k <= g.n for k in sites):
        raise ConfigError(f"initial_state sites {sites} outside 1..{g.n}")


def _out_path(args, cfg: RunConfig, key: str, default: str) -> Path:
    path = Path(args.out) / cfg.outputs.get(key, default)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _steady(spec, rho0, method: str) -> DensityMatrix:
    if method == "auto":
        method = "kernel_projection" if spec.dim ** 2 <= MAX_SUPEROP_DIM else "long_time"
    return steady_state(spec, rho0, method)


def _graph_info(g: NetworkGraph) -> dict:
    topo = classify_topology(g)
    res = resonance_check(g)
    return {
        "graph": graph_to_json(g),
        "topology": topo.kind.value,
        "odd_cycle": list(topo.witness) if topo.witness else None,
        "resonance": res.kind.value,
        "detuning": list(res.per_vertex),
    }


def _aleph_or_none(g: NetworkGraph, basis):
    return darkstate.aleph_state(g, basis) if classify_topology(g).bipartite else None


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.seed)
    rho0 = initial_state(cfg)
    spec = build_liouvillian(cfg.graph, rho0.basis)
    try:
        traj = evolve(spec, rho0, cfg.t_final, cfg.dt, cfg.stride)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    steady = _steady(spec, rho0, cfg.steady_method)
    aleph = _aleph_or_none(cfg.graph, rho0.basis)
    header, rows = reports.trajectory_rows(traj, cfg.graph if aleph is not None else None,
                                           cfg.pair_columns)
    report = {
        "command": "simulate",
        **_graph_info(cfg.graph),
        "t_final": cfg.t_final,
        "steps": len(traj) - 1,
        "final": reports.state_summary(traj[-1][1], aleph),
        "steady": reports.state_summary(steady, aleph),
        "steady_method": cfg.steady_method,
    }
    reports.write_rows_csv(_out_path(args, cfg, "trajectory_csv", "trajectory.csv"), header, rows)
    reports.dump_json(report, _out_path(args, cfg, "report_json", "report.json"))
    return EXIT_OK


def _prediction_inputs(cfg: RunConfig):
    g = cfg.graph
    topo = classify_topology(g)
    if not topo.bipartite:
        raise ConfigError(f"graph is not bipartite (odd cycle {list(topo.witness)})")
    rho0 = initial_state(cfg)
    if rho0.max_weight() > 1:
        raise ConfigError("initial state has support beyond one excitation")
    return rho0


def cmd_predict(args) -> int:
    cfg = load_config(args.config, args.seed)
    rho0 = _prediction_inputs(cfg)
    if resonance_check(cfg.graph).kind is Resonance.OFF_RESONANT:
        raise ConfigError("onsite energies violate the resonance condition")
    report = darkstate.prediction_report(rho0, cfg.graph)
    reports.dump_json(report, _out_path(args, cfg, "report_json", "prediction.json"))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config, args.seed)
    rho0 = _prediction_inputs(cfg)
    g = cfg.graph
    refused = None
    try:
        p = darkstate.predict_p(rho0, g)
    except darkstate.PreconditionError as exc:
        # still simulate so the diff table shows how far off the naive value is
        refused = str(exc)
        p = overlap(rho0, darkstate.aleph_state(g, rho0.basis))
    spec = build_liouvillian(g, rho0.basis)
    steady = _steady(spec, rho0, cfg.steady_method)
    cmap = concurrence_map(steady)
    table = []
    for k, j, measured in cmap.rows():
        predicted = 2.0 * p / g.n
        table.append({"k": k, "j": j, "predicted": predicted, "measured": measured,
                      "abs_diff": abs(measured - predicted)})
    worst = max(r["abs_diff"] for r in table)
    ok = refused is None and worst <= cfg.tolerance
    report = {
        "command": "verify",
        **_graph_info(g),
        "p_predicted": p,
        "tolerance": cfg.tolerance,
        "max_abs_diff": worst,
        "prediction_refused": refused,
        "steady_method": cfg.steady_method,
        "pairs": table,
        "match": ok,
    }
    reports.dump_json(report, _out_path(args, cfg, "report_json", "verify.json"))
    for r in table:
        print(f"({r['k']},{r['j']})  predicted={r['predicted']:.10f}  "
              f"measured={r['measured']:.10f}  diff={r['abs_diff']:.2e}")
    if refused:
        print(f"prediction refused: {refused}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_conjecture(args) -> int:
    cfg = load_config(args.config, args.seed)
    c = cfg.conjecture
    try:
        budget = int(c.get("budget", 5000))
        restarts = int(c.get("restarts", optimizer.DEFAULT_RESTARTS))
        N_max = c.get("N_max")
        N_max = None if N_max is None else int(N_max)
        all_supports = c.get("all_supports")
        tol = float(c.get("tolerance", optimizer.HOLD_TOL))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid conjecture settings: {exc}") from exc
    if budget < 1:
        raise ConfigError("conjecture.budget must be positive")
    if restarts < 1:
        raise ConfigError("conjecture.restarts must be positive")
    try:
        found = optimizer.conjecture_sweep(cfg.graph, N_max, budget, restarts=restarts,
                                           seed=cfg.seed, all_supports=all_supports, tol=tol)
    except darkstate.PreconditionError as exc:
        raise ConfigError(str(exc)) from exc
    rows = optimizer.summarize(found)
    reports.dump_json([r.to_dict() for r in found],
                      _out_path(args, cfg, "report_json", "conjecture.json"))
    reports.write_rows_csv(_out_path(args, cfg, "summary_csv", "conjecture.csv"),
                           ["n", "N", "m", "best_value", "formula_value", "holds"],
                           [[r[k] for k in ("n", "N", "m", "best_value", "formula_value", "holds")]
                            for r in rows])
    for r in rows:
        print(f"n={r['n']} N={r['N']} m={r['m']}  best={r['best_value']:.8f}  "
              f"2m/n^2={r['formula_value']:.8f}  {'holds' if r['holds'] else 'VIOLATED'}")
    return EXIT_OK if all(r["holds"] for r in rows) else EXIT_MISMATCH


def cmd_map_polariton(args) -> int:
    cfg = load_config(args.config, args.seed, need_graph=False)
    raw = cfg.raw
    try:
        params = polariton.params_from_json(raw["polariton"])
        ratio = float(raw.get("strong_coupling_ratio", polariton.STRONG_COUPLING_RATIO))
        gamma = raw.get("gamma", 1.0)
        eff = polariton.effective_parameters(params, ratio=ratio, strict=args.strict)
        g = polariton.to_network(eff, gamma)
    except polariton.RegimeError as exc:
        raise ConfigError(f"regime violation: {exc}") from exc
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid polariton parameters: {exc}") from exc
    report = {"command": "map-polariton", "effective": polariton.effective_to_json(eff),
              **_graph_info(g)}
    reports.dump_json(report, _out_path(args, cfg, "report_json", "polariton.json"))
    for w in eff.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "predict": cmd_predict,
    "verify": cmd_verify,
    "conjecture": cmd_conjecture,
    "map-polariton": cmd_map_polariton,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xynet", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--strict", action="store_true",
                        help="treat physical-regime warnings as errors")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalInstabilityError, ConvergenceError, DimensionCapError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
