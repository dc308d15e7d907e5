"""Command-line driver.

``multiwalk run --config cfg.json --out-dir out/`` runs a walk and writes the
requested distributions (CSV) and reports (JSON).  ``multiwalk compile
walk-to-net|net-to-walk --in X --out Y`` converts between walk
configurations and optical network files and writes a verification report
next to the output.
"""

from __future__ import annotations

import argparse
import json
import sys
from itertools import combinations_with_replacement
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, check_caps, load_config
from .errors import CapExceededError, ValidationError
from .graph import Graph, build_virtual_graph, etch_defects
from .optics import (
    BeamSplitter,
    compile_network_to_walk,
    compile_walk_to_network,
    dumps_network,
    fock_distance,
    loads_network,
    mode_map_distance,
    network_mode_map,
    routing_plan,
    walk_mode_map,
)
from .walk import (
    DEFAULT_MAX_WALKERS,
    HARD_MAX_WALKERS,
    CPhaseDefect,
    KerrDefect,
    PositionPhase,
    WalkSchedule,
    coincidence_distribution,
    iter_evolve,
    l1_distance,
    position_distribution,
    simulate_virtual,
    spread_statistics,
)

VERIFY_TOL = 1e-9
VIRTUAL_TOL = 1e-10
# two-boson Fock check in compile reports stays cheap up to this many modes
FOCK_CHECK_MODES = 16

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CAP = 3
EXIT_INTERNAL = 4


def _num(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(str(v) if isinstance(v, (int, np.integer)) else _num(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _origin(cfg: RunConfig, g: Graph, initial) -> float:
    if "origin" in cfg.document:
        return float(cfg.document["origin"])
    # mean initial position
    return spread_statistics(position_distribution(g, initial))[0]


def _virtual_inputs(cfg: RunConfig, g: Graph, n: int):
    """Position-level defect pattern for the virtual run, or a ConfigError."""
    requested = []
    for i, (d, when) in enumerate(cfg.defects(g)):
        if not isinstance(d, PositionPhase) or len(d.positions) != n or when is not None:
            raise ConfigError(
                "virtual-compare supports only position defects on all walkers, active at every step",
                f"$.defects[{i}]",
            )
        requested.append((d.positions, d.theta))
    return requested


def run(cfg: RunConfig, out_dir: str | Path, *, max_walkers: int = DEFAULT_MAX_WALKERS) -> dict:
    """Run ``cfg`` and write its outputs into ``out_dir``; returns the summary."""
    out = Path(out_dir)
    g = cfg.graph()
    n = cfg.walkers()
    check_caps(g, n, max_walkers)
    initial = cfg.initial_state(g)
    schedule = cfg.schedule(g)
    outputs = cfg.outputs
    if "coincidence" in outputs or "virtual-compare" in outputs:
        if n < 2:
            raise ConfigError(f"coincidence outputs need at least two walkers, got {n}", "$.outputs")
    virtual_defects = _virtual_inputs(cfg, g, n) if "virtual-compare" in outputs else None
    out.mkdir(parents=True, exist_ok=True)

    origin = _origin(cfg, g, initial) if "spread" in outputs else 0.0
    series = []
    state = initial
    if "spread" in outputs:
        mean, sigma = spread_statistics(position_distribution(g, initial), origin)
        series.append({"t": 0, "mean": mean, "sigma": sigma})
    for t, state in enumerate(iter_evolve(g, initial, schedule, max_walkers=max_walkers), 1):
        if "spread" in outputs:
            mean, sigma = spread_statistics(position_distribution(g, state), origin)
            series.append({"t": t, "mean": mean, "sigma": sigma, "sigma_over_t": sigma / t})

    files = []
    summary: dict = {
        "graph": {"vertices": g.n_vertices, "modes": g.mode_count},
        "walkers": n,
        "steps": cfg.steps,
        "norm_error": abs(state.norm() - 1.0),
    }
    if "position" in outputs:
        dist = position_distribution(g, state)
        rows = [(x, dist.get(x, 0.0)) for x in range(g.n_vertices)]
        _write_csv(out / "position.csv", ["position", "probability"], rows)
        files.append("position.csv")
    if "coincidence" in outputs or "virtual-compare" in outputs:
        coinc = coincidence_distribution(g, state)
    if "coincidence" in outputs:
        rows = [(*key, coinc.get(key, 0.0)) for key in combinations_with_replacement(range(g.n_vertices), n)]
        _write_csv(out / "coincidence.csv", [f"x{i + 1}" for i in range(n)] + ["probability"], rows)
        files.append("coincidence.csv")
    if "spread" in outputs:
        final = series[-1]
        _write_json(out / "spread.json", {"origin": origin, "final": final, "series": series})
        files.append("spread.json")
        summary["sigma"] = final["sigma"]
    if virtual_defects is not None:
        vg = build_virtual_graph(g, n)
        pattern = etch_defects(vg, virtual_defects) if virtual_defects else None
        coins = [s.coins for s in schedule.steps]
        virtual = simulate_virtual(vg, pattern, initial, coins, cfg.steps, defects_first=schedule.defects_first)
        l1 = l1_distance(coinc, virtual)
        _write_json(
            out / "virtual_compare.json",
            {"l1": l1, "tolerance": VIRTUAL_TOL, "ok": l1 <= VIRTUAL_TOL, "virtual_vertices": len(vg.vertices)},
        )
        files.append("virtual_compare.json")
        summary["virtual_l1"] = l1
    summary["files"] = files
    _write_json(out / "summary.json", summary)
    return summary


def _complex_json(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def schedule_document(g: Graph, schedule: WalkSchedule, vertices: int, routing: list | None = None) -> dict:
    """Configuration document describing a compiled walk."""
    per_step = [{"matrices": [[[_complex_json(z) for z in row] for row in m] for m in s.coins.matrices]} for s in schedule.steps]
    defects = []
    for t, s in enumerate(schedule.steps):
        for d in s.defects:
            if isinstance(d, CPhaseDefect):
                entry = {"type": "cphase", "a": list(d.mode_a), "b": list(d.mode_b), "theta": d.theta}
            elif isinstance(d, PositionPhase):
                entry = {"type": "position", "positions": list(d.positions), "theta": d.theta}
            elif isinstance(d, KerrDefect):
                entry = {"type": "kerr", "position": d.position, "phi": d.phi}
            else:  # pragma: no cover - exhaustive over Defect
                raise ValidationError(f"cannot serialise {d!r}")
            entry["steps"] = [t]
            defects.append(entry)
    doc = {
        "schema": 1,
        "graph": {"preset": "complete-with-loops", "size": vertices},
        "coins": {"per_step": per_step},
        "steps": len(schedule.steps),
        "defects": defects,
        "defects_first": schedule.defects_first,
    }
    if routing is not None:
        doc["routing"] = routing
    return doc


def _routing_report(net, vertices: int) -> list[dict]:
    out = []
    for idx, e in enumerate(net.elements):
        if isinstance(e, BeamSplitter):
            plan = routing_plan(e.i, e.j, vertices)
            out.append(
                {
                    "element": idx,
                    "target": [list(m) for m in plan.target],
                    "sequence": [{"op": op.kind, "modes": [list(m) for m in op.modes]} for op in plan.sequence],
                }
            )
    return out


def _fock_check(g, schedule, net) -> float | None:
    if net.mode_count > FOCK_CHECK_MODES:
        return None
    for s in schedule.steps:
        for d in s.defects:
            # one-position phases act per walker only in the network picture
            if isinstance(d, PositionPhase) and len(d.positions) != 2:
                return None
    return fock_distance(g, schedule, net)


def compile_command(direction: str, src: str | Path, dst: str | Path, *, parallel: bool = False) -> dict:
    """Compile ``src`` into ``dst`` and write ``dst`` + ``.report.json``."""
    src, dst = Path(src), Path(dst)
    if direction == "walk-to-net":
        cfg = load_config(src)
        g = cfg.graph()
        schedule = cfg.schedule(g)
        net = compile_walk_to_network(g, schedule)
        dst.write_text(dumps_network(net))
        distance = mode_map_distance(network_mode_map(net), walk_mode_map(g, schedule))
        report = {"direction": direction, "modes": net.mode_count, "elements": len(net.elements)}
    else:
        net = loads_network(src.read_text())
        g, schedule = compile_network_to_walk(net, parallel=parallel)
        vertices = g.n_vertices
        dst.write_text(json.dumps(schedule_document(g, schedule, vertices, _routing_report(net, vertices)), indent=2) + "\n")
        distance = mode_map_distance(walk_mode_map(g, schedule, net.mode_count), network_mode_map(net))
        report = {"direction": direction, "modes": net.mode_count, "vertices": vertices, "walk_steps": len(schedule)}
    fock = _fock_check(g, schedule, net)
    report.update(
        {
            "beamsplitters": net.count(BeamSplitter),
            "mode_map_distance": distance,
            "fock_distance_two_bosons": fock,
            "tolerance": VERIFY_TOL,
            "ok": distance <= VERIFY_TOL and (fock is None or fock <= VERIFY_TOL),
        }
    )
    _write_json(dst.with_name(dst.name + ".report.json"), report)
    return report


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multiwalk", description="Multi-walker quantum walk simulator and optics compiler.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="simulate a walk configuration")
    r.add_argument("--config", required=True, help="JSON configuration document")
    r.add_argument("--out-dir", required=True, help="directory for CSV/JSON outputs")
    r.add_argument(
        "--max-walkers",
        type=int,
        default=DEFAULT_MAX_WALKERS,
        help=f"walker cap (default {DEFAULT_MAX_WALKERS}, hard ceiling {HARD_MAX_WALKERS})",
    )
    c = sub.add_parser("compile", help="convert between walks and optical networks")
    c.add_argument("direction", choices=["walk-to-net", "net-to-walk"])
    c.add_argument("--in", dest="src", required=True, help="input file")
    c.add_argument("--out", dest="dst", required=True, help="output file; the report goes to <out>.report.json")
    c.add_argument("--parallel", action="store_true", help="batch routed beamsplitters on disjoint bundles")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            summary = run(load_config(args.config), args.out_dir, max_walkers=args.max_walkers)
            print(json.dumps(summary, sort_keys=True))
            return EXIT_OK
        report = compile_command(args.direction, args.src, args.dst, parallel=args.parallel)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(report, sort_keys=True))
    if not report["ok"]:
        print(f"internal error: verification distance exceeds {VERIFY_TOL}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
