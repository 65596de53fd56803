"""Command line entry point: ``mimobeam design`` and ``mimobeam selfcheck``.

Exit codes: 0 success, 1 self-check failure, 2 configuration error,
3 numerical abort.  Set ``MIMOBEAM_LOG`` (e.g. ``INFO``) for progress logs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .array_model import Waveform, cross_correlation
from .config import ConfigError, build_problem, load_config, solver_options
from .majorizer import OffSphereError
from .objective import total_objective
from .solver import MMSolver, MonotonicityError

log = logging.getLogger("mimobeam")

EXIT_OK, EXIT_SELFCHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _write_csv(path: Path, header: str, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _dump_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def design(cfg: dict, workers: int | None = None):
    """Run every replicate of ``cfg``; returns ``(problem, reports)`` in seed order."""
    problem = build_problem(cfg)
    options = solver_options(cfg)
    solver = MMSolver(problem, options)
    R = cfg["solver"]["replicates"]
    seeds = [(options.seed + r) % 2**64 for r in range(R)]
    workers = workers or min(R, os.cpu_count() or 1)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda s: solver.run(seed=s), seeds))
    else:
        results = [solver.run(seed=s) for s in seeds]
    return problem, [rep for _, rep in results]


def write_outputs(cfg: dict, problem, reports, out_dir, fmt: str = "csv"):
    """Write the best replicate's curves plus an aggregate report to ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    best = min(reports, key=lambda r: r.objective)
    spec, geometry = problem.spec, problem.geometry

    trace_rows = list(enumerate(best.objective_trace))
    bp_rows = list(zip(spec.grid.angles, best.profile, best.alpha * spec.desired))
    if fmt == "csv":
        _write_csv(out / "trace.csv", "iteration,objective", trace_rows)
        _write_csv(out / "beampattern.csv", "angle_deg,power,desired_scaled", bp_rows)
    else:
        _dump_json(out / "trace.json", {"iteration": [i for i, _ in trace_rows],
                                        "objective": [float(f) for _, f in trace_rows]})
        _dump_json(out / "beampattern.json", {
            "angle_deg": [float(r[0]) for r in bp_rows],
            "power": [float(r[1]) for r in bp_rows],
            "desired_scaled": [float(r[2]) for r in bp_rows],
        })

    x = best.waveform
    _dump_json(out / "waveform.json", {
        "num_antennas": x.num_antennas,
        "num_samples": x.num_samples,
        "layout": "sample-major",
        "entries": [[float(z.real), float(z.imag)] for z in x.entries],
    })

    t = spec.target_angles_deg
    pairs = [
        {"theta_i_deg": float(t[i]), "theta_j_deg": float(t[j]),
         "magnitude": abs(cross_correlation(x, geometry, t[i], t[j]))}
        for i in range(t.size) for j in range(t.size) if i != j
    ]
    report = {
        "config": cfg,
        "seed": best.seed,
        "status": best.status.value,
        "iterations": best.iterations,
        "alpha": best.alpha,
        "objective": best.objective,
        "matching_error": best.matching_error,
        "sidelobe_energy": best.sidelobe_energy,
        "par": best.par,
        "cross_correlation": pairs,
        "mse": float(np.mean([r.matching_error for r in reports])),
        "replicates": [
            {"seed": r.seed, "status": r.status.value, "iterations": r.iterations,
             "objective": r.objective, "matching_error": r.matching_error, "alpha": r.alpha}
            for r in reports
        ],
        "psi_trace": best.psi_trace,
    }
    _dump_json(out / "report.json", report)
    # timings are kept apart so the other files are reproducible byte for byte
    _dump_json(out / "timing.json", {"wall_time_s": {str(r.seed): r.wall_time for r in reports}})
    return report


def rescore(out_dir) -> tuple[float, float]:
    """Recompute ``(f, alpha)`` from ``report.json`` and ``waveform.json``."""
    out = Path(out_dir)
    report = json.loads((out / "report.json").read_text())
    wf = json.loads((out / "waveform.json").read_text())
    problem = build_problem(report["config"])
    x = Waveform(np.array([complex(re, im) for re, im in wf["entries"]]), wf["num_antennas"])
    return total_objective(x, problem.spec, problem.geometry)


def _cmd_design(args) -> int:
    try:
        cfg = load_config(args.config, seed=args.seed, replicates=args.replicates)
        problem, reports = design(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MonotonicityError, OffSphereError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag is not None:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            parts = diag["parts"]
            _dump_json(out / "diagnostics.json", {
                "iteration": diag["iteration"],
                "f_old": diag["f_old"],
                "f_new": diag["f_new"],
                "iterate": [[z.real, z.imag] for z in diag["iterate"]],
                "psi": {k: getattr(parts, k) for k in ("psi_J1", "psi_J2", "psi_E1", "psi_E2", "lmax_BJ")},
            })
        return EXIT_NUMERIC
    report = write_outputs(cfg, problem, reports, args.out, args.format)
    print(f"status={report['status']} iterations={report['iterations']} "
          f"objective={report['objective']:.6g} mse={report['mse']:.6g} -> {args.out}")
    return EXIT_OK


def _cmd_selfcheck(args) -> int:
    from .oracle import selfcheck

    results = selfcheck(num_instances=args.instances, seed=args.seed)
    ok = True
    for name, passed, err in results:
        print(f"{'PASS' if passed else 'FAIL'}  {name:8s} worst rel. error {err:.3e}")
        ok &= passed
    return EXIT_OK if ok else EXIT_SELFCHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimobeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="design waveforms for a configuration")
    d.add_argument("--config", type=Path, default=None, help="JSON config (defaults if omitted)")
    d.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    d.add_argument("--format", choices=("csv", "json"), default="csv", help="curve output format")
    d.add_argument("--seed", type=int, default=None, help="override solver.seed")
    d.add_argument("--replicates", type=int, default=None, help="override solver.replicates")
    d.set_defaults(func=_cmd_design)

    s = sub.add_parser("selfcheck", help="compare structured code against dense oracles")
    s.add_argument("--instances", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("MIMOBEAM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
