from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from .config import load_graph, load_scenario
from .errors import FovTopoError, InputError, LemmaPreconditionError
from .extended import factorization_residual, lemma_residual, psd_propagation
from .fov import (
    DEFAULT_GRID_RES,
    FovSector,
    approximation_quality,
    default_approximation,
    fit_approximation,
)
from .graph import certify_stability
from .sim import run_sweep, run_to_directory
from .utils.paths import make_output_dir

logger = logging.getLogger(__name__)

LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def configure_logging() -> None:
    """Send diagnostics to stderr at the level named by ``FOV_TOPO_LOG``."""
    name = os.environ.get("FOV_TOPO_LOG", "quiet").strip().lower()
    logging.basicConfig(
        level=LOG_LEVELS.get(name, logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _emit(payload: Any) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def cmd_certify(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph)
    cert = certify_stability(graph, args.tol)
    _emit(cert.model_dump())
    if args.require_psd and not cert.psd:
        print(f"structural matrix is not PSD (min eig {cert.min_eig_sym:.6g})", file=sys.stderr)
        return 1
    return 0


def cmd_fit_fov(args: argparse.Namespace) -> int:
    sector = FovSector(heading=args.heading, central_angle=args.central_angle, range=args.range)
    default = default_approximation(sector)
    fitted = fit_approximation(sector, args.grid_res, args.budget)
    _emit(
        {
            "sector": sector.model_dump(),
            "default": {
                "approx": default.to_json_dict(),
                "quality": approximation_quality(sector, default, args.grid_res).model_dump(),
            },
            "approx": fitted.to_json_dict(),
            "quality": approximation_quality(sector, fitted, args.grid_res).model_dump(),
        }
    )
    return 0


def cmd_extended_check(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph)
    factorization = factorization_residual(graph, args.P)
    try:
        lemma: dict[str, Any] = {
            "applicable": True,
            "residual": lemma_residual(graph, args.P),
            "cycle": None,
        }
    except LemmaPreconditionError as exc:
        lemma = {"applicable": False, "residual": None, "cycle": exc.cycle, "reason": str(exc)}
    prop = psd_propagation(graph, args.P)
    _emit(
        {
            "n": graph.n,
            "edges": [list(e) for e in graph.edges],
            "P": args.P,
            "factorization_residual": factorization,
            "lemma": lemma,
            "psd_propagation": {
                "base_psd": prop.base_psd,
                "base_min_eig": prop.base_min_eig,
                "extended_min_eig": prop.extended_min_eig,
                "tolerance": prop.tolerance,
                "holds": prop.holds,
            },
        }
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_scenario(args.scenario)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    out_dir = make_output_dir(args.out_dir)
    if args.sweep:
        seeds = [config.noise.seed + k for k in range(args.sweep)]
        summaries = run_sweep(config, seeds, out_dir, args.workers)
        _emit(summaries)
        return 0 if all(s["completed"] for s in summaries) else 1
    summary = run_to_directory(config, out_dir)
    _emit(summary)
    if not summary["completed"]:
        print(f"run stopped early: {summary['terminal_event']}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fovtopo", description="Directed limited-FOV topology control toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="PSD certificate of the structural Lyapunov matrix")
    p.add_argument("graph", type=Path, help='graph JSON {"n": int, "edges": [[tail, head], ...]}')
    p.add_argument("--tol", type=float, default=None, help="absolute eigenvalue tolerance")
    p.add_argument("--require-psd", action="store_true", help="exit 1 when not PSD")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("fit-fov", help="fit the virtual-point approximation of a sector")
    p.add_argument("--central-angle", type=float, default=math.pi / 2, help="radians")
    p.add_argument("--range", type=float, default=10.0, help="meters")
    p.add_argument("--heading", type=float, default=0.0, help="mounting angle, radians")
    p.add_argument("--grid-res", type=float, default=DEFAULT_GRID_RES, help="meters")
    p.add_argument("--budget", type=int, default=60, help="IoU evaluations, seed included")
    p.set_defaults(func=cmd_fit_fov)

    p = sub.add_parser("extended-check", help="Kronecker and weight-flip checks")
    p.add_argument("graph", type=Path)
    p.add_argument("--P", type=int, default=4, help="points per agent per edge slot")
    p.set_defaults(func=cmd_extended_check)

    p = sub.add_parser("simulate", help="run a scenario and write its logs")
    p.add_argument("scenario", type=Path)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--seed", type=int, default=None, help="override noise.seed")
    p.add_argument("--sweep", type=int, default=0, help="run this many consecutive seeds")
    p.add_argument("--workers", type=int, default=None, help="processes for --sweep")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FovTopoError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
