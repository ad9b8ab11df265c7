"""
Command-line entry point.

    python main.py [global flags] <command> [command flags]

Results go to stdout as JSON (or CSV for tables); logs go to stderr.
"""
import argparse
import logging
import os
import sys
import traceback
from typing import Callable, Dict, List, Optional

import numpy as np

from alignment import alignment_residual
from apps import gen_demix_instance, gen_matcomp_instance, run_matcomp_benchmark, run_mca_demix
from atomsets import NuclearBall, SignedBasis
from config import default_seed, settings
from errors import AtomkitError, NumericFailure, UsageError
from formats import json_text, read_element, rows_text, write_json, write_pgm
from linalg_kernels import LinearMap
from logger import logger
from recipes import load_recipe
from selftest import lasso_desk_instance, run_selftests
from solvers import dual_cg_least_squares, least_squares_objective, primal_cg
from utils.init_logger import init_logger

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_SELFTEST = 3


class ArgumentParser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting so cli_main owns the exit code."""

    def error(self, message):
        raise UsageError(message)


def _emit(text: str, out: Optional[str] = None) -> None:
    if out:
        with open(out, 'w') as f:
            f.write(text if text.endswith("\n") else text + "\n")
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _parse_sizes(raw: str) -> List[int]:
    try:
        sizes = [int(s) for s in raw.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sizes must be comma-separated integers, got {raw!r}")
    if not sizes:
        raise UsageError("--sizes needs at least one size")
    return sizes


def _recipe_and_element(args, flag: str = "input") -> tuple:
    desc = load_recipe(args.set)
    return desc, read_element(getattr(args, flag))


def cmd_gauge(args) -> int:
    desc, x = _recipe_and_element(args)
    _emit(json_text(desc.gauge(x)), args.out)
    return EXIT_OK


def cmd_support(args) -> int:
    desc, z = _recipe_and_element(args)
    _emit(json_text(desc.support(z)), args.out)
    return EXIT_OK


def cmd_expose(args) -> int:
    desc, z = _recipe_and_element(args)
    if args.k < 1:
        raise UsageError(f"--k must be at least 1, got {args.k}")
    _emit(json_text(desc.expose(z, args.k).to_dict()), args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    desc, x = _recipe_and_element(args)
    _emit(json_text(desc.decompose(x).to_dict()), args.out)
    return EXIT_OK


def cmd_align(args) -> int:
    desc = load_recipe(args.set)
    x, z = read_element(args.x), read_element(args.z)
    residual = alignment_residual(desc, x, z)
    scale = max(1.0, desc.gauge(x) * desc.support(z))
    _emit(json_text({"residual": residual, "aligned": bool(residual <= args.tol * scale)}), args.out)
    return EXIT_OK


def _solve_problem(args):
    """(operator, b, atomic set, tau, rank-one sampler) for the chosen problem."""
    if args.problem == "lasso":
        A, b, _, tau = lasso_desk_instance(args.seed)
        return A, b, SignedBasis(A.shape[1]), tau, None
    if args.problem == "matcomp":
        inst = gen_matcomp_instance(args.size, args.size, seed=args.seed)
        return LinearMap.masked(inst.omega), inst.b, NuclearBall(args.size, args.size), \
            inst.planted_nuclear, inst.omega.sample_rank_one
    if not (args.set and args.A and args.b):
        raise UsageError("--problem custom needs --set, --A and --b")
    A = read_element(args.A)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    desc = load_recipe(args.set)
    if args.tau is None:
        raise UsageError("--problem custom needs --tau")
    return A, np.atleast_1d(read_element(args.b)), desc, args.tau, None


def cmd_solve(args) -> int:
    A, b, desc, tau, rank_one = _solve_problem(args)
    if args.tau is not None:
        tau = args.tau
    iters = args.iters if args.iters is not None else settings.get_value("solvers", "max_iter")
    if args.solver == "primal":
        x, trace = primal_cg(least_squares_objective(A, b), desc, tau, args.eps, iters)
        result: Dict[str, object] = {"x": x}
    else:
        cert, trace = dual_cg_least_squares(A, b, desc, tau, args.eps, iters, rank_one)
        result = {"support_value": cert.support_value, "exposed": len(cert.exposed.atoms)}
        if args.problem != "matcomp":
            result["z_star"] = cert.z_star
    result.update({"problem": args.problem, "solver": args.solver, "tau": tau,
                   "iterations": trace.iterations, "converged": trace.converged,
                   "gap": trace.final_gap, "objective": trace.final_objective})
    if args.trace:
        trace.write_csv(args.trace)
    _emit(json_text(result), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = _parse_sizes(args.sizes)
    iters = args.iters if args.iters is not None else settings.get_value("apps", "matcomp_iters")
    rows = run_matcomp_benchmark(sizes, iters=iters, ell=settings.get_value("apps", "ell"),
                                 seed=args.seed, jobs=args.jobs, record_time=not args.no_time,
                                 density=settings.get_value("apps", "matcomp_density"),
                                 noise=settings.get_value("apps", "matcomp_noise"))
    _emit(rows_text(rows, include_time=not args.no_time), args.out)
    return EXIT_OK


def cmd_demix(args) -> int:
    size = args.size if args.size is not None else settings.get_value("apps", "demix_size")
    iters = args.iters if args.iters is not None else settings.get_value("apps", "demix_iters")
    inst = gen_demix_instance(size=size, seed=args.seed)
    result = run_mca_demix(inst, tau=args.tau, iters=iters)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for name, image in result.images.items():
            write_pgm(os.path.join(args.out, f"{name}.pgm"), image)
        write_json(os.path.join(args.out, "metrics.json"), result.metrics)
        logger.info(f"Wrote demix images and metrics to {args.out}")
    sys.stdout.write(json_text(result.metrics) + "\n")
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = run_selftests(args.filter, args.full, args.seed)
    if not results:
        raise UsageError(f"--filter {args.filter!r} matches no suite")
    sys.stdout.write(json_text({r.name: r.to_dict() for r in results}) + "\n")
    return EXIT_OK if all(r.ok for r in results) else EXIT_SELFTEST


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="atomkit", description="Atomic sets, alignment and conditional gradient.")
    parser.add_argument("--seed", type=int, default=None, help="random seed (default: $ATOMKIT_SEED or 0)")
    parser.add_argument("--config", help="JSON configuration overrides")
    parser.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    parser.add_argument("--log-json", action="store_true", help="emit logs as JSON records")
    parser.add_argument("--log-file", help="also log to this file under logs/")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def with_set(p, element_flag: Optional[str] = "--input"):
        p.add_argument("--set", required=True, help="atomic set recipe (JSON)")
        if element_flag:
            p.add_argument(element_flag, required=True, help="element CSV")
        p.add_argument("--out", help="write the result here instead of stdout")
        return p

    with_set(sub.add_parser("gauge", help="gauge of an element")).set_defaults(func=cmd_gauge)
    with_set(sub.add_parser("support", help="support function at a direction")).set_defaults(func=cmd_support)
    p = with_set(sub.add_parser("expose", help="exposed atoms at a direction"))
    p.add_argument("--k", type=int, default=1, help="maximum number of atoms")
    p.set_defaults(func=cmd_expose)
    with_set(sub.add_parser("decompose", help="atomic decomposition of an element")).set_defaults(func=cmd_decompose)

    p = with_set(sub.add_parser("align", help="alignment residual of a pair"), None)
    p.add_argument("--x", required=True, help="primal element CSV")
    p.add_argument("--z", required=True, help="dual element CSV")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("solve", help="conditional gradient on a least-squares problem")
    p.add_argument("--problem", choices=["lasso", "matcomp", "custom"], default="lasso")
    p.add_argument("--solver", choices=["primal", "dual"], default="primal")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--size", type=int, default=100, help="matrix size for --problem matcomp")
    p.add_argument("--set", help="recipe for --problem custom")
    p.add_argument("--A", help="operator matrix CSV for --problem custom")
    p.add_argument("--b", help="observation CSV for --problem custom")
    p.add_argument("--trace", help="write the iteration trace CSV here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="benchmarks")
    p.add_argument("name", choices=["matcomp"])
    p.add_argument("--sizes", default="100,250")
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-time", action="store_true", help="omit timing columns")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("demix", help="sparse + low-rank + DCT demixing")
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--out", help="directory for PGM images and metrics.json")
    p.set_defaults(func=cmd_demix)

    p = sub.add_parser("selftest", help="run the property suites")
    p.add_argument("--filter", default=None, help="run suites whose name contains this")
    p.add_argument("--full", action="store_true", help="use the full trial counts")
    p.set_defaults(func=cmd_selftest)
    return parser


def _configure(args) -> None:
    if args.config:
        settings.load_config(args.config)
    level_name = args.log_level or settings.get_value("logging", "level")
    init_logger(log_level=getattr(logging, str(level_name).upper(), logging.WARNING),
                log_to_file=bool(args.log_file), log_file=args.log_file,
                json_format=args.log_json or bool(settings.get_value("logging", "json")))
    if args.seed is None:
        args.seed = default_seed()


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _configure(args)
        handler: Callable = args.func
        return handler(args)
    except SystemExit as e:
        return int(e.code or 0)
    except UsageError as e:
        sys.stderr.write(f"atomkit: usage error: {e}\n")
        return EXIT_USAGE
    except NumericFailure as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.stderr.write(f"atomkit: numeric failure: {type(e).__name__}: {e}\n")
        return EXIT_NUMERIC
    except AtomkitError as e:
        sys.stderr.write(f"atomkit: {e}\n")
        return EXIT_NUMERIC
    except np.linalg.LinAlgError as e:
        logger.error(traceback.format_exc())
        sys.stderr.write(f"atomkit: numeric failure: LinAlgError: {e}\n")
        return EXIT_NUMERIC
    except ValueError as e:
        logger.error(traceback.format_exc())
        sys.stderr.write(f"atomkit: usage error: {e}\n")
        return EXIT_USAGE
    except OSError as e:
        logger.error(traceback.format_exc())
        sys.stderr.write(f"atomkit: usage error: {e}\n")
        return EXIT_USAGE


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
