"""Command-line entry point: ``secure-swipt <command> ...``.

Exit status is 0 on success, 1 when a run completes but a check fails
(verification, recovery, solver breakdown) and 2 for usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .baselines import SCHEMES, solve_scheme
from .conic import SolverOptions
from .checks import SuiteSpec, verify_suite
from .errors import BuildError, ConfigError, ContractError, RecoveryError
from .io import read_instance, recovery_dict, write_instance, write_solution
from .recovery import construct_rank_one
from .scenario import CONFIG_SCHEMA, ScenarioConfig, generate_scenario, load_config
from .sdp import INFEASIBLE, ProblemInstance, verify_primal
from .sweep import SWEEP_SCHEMA, SweepSpec, emit_csv, run_sweep

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2

_log = logging.getLogger("secure_swipt")


class _Usage(Exception):
    pass


def _load_spec(path: str | None) -> SweepSpec:
    """A sweep file, or a bare scenario file used as the sweep's base."""
    if path is None:
        return SweepSpec()
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise _Usage(f"cannot read {p}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise _Usage(f"{p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise _Usage(f"{p} must contain a JSON object")
    if data.get("schema") == CONFIG_SCHEMA:
        return SweepSpec(base=load_config(p))
    if data.get("schema", SWEEP_SCHEMA) != SWEEP_SCHEMA:
        raise _Usage(f"{p}: unknown schema {data.get('schema')!r}")
    return SweepSpec.from_dict(data)


def _solver(args) -> SolverOptions:
    tol = getattr(args, "tol", None)
    return SolverOptions() if tol is None else SolverOptions(feastol=tol, reltol=tol)


# ------------------------------------------------------------------ commands

def cmd_sweep(args) -> int:
    spec = _load_spec(args.config)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.scheme:
        overrides["schemes"] = tuple(args.scheme)
    if overrides:
        spec = SweepSpec.from_dict({**spec.to_dict(), **{k: list(v) if isinstance(v, tuple) else v
                                                          for k, v in overrides.items()}})

    def progress(done):
        if not args.quiet:
            print(f"\rtrials {done}/{spec.trials}", end="", file=sys.stderr, flush=True)

    report = run_sweep(spec, _solver(args), progress)
    if not args.quiet:
        print(file=sys.stderr)
    emit_csv(report, args.out)
    failed = sum(not r.feasible for r in report.results)
    print(f"wrote {len(report.rows)} rows to {args.out} ({failed} of {len(report.results)} solves unusable)")
    return EXIT_OK


def cmd_solve_one(args) -> int:
    inst = read_instance(args.instance)
    sol, cert = solve_scheme(inst, args.scheme, _solver(args))
    feas = rec = None
    code = EXIT_OK
    if sol.is_optimal:
        feas = verify_primal(inst, sol, args.verify_tol)
        if args.scheme == "optimal":
            try:
                rec = recovery_dict(sol, construct_rank_one(sol, cert, inst))
            except RecoveryError as exc:
                rec = recovery_dict(sol, error=exc)
                code = EXIT_CHECK
        elif not feas.feasible:
            code = EXIT_CHECK
    elif sol.status != INFEASIBLE:
        code = EXIT_CHECK
    write_solution(args.out, sol, cert, feas, rec)
    msg = f"{args.scheme}: {sol.status}"
    if sol.is_optimal:
        msg += f", {sol.objective_w:.6g} W"
    if rec is not None:
        msg += f", rank-one via {rec.get('method', 'nothing (failed)')}"
    print(msg)
    return code


def cmd_verify(args) -> int:
    base = _load_spec(args.config).base
    spec = SuiteSpec(
        seeds=args.seeds, base=base, solver_tol=args.solver_tol, fuzz=args.fuzz,
        invariance_seeds=min(args.seeds, 20), monotone_seeds=min(args.seeds, 5),
    )

    def progress(done, total):
        if not args.quiet:
            print(f"\rsolves {done}/{total}", end="", file=sys.stderr, flush=True)

    report = verify_suite(spec, progress)
    if not args.quiet:
        print(file=sys.stderr)
    for line in report.lines():
        print(line)
    print(f"{'all checks passed' if report.passed else 'CHECKS FAILED'} in {report.elapsed_s:.1f} s")
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_print_config(args) -> int:
    print(json.dumps(_load_spec(args.config).to_dict(), indent=2))
    return EXIT_OK


def cmd_make_instance(args) -> int:
    cfg = _load_spec(args.config).base if args.config else ScenarioConfig()
    if args.n_tx is not None:
        cfg = cfg.replace(n_tx=args.n_tx)
    if args.gamma_db is not None:
        cfg = cfg.replace(gamma_req_db=args.gamma_db)
    ch = generate_scenario(cfg, args.seed)
    write_instance(ProblemInstance(ch, cfg), args.out)
    print(f"wrote instance (seed {args.seed}, N_T={cfg.n_tx}) to {args.out}")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="secure-swipt", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte-Carlo sweep to CSV")
    p.add_argument("--config", help="sweep or scenario JSON file (defaults if omitted)")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=_positive_int)
    p.add_argument("--scheme", action="append", choices=SCHEMES, help="restrict to this scheme (repeatable)")
    p.add_argument("--tol", type=_positive_float, help="solver feasibility and gap tolerance")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("solve-one", help="solve one serialized instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scheme", choices=SCHEMES, default="optimal")
    p.add_argument("--tol", type=_positive_float)
    p.add_argument("--verify-tol", type=_positive_float, default=1e-6)
    p.set_defaults(func=cmd_solve_one)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--seeds", type=_positive_int, default=200)
    p.add_argument("--config", help="sweep or scenario JSON whose scenario is used")
    p.add_argument("--solver-tol", type=_positive_float, default=1e-9)
    p.add_argument("--fuzz", type=_positive_int, default=1000, help="random matrices per fuzz check")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("print-config", help="print the resolved sweep configuration")
    p.add_argument("--config")
    p.set_defaults(func=cmd_print_config)

    p = sub.add_parser("make-instance", help="draw one instance for solve-one")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-tx", type=int)
    p.add_argument("--gamma-db", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_instance)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (_Usage, ConfigError, ContractError, BuildError) as exc:
        print(f"secure-swipt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"secure-swipt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
