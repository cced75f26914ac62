"""Command-line entry point: ``coherence-lab <subcommand> ...``.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 failed
verification, 64 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, checks, experiments
from .bases import basis_from_spec, computational, fourier_mub, prime_mub
from .bounds import bound_o, bound_set, mcms_state
from .diagsdp import DiagSdpProblem, DiagSdpSolver, Sense, verify
from .errors import (
    CoherenceLabError,
    ConvergenceFailure,
    NotPSD,
    NotUnitTrace,
    ParseError,
    SolverFailure,
    ValidationError,
)
from .haar import l1_values, scan_max
from .hermlin import DensityMatrix, dagger, format_complex, read_matrix, spectral_decompose, validate_density
from . import measures

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 3, 64
DEFAULT_SEED = 20240917

FIXTURES = {
    "mcms-d4-zero-phase": lambda: mcms_state(4, 0.5),
    "plus-qubit": lambda: mcms_state(2, 1.0),
    "fig2-d4": lambda: _diag([0.1, 0.1, 0.4, 0.4]),
    "fig2-d5": lambda: _diag([0.04, 0.06, 0.1, 0.4, 0.4]),
    "fig2-d6": lambda: _diag([0.02, 0.04, 0.06, 0.08, 0.4, 0.4]),
    "rank2-d4": lambda: _diag([0.6, 0.4, 0.0, 0.0]),
}

log = logging.getLogger("coherence_lab")


def _diag(lam):
    return validate_density(np.diag(lam).astype(complex))


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(message)


def default_seed() -> int:
    env = os.environ.get("COHERENCE_LAB_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"COHERENCE_LAB_SEED must be an integer, got {env!r}")


def parse_spectrum(text: str) -> np.ndarray:
    vals = []
    for k, tok in enumerate(text.split(",")):
        try:
            vals.append(float(tok))
        except ValueError:
            raise ParseError(f"cannot parse eigenvalue {tok.strip()!r}", line=1, column=k + 1)
    lam = np.array(vals)
    if lam.size < 2:
        raise ParseError("a spectrum needs at least two eigenvalues", line=1)
    if np.any(lam < 0):
        raise NotPSD(f"negative eigenvalue {lam.min():g} in spectrum", -lam.min())
    if abs(lam.sum() - 1.0) > 1e-9:
        raise NotUnitTrace(f"eigenvalues sum to {lam.sum():.12g}, not 1", abs(lam.sum() - 1.0))
    return lam


def load_state(args) -> DensityMatrix:
    if getattr(args, "spectrum", None):
        return _diag(parse_spectrum(args.spectrum))
    if getattr(args, "state_file", None):
        return validate_density(read_matrix(args.state_file))
    if getattr(args, "fixture", None):
        return FIXTURES[args.fixture]()
    raise UsageError("give a state with --spectrum, --state-file or --fixture")


def _add_state_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--spectrum", help="comma-separated eigenvalues, e.g. 0.75,0.25")
    g.add_argument("--state-file", type=Path, help="matrix text file: dimension line, then rows")
    g.add_argument("--fixture", choices=sorted(FIXTURES))


def _dump(obj, out=None):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# subcommands


def _resolve_basis(spec, rho):
    d = rho.dim
    if spec == "optimal":
        # columns V H^dag, so that B^dag rho B = H_d V^dag rho V H_d^dag
        u = measures.optimal_unitary(rho)
        return dataclasses.replace(computational(d), kind="custom", vectors=dagger(u))
    return basis_from_spec(spec, d)


def cmd_measure(args):
    rho = load_state(args)
    basis = _resolve_basis(args.basis, rho)
    report = measures.coherence_report(rho, basis, DiagSdpSolver(tol=args.tol))
    if args.basis == "optimal":
        report = dataclasses.replace(report, basis="optimal")
    if args.json:
        _dump(report.to_dict())
        return EXIT_OK
    print(f"# coherence of a {report.dim}-dimensional state in the {report.basis} basis (entropies in bits)")
    for key in ("l1", "rel_entropy", "skew_info", "roc", "weight"):
        print(f"{key:12s} {getattr(report, key)!r}")
    for key, val in report.maxima.items():
        print(f"{key:16s} {val!r}")
    return EXIT_OK


def cmd_bounds(args):
    bs = bound_set(load_state(args))
    if args.json:
        _dump(bs.to_dict())
    else:
        for key, val in bs.to_dict().items():
            print(f"{key:18s} {val!r}")
    return EXIT_OK


def cmd_bases(args):
    if args.kind == "fourier":
        fam = fourier_mub(args.dim)
    elif args.kind == "prime":
        if args.l is None:
            raise UsageError("--kind prime needs --l")
        fam = prime_mub(args.dim, args.l)
    else:
        fam = computational(args.dim)
    m = fam.vectors if args.emit == "matrix" else fam.vectors.conj().T @ fam.vectors
    text = "\n".join(",".join(format_complex(z) for z in row) for row in m) + "\n"
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sdp(args):
    rho = load_state(args)
    problem = DiagSdpProblem(rho, Sense(args.sense), args.tol)
    sol = DiagSdpSolver(tol=args.tol).solve(problem)
    measure = sol.objective - 1 if problem.sense is Sense.DOMINATING else 1 - sol.objective
    _dump(
        {
            "sense": problem.sense.value,
            "x": [float(v) for v in sol.x],
            "objective": sol.objective,
            "measure": measure,
            "gap": sol.gap,
            "iterations": sol.iterations,
            "certificate_min_eig": sol.certificate,
            "verified": verify(sol, problem),
        }
    )
    return EXIT_OK


def _value_fn(name, tol):
    if name == "l1":
        return l1_values
    if name == "skew":
        return measures.skew_info_coherence
    if name == "relent":
        return measures.relative_entropy_coherence
    solver = DiagSdpSolver(tol=tol)
    if name == "roc":
        return lambda s: np.atleast_1d(measures.roc(s, solver))
    return lambda s: np.atleast_1d(measures.coherence_weight(s, solver))


def cmd_scan(args):
    rho = load_state(args)
    if args.threshold == "o_d":
        threshold = bound_o(spectral_decompose(rho))
    elif args.threshold == "none":
        threshold = None
    else:
        threshold = float(args.threshold)
    seed = args.seed if args.seed is not None else default_seed()
    upper = None
    if args.measure != "l1":
        mx = measures.theorem_maxima(spectral_decompose(rho))
        upper = {"roc": mx.roc_max, "weight": mx.weight_max, "skew": mx.skew_max, "relent": mx.rel_entropy_max}[
            args.measure
        ]
    fn = _value_fn(args.measure, args.tol)
    stats = scan_max(rho, args.n, seed, fn, threshold, args.bins, upper=upper, workers=args.threads)
    out = stats.to_dict()
    out.update({"measure": args.measure, "seed": seed, "n": args.n})
    _dump(out, args.out)
    if args.hist:
        e = stats.bin_edges
        lines = ["bin_left,bin_right,count"]
        lines += [f"{float(e[i])!r},{float(e[i + 1])!r},{c}" for i, c in enumerate(stats.counts)]
        args.hist.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def _floats(text):
    return [float(t) for t in text.split(",")]


def cmd_repro(args):
    seed = args.seed if args.seed is not None else default_seed()
    out_dir = Path(args.out)
    t0 = time.perf_counter()
    exp = args.experiment
    if exp == "fig1":
        recs = experiments.fig1_scan(0.125, 0.25, args.steps)
        recs = recs + experiments.fig1_crossings(recs)
        n = None
    elif exp == "fig2":
        n = args.n
        recs = []
        for fam in args.families.split(","):
            recs += experiments.fig2_run(fam, _floats(args.p_grid), n, seed, args.threads)
        recs.sort(key=lambda r: r.experiment_id)
    elif exp == "rank2":
        n = args.n
        recs = experiments.rank2_scan(args.d, args.k_step, n, seed, args.threads)
    else:
        n = args.trials
        recs = experiments.appendix_checks(args.trials, seed)
    files = experiments.write_records(recs, out_dir)
    if args.gnuplot:
        gp = experiments.write_gnuplot(out_dir, exp)
        if gp:
            files.append(gp)
    if args.plot:
        from .plotting import plot_experiment

        png = plot_experiment(exp, recs, out_dir)
        if png:
            files.append(png)
    wall = time.perf_counter() - t0
    experiments.write_manifest(out_dir, exp, seed, n, wall, files, {"argv": args.argv})
    fails = [r for r in recs if r.status == "fail"]
    for f in files:
        print(f)
    if fails:
        print(f"{len(fails)} record(s) with status fail", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args):
    seed = args.seed
    names = checks.QUICK if args.suite == "quick" else checks.SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in names:
        for res in checks.run_suite(name, trials=args.trials, n=args.n, seed=seed, workers=args.threads):
            print(res.line())
            ok &= res.passed
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> Parser:
    p = Parser(prog="coherence-lab", description="Maximal coherence of qudit states over reference bases.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=int, default=1, help="worker threads for Monte-Carlo scans")
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", parser_class=Parser)

    m = sub.add_parser("measure", help="coherence measures and their basis-optimal maxima")
    _add_state_args(m)
    m.add_argument("--basis", default="computational", help="computational | fourier | prime:L | file:PATH | optimal")
    m.add_argument("--tol", type=float, default=1e-7, help="SDP certified-gap tolerance")
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_measure)

    b = sub.add_parser("bounds", help="B_d, O_d, R_d, mixedness and purity")
    _add_state_args(b)
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("bases", help="write a reference basis or its Gram matrix as CSV")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--kind", choices=("computational", "fourier", "prime"), default="fourier")
    s.add_argument("--l", type=int)
    s.add_argument("--emit", choices=("matrix", "gram"), default="matrix")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_bases)

    q = sub.add_parser("sdp", help="solve one diagonal-shift SDP and report the certificate")
    _add_state_args(q)
    q.add_argument("--sense", choices=[v.value for v in Sense], default="dominating")
    q.add_argument("--tol", type=float, default=1e-7)
    q.set_defaults(func=cmd_sdp)

    c = sub.add_parser("scan", help="Haar scan of one measure: maximum, histogram, exceedances")
    _add_state_args(c)
    c.add_argument("--n", type=int, default=1_000_000)
    c.add_argument("--seed", type=int)
    c.add_argument("--measure", choices=("l1", "roc", "weight", "skew", "relent"), default="l1")
    c.add_argument("--threshold", default="o_d", help="o_d | none | a number")
    c.add_argument("--bins", type=int, default=200)
    c.add_argument("--tol", type=float, default=1e-7)
    c.add_argument("--out", type=Path, help="stats JSON (default: stdout)")
    c.add_argument("--hist", type=Path, help="histogram CSV")
    c.set_defaults(func=cmd_scan)

    r = sub.add_parser("repro", help="rerun a reproduction experiment into CSV files")
    r.add_argument("experiment", choices=("fig1", "fig2", "rank2", "appendix"))
    r.add_argument("--n", type=int, default=1_000_000)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", default="results")
    r.add_argument("--steps", type=int, default=10_000, help="fig1 grid points")
    r.add_argument("--families", default="d4,d5,d6")
    r.add_argument("--p-grid", default=",".join(str(p) for p in experiments.PINNED_P))
    r.add_argument("--d", type=int, default=4, help="rank2 dimension")
    r.add_argument("--k-step", type=float, default=0.05)
    r.add_argument("--trials", type=int, default=1000)
    r.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    r.add_argument("--plot", action="store_true", help="also render a PNG")
    r.set_defaults(func=cmd_repro)

    v = sub.add_parser("verify", help="run numerical check suites; exit 3 on any failure")
    v.add_argument("--suite", default="quick", choices=("quick", "all") + checks.SUITES)
    v.add_argument("--trials", type=int)
    v.add_argument("--n", type=int)
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_verify)
    return p


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        args.argv = argv
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"invalid input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SolverFailure, ConvergenceFailure) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (CoherenceLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
