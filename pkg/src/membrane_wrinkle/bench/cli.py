"""Command line interface.

    membrane-wrinkle run CONFIG [--mesh NxM] [--degree P] [--eta V] [--steps N]
                                [--tol T] [--out DIR]
    membrane-wrinkle sweep CONFIG --param eta --values 1e-8 1e-6 1e-4 [--out DIR]
    membrane-wrinkle verify
    membrane-wrinkle reference pure-bending --ratio R [--points N]

``run`` exits with 0 when the solve converged and every applicable
reference check passed, 1 otherwise, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from ..errors import ConfigError, DomainError, MembraneError, SolverError
from .analytic import reference_table
from .benchmarks import run_benchmark
from .checks import check_report
from .config import load_config
from .outputs import write_outputs
from .verify import run_verify

log = logging.getLogger("membrane_wrinkle")

SWEEP_PARAMS = ("eta", "mesh", "degree", "nu", "steps", "ratio")


def _mesh(text):
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"mesh must look like 8x8, got {text!r}") from None
    if nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError("mesh divisions must be positive")
    return nx, ny


def _parser():
    ap = argparse.ArgumentParser(prog="membrane-wrinkle", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one benchmark configuration")
    run.add_argument("config")
    run.add_argument("--mesh", type=_mesh)
    run.add_argument("--degree", type=int)
    run.add_argument("--eta", type=float)
    run.add_argument("--steps", type=int)
    run.add_argument("--tol", type=float)
    run.add_argument("--out")

    sw = sub.add_parser("sweep", help="repeat a run over values of one parameter")
    sw.add_argument("config")
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sw.add_argument("--values", required=True, nargs="+")
    sw.add_argument("--out")

    sub.add_parser("verify", help="run the built-in property checks")

    ref = sub.add_parser("reference", help="print the closed-form reference profile")
    ref.add_argument("benchmark", choices=["pure-bending"])
    ref.add_argument("--ratio", type=float, required=True, help="2M/PH")
    ref.add_argument("--points", type=int, default=11)
    return ap


def _print_report(rep, elapsed):
    tr = rep.trace
    iters = [s.iterations for s in tr.steps]
    print(f"{rep.spec.benchmark}: mesh {rep.spec.mesh[0]}x{rep.spec.mesh[1]}, p={rep.spec.degree}, "
          f"eta={rep.spec.params.eta:g}, {len(iters)} steps, iterations {iters}, {elapsed:.1f} s")
    for p in rep.probes:
        extra = f"  (nearest point at {p.distance:.3g} m)" if p.distance else ""
        print(f"  {p.name:<10s} {p.value: .6g} {p.unit}{extra}")
    if "band_height" in rep.extra:
        print(f"  band height h/H = {rep.extra['band_height']:.4f}")


def _execute(spec):
    t0 = time.perf_counter()
    rep = run_benchmark(spec)
    elapsed = time.perf_counter() - t0
    _print_report(rep, elapsed)
    checks = check_report(rep)
    for c in checks:
        print("  " + c.line())
    if spec.output:
        paths = write_outputs(rep, spec.output)
        print(f"  outputs written to {Path(paths['probes']).parent}")
    return rep, all(c.passed for c in checks)


def _cmd_run(args):
    spec = load_config(args.config).with_overrides(
        mesh=args.mesh, degree=args.degree, eta=args.eta, steps=args.steps, tol=args.tol, out=args.out
    )
    _, ok = _execute(spec)
    return 0 if ok else 1


def _sweep_spec(spec, param, raw):
    if param == "mesh":
        return spec.with_overrides(mesh=_mesh(raw)), raw
    if param in ("degree", "steps"):
        return spec.with_overrides(**{param: int(raw)}), raw
    value = float(raw)
    if param == "ratio":
        return spec.with_overrides(loads={"ratio": value}), raw
    return spec.with_overrides(**{param: value}), raw


def _cmd_sweep(args):
    base = load_config(args.config)
    root = args.out or base.output
    ok_all = True
    rows = []
    for raw in args.values:
        spec, label = _sweep_spec(base, args.param, raw)
        if root:
            spec = spec.with_overrides(out=str(Path(root) / f"{args.param}={label}"))
        try:
            rep, ok = _execute(spec)
        except SolverError as exc:
            print(f"  {args.param}={label}: {exc}")
            ok_all = False
            continue
        ok_all &= ok
        rows.append((label, rep))
    if rows:
        names = [p.name for p in rows[0][1].probes]
        print(",".join([args.param] + names))
        for label, rep in rows:
            print(",".join([label] + [f"{p.value:.6g}" for p in rep.probes]))
    return 0 if ok_all else 1


def _cmd_verify(_args):
    checks = run_verify()
    for c in checks:
        print(c.line())
    return 0 if all(c.passed for c in checks) else 1


def _cmd_reference(args):
    h, table = reference_table(args.ratio, args.points)
    print(f"2M/PH = {args.ratio:g}: band height h/H = {h:.6f}")
    print("y/H,sigma_x/sigma0")
    for y, s in table:
        print(f"{y:.6f},{s:.6f}")
    return 0


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "verify": _cmd_verify, "reference": _cmd_reference}


def main(argv=None):
    args = _parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MembraneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
