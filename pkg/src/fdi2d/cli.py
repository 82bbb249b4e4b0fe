"""Command-line interface ``fdi2d``.

Exit codes: 0 success (all isolable, prime, all checks pass), 1 input or
validation error, 2 negative verdict (not isolable, not prime, failed
demo check), 3 LMI infeasible. Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import io, lmi, sim
from . import polymat as pm
from . import synthesis as sy
from .bundles import BUNDLES

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NEGATIVE = 2
EXIT_INFEASIBLE = 3


def _err(msg):
    print(f"fdi2d: {msg}", file=sys.stderr)


def _emit(text, out=None):
    if out is None:
        sys.stdout.write(text + "\n")
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def cmd_analyze(args):
    model = io.load(args.system, "system")
    rep = sy.isolability(model)
    for v in rep.verdicts:
        d = v.dims
        word = "isolable" if v.isolable else "not isolable"
        print(f"{v.name}: {word}  dim W* = {d['W*']}  dim S* = {d['S*']}  ({v.reason})")
    for w in rep.warnings:
        _err(f"warning: {w}")
    return EXIT_OK if rep.all_isolable else EXIT_NEGATIVE


def cmd_synthesize(args):
    model = io.load(args.system, "system")
    try:
        design = sy.design_filter(model, args.fault, args.method)
    except KeyError:
        _err(f"unknown fault {args.fault!r}; faults are {[f.name for f in model.faults]}")
        return EXIT_INPUT
    except sy.NotIsolable as exc:
        _err(str(exc))
        return EXIT_NEGATIVE
    except lmi.InfeasibleLMI as exc:
        _err(f"LMI infeasible for fault {args.fault!r}: {exc}")
        return EXIT_INFEASIBLE
    if design.certificate is not None:
        _err(f"certificate margin {design.certificate.margin:.4g}")
    _emit(io.dumps(io.filter_to_dict(design.filter)), args.out)
    return EXIT_OK


def _scenario(args):
    sc = io.load(args.scenario, "scenario")
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    return sc


def _filters(args, model):
    filters = [io.load(p, "filter") for p in args.filters]
    for p, f in zip(args.filters, filters):
        if f.H.shape[1] != model.q or any(K.shape[1] != model.m for K in f.K) \
                or len(f.F) != model.k:
            raise io.DocumentError(f"{p}: filter dimensions do not match the system")
    return filters


def cmd_simulate(args):
    model = io.load(args.system, "system")
    filters = _filters(args, model)
    sc = _scenario(args)
    names = {f.name for f in model.faults}
    for f in sc.faults:
        if f.name not in names:
            raise io.DocumentError(f"scenario fault {f.name!r} is not in the system")
    g = sim.simulate_plant(model, sc)
    u = sc.input_plane(model.m)
    res = [sim.simulate_filter(f, g.y, u, sc)[0] for f in filters]
    if args.thresholds:
        th = io.load(args.thresholds, "thresholds").thresholds
        if len(th) != len(filters):
            raise io.DocumentError("one threshold per filter is required")
    else:
        th = (np.inf,) * len(filters)
    alarms = sim.fdi_decide(res, th)
    if args.out:
        with open(args.out, "w") as fh:
            sim.write_csv(fh, res, alarms)
    else:
        sim.write_csv(sys.stdout, res, alarms)
    for f, a in zip(filters, alarms):
        _err(f"filter {f.target or '?'}: {int(a.sum())} alarm nodes")
    return EXIT_OK


def cmd_threshold(args):
    model = io.load(args.system, "system")
    filters = _filters(args, model)
    sc = _scenario(args).without_faults()
    seed = args.seed if args.seed is not None else 0
    spec = sim.threshold_mc(model, filters, sc, sim.ThresholdSpec(args.runs, args.horizon),
                            seed=seed)
    doc = io.thresholds_to_dict(spec, [f.target for f in filters])
    doc["seed"] = seed
    _emit(io.dumps(doc), args.out)
    return EXIT_OK


def cmd_pbh(args):
    model = io.load(args.system, "system")
    P = pm.pbh(model)
    mode = args.mode.replace("-", "_")
    seed = args.seed if args.seed is not None else 0
    v = pm.zero_prime_check(P, mode=mode, seed=seed)
    doc = {"mode": args.mode, "prime": bool(v.full_rank), "target_rank": v.target_rank}
    if not v.full_rank:
        doc["witness"] = [[float(np.real(z)), float(np.imag(z))] for z in v.witness]
        doc["witness_rank"] = v.witness_rank
    print(json.dumps(doc))
    return EXIT_OK if v.full_rank else EXIT_NEGATIVE


def cmd_demo(args):
    rows = BUNDLES[args.name]()
    width = max(len(r[0]) for r in rows)
    for label, status, detail in rows:
        print(f"{status:<12} {label:<{width}}  {detail}")
    failed = sum(r[1] == "FAIL" for r in rows)
    known = sum(r[1] == "DISCREPANCY" for r in rows)
    print(f"{len(rows) - failed - known} passed, {failed} failed, "
          f"{known} published discrepancies")
    return EXIT_OK if failed == 0 else EXIT_NEGATIVE


_STOCHASTIC = {"simulate", "threshold", "pbh"}


def build_parser():
    p = argparse.ArgumentParser(prog="fdi2d", description="Fault detection and isolation "
                                "for 2D Fornasini-Marchesini systems.")
    p.add_argument("--deterministic", action="store_true",
                   help="require --seed for stochastic commands")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="isolability verdict per fault")
    a.add_argument("system")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synthesize", help="design a detection filter")
    s.add_argument("system")
    s.add_argument("--fault", required=True)
    s.add_argument("--method", choices=("lmi", "none"), default="lmi")
    s.add_argument("--out")
    s.set_defaults(func=cmd_synthesize)

    for name, func, hlp in (("simulate", cmd_simulate, "residual and alarm planes as CSV"),
                            ("threshold", cmd_threshold, "Monte-Carlo alarm thresholds")):
        c = sub.add_parser(name, help=hlp)
        c.add_argument("system")
        c.add_argument("--filters", nargs="+", required=True)
        c.add_argument("--scenario", required=True)
        c.add_argument("--seed", type=int)
        c.add_argument("--out")
        if name == "simulate":
            c.add_argument("--thresholds")
        else:
            c.add_argument("--runs", type=int, default=100)
            c.add_argument("--horizon", type=int)
        c.set_defaults(func=func)

    b = sub.add_parser("pbh", help="zero-prime test of the PBH matrix")
    b.add_argument("system")
    b.add_argument("--mode", choices=("zero-prime", "monomic"), default="zero-prime")
    b.add_argument("--seed", type=int)
    b.set_defaults(func=cmd_pbh)

    d = sub.add_parser("demo", help="run a built-in check bundle")
    d.add_argument("name", choices=sorted(BUNDLES))
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.deterministic and args.command in _STOCHASTIC and args.seed is None:
        _err(f"--seed is required for {args.command} when --deterministic is set")
        return EXIT_INPUT
    try:
        return args.func(args)
    except (io.DocumentError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
