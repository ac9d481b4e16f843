"""Command-line front end.

Subcommands::

    qkcurv model {hp,gr2c} M [--kappa K] [-o PATH] [--format json|bin]
    qkcurv verify [PATH | --model NAME M] [--tol T] [--seed S] [--json]
    qkcurv mu [PATH | --model NAME M] [--restarts K] [--seed S] [--json]
    qkcurv gen --m M [--seed S] [--scale C] -o PATH [--format json|bin]

Exit codes: 0 success, 1 a failing identity, 2 invalid arguments or unreadable
input, 3 model construction or projection failure. Reports go to standard
output and diagnostics to standard error. Setting THREADS runs optimizer
restarts on that many worker threads; the output does not depend on it.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import suite, tensorio
from .curvature import DecompositionError, ProjectionError, QKDecomposition, decompose, random_r1
from .models import ModelConstructionError, ModelSpace, make_model
from .mu_solver import MuOptions, estimate_mu
from .qstruct import standard_structure, structure_residual

M_RANGE = (2, 6)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_CONSTRUCTION = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _workers() -> int:
    raw = os.environ.get("THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"THREADS must be an integer, got {raw!r}")


def _check_m(m: int) -> int:
    lo, hi = M_RANGE
    if not lo <= m <= hi:
        raise UsageError(f"m must lie in [{lo}, {hi}], got {m}")
    return m


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _model_from_args(name: str, m: str, kappa: float = 1.0) -> ModelSpace:
    if name not in ("hp", "gr2c"):
        raise UsageError(f"unknown model {name!r}; expected hp or gr2c")
    try:
        m = int(m)
    except ValueError:
        raise UsageError(f"m must be an integer, got {m!r}")
    return make_model(name, _check_m(m), kappa)


def _load(path: str) -> tensorio.TensorFile:
    try:
        tf = tensorio.read(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}")
    except tensorio.TensorFileError as exc:
        raise UsageError(f"{path}: {exc}")
    _check_m(tf.m)
    return tf


def _structure_of(tf: tensorio.TensorFile):
    Q = tf.quaternionic_structure()
    return Q if Q is not None else standard_structure(tf.m)


def _resolve(args):
    """Return ("model", ModelSpace) or ("tensor", (QKDecomposition, Q)) from path or --model."""
    if (args.path is None) == (args.model is None):
        raise UsageError("give exactly one of PATH or --model NAME M")
    if args.model is not None:
        return "model", _model_from_args(*args.model)
    tf = _load(args.path)
    if tf.kind == "structure":
        return "structure", tf.quaternionic_structure()
    Q = _structure_of(tf)
    T = tf.tensor()
    if tf.kind == "model":
        meta = tf.metadata
        kappa = float(meta.get("kappa", decompose(T, Q).kappa))
        return "model", ModelSpace(str(meta.get("name", "file")), tf.m, T, Q, kappa)
    if tf.kind == "curvature" and tf.metadata.get("role") != "r1":
        return "tensor", (decompose(T, Q), Q)
    kappa = float(tf.metadata.get("kappa", 1.0)) or 1.0
    return "tensor", (QKDecomposition(kappa, T), Q)


def cmd_model(args) -> int:
    if args.kappa <= 0:
        raise UsageError("--kappa must be positive")
    model = _model_from_args(args.name, args.m, args.kappa)
    tf = tensorio.from_model(model)
    if args.output:
        try:
            tensorio.write(tf, args.output, args.format)
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc.strerror or exc}")
    else:
        if args.format == "bin":
            raise UsageError("binary output needs -o PATH")
        sys.stdout.write(tensorio.to_json(tf) + "\n")
    return EXIT_OK


def _run_suite(args):
    kind, obj = _resolve(args)
    if kind == "model":
        return suite.model_suite(obj, args.tol, args.seed, restarts=args.restarts)
    if kind == "structure":
        from .identities import IdentityReport, inputs_hash

        return [IdentityReport("structure", structure_residual(obj), 1, inputs_hash("structure", args.seed), args.tol)]
    dec, Q = obj
    return suite.tensor_suite(dec.r1, Q, args.tol, args.seed, kappa=dec.kappa)


def cmd_verify(args) -> int:
    reports = sorted(_run_suite(args), key=lambda r: r.name)
    if args.json:
        print(_dump([r.as_dict() for r in reports]))
    else:
        width = max(len(r.name) for r in reports)
        for r in reports:
            status = "pass" if r.passed else "FAIL"
            print(f"{r.name:<{width}}  {r.max_residual:.3e}  {status}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_mu(args) -> int:
    kind, obj = _resolve(args)
    if kind == "structure":
        raise UsageError("mu needs a curvature tensor, not a structure file")
    if kind == "model":
        dec, Q = obj.decomposition(), obj.Q
    else:
        dec, Q = obj
    if args.restarts < 1:
        raise UsageError("--restarts must be positive")
    report = estimate_mu(dec, Q, MuOptions(restarts=args.restarts, seed=args.seed, workers=_workers()))
    out = report.as_dict()
    if not args.trace:
        out.pop("trace")
    if args.json:
        print(_dump(out))
    else:
        for key in ("mu_hat", "kappa", "dichotomy_verdict", "restarts", "grid_raw_value", "grid_oracle_value", "first_order_residual"):
            print(f"{key}: {out[key]}")
        print(f"argmax_abc: {out['argmax']['abc']}")
    return EXIT_OK


def cmd_gen(args) -> int:
    _check_m(args.m)
    if args.scale < 0:
        raise UsageError("--scale must be nonnegative")
    Q = standard_structure(args.m)
    r1 = random_r1(Q, args.seed, args.scale)
    tf = tensorio.TensorFile(
        args.m,
        "curvature",
        r1.ravel(),
        np.stack(Q.ops).ravel(),
        {"name": "random-r1", "m": args.m, "seed": args.seed, "scale": args.scale, "role": "r1", "convention": tensorio.CONVENTION},
    ).validate()
    try:
        tensorio.write(tf, args.output, args.format)
    except OSError as exc:
        raise UsageError(f"cannot write {args.output}: {exc.strerror or exc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qkcurv", description="Curvature algebra checks for quaternionic-Kaehler tensors.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pm = sub.add_parser("model", help="write a symmetric-space model tensor")
    pm.add_argument("name")
    pm.add_argument("m")
    pm.add_argument("--kappa", type=float, default=1.0)
    pm.add_argument("-o", "--output")
    pm.add_argument("--format", choices=["json", "bin"], default=None)
    pm.set_defaults(func=cmd_model)

    for name, func, helptext in (("verify", cmd_verify, "run the identity suite"), ("mu", cmd_mu, "estimate mu")):
        ps = sub.add_parser(name, help=helptext)
        ps.add_argument("path", nargs="?")
        ps.add_argument("--model", nargs=2, metavar=("NAME", "M"))
        ps.add_argument("--seed", type=int, default=0)
        ps.add_argument("--restarts", type=int, default=64)
        ps.add_argument("--json", action="store_true")
        if name == "verify":
            ps.add_argument("--tol", type=float, default=1e-8)
        else:
            ps.add_argument("--trace", action="store_true", help="include per-restart values")
        ps.set_defaults(func=func)

    pg = sub.add_parser("gen", help="write a random admissible R1 tensor")
    pg.add_argument("--m", type=int, required=True)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--scale", type=float, default=1.0)
    pg.add_argument("-o", "--output", required=True)
    pg.add_argument("--format", choices=["json", "bin"], default=None)
    pg.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"qkcurv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelConstructionError, ProjectionError) as exc:
        print(f"qkcurv: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except DecompositionError as exc:
        print(f"qkcurv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
