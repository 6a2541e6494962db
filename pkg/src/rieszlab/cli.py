"""Batch front end.

Every command writes one JSON report ``{command, config, version, results}``
to ``--out`` (or stdout).  Exit status: 0 success, 1 validation error,
2 numerical error (truncation tie, degenerate input, violated contract).
"""
import argparse
import math
import os
import sys
import time

import numpy as np

from . import __version__, _config
from .blowup import main_lemma_ratio, multiscale_energy_profile
from .defect import (
    DEFAULT_STEPS,
    exterior_field,
    defect_functional,
    reflectionless_pairing,
    variational_derivative,
)
from .errors import NumericalError, RieszLabError, ValidationError
from .generators import CantorSpec, cantor_measure, random_cloud, segment_uniform
from .io import atomic_write, dumps, read_measure, read_test_function, write_measure
from .kernels import KernelSpec
from .measure import Ball, density, find_thin_ball, poisson_density
from .symmetrization import global_identity_check, pointwise_identity_check, total_energy
from .transforms import transform_field
from .treecode import contract_deviation, tree_transform_field


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _ball_arg(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ball must be 'c1,...,cd,r', got {text!r}") from None
    if len(vals) < 2:
        raise argparse.ArgumentTypeError("ball needs at least one center coordinate and a radius")
    return vals


def _make_ball(mu, vals, name):
    if len(vals) != mu.dim + 1:
        raise ValidationError(f"--{name} needs {mu.dim} center coordinates and a radius")
    return Ball(vals[:-1], vals[-1])


def _common(p, eps=True, need_input=True):
    if need_input:
        p.add_argument("--in", dest="input", required=True, help="measure file (.csv/.json)")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--n", type=int, default=1, help="odd kernel power (1: Riesz)")
    if eps:
        p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", help="report path (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)


def build_parser():
    parser = _Parser(prog="rieszlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate a reference measure")
    gsub = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    gc = gsub.add_parser("cantor")
    gc.add_argument("--s", type=float, required=True)
    gc.add_argument("--generations", type=int, required=True)
    gc.add_argument("--branching", type=int, default=2, choices=(2, 4))
    gc.add_argument("--mass", type=float, default=1.0)
    gs = gsub.add_parser("segment")
    gs.add_argument("--N", type=int, required=True)
    gs.add_argument("--length", type=float, default=1.0)
    gr = gsub.add_parser("random")
    gr.add_argument("--N", type=int, required=True)
    gr.add_argument("--dim", type=int, default=2)
    gr.add_argument("--box", type=float, default=1.0)
    gr.add_argument("--seed", type=int, default=0)
    for g in (gc, gs, gr):
        g.add_argument("--out", required=True, help="measure file to write (.csv/.json)")

    p = sub.add_parser("transform", help="R_eps 1 at every atom")
    _common(p)
    p.add_argument("--theta-mac", type=float, help="use the treecode with this opening angle")

    p = sub.add_parser("energy", help="total triple energy p_s(mu)")
    _common(p, eps=False)
    p.add_argument("--mode", choices=("exact", "montecarlo"), default="exact")
    p.add_argument("--mc-samples", type=int, default=1_000_000)

    p = sub.add_parser("identity-check", help="global and pointwise regrouping identities")
    _common(p)
    p.add_argument("--points", type=int, default=8, help="atoms sampled for the pointwise check")

    p = sub.add_parser("pairing", help="<R_eps mu, psi>_mu for a hat test function")
    _common(p)
    p.add_argument("--psi", required=True, help="test function JSON")
    p.add_argument("--mode", choices=("direct", "antisymmetrized", "both"), default="both")

    p = sub.add_parser("defect", help="defect functional F(mu chi_B) and f0 bounds")
    _common(p)
    p.add_argument("--ball", type=_ball_arg, help="c1,...,cd,r (default: hull ball)")

    p = sub.add_parser("derivative", help="analytic g'(0) against finite differences")
    _common(p)
    p.add_argument("--ball", type=_ball_arg)
    p.add_argument("--delta", type=_ball_arg, required=True, help="perturbation ball")
    p.add_argument("--steps", type=float, nargs="+", default=list(DEFAULT_STEPS))

    p = sub.add_parser("blowup", help="multiscale energy profile along a ball chain")
    _common(p, eps=False)
    p.add_argument("--x", type=int, default=0, help="atom index of the base point")
    p.add_argument("--B0", type=_ball_arg, help="initial ball (default: B(x, resolution/2))")
    p.add_argument("--scales", type=int, default=6)
    p.add_argument("--step", type=int, default=1, help="doublings per level")
    p.add_argument("--thin-t", type=float, default=8.0)
    p.add_argument("--csv", help="optional CSV projection (j, r, theta, e_j, cumulative)")

    p = sub.add_parser("falsify", help="main-lemma ratio p_mu(x,B,B)/P(B)^2")
    _common(p, eps=False)
    p.add_argument("--ball", type=_ball_arg, help="default: thin ball around the hull")
    p.add_argument("--x-samples", type=int, default=32)
    p.add_argument("--thin-t", type=float, default=8.0)

    p = sub.add_parser("bench", help="naive against treecode transform")
    _common(p)
    p.add_argument("--theta-mac", type=float, default=0.3)
    p.add_argument("--tolerance", type=float, default=1e-2)
    return parser


def _spec(args):
    return KernelSpec(args.s, args.n)


def _cmd_gen(args):
    if args.kind == "cantor":
        mu = cantor_measure(CantorSpec(args.s, args.generations, args.branching, args.mass))
    elif args.kind == "segment":
        mu = segment_uniform(args.N, args.length)
    else:
        mu = random_cloud(args.seed, args.N, args.dim, args.box)
    write_measure(mu, args.out)
    return {"atoms": mu.size, "dim": mu.dim, "total_mass": mu.total_mass,
            "resolution": mu.resolution, "path": args.out}


def _cmd_transform(args, mu, spec):
    if args.theta_mac is not None:
        values = tree_transform_field(mu, spec, args.eps, args.theta_mac)
        method = "treecode"
    else:
        values = transform_field(mu, spec, args.eps, threads=args.threads)
        method = "naive"
    return {"method": method, "R_eps_1": values}


def _cmd_energy(args, mu, spec):
    est = total_energy(mu, spec, args.mode, samples=args.mc_samples, seed=args.seed)
    return est.to_dict()


def _cmd_identity(args, mu, spec):
    glob = global_identity_check(mu, spec, args.eps)
    rng = np.random.default_rng(args.seed)
    k = min(args.points, mu.size)
    picks = np.sort(rng.choice(mu.size, size=k, replace=False))
    pointwise = []
    worst = 0.0
    for i in picks:
        rep = pointwise_identity_check(mu, spec, args.eps, mu.points[i])
        worst = max(worst, rep.relative_residual)
        pointwise.append({"atom": int(i), **rep.to_dict()})
    return {"global": glob.to_dict(), "pointwise_E_eq_F": pointwise,
            "max_pointwise_relative_residual": worst}


def _cmd_pairing(args, mu, spec):
    psi = read_test_function(args.psi)
    modes = ("direct", "antisymmetrized") if args.mode == "both" else (args.mode,)
    out = {"psi_lip_bound": psi.lip_bound}
    for m in modes:
        res = reflectionless_pairing(mu, spec, args.eps, psi, m)
        out[m] = {"pairing": res.value, "centered": res.centered, "mean_removed": res.mean_removed}
    return out


def _ball_or_hull(mu, vals, name="ball"):
    return _make_ball(mu, vals, name) if vals is not None else mu.hull_ball()


def _cmd_defect(args, mu, spec):
    ball = _ball_or_hull(mu, args.ball)
    f0 = exterior_field(mu, ball, spec, args.eps)
    P = poisson_density(mu, ball, spec)
    f0max = float(np.linalg.norm(f0.values, axis=1).max())
    return {
        "ball": ball.to_dict(),
        "F": defect_functional(mu, ball, spec, args.eps),
        "max_abs_f0": f0max,
        "P": P,
        "theta_2B": density(mu, ball.scaled(2), spec),
        "max_abs_f0_over_P": f0max / P,
    }


def _cmd_derivative(args, mu, spec):
    ball = _ball_or_hull(mu, args.ball)
    delta = _make_ball(mu, args.delta, "delta")
    rep = variational_derivative(mu, ball, delta, spec, args.eps, args.steps)
    return {"ball": ball.to_dict(), "delta": delta.to_dict(), **rep.to_dict()}


def _cmd_blowup(args, mu, spec):
    if not 0 <= args.x < mu.size:
        raise ValidationError("--x must be an atom index")
    x = mu.points[args.x]
    B0 = (_make_ball(mu, args.B0, "B0") if args.B0 is not None
          else Ball(x, 0.5 * mu.resolution))
    rep = multiscale_energy_profile(mu, spec, x, B0, args.scales, args.step, args.thin_t)
    if args.csv:
        text = "\n".join(",".join(str(v) for v in row) for row in rep.csv_rows()) + "\n"
        atomic_write(args.csv, text)
    return {"x": x, "B0": B0.to_dict(), **rep.to_dict()}


def _thin_hull(mu, t):
    hull = mu.hull_ball()
    return find_thin_ball(mu, hull.center, hull.radius, t).ball


def _cmd_falsify(args, mu, spec):
    ball = _make_ball(mu, args.ball, "ball") if args.ball is not None else _thin_hull(mu, args.thin_t)
    res = main_lemma_ratio(mu, spec, ball, args.x_samples, args.seed)
    return {"ball": ball.to_dict(), **res.to_dict()}


def _cmd_bench(args, mu, spec):
    t0 = time.perf_counter()
    naive = transform_field(mu, spec, args.eps, threads=args.threads)
    t1 = time.perf_counter()
    tree = tree_transform_field(mu, spec, args.eps, args.theta_mac)
    t2 = time.perf_counter()
    dev = contract_deviation(mu, spec, naive, tree)
    return {
        "theta_mac": args.theta_mac,
        "max_contract_deviation": dev,
        "max_global_relative_deviation": float(np.abs(tree - naive).max() / np.abs(naive).max()),
        "contract_ok": dev <= args.tolerance,
        "timing": {"naive_seconds": t1 - t0, "tree_seconds": t2 - t1},
    }


_COMMANDS = {
    "transform": _cmd_transform,
    "energy": _cmd_energy,
    "identity-check": _cmd_identity,
    "pairing": _cmd_pairing,
    "defect": _cmd_defect,
    "derivative": _cmd_derivative,
    "blowup": _cmd_blowup,
    "falsify": _cmd_falsify,
    "bench": _cmd_bench,
}


# output destinations and thread counts do not affect results and stay out
# of the report so that it is reproducible across them
_NOT_ECHOED = {"threads", "out", "csv"}


def _config_echo(args):
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in _NOT_ECHOED:
            continue
        if isinstance(v, float) and not math.isfinite(v):
            v = str(v)
        out[k] = v
    return out


def run(argv=None):
    """Parse ``argv``, run one command, write its report; returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    saved = os.environ.get(_config.ENV_THREADS)
    try:
        return _run(args)
    finally:
        if saved is None:
            os.environ.pop(_config.ENV_THREADS, None)
        else:
            os.environ[_config.ENV_THREADS] = saved


def _run(args):
    try:
        if getattr(args, "threads", None) is not None:
            if args.threads < 1:
                raise ValidationError("--threads must be >= 1")
            os.environ[_config.ENV_THREADS] = str(args.threads)
        if args.command == "gen":
            results = _cmd_gen(args)
            out_path = None
        else:
            spec = _spec(args)
            if hasattr(args, "eps") and not args.eps > 0:
                raise ValidationError("--eps must be positive")
            mu = read_measure(args.input)
            results = _COMMANDS[args.command](args, mu, spec)
            out_path = args.out
        report = {"command": args.command, "config": _config_echo(args),
                  "version": __version__, "results": results}
        text = dumps(report)
        if args.command == "gen":
            sys.stdout.write(text)
        elif out_path:
            atomic_write(out_path, text)
        else:
            sys.stdout.write(text)
    except ValidationError as exc:
        print(f"rieszlab: validation error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"rieszlab: numerical error: {exc}", file=sys.stderr)
        return 2
    except RieszLabError as exc:
        print(f"rieszlab: error: {exc}", file=sys.stderr)
        return 1
    if args.command == "bench" and not results["contract_ok"]:
        print("rieszlab: treecode accuracy contract violated", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
