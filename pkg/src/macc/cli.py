"""Command-line front end: ``macc {capacity,sweep,simulate,attack} SPEC.json``.

Data goes to stdout as CSV, diagnostics to stderr. Exit codes: 0 success,
2 input error, 3 solver did not converge (the row is still printed).
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys

import numpy as np

from .capacity import (
    ProblemSpec,
    SolverConfig,
    binary_capacity_closed_form,
    information_capacity,
)
from .codec_sim import (
    CodeParams,
    DecoderConfig,
    collapsed_error_experiment,
    run_attack_experiment,
    run_error_experiment,
)
from .prob_core import Channel
from .security import DistortionMatrix
from .specfile import SpecError, binary_p1, dump_spec, joint_or_error, load_spec

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3

CAPACITY_HEADER = ["alpha", "capacity_bits", "feasible", "solver_restarts", "constraint_active"]
SWEEP_HEADER = ["p1", "alpha", "capacity_bits", "mode"]
SIMULATE_HEADER = ["n", "M", "R_bits", "trials", "errors", "empirical_pe", "collisions"]
ATTACK_HEADER = ["n", "trials", "mean_distortion", "stderr", "sigma_theoretical", "alpha", "satisfied"]


class _Writer:
    def __init__(self, header, precision: int, out=None):
        self.precision = precision
        self.w = csv.writer(out or sys.stdout, lineterminator="\n")
        self.w.writerow(header)

    def fmt(self, v):
        if isinstance(v, str):
            return v
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v} in output")
        return f"{v:.{self.precision}g}"

    def row(self, *values):
        self.w.writerow([self.fmt(v) for v in values])


def _warn_unconverged(diag) -> None:
    print(
        f"macc: solver did not converge ({diag.converged_restarts}/{diag.restarts} restarts); "
        f"best value reported, gap to runner-up {diag.best_gap:.3g}",
        file=sys.stderr,
    )


def parse_grid(text: str | None) -> list[float]:
    """``"a:b:step"`` (inclusive) or ``"a,b,c"``; empty string gives an empty grid."""
    if text is None:
        return []
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise SpecError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise SpecError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(count, 0))]
    return [float(p) for p in text.split(",") if p.strip()]


def _solver_config(spec, args) -> SolverConfig:
    return SolverConfig(
        u_size=spec.solver.u_size,
        restarts=args.restarts or spec.solver.restarts,
        seed=args.seed if args.seed is not None else spec.seed,
        max_iter=spec.solver.max_iter,
        threads=args.threads,
    )


def cmd_capacity(spec, args) -> int:
    alpha = spec.alpha if args.alpha is None else args.alpha
    mode = args.mode or spec.solver.mode
    out = _Writer(CAPACITY_HEADER, args.precision)
    if mode == "closed-form":
        p1 = binary_p1(spec)
        if p1 is None:
            raise SpecError("closed-form mode needs a binary symmetric channel with Hamming distortion")
        feasible = alpha <= 0.5
        out.row(alpha, binary_capacity_closed_form(p1, alpha), feasible, 0, feasible and alpha > 0)
        return EXIT_OK
    res = information_capacity(
        ProblemSpec(spec.channel, spec.distortion, alpha), _solver_config(spec, args)
    )
    diag = res.diagnostics
    out.row(
        alpha,
        res.value,
        res.feasible,
        diag.restarts if diag else 0,
        bool(diag and diag.constraint_active),
    )
    if not res.converged:
        _warn_unconverged(diag)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_sweep(spec, args) -> int:
    alphas = sorted(parse_grid(args.alphas)) if args.alphas is not None else [spec.alpha]
    if args.p1:
        p1s = sorted(parse_grid(args.p1))
    else:
        p1 = binary_p1(spec)
        if p1 is None:
            raise SpecError("sweep needs --p1 or a binary symmetric channel with Hamming distortion")
        p1s = [p1]
    mode = args.mode or spec.solver.mode
    if mode not in ("closed-form", "generic"):
        raise SpecError(f"unknown mode {mode!r}")
    out = _Writer(SWEEP_HEADER, args.precision)
    status = EXIT_OK
    cfg = _solver_config(spec, args)
    for p1 in p1s:
        ch = Channel.bsc(p1)
        for a in alphas:
            if mode == "closed-form":
                value = binary_capacity_closed_form(p1, a)
            else:
                res = information_capacity(ProblemSpec(ch, DistortionMatrix.hamming(2), a), cfg)
                value = res.value
                if not res.converged:
                    _warn_unconverged(res.diagnostics)
                    status = EXIT_SOLVER
            out.row(p1, a, value, mode)
    return status


def cmd_simulate(spec, args) -> int:
    sim = spec.simulation
    joint = joint_or_error(spec)
    n = args.n or sim.n
    m = args.messages or sim.messages
    trials = args.trials or sim.trials
    seed = args.seed if args.seed is not None else spec.seed
    ensemble = args.ensemble or sim.ensemble
    try:
        dec = DecoderConfig(args.decoder or sim.decoder, args.epsilon or sim.epsilon)
        cp = CodeParams(n, m, seed)
        if trials < 1:
            raise ValueError("trials must be >= 1")
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    if ensemble == "collapsed":
        if dec.kind != "ml" or joint.u_size != 2 or spec.channel.out_size != 2:
            raise SpecError("collapsed ensemble needs ML decoding and binary hash/output alphabets")
        rep = collapsed_error_experiment(joint, spec.channel, cp, trials, threads=args.threads)
    elif ensemble == "materialized":
        rep = run_error_experiment(
            joint,
            spec.channel,
            cp,
            dec,
            trials,
            fixed_codebook=args.fixed_codebook,
            random_message=args.random_message,
            threads=args.threads,
        )
    else:
        raise SpecError(f"unknown ensemble {ensemble!r}")
    out = _Writer(SIMULATE_HEADER, args.precision)
    out.row(rep.n, rep.M, rep.rate, rep.trials, rep.errors, rep.empirical_pe, rep.collisions)
    return EXIT_OK


def cmd_attack(spec, args) -> int:
    joint = joint_or_error(spec)
    n = args.n or spec.simulation.n
    m = args.messages or 16
    trials = args.trials or 100
    seed = args.seed if args.seed is not None else spec.seed
    try:
        cp = CodeParams(n, m, seed)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    rep = run_attack_experiment(joint, spec.distortion, cp, trials, threads=args.threads)
    satisfied = rep.mean >= spec.alpha - 3 * rep.stderr
    out = _Writer(ATTACK_HEADER, args.precision)
    out.row(rep.n, rep.trials, rep.mean, rep.stderr, rep.sigma, spec.alpha, satisfied)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec", help="problem file (JSON)")
    common.add_argument("--precision", type=int, default=6, help="significant digits in CSV")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--dump-spec", action="store_true", help="print the normalized spec and exit")

    ap = argparse.ArgumentParser(prog="macc", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", parents=[common], help="secure capacity at one alpha")
    p.add_argument("--alpha", type=float)
    p.add_argument("--mode", choices=["generic", "closed-form"])
    p.add_argument("--restarts", type=int)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("sweep", parents=[common], help="capacity over an alpha grid")
    p.add_argument("--alphas", help="start:stop:step or comma list; empty for no rows")
    p.add_argument("--p1", help="comma list or start:stop:step of BSC crossovers")
    p.add_argument("--mode", choices=["generic", "closed-form"])
    p.add_argument("--restarts", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo error probability")
    p.add_argument("--n", type=int)
    p.add_argument("--messages", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--decoder", choices=["ml", "typicality"])
    p.add_argument("--epsilon", type=float)
    p.add_argument("--ensemble", choices=["materialized", "collapsed"])
    p.add_argument("--fixed-codebook", action="store_true")
    p.add_argument("--random-message", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("attack", parents=[common], help="Monte Carlo attacker distortion")
    p.add_argument("--n", type=int)
    p.add_argument("--messages", type=int)
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_attack)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        spec = load_spec(args.spec)
        if args.dump_spec:
            print(dump_spec(spec))
            return EXIT_OK
        return args.func(spec, args)
    except SpecError as exc:
        print(f"macc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
