"""``uniband`` command-line interface.

Subcommands: ``simulate``, ``bound``, ``verify``, ``index``.

Exit codes: 0 success (or every checked inequality holds), 1 invalid input,
2 runtime failure, 3 a verified inequality was violated.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import theory
from .core import InvalidParameterError, RandomnessContract, UniformArm
from .montecarlo import default_workers, run_scenario
from .policies import POLICY_KINDS, canonical_kind, index_bk, index_chk_normal, index_kr, index_ucb_uniform
from .scenario_io import ScenarioError, fmt, format_csv, load_scenario
from .svg import render_svg

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_VIOLATED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".part")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


# -- simulate ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.replications is not None:
        if args.replications < 1:
            raise InvalidParameterError("--replications must be >= 1")
        scenario.replications = args.replications
    if args.seed is not None:
        scenario.master_seed = RandomnessContract(args.seed).master_seed
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise InvalidParameterError("--workers must be >= 1")
    curves = run_scenario(scenario, workers=workers)
    out, svg = Path(args.out), Path(args.svg) if args.svg else None
    try:
        _write_atomic(out, format_csv(curves))
        if svg is not None:
            _write_atomic(svg, render_svg(curves, log_x=scenario.checkpoint_kind == "log"))
    except BaseException:
        for p in (out, svg):
            if p is not None and p.exists():
                p.unlink()
        raise
    print(f"wrote {out}" + (f" and {svg}" if svg else ""), file=sys.stderr)
    return EXIT_OK


# -- bound -------------------------------------------------------------------

def cmd_bound(args) -> int:
    scenario = load_scenario(args.scenario)
    inst = scenario.instance
    rows: list[str] = []
    if args.which == "mbk":
        rows.append("arm,a,b,gap,span,term")
        terms = theory.mbk_terms(inst)
        for i, term in terms.items():
            arm = inst.arms[i]
            rows.append(f"{i},{fmt(arm.a)},{fmt(arm.b)},{fmt(inst.delta(i))},{fmt(arm.span())},{fmt(term)}")
        total = math.fsum(terms.values())
        rows.append(f"total,,,,,{fmt(total)}")
    else:
        if args.n is None:
            raise InvalidParameterError(f"--which {args.which} needs --n")
        n = args.n
        logn = math.log(n) if n > 0 else 0.0
        if args.which == "thm1":
            if args.eps is None or args.delta is None:
                raise InvalidParameterError("--which thm1 needs --eps and --delta")
            choice = theory.EpsilonDeltaChoice.from_lists(inst, args.eps, args.delta)
            total = theory.theorem1_bound(inst, choice, n)
            rows.append("arm,a,b,gap,eps,delta,log_coef,constant,term")
            for i, (coef, const) in theory.theorem1_terms(inst, choice).items():
                arm = inst.arms[i]
                rows.append(",".join([str(i), fmt(arm.a), fmt(arm.b), fmt(inst.delta(i)), fmt(choice.eps[i]),
                                      fmt(choice.delta[i]), fmt(coef), fmt(const), fmt(coef * logn + const)]))
            rows.append(f"total,,,,,,,,{fmt(total)}")
        else:
            total = theory.theorem3_bound(inst, n)
            powers = (logn, logn**0.75, logn**0.25, 1.0)
            rows.append("arm,a,b,gap,log_coef,log34_coef,log14_coef,constant,term")
            for i, coefs in theory.theorem3_terms(inst).items():
                arm = inst.arms[i]
                term = sum(c * p for c, p in zip(coefs, powers))
                rows.append(",".join([str(i), fmt(arm.a), fmt(arm.b), fmt(inst.delta(i)), *map(fmt, coefs), fmt(term)]))
            rows.append(f"total,,,,,,,,{fmt(total)}")
    sys.stdout.write("\n".join(rows) + "\n")
    return EXIT_OK


# -- verify ------------------------------------------------------------------

def _verify_prop1(args) -> bool:
    ok = True
    print("check,alpha,n,lhs,rhs,holds")
    for alpha in args.alpha:
        for n in args.n:
            rep = theory.verify_prop1(alpha, n)
            print(f"prop1,{alpha:g},{n},{fmt(rep.lhs)},{fmt(rep.rhs)},{rep.holds}")
            print(f"prop1-half,{alpha:g},{n},{fmt(rep.half_lhs)},{fmt(rep.half_rhs)},{rep.half_holds}")
            if not (rep.holds and rep.half_holds):
                ok = False
                print(f"VIOLATION prop1 alpha={alpha:g} n={n}: lhs={rep.lhs!r} rhs={rep.rhs!r}", file=sys.stderr)
    return ok


def _verify_prop2(args) -> bool:
    qs = np.geomspace(args.q_min, args.q_max, args.q_count)
    epss = np.arange(args.eps_count) * args.eps_step
    bad = 0
    worst = math.inf
    for q in qs:
        for eps in epss:
            rep = theory.verify_prop2(float(q), float(eps))
            worst = min(worst, rep.margin())
            if not rep.holds:
                bad += 1
                print(f"VIOLATION prop2 Q={q!r} eps={eps!r}: lhs={rep.lhs!r} rhs={rep.rhs!r}", file=sys.stderr)
    print(f"prop2,points={len(qs) * len(epss)},violations={bad},min_margin={worst!r}")
    return bad == 0


def _verify_lemma2(args) -> bool:
    arm = UniformArm(0.0, 1.0)
    grid_v = np.linspace(0.0, 0.4, 5)
    grid_w = np.linspace(0.6, 1.0, 5)
    rng = RandomnessContract(args.seed).generator(2)
    ok = True
    print("check,k,value,expected,abs_error,holds")
    for k in args.k:
        if k < 2:
            raise InvalidParameterError(f"--k values must be >= 2, got {k}")
        mass = theory.minmax_density_mass(k, arm)
        good = abs(mass - 1) <= 1e-8
        ok &= good
        print(f"normalization,{k},{mass!r},1,{abs(mass - 1):.3e},{good}")
        worst_q = max(abs(theory.minmax_density_mass(k, arm, v, w) - theory.minmax_joint_cdf_corner(k, w, v, arm))
                      for v in grid_v for w in grid_w)
        good = worst_q <= 1e-8
        ok &= good
        print(f"corner-quadrature,{k},,,{worst_q:.3e},{good}")
        if args.samples > 0:
            v_s, w_s = theory.sample_minmax(k, arm, args.samples, rng)
            worst_mc = max(abs(np.mean((v_s >= v) & (w_s <= w)) - theory.minmax_joint_cdf_corner(k, w, v, arm))
                           for v in grid_v for w in grid_w)
            good = worst_mc <= args.mc_tol
            ok &= good
            print(f"corner-montecarlo,{k},,,{worst_mc:.3e},{good}")
    return ok


def _verify_klinf(args) -> bool:
    rng = RandomnessContract(args.seed).generator(3)
    ok = True
    print("case,a,b,mu_star,closed_form,grid_coarse,grid_fine,holds")
    for c in range(args.cases):
        a = rng.uniform(-5, 5)
        arm = UniformArm(a, a + rng.uniform(0.1, 10))
        mu = arm.mean() + rng.uniform(0, 2) * arm.span()
        exact = theory.kl_infimum_to_mean(arm, mu)
        coarse = theory.kl_infimum_grid_search(arm, mu, resolution=21, levels=14)
        fine = theory.kl_infimum_grid_search(arm, mu, resolution=41, levels=12)
        good = abs(coarse - exact) <= 1e-6 and abs(fine - exact) <= 1e-6
        ok &= good
        print(f"{c},{arm.a!r},{arm.b!r},{mu!r},{exact!r},{coarse!r},{fine!r},{good}")
    return ok


def cmd_verify(args) -> int:
    checks = [(args.prop1, _verify_prop1), (args.prop2, _verify_prop2),
              (args.lemma2, _verify_lemma2), (args.klinf, _verify_klinf)]
    if not any(flag for flag, _ in checks):
        raise InvalidParameterError("choose at least one of --prop1, --prop2, --lemma2, --klinf")
    for alpha in args.alpha:
        if not 0 < alpha < 1:
            raise InvalidParameterError(f"--alpha values must lie in (0, 1), got {alpha}")
    for n in args.n:
        if n < 3:
            raise InvalidParameterError(f"--n values must be >= 3, got {n}")
    if not 0 < args.q_min <= args.q_max:
        raise InvalidParameterError("need 0 < --q-min <= --q-max")
    if args.q_count < 1 or args.eps_count < 1:
        raise InvalidParameterError("--q-count and --eps-count must be >= 1")
    if not (0 <= args.eps_step and (args.eps_count - 1) * args.eps_step < 1):
        raise InvalidParameterError("the eps grid must stay inside [0, 1)")
    ok = True
    for flag, fn in checks:
        if flag:
            ok &= fn(args)
    return EXIT_OK if ok else EXIT_VIOLATED


# -- index -------------------------------------------------------------------

def cmd_index(args) -> int:
    kind = canonical_kind(args.policy)
    if kind in ("ucb-uniform", "bk-ucb"):
        if args.vmin is None or args.vmax is None:
            raise InvalidParameterError(f"{kind} needs --vmin and --vmax")
        fn = index_ucb_uniform if kind == "ucb-uniform" else index_bk
        value = fn(args.n, args.t, args.vmin, args.vmax)
    else:
        if args.mean is None or args.sd is None:
            raise InvalidParameterError(f"{kind} needs --mean and --sd")
        fn = index_chk_normal if kind == "chk-normal" else index_kr
        value = fn(args.n, args.t, args.mean, args.sd)
    print(fmt(value))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uniband", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a scenario and write mean pseudo-regret curves")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--svg", help="optional SVG chart path")
    p.add_argument("--workers", type=int, default=None, help="worker threads (default $UNIBAND_WORKERS or 1)")
    p.add_argument("--replications", type=int, help="override the scenario's replication count")
    p.add_argument("--seed", type=int, help="override the scenario's master seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bound", help="evaluate a regret bound on a scenario's instance")
    p.add_argument("scenario")
    p.add_argument("--which", choices=("mbk", "thm1", "thm3"), required=True)
    p.add_argument("--n", type=float, help="horizon at which to evaluate thm1/thm3")
    p.add_argument("--eps", type=_floats, help="per-arm eps (one value or one per arm)")
    p.add_argument("--delta", type=_floats, help="per-arm delta (one value or one per arm)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("verify", help="check analytic inequalities numerically")
    p.add_argument("--prop1", action="store_true", help="summation bound 30 + 6/alpha^3")
    p.add_argument("--prop2", action="store_true", help="1/ln(1+Q(1-eps)) bound")
    p.add_argument("--lemma2", action="store_true", help="joint (min, max) density")
    p.add_argument("--klinf", action="store_true", help="closed-form KL infimum vs grid search")
    p.add_argument("--alpha", type=_floats, default=[round(0.05 * k, 2) for k in range(1, 20)])
    p.add_argument("--n", type=_ints, default=[3, 10, 1000, 1_000_000])
    p.add_argument("--q-min", type=float, default=1e-2)
    p.add_argument("--q-max", type=float, default=1e2)
    p.add_argument("--q-count", type=int, default=50)
    p.add_argument("--eps-count", type=int, default=100)
    p.add_argument("--eps-step", type=float, default=0.01)
    p.add_argument("--k", type=_ints, default=[2, 5, 10])
    p.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo (min, max) pairs; 0 skips")
    p.add_argument("--mc-tol", type=float, default=0.005)
    p.add_argument("--cases", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("index", help="evaluate one policy index")
    p.add_argument("--policy", required=True, help=f"one of {', '.join(POLICY_KINDS)}")
    p.add_argument("--n", type=float, required=True, help="global time")
    p.add_argument("--t", type=int, required=True, help="samples of this arm")
    p.add_argument("--vmin", type=float)
    p.add_argument("--vmax", type=float)
    p.add_argument("--mean", type=float)
    p.add_argument("--sd", type=float)
    p.set_defaults(func=cmd_index)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, InvalidParameterError) as exc:
        print(f"uniband {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"uniband {args.command}: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
