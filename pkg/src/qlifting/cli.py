"""Command-line front end.

    qlifting run <config> [--format table|csv|json] [--out PATH]
    qlifting fit <config> --target P
    qlifting sweep <config>
    qlifting check [--seed N]
    qlifting demo

Failures exit nonzero with a single ``error[<category>]: <message>`` line on stderr.
"""
from __future__ import annotations

import argparse
import math
import sys

from . import case_studies as cs
from .channels import NullEventError
from .checks import run_all
from .config import ConfigError, fit_lactose, load_config, run
from .report import emit_report, fmt

EXIT_CONFIG = 2
EXIT_SCENARIO = 3
EXIT_CHECK = 4
EXIT_IO = 5


class CliError(Exception):
    def __init__(self, category: str, message: str, code: int):
        super().__init__(message)
        self.category = category
        self.code = code


def _load(path: str):
    try:
        return load_config(path)
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    except ConfigError as exc:
        raise CliError("config", str(exc), EXIT_CONFIG) from None


def _emit(text: str, out: str | None):
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise CliError("io", f"cannot write {out}: {exc.strerror}", EXIT_IO) from None
    else:
        sys.stdout.write(text)


def _scenario_errors(fn, context: str):
    try:
        return fn()
    except NullEventError as exc:
        raise CliError("null-event", f"{context}: {exc}", EXIT_SCENARIO) from None
    except (ValueError, ArithmeticError, KeyError) as exc:
        raise CliError("scenario", f"{context}: {exc}", EXIT_SCENARIO) from None


def cmd_run(args, sweep_required: bool = False) -> int:
    cfg = _load(args.config)
    if sweep_required and cfg.sweep is None:
        raise CliError("config", f"{args.config}: no 'sweep' section", EXIT_CONFIG)
    reports = _scenario_errors(lambda: run(cfg), f"{args.config} ({cfg.kind})")
    fmt_name = args.format or cfg.format
    _emit(emit_report(reports, fmt_name), args.out or cfg.output.get("path"))
    return 0


def cmd_fit(args) -> int:
    cfg = _load(args.config)
    if cfg.kind != "lactose":
        raise CliError("config", f"fit applies to lactose configs, not {cfg.kind}", EXIT_CONFIG)
    target = args.target if args.target is not None else cfg.params.get("target")
    if target is None:
        raise CliError("config", "no target given (--target or params.target)", EXIT_CONFIG)
    report = _scenario_errors(lambda: fit_lactose(cfg.params, target), f"{args.config} (fit)")
    _emit(emit_report(report, args.format or cfg.format), args.out or cfg.output.get("path"))
    return 0


def cmd_check(args) -> int:
    results = run_all(args.seed)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} invariant suites passed (seed {args.seed})")
    if failed:
        raise CliError("check", f"{failed} invariant suite(s) failed", EXIT_CHECK)
    return 0


def demo_text() -> str:
    """The three case studies with their data, as a deterministic text block."""
    out = []
    p_L, p_plus_L, p_plus_G, observed = 0.8, 2920 / 3000, 33 / 3000, 43 / 3000
    out.append("# Lactose operon (beta-galactosidase activity, Miller units out of 3000)")
    out.append("#   lactose only: 2920, glucose only: 33, mixture 0.4% lactose + 0.1% glucose: 43")
    fit = cs.fit_preference_ratio(math.sqrt(p_L), math.sqrt(1 - p_L), p_plus_L, p_plus_G, observed)
    rep = cs.lactose_scenario(cs.LactoseParams.from_prior(p_L, p_plus_L, p_plus_G, k_L=fit.ratio))
    out.append(f"fitted preference ratio |k_L|/|k_G| = {fmt(fit.ratio)}")
    out.append(f"P(+|L+G) from lifting              = {fmt(rep.lhs)}  (observed 43/3000 = {fmt(observed)})")
    out.append(f"classical P(+|L)P(L) + P(+|G)P(G)  = {fmt(rep.rhs)}")
    out.append(f"total-probability gap              = {fmt(rep.gap)}")
    out.append("")
    out.append("# Sweetness of chocolate after sugar")
    tp = cs.TongueParams.from_moduli(0.9, 0.1, 0.8, 0.2)
    rep = cs.tongue_scenario(tp)
    out.append("|lambda1|^2, |lambda2|^2, |mu1|^2, |mu2|^2 = 0.9, 0.1, 0.8, 0.2")
    out.append(f"P(C=1) after sugar    = {fmt(rep.lhs)}")
    out.append(f"P(C=1) neutral tongue = {fmt(rep.rhs)}")
    out.append(f"gap                   = {fmt(rep.gap)}")
    out.append("")
    out.append("# Bayesian updating, P(A)=0.5, P(C|A)=0.8, P(C|B)=0.4, C observed")
    bp = cs.BayesParams(0.5, 0.8, 0.4)
    rational = cs.bayes_update(cs.bayes_prediction_state(bp), "C")
    out.append(f"rational posterior P(A|C)  = {fmt(rational.posterior_A)}")
    out.append(f"classical Bayes P(A|C)     = {fmt(cs.classical_posterior(0.5, 0.8, 0.4))}")
    biased = cs.biased_bayes_update(cs.BayesParams(0.5, 0.8, 0.4, cs.bias_state(0.3), cs.mind_swap_bias()))
    out.append("mind-swap bias, strength 0.3:")
    out.append(f"  biased posterior P~(A|C) = {fmt(biased.posterior_A)}")
    out.append(f"  prior shift P~(A) - P(A) = {fmt(biased.prior_delta_A)}")
    out.append(f"  P(C) - P~(C)             = {fmt(biased.gap_C)}")
    out.append(f"  P(D) - P~(D)             = {fmt(biased.gap_D)}")
    return "\n".join(out) + "\n"


def cmd_demo(args) -> int:
    sys.stdout.write(demo_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlifting", description="Contextual probability via liftings.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "csv", "json"), default=None)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=42)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run one scenario config")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fit", parents=[common], help="fit the lactose preference ratio")
    p.add_argument("config")
    p.add_argument("--target", type=float, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", parents=[common], help="run a config's sweep grid")
    p.add_argument("config")
    p.set_defaults(func=lambda a: cmd_run(a, sweep_required=True))

    p = sub.add_parser("check", parents=[common], help="run all invariant suites")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("demo", parents=[common], help="print the three case studies")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        message = " ".join(str(exc).split())
        print(f"error[{exc.category}]: {message}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
