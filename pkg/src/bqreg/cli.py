"""Command line entry point: ``bqreg {simulate,fit,study,report}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bayes import BqrPrior, McmcConfig, bqr_fit, summarize_chain
from .classical import ols_fit, qr_fit
from .errors import BqregError, UsageError
from .model import DEFAULT_TAU_GRID, CoefficientRow, CoefficientTable, ModelSpec, build_design
from .pipeline.dgp import DgpConfig, simulate_dgp
from .pipeline.io import ColumnSchema, load_csv, write_chain_csv, write_csv
from .pipeline.manifest import load_manifest, manifest_help, run_manifest
from .pipeline.report import FORMATS, load_results, render_report, save_results
from .pipeline.study import point_rows


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(text, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_simulate(args):
    gamma = args.gamma or (1.0,) + (0.0,) * (len(args.beta) - 1)
    cfg = DgpConfig(kind=args.kind, n=args.n, beta=args.beta, gamma=gamma, noise=args.noise,
                    rho=args.rho, seed=args.seed, instruments=args.instruments,
                    strength=args.strength)
    data, truth = simulate_dgp(cfg)
    write_csv(data, args.output)
    if args.kind == "location_scale":
        for tau in DEFAULT_TAU_GRID:
            coef = ", ".join(f"{b:.6f}" for b in truth.quantile_coefficients(tau))
            print(f"tau={tau:.1f}  true coefficients: {coef}", file=sys.stderr)
    return 0


def cmd_fit(args):
    regressors = [r.strip() for r in args.regressors.split(",") if r.strip()]
    columns = [args.response, *regressors]
    data = load_csv([args.data], [ColumnSchema(c, transform="log" if args.log else "none")
                                  for c in columns])
    spec = ModelSpec(args.response, tuple(regressors), not args.no_intercept)
    X, y, names = build_design(data, spec)
    table = CoefficientTable()
    if args.estimator == "ols":
        table.extend(point_rows("ols", ols_fit(X, y), names, args.interval_mass))
    elif args.estimator == "qr":
        fit = qr_fit(X, y, args.tau)
        table.extend(CoefficientRow("qr", n, fit.tau, float(b), float(b), float(b), None)
                     for n, b in zip(names, fit.coefficients))
    else:
        cfg = McmcConfig(args.draws, args.burn_in, args.thin, args.seed)
        prior = BqrPrior(np.zeros(X.shape[1]), args.beta_variance)
        chain = bqr_fit(X, y, args.tau, prior, cfg, names=names)
        table.extend(summarize_chain(chain, args.interval_mass))
        if args.chain_out:
            write_chain_csv(chain, args.chain_out)
    _emit(render_report(table, (), args.format), args.output)
    return 0


def cmd_study(args):
    manifest = load_manifest(args.manifest)
    result, report = run_manifest(manifest, args.format)
    output = args.output or manifest.output
    _emit(report, output)
    if args.save:
        save_results(args.save, result.table, result.tests, result.meta)
    if manifest.chains_dir is not None:
        manifest.chains_dir.mkdir(parents=True, exist_ok=True)
        for (est, tau), chain in result.chains.items():
            write_chain_csv(chain, manifest.chains_dir / f"{est}_tau{tau:.2f}.csv")
    return 0


def cmd_report(args):
    try:
        table, tests, meta = load_results(args.results)
    except OSError as e:
        raise UsageError(f"cannot read {args.results}: {e.strerror}") from None
    title = None
    if meta.get("response"):
        title = f"Quantile regression results for {meta['response']} ({meta.get('n')} observations)"
    _emit(render_report(table, tests, args.format, title), args.output)
    return 0


def build_parser():
    parser = _Parser(prog="bqreg", description="Quantile regression econometrics engine.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write a synthetic data set with known quantile coefficients")
    p.add_argument("--kind", choices=["location_scale", "simultaneous"], default="location_scale")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--beta", type=_floats, default=(1.0, 1.0), help="coefficients incl. intercept")
    p.add_argument("--gamma", type=_floats, default=None, help="scale coefficients incl. intercept")
    p.add_argument("--noise", choices=["normal", "laplace"], default="normal")
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--instruments", type=int, default=1)
    p.add_argument("--strength", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit one estimator at one quantile on a CSV file")
    p.add_argument("data")
    p.add_argument("--response", required=True)
    p.add_argument("--regressors", required=True, help="comma-separated column names")
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--log", action="store_true", help="log every column at load time")
    p.add_argument("--estimator", choices=["ols", "qr", "bqr"], default="bqr")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--draws", type=int, default=11_000)
    p.add_argument("--burn-in", type=int, default=1_000)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--beta-variance", type=float, default=1e4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--interval-mass", type=float, default=0.9)
    p.add_argument("--chain-out", help="write posterior draws to this CSV file")
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("study", help="run a manifest-driven study over a quantile grid",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       epilog="manifest keys (key = value, one per line):\n" + manifest_help())
    p.add_argument("manifest")
    p.add_argument("--format", choices=FORMATS, default=None, help="override the manifest format")
    p.add_argument("-o", "--output", help="report path (overrides the manifest)")
    p.add_argument("--save", help="also save the table and tests as JSON for 'report'")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("report", help="re-render saved study results")
    p.add_argument("results")
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BqregError as e:
        print(f"bqreg: error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
