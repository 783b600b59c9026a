"""Command-line entry point: ``samplingloss <command> [options]``.

Exit status is 0 on success, 2 on invalid input and 1 on any other failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import forecast as fc
from .diagnostics import elm_arch_test
from .errors import ValidationError
from .harness import SweepConfig, SweepError, format_results, load_columns_csv, load_series_csv, run_sweep
from .infotheory import mutual_information, default_bins, nats_to_bits
from .ordinal import OrdinalConfig, select_ordinal_params, weighted_permutation_entropy
from .sampling import SamplingPlan, replicate_thin
from .series import autocorrelation, cross_covariance, dominant_lag, moments
from .synth import default_pair_spec, pair_from_spec
from .theory import theory_curve

DEFAULT_RATES = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0"


def _rates(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rate list {text!r}") from None


def _order(text: str) -> tuple[int, int]:
    try:
        k, l = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("order must look like K,L") from None
    return k, l


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (f"{v:.9g}" if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _series(args):
    if not args.input or not args.column:
        raise ValidationError("--input and --column are required")
    return load_series_csv(args.input, args.column)


# --------------------------------------------------------------------------- commands


def cmd_sample(args):
    x = _series(args)
    rows = []
    for rate in args.rates or [0.5]:
        plan = SamplingPlan(rate, args.replicates, args.seed)
        for r, y in enumerate(replicate_thin(x, plan)):
            rows += [(rate, r, t, float(v)) for t, v in enumerate(y.values)]
    if args.format == "json":
        return _json([{"rate": a, "replicate": b, "step": c, "value": d} for a, b, c, d in rows])
    return _table(["rate", "replicate", "step", "value"], rows)


def cmd_wpe(args):
    x = _series(args)
    if args.order is not None:
        cfg = OrdinalConfig(args.order, args.delay or 1)
    elif args.delay is not None:
        cfg = select_ordinal_params(x, (2, 5), (args.delay, args.delay))
    else:
        cfg = select_ordinal_params(x)
    out = {"order": cfg.order, "delay": cfg.delay, "wpe": weighted_permutation_entropy(x, cfg)}
    if args.format == "json":
        return _json(out)
    return _table(["order", "delay", "wpe"], [(cfg.order, cfg.delay, out["wpe"])])


def cmd_autocorr(args):
    x = _series(args)
    lag = args.lag if args.lag is not None else dominant_lag(x, args.max_lag)
    rho = autocorrelation(x, lag)
    if args.format == "json":
        return _json({"lag": lag, "autocorrelation": rho})
    return _table(["lag", "autocorrelation"], [(lag, rho)])


def cmd_mi(args):
    if not args.input or not args.column or not args.external_column:
        raise ValidationError("--input, --column and --external-column are required")
    ext_path = args.external_input or args.input
    x = load_series_csv(args.input, args.column).values
    s = load_columns_csv(ext_path, [args.external_column], nonnegative=())[args.external_column]
    bins = args.bins or default_bins(x.size)
    mi = mutual_information(x, s, bins)
    out = {"bins": bins, "mi_nats": mi, "mi_bits": nats_to_bits(mi)}
    if args.format == "json":
        return _json(out)
    return _table(["bins", "mi_nats", "mi_bits"], [(bins, mi, out["mi_bits"])])


def cmd_theory_curve(args):
    if args.input:
        x = _series(args)
        lag = args.lag if args.lag is not None else dominant_lag(x, args.max_lag)
        m = moments(x)
        var, mean, cross = m.variance, m.mean, autocorrelation(x, lag) * m.variance
    else:
        if args.variance is None or args.mean is None or args.cross is None:
            raise ValidationError("give --input/--column or all of --variance, --mean, --cross")
        var, mean, cross = args.variance, args.mean, args.cross
    rows = theory_curve(var, mean, cross, args.rates or _rates(DEFAULT_RATES))
    if args.format == "json":
        return _json(rows)
    return _table(["rate", "variance", "cross_covariance", "autocorrelation"],
                  [(r["rate"], r["variance"], r["cross_covariance"], r["autocorrelation"]) for r in rows])


def cmd_synth(args):
    if args.config:
        with open(args.config) as fh:
            spec = json.load(fh)
    else:
        spec = default_pair_spec(args.seed, args.length)
    pair = pair_from_spec(spec)
    if args.model_out:
        with open(args.model_out, "w") as fh:
            fh.write(_json(pair.spec()))
    rows = [(t, repr(float(s)), repr(float(x))) for t, (s, x) in enumerate(zip(pair.external, pair.ground.values))]
    if args.format == "json":
        return _json({"model": pair.spec(), "shift": pair.shift, "clipped": pair.clipped,
                      "S": pair.external.tolist(), "X": pair.ground.values.tolist()})
    return _table(["t", "S", "X"], rows)


def cmd_forecast(args):
    x = _series(args)
    if args.predictor == "poisson":
        run = fc.poisson_forecast(x, args.train_fraction)
    else:
        run = fc.rolling_forecast(x, args.train_fraction, args.order, args.refit_every,
                                  k_max=args.k_max, l_max=args.l_max)
    score = fc.nrmse(run)
    print(f"nrmse={score:.9g}", file=sys.stderr)
    if args.format == "json":
        spec = run.model_spec.to_dict() if isinstance(run.model_spec, fc.ArmaFit) else run.model_spec
        return _json({"nrmse": score, "model": spec, "train_length": run.train_length,
                      "actual": run.actuals.tolist(), "predicted": run.predictions.tolist()})
    return run.to_csv()


def cmd_archtest(args):
    if not args.input or not args.column:
        raise ValidationError("--input and --column are required")
    e = load_columns_csv(args.input, [args.column], nonnegative=())[args.column]
    res = elm_arch_test(e, args.max_lag)
    if args.format == "json":
        return _json({"lag": res.lags.tolist(), "lm": res.lm.tolist(), "p_value": res.p_values.tolist()})
    return res.to_csv()


def cmd_sweep(args):
    if args.config:
        cfg = SweepConfig.from_json(args.config)
    elif args.input and args.column:
        cfg = SweepConfig(source={"csv": args.input, "column": args.column})
    else:
        raise ValidationError("sweep needs --config or --input/--column")
    if args.seed_given:
        cfg.base_seed = args.seed
    if args.rates:
        cfg.rates = args.rates
    if args.replicates_given:
        cfg.replicates = args.replicates
    cfg.__post_init__()
    return format_results(run_sweep(cfg), args.format)


# --------------------------------------------------------------------------- parser


class _Given(argparse.Action):
    def __call__(self, parser, ns, values, option_string=None):
        setattr(ns, self.dest, values)
        setattr(ns, self.dest + "_given", True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, action=_Given)
    common.add_argument("--rates", type=_rates, default=None, help="comma-separated sampling rates")
    common.add_argument("--replicates", type=int, default=1, action=_Given)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--config", default=None, help="JSON config")
    common.add_argument("--input", default=None, help="input CSV")
    common.add_argument("--column", default=None, help="column holding the series")
    common.set_defaults(seed_given=False, replicates_given=False)

    parser = argparse.ArgumentParser(prog="samplingloss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("sample", parents=[common], help="binomially thin one series").set_defaults(func=cmd_sample)

    p = sub.add_parser("wpe", parents=[common], help="weighted permutation entropy")
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--delay", type=int, default=None)
    p.set_defaults(func=cmd_wpe)

    p = sub.add_parser("autocorr", parents=[common], help="autocorrelation at a lag")
    p.add_argument("--lag", type=int, default=None)
    p.add_argument("--max-lag", type=int, default=20)
    p.set_defaults(func=cmd_autocorr)

    p = sub.add_parser("mi", parents=[common], help="mutual information with an external series")
    p.add_argument("--external-column", default=None)
    p.add_argument("--external-input", default=None)
    p.add_argument("--bins", type=int, default=None)
    p.set_defaults(func=cmd_mi)

    p = sub.add_parser("theory-curve", parents=[common], help="predicted effect of thinning")
    p.add_argument("--variance", type=float)
    p.add_argument("--mean", type=float)
    p.add_argument("--cross", type=float, help="ground-truth lagged covariance")
    p.add_argument("--lag", type=int, default=None)
    p.add_argument("--max-lag", type=int, default=20)
    p.set_defaults(func=cmd_theory_curve)

    p = sub.add_parser("synth", parents=[common], help="generate a coupled (S, X) pair")
    p.add_argument("--length", type=int, default=365)
    p.add_argument("--model-out", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("forecast", parents=[common], help="rolling one-step forecast")
    p.add_argument("--predictor", choices=("arma", "poisson"), default="arma")
    p.add_argument("--order", type=_order, default=None, help="K,L (default: AIC search)")
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--refit-every", type=int, default=1)
    p.add_argument("--k-max", type=int, default=5)
    p.add_argument("--l-max", type=int, default=2)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("archtest", parents=[common], help="Engle LM test on residuals")
    p.add_argument("--max-lag", type=int, default=100)
    p.set_defaults(func=cmd_archtest)

    sub.add_parser("sweep", parents=[common], help="full sampling-rate sweep").set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _emit(args, args.func(args))
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc.cause, ValueError) else 1
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
