"""Command-line entry points.

Subcommands: ``estimate``, ``sample-weights``, ``predict-wealth``,
``backtest``, ``check-normality``, ``fit-prior``.  Outputs are
machine-readable (JSON, CSV); every JSON payload embeds the run's
``{seed, B, prior, n, k, t, T}`` so it can be reproduced from the output
alone.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical error.
Failures print one JSON line to stderr: ``{"error": <class>, "message": ...}``.

Configuration precedence: explicit flags > ``--config`` JSON file >
built-in defaults (``B=100000``, ``seed=42``, ``credible_level=0.95``).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from ._kernels import BACKEND
from .backtest import BacktestConfig, EmpiricalBayesPrior, run_backtest
from .dataio import (align_riskfree, ingest, load_riskfree, prior_to_dict,
                     report_to_csv, report_to_dict)
from .errors import BayportError, DataError, NumericalError, ParseError
from .linalg import SpdMatrix
from .posterior import (ConjugatePrior, DiffusePrior,
                        empirical_bayes_hyperparams, posterior_params)
from .predictive import credible_band, default_probability, \
    sample_predictive_wealth
from .rng import RngStream
from .weights import (PortfolioContext, asymptotic_covariance, bayes_estimate,
                      discount_factor, normality_check, sample_weights_basic,
                      sample_weights_fast, standardize_batch,
                      weight_covariance)

__all__ = ["cli_dispatch", "main"]

DEFAULTS = {"B": 100_000, "seed": 42, "credible_level": 0.95}


class UsageError(Exception):
    """Bad command line; mapped to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise UsageError(message)


# --- option plumbing ---------------------------------------------------------

def _add_io_options(p, output_help="output path (default: stdout)"):
    p.add_argument("--input", required=True,
                   help="CSV with header 'date,<label>...'")
    p.add_argument("--kind", choices=("prices", "returns"), default="returns",
                   help="whether --input holds prices or net returns")
    p.add_argument("--output", default=None, help=output_help)


def _add_mc_options(p):
    p.add_argument("--B", dest="B", type=int, default=None,
                   help=f"Monte Carlo draws (default {DEFAULTS['B']})")
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (default {DEFAULTS['seed']})")
    p.add_argument("--level", type=float, default=None,
                   help="credible level (default "
                        f"{DEFAULTS['credible_level']})")
    p.add_argument("--config", default=None,
                   help="JSON file with defaults for B, seed, credible_level")


def _add_context_options(p):
    p.add_argument("--gamma", type=float, default=1.0,
                   help="absolute risk aversion (default 1.0)")
    p.add_argument("--wealth", type=float, default=1.0,
                   help="current wealth (default 1.0)")
    p.add_argument("--t", type=int, default=0,
                   help="current period index, 0-based (default 0)")
    p.add_argument("--horizon", type=int, default=1,
                   help="investment horizon T (default 1)")
    _add_rf_options(p)


def _add_rf_options(p):
    p.add_argument("--rf", type=float, default=None,
                   help="constant per-period risk-free net rate (default 0)")
    p.add_argument("--rf-file", default=None,
                   help="dated single-column CSV of risk-free rates")


def _add_prior_options(p):
    p.add_argument("--prior", choices=("diffuse", "conjugate"),
                   default="diffuse")
    p.add_argument("--prior-file", default=None,
                   help="JSON with m0, r0, d0, s0 (required for conjugate; "
                        "fit-prior writes this format)")


def _resolve_mc(args) -> tuple[int, int, float]:
    """Apply flags > config file > defaults for (B, seed, credible_level)."""
    overrides = {}
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as handle:
                overrides = json.load(handle)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {args.config}: {exc}") from None
        if not isinstance(overrides, dict):
            raise UsageError(f"config file {args.config}: expected a JSON object")
        unknown = set(overrides) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"config file {args.config}: unknown keys "
                             f"{sorted(unknown)} (allowed: {sorted(DEFAULTS)})")
    def pick(flag_value, key):
        if flag_value is not None:
            return flag_value
        return overrides.get(key, DEFAULTS[key])

    try:
        b = int(pick(args.B, "B"))
        seed = int(pick(args.seed, "seed"))
        level = float(pick(getattr(args, "level", None), "credible_level"))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad B/seed/credible_level value: {exc}") from None
    if b < 1:
        raise UsageError(f"B must be >= 1, got {b}")
    if not 0.0 < level < 1.0:
        raise UsageError(f"credible level must be in (0, 1), got {level}")
    return b, seed, level


def _resolve_prior(args, k: int):
    if args.prior == "diffuse":
        if args.prior_file:
            raise UsageError("--prior-file only applies to --prior conjugate")
        return DiffusePrior()
    if not args.prior_file:
        raise UsageError("--prior conjugate requires --prior-file")
    with open(args.prior_file, encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"prior file {args.prior_file}: {exc}") from None
    for key in ("m0", "r0", "d0", "s0"):
        if key not in raw:
            raise ParseError(f"prior file {args.prior_file}: missing key {key!r}")
    try:
        return ConjugatePrior(m0=np.asarray(raw["m0"], dtype=float),
                              r0=float(raw["r0"]), d0=float(raw["d0"]),
                              s0=SpdMatrix(raw["s0"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BayportError):
            raise
        raise ParseError(f"prior file {args.prior_file}: {exc}") from None


def _context(args, window, rf_schedule) -> PortfolioContext:
    try:
        return PortfolioContext(gamma=args.gamma, wealth=args.wealth,
                                t=args.t, horizon=args.horizon,
                                rf_schedule=rf_schedule)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _schedule_rf(args, window) -> np.ndarray:
    """Length-``horizon`` risk-free schedule for estimate-like commands.

    ``--rf-file`` must supply rates dated strictly after the sample's last
    date: those rows are the coming periods ``t+1..T``.  Entries for past
    periods are placeholders (never read).
    """
    if args.rf is not None and args.rf_file:
        raise UsageError("give --rf or --rf-file, not both")
    horizon = args.horizon
    if args.rf_file:
        dates, rates = load_riskfree(args.rf_file)
        future = [r for d, r in zip(dates, rates) if d > window.dates[-1]]
        needed = horizon - args.t
        if len(future) < needed:
            raise DataError(
                f"risk-free file has {len(future)} rates dated after the "
                f"sample end {window.dates[-1]}; need {needed}")
        schedule = np.zeros(horizon)
        schedule[args.t:] = future[:needed]
        return schedule
    return np.full(horizon, args.rf if args.rf is not None else 0.0)


def _backtest_rf(args, data, horizon: int) -> np.ndarray:
    if args.rf is not None and args.rf_file:
        raise UsageError("give --rf or --rf-file, not both")
    if args.rf_file:
        dates, rates = load_riskfree(args.rf_file)
        return align_riskfree(dates, rates, data.dates[-horizon:])
    return np.full(horizon, args.rf if args.rf is not None else 0.0)


def _selector_from_names(select: str | None, assets):
    """Map ``--select "A,B"`` to identity rows and the selected labels."""
    if select is None:
        return None, tuple(assets)
    names = [token.strip() for token in select.split(",") if token.strip()]
    if not names:
        raise UsageError("--select must list at least one asset label")
    index = {label: i for i, label in enumerate(assets)}
    missing = [name for name in names if name not in index]
    if missing:
        raise UsageError(f"--select names not in the input header: {missing}")
    sel = np.zeros((len(names), len(assets)))
    for row, name in enumerate(names):
        sel[row, index[name]] = 1.0
    return sel, tuple(names)


def _meta(*, seed, b, prior, n, k, t, horizon, **extra) -> dict:
    meta = {"seed": seed, "B": b, "prior": prior_to_dict(prior),
            "n": n, "k": k, "t": t, "T": horizon, "backend": BACKEND}
    meta.update(extra)
    return meta


def _emit_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if path is None:
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")


def _emit_text(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _band_dict(band) -> dict:
    return {"level": band.level, "lower": band.lower, "upper": band.upper,
            "point": band.point, "width": band.width}


# --- subcommands ---------------------------------------------------------------

def _cmd_estimate(args) -> int:
    window = ingest(args.input, args.kind)
    b, seed, _ = _resolve_mc(args)
    prior = _resolve_prior(args, window.k)
    ctx = _context(args, window, _schedule_rf(args, window))
    post = posterior_params(window, prior)
    payload = {
        "meta": _meta(seed=seed, b=b, prior=prior, n=window.n, k=window.k,
                      t=args.t, horizon=args.horizon, gamma=args.gamma,
                      wealth=args.wealth, rf_next=ctx.rf_next),
        "assets": list(window.assets),
        "weights": bayes_estimate(post, ctx).tolist(),
        "weight_covariance": weight_covariance(post, ctx).entries.tolist(),
        "asymptotic_covariance":
            asymptotic_covariance(post, ctx).entries.tolist(),
        "discount_factor": discount_factor(ctx),
    }
    _emit_json(payload, args.output)
    return 0


def _cmd_sample_weights(args) -> int:
    window = ingest(args.input, args.kind)
    b, seed, _ = _resolve_mc(args)
    prior = _resolve_prior(args, window.k)
    ctx = _context(args, window, _schedule_rf(args, window))
    post = posterior_params(window, prior)
    selector, labels = _selector_from_names(args.select, window.assets)
    sampler = sample_weights_fast if args.sampler == "fast" \
        else sample_weights_basic
    batch = sampler(post, ctx, b, selector, rng=RngStream(seed))
    import io as _io
    buf = _io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(("draw",) + labels)
    for i, row in enumerate(batch.draws):
        writer.writerow([i] + [repr(float(x)) for x in row])
    _emit_text(buf.getvalue(), args.output)
    return 0


def _cmd_predict_wealth(args) -> int:
    window = ingest(args.input, args.kind)
    b, seed, level = _resolve_mc(args)
    prior = _resolve_prior(args, window.k)
    ctx = _context(args, window, _schedule_rf(args, window))
    post = posterior_params(window, prior)
    if args.weights is not None:
        try:
            v = np.asarray([float(x) for x in args.weights.split(",")])
        except ValueError as exc:
            raise UsageError(f"--weights: {exc}") from None
        if v.shape != (window.k,):
            raise UsageError(f"--weights needs {window.k} comma-separated "
                             f"values, got {v.shape[0]}")
    else:
        v = bayes_estimate(post, ctx)
    batch = sample_predictive_wealth(post, v, args.wealth, ctx.rf_next, b,
                                     rng=RngStream(seed), period=args.t + 1)
    payload = {
        "meta": _meta(seed=seed, b=b, prior=prior, n=window.n, k=window.k,
                      t=args.t, horizon=args.horizon, wealth=args.wealth,
                      rf_next=ctx.rf_next),
        "weights": v.tolist(),
        "credible_band": _band_dict(credible_band(batch, level)),
        "default_probability": default_probability(batch),
        "predictive_mean": float(
            args.wealth * (1.0 + ctx.rf_next
                           + v @ (post.mean - ctx.rf_next))),
    }
    _emit_json(payload, args.output)
    return 0


def _cmd_check_normality(args) -> int:
    window = ingest(args.input, args.kind)
    b, seed, _ = _resolve_mc(args)
    prior = _resolve_prior(args, window.k)
    ctx = _context(args, window, _schedule_rf(args, window))
    post = posterior_params(window, prior)
    batch = sample_weights_fast(post, ctx, b, None, rng=RngStream(seed))
    standardized = standardize_batch(batch, post, ctx)
    rows = []
    for j, asset in enumerate(window.assets):
        statistic, p_value = normality_check(standardized[:, j])
        rows.append({"asset": asset, "statistic": statistic,
                     "p_value": p_value})
    payload = {
        "meta": _meta(seed=seed, b=b, prior=prior, n=window.n, k=window.k,
                      t=args.t, horizon=args.horizon),
        "per_asset": rows,
    }
    _emit_json(payload, args.output)
    return 0


def _cmd_backtest(args) -> int:
    data = ingest(args.input, args.kind)
    b, seed, level = _resolve_mc(args)
    if args.prior == "eb":
        if args.presample_n is None:
            raise UsageError("--prior eb requires --presample-n")
        prior = EmpiricalBayesPrior(presample_n=args.presample_n, d0=args.d0,
                                    r0=args.r0, offset=args.eb_offset)
    else:
        prior = _resolve_prior(args, data.k)
    try:
        config = BacktestConfig(window_n=args.window_n,
                                horizon_T=args.horizon, gamma=args.gamma,
                                prior=prior, B=b, seed=seed,
                                credible_level=level,
                                weight_policy=args.policy,
                                initial_wealth=args.initial_wealth)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rf = _backtest_rf(args, data, args.horizon)
    report = run_backtest(data, rf, config)
    _emit_json(report_to_dict(report, k=data.k), args.output)
    if args.output_csv:
        _emit_text(report_to_csv(report), args.output_csv)
    return 0


def _cmd_fit_prior(args) -> int:
    window = ingest(args.input, args.kind)
    b, seed, _ = _resolve_mc(args)
    d0 = float(args.d0) if args.d0 is not None else float(window.n)
    m0, s0 = empirical_bayes_hyperparams(window, d0)
    fitted = ConjugatePrior(m0=m0, r0=float(args.r0), d0=d0, s0=s0)
    payload = {
        "m0": m0.tolist(),
        "r0": float(args.r0),
        "d0": d0,
        "s0": s0.entries.tolist(),
        "meta": _meta(seed=seed, b=b, prior=fitted, n=window.n, k=window.k,
                      t=0, horizon=0),
    }
    _emit_json(payload, args.output)
    return 0


# --- parser / dispatch ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bayport",
                     description="Bayesian multi-period portfolio weights: "
                                 "estimation, sampling, prediction, backtests.")
    sub = parser.add_subparsers(dest="command", metavar="command",
                                parser_class=_Parser)

    p = sub.add_parser("estimate",
                       help="Bayes weights and covariances as JSON")
    _add_io_options(p)
    _add_prior_options(p)
    _add_context_options(p)
    _add_mc_options(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("sample-weights",
                       help="posterior weight draws as CSV")
    _add_io_options(p)
    _add_prior_options(p)
    _add_context_options(p)
    _add_mc_options(p)
    p.add_argument("--sampler", choices=("fast", "basic"), default="fast")
    p.add_argument("--select", default=None,
                   help="comma-separated asset labels to restrict the draws")
    p.set_defaults(func=_cmd_sample_weights)

    p = sub.add_parser("predict-wealth",
                       help="credible band and default probability as JSON")
    _add_io_options(p)
    _add_prior_options(p)
    _add_context_options(p)
    _add_mc_options(p)
    p.add_argument("--weights", default=None,
                   help="comma-separated held weights "
                        "(default: the Bayes estimate)")
    p.set_defaults(func=_cmd_predict_wealth)

    p = sub.add_parser("check-normality",
                       help="standardized-batch normality statistics as JSON")
    _add_io_options(p)
    _add_prior_options(p)
    _add_context_options(p)
    _add_mc_options(p)
    p.set_defaults(func=_cmd_check_normality)

    p = sub.add_parser("backtest",
                       help="rolling-window backtest report as JSON (+CSV)")
    _add_io_options(p, output_help="JSON report path (default: stdout)")
    p.add_argument("--output-csv", default=None,
                   help="also write a per-period CSV here")
    p.add_argument("--window-n", type=int, required=True,
                   help="estimation window length")
    p.add_argument("--horizon", type=int, required=True,
                   help="investment horizon T")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--initial-wealth", type=float, default=1.0)
    p.add_argument("--policy", choices=("bayes", "plugin", "zero"),
                   default="bayes")
    p.add_argument("--prior", choices=("diffuse", "conjugate", "eb"),
                   default="diffuse")
    p.add_argument("--prior-file", default=None)
    p.add_argument("--presample-n", type=int, default=None,
                   help="presample length for --prior eb")
    p.add_argument("--d0", type=float, default=None,
                   help="prior degrees for --prior eb "
                        "(default: presample length)")
    p.add_argument("--r0", type=float, default=1.0,
                   help="prior precision for --prior eb")
    p.add_argument("--eb-offset", type=int, default=0,
                   help="gap between presample end and estimation window")
    _add_rf_options(p)
    _add_mc_options(p)
    p.set_defaults(func=_cmd_backtest)

    p = sub.add_parser("fit-prior",
                       help="empirical-Bayes conjugate hyperparameters as JSON")
    _add_io_options(p)
    p.add_argument("--d0", type=float, default=None,
                   help="prior degrees (default: presample length)")
    p.add_argument("--r0", type=float, default=1.0,
                   help="prior precision to embed in the output")
    _add_mc_options(p)
    p.set_defaults(func=_cmd_fit_prior)

    return parser


def _fail(code: int, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)
    return code


def cli_dispatch(argv=None) -> int:
    """Run one CLI invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            raise UsageError("a subcommand is required (see --help)")
        return args.func(args)
    except UsageError as exc:
        return _fail(2, exc)
    except SystemExit as exc:  # argparse --help/--version
        code = exc.code
        return code if isinstance(code, int) else 0
    except DataError as exc:
        return _fail(3, exc)
    except NumericalError as exc:
        return _fail(4, exc)
    except BayportError as exc:
        return _fail(4, exc)
    except (OSError, UnicodeDecodeError) as exc:
        return _fail(3, exc)


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
