"""Command-line front end.

Subcommands read and write plain text (CSV, JSONL, ``key=value`` reports) so
that they compose through pipes::

    stopwait simulate --seed 7 | stopwait expand | stopwait fit-logit

Exit status is 0 on success, 1 on usage errors, 2 on data errors.  When
``--output`` names a file, a ``<output>.manifest.json`` with every effective
parameter is written next to it.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from importlib import metadata
from pathlib import Path
from typing import IO

import numpy as np

from . import events, estimation, model, simulate, threshold, visits
from .rng import default_seed

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _version() -> str:
    try:
        return metadata.version("stopwait")
    except metadata.PackageNotFoundError:
        return "unknown"


def _span(text: str, parts: int) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected {parts} colon-separated numbers, got {text!r}") from None
    if len(values) != parts:
        raise argparse.ArgumentTypeError(f"expected {parts} colon-separated numbers, got {text!r}")
    return values


def _grid(text: str):
    lo, hi, n = _span(text, 3)
    return lo, hi, int(n)


def _tail(text: str):
    return _span(text, 2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stopwait", description="Stopping behavior of askers on Q&A sites: simulate, expand, estimate.")
    p.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def io_args(sp, fmt=True, fmt_choices=events.FORMATS):
        sp.add_argument("--input", default="-", help="input path, '-' for stdin")
        sp.add_argument("--output", default="-", help="output path, '-' for stdout")
        sp.add_argument("--manifest", default=None, help="manifest path (default <output>.manifest.json)")
        if fmt:
            sp.add_argument("--format", default="csv", choices=fmt_choices)

    s = sub.add_parser("simulate", help="generate a synthetic event log")
    s.add_argument("--output", default="-")
    s.add_argument("--manifest", default=None)
    s.add_argument("--format", default="csv", choices=events.FORMATS)
    s.add_argument("--scenario", default=None, help="key = value scenario file; flags override it")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--questions", type=int, default=None)
    s.add_argument("--arrival", choices=("poisson", "gamma"), default=None)
    s.add_argument("--rate", type=float, default=None, help="answers per hour")
    s.add_argument("--shape", type=float, default=None, help="gamma inter-arrival shape")
    s.add_argument("--horizon", type=float, default=None)
    s.add_argument("--delta", type=float, default=None, help="hours between asker visits")
    s.add_argument("--agent", choices=("logit", "gumbel"), default=None)
    for name in ("alpha", "beta1", "beta2", "beta3"):
        s.add_argument(f"--{name}", type=float, default=None)
    s.add_argument("--alpha-u", type=float, default=None)
    s.add_argument("--check-at-arrival", action="store_true", default=None)

    e = sub.add_parser("expand", help="event log -> visit observations CSV")
    io_args(e)
    e.add_argument("--delta", type=float, default=1.0)
    e.add_argument("--snap", action="store_true", help="move closing rows onto the visit grid")
    e.add_argument("--max-open", type=float, default=events.ELIGIBLE_HOURS, help="eligibility cutoff in hours")

    f = sub.add_parser("fit-logit", help="observations CSV -> logit report")
    io_args(f, fmt=False)
    f.add_argument("--csv", default=None, help="also write term,estimate,std_error,z,significance rows here")

    c = sub.add_parser("correlate", help="event log -> TotalAnswers/ElapsedTime correlation report")
    io_args(c)
    c.add_argument("--max-open", type=float, default=events.ELIGIBLE_HOURS)

    g = sub.add_parser("fit-invgauss", help="answer counts -> inverse Gaussian fit, KS, tail slope")
    io_args(g, fmt_choices=events.FORMATS + ("values",))
    g.add_argument("--max-open", type=float, default=events.ELIGIBLE_HOURS)
    g.add_argument("--tail", type=_tail, default=(5.0, 50.0), help="LO:HI value range for the log-log slope")
    g.add_argument("--cdf", default=None, help="write x,empirical_cdf,fitted_cdf here")
    g.add_argument("--loglog", default=None, help="write value,frequency,fitted_density here")

    t = sub.add_parser("threshold", help="solve the answer-value stopping problem")
    io_args(t, fmt=False)
    t.add_argument("--discount", type=float, default=0.9)
    t.add_argument("--step-mean", type=float, default=-0.4)
    t.add_argument("--step-sd", type=float, default=1.0)
    t.add_argument("--step-det", type=float, default=None, help="deterministic step value (overrides mean/sd)")
    t.add_argument("--grid", type=_grid, default=(-10.0, 10.0, 2001), help="LO:HI:N")
    t.add_argument("--tol", type=float, default=1e-10)

    b = sub.add_parser("passage", help="Brownian first-passage ensemble")
    io_args(b, fmt=False)
    d0, v0 = estimation.InverseGaussianParams(6.1, 5.8).brownian(1.0)
    b.add_argument("--distance", type=float, default=d0)
    b.add_argument("--drift", type=float, default=v0)
    b.add_argument("--sigma", type=float, default=1.0)
    b.add_argument("--dt", type=float, default=1e-3)
    b.add_argument("--paths", type=int, default=10_000)
    b.add_argument("--max-time", type=float, default=None)
    b.add_argument("--seed", type=int, default=None)

    r = sub.add_parser("report", help="figure data: open-duration histogram or utility curves")
    io_args(r)
    which = r.add_mutually_exclusive_group(required=True)
    which.add_argument("--histogram", action="store_true")
    which.add_argument("--utility", action="store_true")
    r.add_argument("--bin-width", type=float, default=1.0)
    r.add_argument("--max-open", type=float, default=events.ELIGIBLE_HOURS)
    r.add_argument("--beta1", type=float, default=model.TABLE3.beta1)
    r.add_argument("--alpha-u", type=float, action="append", default=None)
    r.add_argument("--n-max", type=int, default=50)
    return p


# ---------------------------------------------------------------- I/O helpers


def _read(path: str, stdin: IO) -> str:
    if path == "-":
        return stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"input not found: {path}") from None


def _write(path: str, text: str, stdout: IO) -> None:
    if path == "-":
        stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _manifest(args, params: dict) -> None:
    target = args.manifest or (None if args.output == "-" else args.output + ".manifest.json")
    if target is None:
        return
    doc = {
        "artifact": "stopwait",
        "version": _version(),
        "subcommand": args.subcommand,
        "parameters": params,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    Path(target).write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


def _eligible(args, stdin) -> list[events.QuestionRecord]:
    return events.filter_eligible(events.parse_event_log(_read(args.input, stdin), args.format), args.max_open)


# ---------------------------------------------------------------- subcommands


def _cmd_simulate(args, stdin, stdout):
    params = simulate.parse_scenario(_read(args.scenario, stdin)) if args.scenario else {}
    flags = {
        "n_questions": args.questions,
        "arrival": args.arrival,
        "rate": args.rate,
        "shape": args.shape,
        "horizon": args.horizon,
        "visit_interval": args.delta,
        "agent": args.agent,
        "alpha": args.alpha,
        "beta1": args.beta1,
        "beta2": args.beta2,
        "beta3": args.beta3,
        "alpha_u": args.alpha_u,
        "check_at_arrival": args.check_at_arrival,
    }
    params.update({k: v for k, v in flags.items() if v is not None})
    if args.seed is not None or "seed" not in params:
        params["seed"] = default_seed(args.seed)
    scenario = simulate.build_scenario(params)
    records = simulate.generate_dataset(scenario)
    _write(args.output, events.serialize_event_log(records, args.format), stdout)
    return {**simulate.scenario_params(scenario), "format": args.format}


def _cmd_expand(args, stdin, stdout):
    records = _eligible(args, stdin)
    obs = visits.expand_corpus(records, args.delta, snap_close=args.snap)
    _write(args.output, visits.write_observations(obs), stdout)
    return {"delta": args.delta, "snap": args.snap, "max_open": args.max_open, "format": args.format,
            "questions": len(records), "observations": len(obs)}


def _cmd_fit_logit(args, stdin, stdout):
    obs = visits.read_observations(_read(args.input, stdin))
    fit = estimation.fit_logit(obs)
    _write(args.output, estimation.format_logit_report(fit), stdout)
    if args.csv:
        Path(args.csv).write_text(estimation.format_logit_csv(fit), encoding="utf-8")
    return {"observations": fit.n_observations, "converged": fit.converged, "csv": args.csv}


def _cmd_correlate(args, stdin, stdout):
    records = _eligible(args, stdin)
    pairs = []
    for q in records:
        s = visits.summarize(q)
        pairs.append((s.total_answers, s.elapsed_time))
    res = estimation.pearson_correlation(pairs)
    _write(args.output, estimation.format_correlation_report(res), stdout)
    return {"max_open": args.max_open, "format": args.format, "questions": len(records)}


def _read_values(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split()])
    except ValueError as exc:
        raise ValueError(f"bad value in input: {exc}") from None


def _cmd_fit_invgauss(args, stdin, stdout):
    text = _read(args.input, stdin)
    if args.format == "values":
        counts = _read_values(text)
    else:
        records = events.filter_eligible(events.parse_event_log(text, args.format), args.max_open)
        counts = np.array([len(q.answer_times) for q in records], dtype=float)
    p = estimation.fit_inverse_gaussian(counts)
    ks = estimation.ks_distance(counts, lambda x: estimation.invgauss_cdf(p, x))
    try:
        slope = estimation.tail_slope(counts, args.tail)
        slope_note = "ok"
    except ValueError as exc:
        slope, slope_note = math.nan, str(exc)
    lines = [
        f"n={counts.size}",
        f"mu={p.mu!r}",
        f"lambda={p.lam!r}",
        f"variance={p.variance!r}",
        f"ks_distance={ks!r}",
        f"tail_range={args.tail[0]!r}:{args.tail[1]!r}",
        f"tail_slope={slope!r}",
        f"tail_slope_status={slope_note}",
    ]
    _write(args.output, "\n".join(lines) + "\n", stdout)
    if args.cdf:
        xs, ecdf = estimation.empirical_cdf(counts)
        fitted = estimation.invgauss_cdf(p, xs)
        rows = ["x,empirical_cdf,fitted_cdf"] + [f"{x!r},{e!r},{f!r}" for x, e, f in zip(xs.tolist(), ecdf.tolist(), np.atleast_1d(fitted).tolist())]
        Path(args.cdf).write_text("\n".join(rows) + "\n", encoding="utf-8")
    if args.loglog:
        vals, freq = estimation.integer_frequencies(counts)
        keep = vals > 0
        vals, freq = vals[keep], freq[keep]
        dens = np.atleast_1d(estimation.invgauss_pdf(p, vals.astype(float)))
        rows = ["value,frequency,fitted_density"] + [f"{v},{f},{d!r}" for v, f, d in zip(vals.tolist(), freq.tolist(), dens.tolist())]
        Path(args.loglog).write_text("\n".join(rows) + "\n", encoding="utf-8")
    return {"format": args.format, "tail": list(args.tail), "cdf": args.cdf, "loglog": args.loglog}


def _cmd_threshold(args, stdin, stdout):
    if args.step_det is not None:
        step = threshold.StepDistribution.deterministic(args.step_det)
    else:
        step = threshold.StepDistribution.normal(args.step_mean, args.step_sd)
    sol = threshold.solve_value_function(step, args.discount, args.grid, args.tol)
    _write(args.output, threshold.format_solution_csv(sol), stdout)
    return {"step": {"kind": step.kind, "value": step.value, "sd": step.sd}, "discount": args.discount,
            "grid": list(args.grid), "tol": args.tol, "x_star": sol.x_star, "iterations": sol.iterations}


def _cmd_passage(args, stdin, stdout):
    seed = default_seed(args.seed)
    ens = threshold.brownian_passage_ensemble(args.distance, args.drift, args.sigma, args.dt, args.paths, seed, args.max_time)
    _write(args.output, threshold.format_ensemble_csv(ens), stdout)
    ig = threshold.analytic_passage_law(args.distance, args.drift, args.sigma)
    return {"distance": args.distance, "drift": args.drift, "sigma": args.sigma, "dt": args.dt, "paths": args.paths,
            "max_time": args.max_time, "seed": seed, "analytic_mu": ig.mu, "analytic_lambda": ig.lam}


def _cmd_report(args, stdin, stdout):
    if args.utility:
        alphas = args.alpha_u or list(model.DEFAULT_ALPHA_U)
        rows = ["alpha_u,n,utility"]
        for a in alphas:
            curve = model.utility_curve(model.UtilitySpec(a, args.beta1, 0.0), args.n_max)
            rows += [f"{a!r},{n},{u!r}" for n, u in enumerate(curve.tolist())]
        _write(args.output, "\n".join(rows) + "\n", stdout)
        return {"kind": "utility", "beta1": args.beta1, "alpha_u": alphas, "n_max": args.n_max}
    records = _eligible(args, stdin)
    hist = events.open_duration_histogram(records, args.bin_width)
    rows = ["bin_lo,bin_hi,count,fraction"]
    edges = hist.edges.tolist()
    rows += [f"{edges[i]!r},{edges[i + 1]!r},{c},{f!r}" for i, (c, f) in enumerate(zip(hist.counts, hist.fractions.tolist()))]
    rows.append(f"# questions={hist.n},fraction_within_24h={hist.fraction_within(24.0)!r}")
    _write(args.output, "\n".join(rows) + "\n", stdout)
    return {"kind": "histogram", "bin_width": args.bin_width, "max_open": args.max_open, "format": args.format}


COMMANDS = {
    "simulate": _cmd_simulate,
    "expand": _cmd_expand,
    "fit-logit": _cmd_fit_logit,
    "correlate": _cmd_correlate,
    "fit-invgauss": _cmd_fit_invgauss,
    "threshold": _cmd_threshold,
    "passage": _cmd_passage,
    "report": _cmd_report,
}


def run(argv: list[str] | None = None, stdin: IO | None = None, stdout: IO | None = None, stderr: IO | None = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        params = COMMANDS[args.subcommand](args, stdin, stdout)
        _manifest(args, {k: v for k, v in vars(args).items() if k != "subcommand"} | params)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError) as exc:
        print(f"data error: {exc}", file=stderr)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run())
