"""Command-line front end.

Every subcommand is a thin adapter: parse flags, read input files, call the
library, write output. Data tables go to stdout (or --out); progress notes
and reports go to stderr so piped output stays machine-readable. Any failure
prints a single ``error: ...`` line to stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator

from .distill_sim import build_world, train
from .errors import (
    ConfigError,
    DegenerateInputError,
    DomainError,
    FileFormatError,
    InsufficientDataError,
    ZpdistillError,
)
from .fileio import (
    fmt,
    load_gradient_records,
    load_profile_points,
    load_rollouts,
    load_sim_config,
    write_gradient_records,
    write_metrics,
    write_profile,
    write_weight_table,
)
from .kernel import (
    KernelParams,
    at_flat_boundary,
    beta_weight,
    kernel_peak,
    normalize_weights,
    select_exponents,
    zpd_moments,
)
from .numerics import beta_fn, sech, sech2
from .passrate import estimate_pass_rate, hard_filter
from .robustness import fit_snr_model, robustness_rows
from .snr_profile import bell_shape_score, compute_snr_bins, normalize_profile
from .variance import VarianceSpec, gamma_from_signal, variance_ratio_beta

__all__ = ["main"]

_DEFAULT_DELTAS = (0.1, 0.3, 0.5, math.log(2.0))


def _log(message: str) -> None:
    print(message, file=sys.stderr)


@contextmanager
def _out_stream(path: str | None) -> Iterator[IO[str]]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as f:
            yield f


def _load_rollout_rates(path: str):
    with open(path, encoding="utf-8") as f:
        records = load_rollouts(f)
    if not records:
        raise FileFormatError(f"no rollout records in {path}")
    return records, [estimate_pass_rate(r) for r in records]


def _cmd_weight(args: argparse.Namespace) -> None:
    records, rates = _load_rollout_rates(args.rollouts)
    if args.hard_filter is not None:
        lo, hi = args.hard_filter
        raw = [
            (rec.problem_id, 1.0 if hard_filter(pr, lo, hi) else max(0.0, args.floor))
            for rec, pr in zip(records, rates)
        ]
    else:
        params = KernelParams(args.alpha, args.beta)
        raw = [
            (rec.problem_id, max(beta_weight(pr.p, params), args.floor))
            for rec, pr in zip(records, rates)
        ]
    wv = normalize_weights(raw)
    if wv.degenerate:
        _log("warning: every weight is zero; normalized column left at zero")
    rows = [
        (pid, pr.p, w, wn)
        for (pid, w), wn, pr in zip(raw, wv.normalized, rates)
    ]
    with _out_stream(args.out) as f:
        write_weight_table(f, rows)


def _cmd_select_exponents(args: argparse.Namespace) -> None:
    _, rates = _load_rollout_rates(args.rollouts)
    m = zpd_moments(rates, args.epsilon)
    lines = [
        f"epsilon = {fmt(m.epsilon)}",
        f"count = {m.count}",
        f"mean_p = {fmt(m.mean_p)}",
        f"var_p = {fmt(m.var_p)}",
        f"var_bound = {fmt(m.mean_p * (1.0 - m.mean_p) / 3.0)}",
    ]
    try:
        params = select_exponents(m)
    except DomainError:
        lines += [
            "validity = invalid",
            "recommendation = variance exceeds the matchable range; "
            "use the flat kernel (alpha = 0, beta = 0)",
        ]
    else:
        lines += [
            f"alpha_star = {fmt(params.alpha)}",
            f"beta_star = {fmt(params.beta)}",
            f"validity = {'flat_boundary' if at_flat_boundary(m) else 'ok'}",
        ]
        if params.alpha >= 0.0 and params.beta >= 0.0 and not params.flat:
            lines.append(f"peak = {fmt(kernel_peak(params))}")
    with _out_stream(args.out) as f:
        for line in lines:
            f.write(line + "\n")


def _cmd_robustness(args: argparse.Namespace) -> None:
    deltas = list(_DEFAULT_DELTAS) + list(args.delta or [])
    rows = robustness_rows(deltas)
    with _out_stream(args.out) as f:
        f.write("delta,ratio_lo,ratio_hi,sech,worst_case_efficiency\n")
        for d, lo, hi, s, eff in rows:
            f.write(f"{fmt(d)},{fmt(lo)},{fmt(hi)},{fmt(s)},{fmt(eff)}\n")


def _cmd_variance_ratio(args: argparse.Namespace) -> None:
    if args.signal is not None:
        a_s, b_s, a_prime, b_prime = args.signal
        gamma1, gamma2 = gamma_from_signal(a_s, b_s, a_prime, b_prime)
        alpha, beta = a_prime, b_prime
    else:
        missing = [
            name
            for name in ("alpha", "beta", "gamma1", "gamma2")
            if getattr(args, name) is None
        ]
        if missing:
            raise ConfigError(
                "variance-ratio needs either --signal or all of "
                "--alpha --beta --gamma1 --gamma2 (missing: "
                + ", ".join("--" + m for m in missing)
                + ")"
            )
        alpha, beta, gamma1, gamma2 = args.alpha, args.beta, args.gamma1, args.gamma2
    spec = VarianceSpec(alpha=alpha, beta=beta, gamma1=gamma1, gamma2=gamma2)
    r = variance_ratio_beta(spec, epsilon=args.epsilon)
    lines = [
        f"alpha = {fmt(spec.alpha)}",
        f"beta = {fmt(spec.beta)}",
        f"gamma1 = {fmt(spec.gamma1)}",
        f"gamma2 = {fmt(spec.gamma2)}",
    ]
    if args.epsilon is None:
        lines += [
            f"b_numerator = {fmt(beta_fn(2 * spec.alpha + spec.gamma1 + 1, 2 * spec.beta + spec.gamma2 + 1))}",
            f"b_kernel = {fmt(beta_fn(spec.alpha + 1, spec.beta + 1))}",
            f"b_signal = {fmt(beta_fn(spec.gamma1 + 1, spec.gamma2 + 1))}",
        ]
    else:
        lines.append(f"epsilon = {fmt(args.epsilon)} (truncated moments)")
    lines += [
        f"variance_ratio = {fmt(r)}",
        f"reduces_variance = {'yes' if r < 1.0 else 'no'}",
        f"variance_factor_vs_unweighted = {fmt(1.0 / r)}",
    ]
    with _out_stream(args.out) as f:
        for line in lines:
            f.write(line + "\n")


def _cmd_snr_profile(args: argparse.Namespace) -> None:
    with open(args.gradients, encoding="utf-8") as f:
        records = load_gradient_records(f)
    profile = compute_snr_bins(records, args.bins)
    try:
        profile = normalize_profile(profile)
    except DegenerateInputError as exc:
        _log(f"normalization unavailable ({exc})")
    with _out_stream(args.out) as f:
        write_profile(f, profile)
    try:
        is_bell, ratio = bell_shape_score(profile)
    except (InsufficientDataError, DegenerateInputError) as exc:
        _log(f"bell: unavailable ({exc})")
    else:
        _log(f"bell: {'true' if is_bell else 'false'} ratio: {fmt(ratio)}")


def _cmd_fit_snr(args: argparse.Namespace) -> None:
    with open(args.profile, encoding="utf-8") as f:
        points = load_profile_points(f)
    fit = fit_snr_model([(p, s * s) for p, s in points])
    lines = [
        f"a_prime = {fmt(fit.a_prime)}",
        f"b_prime = {fmt(fit.b_prime)}",
        f"c0 = {fmt(fit.c0)}",
        f"c1 = {fmt(fit.c1)}",
        f"delta = {fmt(fit.delta)}",
        f"minimax_scale = {fmt(sech(fit.delta))}",
        f"worst_case_efficiency = {fmt(sech2(fit.delta))}",
    ]
    with _out_stream(args.out) as f:
        for line in lines:
            f.write(line + "\n")


def _cmd_simulate(args: argparse.Namespace) -> None:
    text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    overrides: dict[str, object] = {}
    for flag, key in (
        ("seed", "seed"),
        ("k", "rollout_count"),
        ("alpha", "alpha"),
        ("beta", "beta"),
        ("scheme", "scheme"),
        ("schedule", "loss_direction"),
        ("stage1_fraction", "stage1_fraction"),
        ("steps", "steps"),
        ("eta", "learning_rate"),
    ):
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    if args.recompute_interval is not None:
        if args.recompute_interval.lower() == "none":
            overrides["recompute_interval"] = None
        else:
            try:
                overrides["recompute_interval"] = int(args.recompute_interval)
            except ValueError:
                raise ConfigError(
                    f"--recompute-interval must be an integer or 'none', "
                    f"got {args.recompute_interval!r}"
                ) from None

    config = load_sim_config(text, overrides)
    world = build_world(config)
    dump_steps = (args.dump_step,) if args.dump_gradients else ()
    metrics = train(world, config, snr_dump_steps=dump_steps)

    with _out_stream(args.out) as f:
        write_metrics(f, metrics)
    for step in sorted(metrics.gradient_dumps):
        path = f"{args.dump_gradients}{step}.csv"
        with open(path, "w", encoding="utf-8") as f:
            write_gradient_records(f, metrics.gradient_dumps[step])
        _log(f"wrote gradient dump {path}")

    _log(
        "recomputed weights at steps: "
        + ", ".join(str(s) for s in metrics.recompute_steps)
    )
    if metrics.stage_switch_step is not None:
        _log(f"stage switch at step {metrics.stage_switch_step}")
    final = metrics.rows[-1]
    _log(
        f"final step {final.step}: loss {fmt(final.loss)} "
        f"mean_p {fmt(final.mean_p)} retention_kl {fmt(final.retention_kl)}"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zpdistill",
        description="Pass-rate weighted distillation: kernels, diagnostics, simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weight", help="weight rollout records with a pass-rate kernel")
    p.add_argument("rollouts", help="JSONL rollout file")
    p.add_argument("--alpha", type=float, default=1.0, help="kernel exponent on p")
    p.add_argument("--beta", type=float, default=1.0, help="kernel exponent on 1-p")
    p.add_argument(
        "--hard-filter",
        nargs=2,
        type=float,
        metavar=("LO", "HI"),
        help="use a keep-band indicator instead of the smooth kernel",
    )
    p.add_argument("--floor", type=float, default=0.0, help="minimum raw weight")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=_cmd_weight)

    p = sub.add_parser(
        "select-exponents",
        help="moment-matched kernel exponents from observed pass rates",
    )
    p.add_argument("rollouts", help="JSONL rollout file")
    p.add_argument(
        "--epsilon",
        type=float,
        default=0.125,
        help="band margin: only pass rates in [eps, 1-eps] enter the moments",
    )
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=_cmd_select_exponents)

    p = sub.add_parser(
        "robustness",
        help="worst-case efficiency table for misspecification radii",
    )
    p.add_argument(
        "--delta",
        type=float,
        action="append",
        help="extra log-misspecification radius (repeatable)",
    )
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=_cmd_robustness)

    p = sub.add_parser(
        "variance-ratio",
        help="closed-form weighted/unweighted gradient variance ratio",
    )
    p.add_argument("--alpha", type=float, help="kernel exponent on p")
    p.add_argument("--beta", type=float, help="kernel exponent on 1-p")
    p.add_argument("--gamma1", type=float, help="second-moment exponent on p")
    p.add_argument("--gamma2", type=float, help="second-moment exponent on 1-p")
    p.add_argument(
        "--signal",
        nargs=4,
        type=float,
        metavar=("A_S", "B_S", "A_PRIME", "B_PRIME"),
        help="derive exponents from signal and snr power laws instead",
    )
    p.add_argument(
        "--epsilon",
        type=float,
        help="truncate moment integrals to [eps, 1-eps] (diagnostic)",
    )
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=_cmd_variance_ratio)

    p = sub.add_parser(
        "snr-profile",
        help="binned gradient SNR profile with bell-shape report",
    )
    p.add_argument("gradients", help="gradient CSV file")
    p.add_argument("--bins", type=int, default=10, help="number of equal-width bins")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=_cmd_snr_profile)

    p = sub.add_parser(
        "fit-snr",
        help="fit the power-law SNR model to a profile and report its radius",
    )
    p.add_argument("profile", help="profile CSV file")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=_cmd_fit_snr)

    p = sub.add_parser("simulate", help="run the synthetic distillation world")
    p.add_argument("--config", help="INI config file (defaults used when omitted)")
    p.add_argument("--out", help="metrics CSV path (default stdout)")
    p.add_argument("--seed", type=int, help="override the world seed")
    p.add_argument("--k", type=int, help="override rollouts per pass-rate estimate")
    p.add_argument("--alpha", type=float, help="override the kernel exponent on p")
    p.add_argument("--beta", type=float, help="override the kernel exponent on 1-p")
    p.add_argument(
        "--scheme",
        choices=("beta", "hard", "unweighted"),
        help="override the weighting scheme",
    )
    p.add_argument(
        "--schedule",
        choices=("forward", "reverse", "two_stage"),
        help="override the loss direction schedule",
    )
    p.add_argument(
        "--stage1-fraction",
        dest="stage1_fraction",
        type=float,
        help="override the two-stage switch fraction",
    )
    p.add_argument(
        "--recompute-interval",
        dest="recompute_interval",
        help="override the weight recompute interval (integer or 'none')",
    )
    p.add_argument("--steps", type=int, help="override the number of training steps")
    p.add_argument("--eta", type=float, help="override the learning rate")
    p.add_argument(
        "--dump-gradients",
        metavar="PREFIX",
        help="write per-problem gradient CSVs named PREFIX<step>.csv",
    )
    p.add_argument(
        "--dump-step",
        type=int,
        default=20,
        help="training step at which to dump gradients (default 20)",
    )
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ZpdistillError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
