"""Command-line entry point: ``analyze``, ``generate`` and ``verify``.

Exit codes: 0 ok, 1 input error, 2 identity/verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .io import (
    SyntheticSpec,
    generate_synthetic,
    ingest_csv,
    read_portfolio_csv,
    trades_to_csv,
    write_portfolio_csv,
)
from .portfolio import DEFAULT_LIQUIDITY_FACTOR
from .report import AnalysisConfig, analyze
from .trades import ConsistencyError, MBPSError
from .verify import CampaignConfig, randomized_identity_campaign, summarize

log = logging.getLogger("mbps")

EXIT_OK, EXIT_INPUT, EXIT_IDENTITY = 0, 1, 2


def _default_seed() -> int:
    raw = os.environ.get("MBPS_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise MBPSError(f"MBPS_SEED must be an integer, got {raw!r}") from None


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args: argparse.Namespace) -> int:
    series = ingest_csv(args.trades)
    portfolio = read_portfolio_csv(args.portfolio)
    config = AnalysisConfig(
        liquidity_factor=args.liquidity_factor, rtol=args.rtol, output_format=args.format
    )
    report = analyze(series, portfolio, config)
    for w in report.warnings:
        log.warning(w)
    _write(report.render(args.format), args.out)
    if report.failed:
        log.error("decomposition does not reconcile with the portfolio variance")
        return EXIT_IDENTITY
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    if args.spec:
        spec = SyntheticSpec.from_json(args.spec)
    else:
        spec = SyntheticSpec(seed=_default_seed())
    series, portfolio = generate_synthetic(spec)
    _write(trades_to_csv(series), args.out)
    if args.portfolio_out:
        write_portfolio_csv(portfolio, args.portfolio_out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    config = CampaignConfig(
        instances=args.instances, seed=seed, max_j=args.max_j, max_n=args.max_n
    )
    reports = randomized_identity_campaign(config)
    summary = summarize(reports)
    if args.out:
        Path(args.out).write_text(
            json.dumps({"summary": summary, "reports": [r.as_dict() for r in reports]}, indent=2)
            + "\n"
        )
    print(
        f"instances={summary['instances']} passed={summary['passed']} "
        f"failed={summary['failed']} checks={summary['checks']} "
        f"non_psd_sigma={summary['non_psd_sigma']}"
    )
    for name, err in summary["worst_rel_error"].items():
        log.info("worst relative error %-40s %.3e", name, err)
    for f in summary["failures"][:10]:
        names = ", ".join(c["name"] for c in f["checks"][:3])
        print(f"FAIL instance {f['index']} (seed {f['seed']}): {f['error'] or names}")
    return EXIT_OK if summary["failed"] == 0 else EXIT_IDENTITY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbps", description="Market-based portfolio moments and variance decomposition."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log per-check detail.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="Analyze a portfolio from trade and holdings CSVs.")
    p.add_argument("--trades", required=True, help="CSV: security_id,tick,value,volume")
    p.add_argument("--portfolio", required=True, help="CSV: security_id,holding,price_at_t0")
    p.add_argument("--out", help="Write the report here instead of stdout.")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--rtol", type=float, default=AnalysisConfig.rtol,
                   help="Tolerance for reconciling the decomposition with the direct variance.")
    p.add_argument("--liquidity-factor", type=float, default=DEFAULT_LIQUIDITY_FACTOR,
                   help="Warn when traded volume < factor * holding.")
    p.set_defaults(func=cmd_analyze)

    g = sub.add_parser("generate", help="Write deterministic synthetic trades.")
    g.add_argument("--spec", help="JSON: {J, N, seed, volume_mode, value_range, volume_range}")
    g.add_argument("--out", help="Trades CSV path (stdout if omitted).")
    g.add_argument("--portfolio-out", help="Also write a matching portfolio CSV.")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="Run the randomized identity campaign.")
    v.add_argument("--instances", type=int, default=200)
    v.add_argument("--seed", type=int, default=None, help="Defaults to $MBPS_SEED or 0.")
    v.add_argument("--max-j", type=int, default=5)
    v.add_argument("--max-n", type=int, default=64)
    v.add_argument("--out", help="Write the full JSON oracle report here.")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    if getattr(args, "rtol", 1.0) <= 0:
        print("error: --rtol must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    except (MBPSError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
