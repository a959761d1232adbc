"""
inobody command line

Subcommands:
1. body    - build a family's body, verify its bounds, export JSON/CSV/SVG
2. valset  - generic valuative set of a file of generators, with its certificate
3. zariski - Zariski decomposition of L_t, or the full N(L_t).E profile
4. verify  - run the property batteries

Exit codes: 0 success or interrupted, 1 verdict failure or an internal error (logged
with its traceback), 2 usage or input error.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from inobody.bodies import DEFAULT_SEED, FamilySpec, build_family, load_fixture_overrides, reverify
from inobody.errors import INPUT_ERRORS, InobodyError, ParseError
from inobody.exactlin import DEFAULT_BOUND, format_rat, to_rat
from inobody.export import report_csv, report_svg
from inobody.flagval import DEFAULT_TRIALS, generic_valuative_set, parse_forms
from inobody.surfzar import SurfaceModel, blowup_p2_model, decompose_at, negative_part_on_E, picard_one_model
from inobody.suites import run_suite

FAMILY_PARAMS = ("n", "a", "u", "v", "epsilon", "mu")

logger = logging.getLogger("inobody.cli")


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    inputs: tuple[str, ...]
    out: str | None
    seed: int
    format: str = "json"
    trials: int = DEFAULT_TRIALS
    bound: int = DEFAULT_BOUND


def configure_logging(level_name: str, quiet: bool) -> None:
    """Configure root logging for the command line."""

    # Quiet mode always forces WARNING regardless of user supplied level
    if quiet:
        level = logging.WARNING
    else:
        level = getattr(logging, level_name.upper(), logging.INFO)

    logging.basicConfig(
        level=level,
        format="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        force=True,
    )

    logger.debug("Logging configured (requested_level=%s, quiet=%s)", level_name, quiet)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"{name} must be an integer, got {raw!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(out).write_text(text, encoding="utf-8")
    logger.info("💾 Wrote %s", out)


def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def cmd_body(args, config: CliConfig) -> int:
    params = {k: getattr(args, k) for k in FAMILY_PARAMS if getattr(args, k) is not None}
    report = build_family(FamilySpec(args.family, params), config.seed)
    if args.very_general:
        report = reverify(report, very_general=True)

    if config.format == "svg":
        _emit(report_svg(report, args.slice), config.out)
    elif config.format == "csv":
        _emit(report_csv(report), config.out)
    else:
        _emit(_dumps(report.to_json()), config.out)

    expected = [name for name, ok in report.verdicts if not ok and name in report.expected_failures]
    if expected:
        logger.warning("Expected verdict failures for %s: %s", report.family, ", ".join(expected))
    failed = report.unexpected_failures
    if failed:
        logger.error("❌ Verdicts failed for %s: %s", report.family, ", ".join(failed))
        return 1
    logger.info("✅ %s: eps = (%s), vol = %s", report.family, ", ".join(map(str, report.epsilons)), report.vol)
    return 0


def cmd_valset(args, config: CliConfig) -> int:
    space = parse_forms(_read(args.forms))
    result = generic_valuative_set(space, config.seed, config.trials, config.bound)
    data = {"variables": space.n, "degree": space.d, "rank": space.rank, **result.to_json()}
    _emit(_dumps(data), config.out)
    logger.info("✅ Valuative set of %s points (attempt %s)", len(result.points), result.certificate.attempt)
    return 0


def _zariski_model(args) -> SurfaceModel:
    if args.model is not None:
        return SurfaceModel.from_json(_read(args.model))
    if args.family == "picard-one":
        return picard_one_model(args.h)
    return blowup_p2_model(args.u, args.v)


def cmd_zariski(args, config: CliConfig) -> int:
    model = _zariski_model(args)
    if args.profile:
        data = negative_part_on_E(model).to_json()
    else:
        result = decompose_at(model, args.t)
        data = {"t": format_rat(to_rat(args.t)), **result.to_json(model)}
    _emit(_dumps(data), config.out)
    return 0


def cmd_verify(args, config: CliConfig) -> int:
    fixtures = load_fixture_overrides(_read(args.fixtures)) if args.fixtures else None
    report = run_suite(args.suite, config.seed, fixtures)
    _emit(_dumps(report.to_json()), config.out)
    if not report.passed:
        logger.error("❌ Failed properties: %s", ", ".join(report.failures))
        return 1
    logger.info("✅ All %s properties passed", len(report.results))
    return 0


def build_parser() -> argparse.ArgumentParser:
    default_seed = _env_int("INOBODY_SEED", DEFAULT_SEED)
    default_bound = _env_int("INOBODY_BOUND", DEFAULT_BOUND)
    default_level = os.getenv("INOBODY_LOG_LEVEL", "INFO")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--log-level",
        default=default_level,
        help=f"Python logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL) (default: {default_level})",
    )
    common.add_argument("--quiet", action="store_true", help="Reduce output verbosity")
    common.add_argument("--out", default=None, help="Output file (default: stdout)")
    common.add_argument("--seed", type=int, default=default_seed, help=f"Master seed (default: {default_seed})")

    parser = argparse.ArgumentParser(prog="inobody", description="Infinitesimal Newton-Okounkov bodies, exactly")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    body = sub.add_parser("body", parents=[common], help="Build and verify a family body")
    body.add_argument("family", help="Family tag, e.g. product-curves, blowup-p2, jacobian-nonhyper")
    for name in FAMILY_PARAMS:
        body.add_argument(f"--{name}", default=None, help=f"Family parameter {name} (integer or p/q)")
    body.add_argument("--very-general", action="store_true", help="Also run the very-general-point checks")
    body.add_argument("--format", choices=("json", "csv", "svg"), default="json", help="Output format (default: json)")
    body.add_argument("--slice", default=None, help="nu_1 value for SVG slices of 3-dimensional bodies (default: eps_1)")
    body.set_defaults(handler=cmd_body)

    valset = sub.add_parser("valset", parents=[common], help="Generic valuative set of a space of forms")
    valset.add_argument("forms", help="JSON or text file of generators")
    valset.add_argument(
        "--trials", type=int, default=DEFAULT_TRIALS, help=f"Random charts per attempt (default: {DEFAULT_TRIALS})"
    )
    valset.add_argument("--bound", type=int, default=default_bound, help=f"Chart entry bound (default: {default_bound})")
    valset.set_defaults(handler=cmd_valset)

    zariski = sub.add_parser("zariski", parents=[common], help="Zariski decompositions along L_t = pi^*L - tE")
    zariski.add_argument("model", nargs="?", default=None, help="SurfaceModel JSON file")
    zariski.add_argument(
        "--family", choices=("blowup-p2", "picard-one"), default="blowup-p2", help="Built-in model (default: blowup-p2)"
    )
    zariski.add_argument("--u", default="3", help="blowup-p2 parameter u (default: 3)")
    zariski.add_argument("--v", default="1", help="blowup-p2 parameter v (default: 1)")
    zariski.add_argument("--h", default="1", help="picard-one self-intersection H.H (default: 1)")
    mode = zariski.add_mutually_exclusive_group(required=True)
    mode.add_argument("--t", default=None, help="Decompose L_t at this t")
    mode.add_argument("--profile", action="store_true", help="Piecewise-linear N(L_t).E with breakpoints")
    zariski.set_defaults(handler=cmd_zariski)

    verify = sub.add_parser("verify", parents=[common], help="Run property batteries")
    verify.add_argument("--suite", default="all", help="all, borel, flagval, surfzar or bodies (default: all)")
    verify.add_argument("--fixtures", default=None, help="JSON file overriding declared fixtures")
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None) -> int:
    """Parse arguments, run one subcommand, and map errors to exit codes."""
    try:
        parser = build_parser()
    except ParseError as e:
        logging.basicConfig(level=logging.ERROR)
        logger.error("❌ Invalid environment: %s", e)
        return 2
    args = parser.parse_args(argv)

    configure_logging(args.log_level, args.quiet)
    config = CliConfig(
        subcommand=args.subcommand,
        inputs=tuple(p for p in (getattr(args, "forms", None), getattr(args, "model", None)) if p),
        out=args.out,
        seed=args.seed,
        format=getattr(args, "format", "json"),
        trials=getattr(args, "trials", DEFAULT_TRIALS),
        bound=getattr(args, "bound", DEFAULT_BOUND),
    )
    logger.debug("Running %s", config.subcommand, extra={"config": config})

    try:
        return args.handler(args, config)
    except INPUT_ERRORS as e:
        logger.error("❌ Invalid input: %s", e)
        return 2
    except InobodyError as e:
        logger.error("❌ %s", e)
        return 1
    except KeyboardInterrupt:
        logger.warning("⚠️  Interrupted by user")
        return 0
    except Exception as e:
        logger.exception("❌ Unhandled error occurred: %s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
