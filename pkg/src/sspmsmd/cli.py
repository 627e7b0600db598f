"""Command-line interface: ``sspmsmd {families,cert,sweep,converge}``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, preset, preset_names
from .experiments import MethodSpec, run_study
from .families import (
    FAMILIES,
    FamilyInfeasibleError,
    UnsupportedParameterError,
    canonical_family_id,
    make_family,
)
from .sspcert import build_shu_osher, check_certificate, find_ssp_coefficient
from .tableau import format_number, tableau_from_text, tableau_to_text

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_USAGE = 2
OUT_ENV = "SSP_MSMD_OUT"


def _err(msg: str) -> None:
    print(f"sspmsmd: error: {msg}", file=sys.stderr)


_SQRT_HALF = math.sqrt(0.5)
_K_EXPRESSIONS = {"1/sqrt(2)": _SQRT_HALF, "sqrt(2)/2": _SQRT_HALF, "sqrt(0.5)": _SQRT_HALF, "sqrt(1/2)": _SQRT_HALF}


def parse_k(text: str) -> float:
    """K from the command line.

    Accepts plain numbers and the spellings of 1/sqrt(2) above. A number that
    agrees with 1/sqrt(2) to eight decimals (0.70710678) is read as 1/sqrt(2)
    itself, since that is the value tabulated coefficients are computed at.
    """
    key = text.strip().replace(" ", "").lower()
    if key in _K_EXPRESSIONS:
        return _K_EXPRESSIONS[key]
    try:
        value = float(key)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid K value {text!r}") from None
    if abs(value - _SQRT_HALF) <= 5e-9:
        return _SQRT_HALF
    return value


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


# --------------------------------------------------------------------------
# families


def cmd_families(args) -> int:
    if args.action == "list":
        print(f"{'family':<14}{'order':>6}{'stages':>8}  K range")
        for info in FAMILIES.values():
            print(f"{info.family_id:<14}{info.order:>6}{info.stages:>8}  {info.k_range}")
        return EXIT_OK

    name = args.family or args.name
    if not name:
        _err("families make needs a family (positional or --family)")
        return EXIT_USAGE
    if args.k is not None and not args.k > 0:
        _err("K must be positive")
        return EXIT_USAGE
    try:
        fid = canonical_family_id(name)
        method = make_family(fid, args.k)
    except KeyError as exc:
        _err(exc.args[0])
        return EXIT_USAGE
    except (FamilyInfeasibleError, UnsupportedParameterError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE

    print(f"# family = {method.family_id}")
    if method.K is not None:
        print(f"# K = {format_number(method.K)}")
    if not math.isnan(method.C):
        print(f"# C = {format_number(method.C)}")
    print(tableau_to_text(method.tableau), end="")
    if args.shu_osher:
        if not (method.K and method.C > 0):
            _err("a Shu-Osher form needs an SSP method and a value of K")
            return EXIT_USAGE
        form = build_shu_osher(method.tableau, method.C, method.K)
        print("# Shu-Osher form at r = C (matrices row-major)")
        print(form.to_text(), end="")
    return EXIT_OK


# --------------------------------------------------------------------------
# cert


def cmd_cert(args) -> int:
    try:
        tab = tableau_from_text(Path(args.tableau))
    except (OSError, ValueError) as exc:
        _err(f"cannot read tableau {args.tableau}: {exc}")
        return EXIT_USAGE
    if not args.k > 0:
        _err("K must be positive")
        return EXIT_USAGE

    if args.r is not None:
        if not args.r > 0:
            _err("r must be positive")
            return EXIT_USAGE
        form = build_shu_osher(tab, args.r, args.k)
        cert = check_certificate(form)
        if args.json:
            print(json.dumps({"K": args.k, "r": args.r, "shu_osher": form.to_dict(), "certificate": cert.to_dict()}, indent=2))
        elif cert.feasible:
            print(f"feasible at r = {format_number(args.r)} (min entry {cert.min_entry:.4g})")
        else:
            print(f"infeasible, witness {cert.witness_label()} = {format_number(cert.min_entry)}")
        return EXIT_OK

    C = find_ssp_coefficient(tab, args.k, r_max=args.r_max)
    saturated = C >= args.r_max
    if saturated:
        print(
            f"warning: certificate holds up to r_max = {format_number(args.r_max)}; "
            "C is bounded only by the search range",
            file=sys.stderr,
        )
    if args.json:
        out = {"K": args.k, "C": C, "r_max": args.r_max, "saturated": saturated}
        if C > 0:
            out["certificate"] = check_certificate(build_shu_osher(tab, C, args.k)).to_dict()
        print(json.dumps(out, indent=2))
    else:
        print(f"C = {format_number(C)}")
    return EXIT_OK


# --------------------------------------------------------------------------
# sweep / converge


def _resolve_config(args, command: str) -> RunConfig:
    if args.config:
        cfg = RunConfig.from_file(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError(["give --preset or --config"])
    if cfg.command != command:
        raise ConfigError([f"configuration is for '{cfg.command}', not '{command}'"])

    methods = None
    if args.methods:
        methods = tuple(MethodSpec.from_text(m) for m in args.methods.replace(",", " ").split())
    if args.k is not None:
        if not args.k > 0:
            raise ConfigError(["K must be positive"])
        base = methods or cfg.spec.methods
        methods = tuple(
            MethodSpec(m.family, args.k if FAMILIES[m.family].needs_k or m.K is not None else None) for m in base
        )
    changes = dict(
        methods=methods,
        scheme=args.scheme,
        flux=args.flux,
        lambdas=args.lambdas,
        final_time=args.final_time,
        weno_eps=args.weno_eps,
    )
    if command == "sweep":
        changes.update(n_points=args.n_points, n_steps=args.n_steps, threshold=args.threshold)
    else:
        changes.update(n_list=args.n_list)
    cfg = cfg.override(**changes)
    if command == "converge" and args.max_n is not None:
        cfg = RunConfig(cfg.command, cfg.spec.truncated(args.max_n))
    return cfg


def _out_dir(args, cfg_name: str) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path("sspmsmd-out") / cfg_name


def _run(args, command: str) -> int:
    try:
        cfg = _resolve_config(args, command)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (KeyError, ValueError) as exc:
        _err(exc.args[0] if exc.args else str(exc))
        return EXIT_USAGE
    name = args.preset or (Path(args.config).stem if args.config else command)
    out = _out_dir(args, name)
    try:
        report = run_study(cfg.spec, jobs=args.jobs)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_USAGE
    out.mkdir(parents=True, exist_ok=True)
    cfg.write(out / "config.txt")
    report.write_all(out)
    print(report.table())
    print(f"\nwrote {out / 'report.csv'} and {out / 'summary.json'}")
    if command == "converge":
        bad = [r for r in report.rows if r.error_linf is not None and not math.isfinite(r.error_linf)]
        if bad:
            _err(f"{len(bad)} run(s) blew up")
            return EXIT_RUN_FAILED
    return EXIT_OK


def cmd_sweep(args) -> int:
    return _run(args, "sweep")


def cmd_converge(args) -> int:
    return _run(args, "converge")


# --------------------------------------------------------------------------
# parser


def _add_study_args(p, command):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=preset_names(), help="built-in parameter set")
    src.add_argument("--config", help="key = value configuration file")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./sspmsmd-out/<name>)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes; 1 runs cells in order")
    p.add_argument("--methods", help="space/comma separated, e.g. '2s3p@0.7071 ssprk33'")
    p.add_argument("--k", type=parse_k, help="K applied to every method that uses one")
    p.add_argument("--scheme")
    p.add_argument("--flux")
    p.add_argument("--lambdas", type=_float_list)
    p.add_argument("--final-time", type=float)
    p.add_argument("--weno-eps", type=float)
    if command == "sweep":
        p.add_argument("--n-points", type=int)
        p.add_argument("--n-steps", type=int)
        p.add_argument("--threshold", type=float)
    else:
        p.add_argument("--n-list", type=_int_list)
        p.add_argument("--max-n", type=int, help="drop co-refinement resolutions above this N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sspmsmd", description="SSP two-derivative Runge-Kutta methods")
    sub = parser.add_subparsers(dest="command", required=True)

    fam = sub.add_parser("families", help="list or build method families")
    fam.add_argument("action", choices=("list", "make"))
    fam.add_argument("name", nargs="?", help="family id or alias (same as --family)")
    fam.add_argument("--family")
    fam.add_argument("--k", type=parse_k)
    fam.add_argument("--shu-osher", action="store_true", help="also print the Shu-Osher form at r = C")
    fam.set_defaults(func=cmd_families)

    cert = sub.add_parser("cert", help="certify a tableau file")
    cert.add_argument("--tableau", required=True)
    cert.add_argument("--k", type=parse_k, required=True)
    cert.add_argument("--r", type=float, help="check this r instead of searching for C")
    cert.add_argument("--r-max", type=float, default=10.0)
    cert.add_argument("--json", action="store_true")
    cert.set_defaults(func=cmd_cert)

    for name, func, help_ in (
        ("sweep", cmd_sweep, "total-variation sharpness sweep"),
        ("converge", cmd_converge, "convergence study"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_study_args(p, name)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
