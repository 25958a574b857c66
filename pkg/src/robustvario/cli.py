"""Command-line interface.

Subcommands: simulate (emit an ASC realization), estimate (ASC grid with
optional quality mask to per-direction variogram CSV), contaminate (plant
outliers into an ASC), study-corrfac / study-biasrmse (Monte-Carlo
studies), and breakdown (closed-form breakdown tables).

Exit codes: 0 on success, 2 on input/parse errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .ascio import AscHeader, apply_quality_mask, load_asc, save_asc, standardize
from .breakdown import BreakdownQuery, breakdown_point
from .contamination import ContaminationSpec, contaminate
from .errors import InputError, NumericalError, RobustVarioError
from .estimators import ESTIMATOR_IDS, ModConfig, genton, matheron, mcd_diff, mcd_mod, mcd_org, parse_estimator_id
from .grid import Direction, build_lag_set
from .mcd import McdConfig
from .numerics import RngStream
from .scale import QnConfig
from .simfield import FieldSpec, simulate_field
from .study import StudySpec, default_lag_depths, run_bias_rmse_study, run_correction_factor_study
from .variomodel import parse_model

_AXIS_DIRECTIONS = (Direction.EW, Direction.SN)


def _parse_directions(text: str) -> tuple[Direction, ...]:
    return tuple(Direction.parse(part) for part in text.split(","))


def _parse_estimators(text: str) -> tuple[str, ...]:
    ids = tuple(part.strip().lower() for part in text.split(","))
    for eid in ids:
        parse_estimator_id(eid)
    return ids


def _parse_contam(text: str) -> ContaminationSpec:
    fields = {}
    for part in text.split(","):
        if "=" not in part:
            raise InputError(f"--contam entries must be key=value, got {part!r}")
        key, value = part.split("=", 1)
        fields[key.strip().lower()] = value.strip()
    try:
        return ContaminationSpec(
            kind=fields.get("kind", "block"),
            epsilon=float(fields.get("eps", fields.get("epsilon", "0"))),
            mu0=float(fields.get("mu0", "0")),
            sigma0=float(fields.get("sigma0", "1")),
            mode=fields.get("mode", "substitutive"),
        )
    except ValueError as exc:
        raise InputError(f"bad --contam spec {text!r}: {exc}") from None


def _parse_int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",")]


def _load_corrfac_csv(path) -> dict[tuple[str, str], float]:
    factors = {}
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[:3] != ["estimator", "direction", "c_opt"]:
            raise InputError(f"{path}: not a correction-factor CSV")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) >= 3:
                factors[(parts[0], parts[1])] = float(parts[2])
    return factors


def _mcd_config(args) -> McdConfig:
    return McdConfig(alpha=args.alpha) if args.alpha is not None else McdConfig()


def _lag_depths(args) -> dict[Direction, int]:
    return default_lag_depths(args.hmax, args.hmax_diag)


def _cmd_simulate(args) -> int:
    spec = FieldSpec(parse_model(args.model), args.nx, args.ny, mean=args.mean)
    grid = simulate_field(spec, RngStream(args.seed, args.stream))
    save_asc(args.out, grid, AscHeader(ncols=grid.nx, nrows=grid.ny))
    print(f"wrote {args.nx}x{args.ny} realization to {args.out}")
    return 0


def _cmd_contaminate(args) -> int:
    grid = load_asc(args.grid)
    spec = _parse_contam(args.contam)
    out, cells = contaminate(grid, spec, RngStream(args.seed, args.stream))
    save_asc(args.out, out, AscHeader(ncols=out.nx, nrows=out.ny))
    print(f"contaminated {len(cells)} cells; wrote {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    grid = load_asc(args.grid)
    if args.quality:
        clear = set(_parse_int_list(args.clear_codes))
        grid = apply_quality_mask(grid, load_asc(args.quality), clear)
    scale = None
    if args.standardize:
        grid, scale = standardize(grid)
    mcdcfg = _mcd_config(args)
    qncfg = QnConfig()
    mod = ModConfig(m_x=args.mx, m_y=args.my) if args.mx is not None else None
    depths = _lag_depths(args)
    rows = []
    for d_idx, direction in enumerate(_parse_directions(args.directions)):
        lags = build_lag_set(direction, depths[direction])
        for e_idx, eid in enumerate(_parse_estimators(args.estimators)):
            kind = parse_estimator_id(eid)
            rng = RngStream(args.seed, (d_idx * len(ESTIMATOR_IDS) + e_idx + 1) * 2**40)
            if kind.family == "matheron":
                est = matheron(grid, lags)
            elif kind.family == "genton":
                est = genton(grid, lags, qncfg)
            elif kind.mod:
                if mod is None:
                    raise InputError(f"estimator {eid} needs --mx/--my")
                est = mcd_mod(grid, lags, kind.family, mod, mcdcfg, kind.reweight, rng)
            elif kind.family == "org":
                est = mcd_org(grid, lags, mcdcfg, kind.reweight, rng)
            else:
                est = mcd_diff(grid, lags, mcdcfg, kind.reweight, rng)
            for lag_idx, value in enumerate(est.values):
                out_value = value * scale**2 if scale is not None and args.backscale else value
                rows.append(
                    f"{eid},{direction.value},{lag_idx + 1},{out_value:.17g},{est.counts[lag_idx]}"
                )
    text = "estimator,direction,lag,variogram,count\n" + "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _study_spec(args, contamination=None, correction_factors=None) -> StudySpec:
    return StudySpec(
        field=FieldSpec(parse_model(args.model), args.nx, args.ny),
        estimators=_parse_estimators(args.estimators),
        lag_depths=_lag_depths(args),
        directions=_parse_directions(args.directions),
        contamination=contamination,
        replications=args.reps,
        base_seed=args.seed,
        corrfac_divisor=args.divisor,
        correction_factors=correction_factors,
        mcd=_mcd_config(args),
        mod=ModConfig(m_x=args.mx, m_y=args.my) if args.mx is not None else None,
        n_jobs=args.jobs,
    )


def _cmd_study_corrfac(args) -> int:
    result = run_correction_factor_study(_study_spec(args))
    result.to_csv(args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_study_biasrmse(args) -> int:
    contamination = _parse_contam(args.contam) if args.contam else None
    factors = _load_corrfac_csv(args.corrfac) if args.corrfac else None
    result = run_bias_rmse_study(_study_spec(args, contamination, factors))
    result.to_csv(args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_breakdown(args) -> int:
    lines = ["scenario,estimator,n_x,h_max,m,numerator,denominator,value"]
    for estimator in args.estimator.split(","):
        for n_x in _parse_int_list(args.nx):
            for h_max in _parse_int_list(args.hmax):
                for m in _parse_int_list(args.m):
                    q = BreakdownQuery(args.scenario, estimator.strip(), n_x, h_max, m)
                    eps = breakdown_point(q)
                    lines.append(
                        f"{q.scenario},{q.estimator},{n_x},{h_max},{m},"
                        f"{eps.numerator},{eps.denominator},{float(eps):.17g}"
                    )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _add_common_model_args(p: argparse.ArgumentParser, default_hmax: int, default_diag: int):
    p.add_argument("--model", default="spherical:5:2:1.1780972450961724:2",
                   help="family:R:beta[:theta:b] (default: paper-style anisotropic spherical)")
    p.add_argument("--hmax", type=int, default=default_hmax, help="lag depth for EW/SN")
    p.add_argument("--hmax-diag", type=int, default=default_diag, help="lag depth for diagonals")
    p.add_argument("--directions", default="ew,sn,swne,senw")
    p.add_argument("--estimators", default="matheron,genton,mcd.org.re,mcd.diff.re")
    p.add_argument("--alpha", type=float, default=None, help="MCD subset fraction (default maximal breakdown)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mx", type=int, default=None, help="x dependence range for .mod estimators")
    p.add_argument("--my", type=int, default=0, help="y dependence range for .mod estimators")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustvario",
        description="Robust directional variogram estimation on regular grids",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a Gaussian random field to an ASC file")
    p.add_argument("--model", default="spherical:5:2:1.1780972450961724:2")
    p.add_argument("--nx", type=int, default=15)
    p.add_argument("--ny", type=int, default=15)
    p.add_argument("--mean", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("contaminate", help="plant outliers into an ASC grid")
    p.add_argument("grid")
    p.add_argument("--contam", required=True,
                   help="kind=block|isolated,eps=...,mu0=...,sigma0=...[,mode=substitutive|additive]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_contaminate)

    p = sub.add_parser("estimate", help="directional variogram estimates from an ASC grid")
    p.add_argument("grid")
    p.add_argument("--quality", default=None, help="quality-band ASC raster")
    p.add_argument("--clear-codes", default="0", help="comma list of clear quality codes")
    p.add_argument("--standardize", action="store_true",
                   help="divide by the consistency-scaled MAD before estimating")
    p.add_argument("--backscale", action="store_true",
                   help="report standardized estimates back on the original scale")
    _add_common_model_args(p, default_hmax=4, default_diag=3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("study-corrfac", help="simulated finite-sample correction factors")
    _add_common_model_args(p, default_hmax=7, default_diag=5)
    p.add_argument("--nx", type=int, default=15)
    p.add_argument("--ny", type=int, default=15)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--divisor", choices=("h_max", "h_max_minus_1"), default="h_max")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_study_corrfac)

    p = sub.add_parser("study-biasrmse", help="bias/rMSE study, optionally contaminated")
    _add_common_model_args(p, default_hmax=7, default_diag=5)
    p.add_argument("--nx", type=int, default=15)
    p.add_argument("--ny", type=int, default=15)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--divisor", choices=("h_max", "h_max_minus_1"), default="h_max")
    p.add_argument("--contam", default=None)
    p.add_argument("--corrfac", default=None, help="correction-factor CSV from study-corrfac")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_study_biasrmse)

    p = sub.add_parser("breakdown", help="closed-form breakdown points as CSV")
    p.add_argument("--scenario", choices=("block", "isolated"), required=True)
    p.add_argument("--estimator", required=True,
                   help="comma list of mcd_org,mcd_diff,mcd_org_mod,mcd_diff_mod,genton")
    p.add_argument("--nx", required=True, help="comma list of series lengths")
    p.add_argument("--hmax", required=True, help="comma list of lag depths")
    p.add_argument("--m", default="0", help="comma list of dependence ranges")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_breakdown)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except RobustVarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
