"""Command-line entry point: ``echoform <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import TOLERANCE, benchmark_rows
from .expr import ExpressionSyntaxError, NonPositiveProfileError
from .export import write_grid_csv, write_json, write_pgm
from .geometry import GeometryError, parse_curve
from .inversion.asymptotics import NoDetection
from .inversion.calibration import CalibrationError, fit_calibration, get_calibration
from .inversion.impedance import RecoveryError, estimate_impedance, lambda_with_boundary
from .inversion.indicators import IndicatorError, indicator_I, indicator_T, parse_grid
from .pipeline import PipelineConfig, run_pipeline
from .scatterer import make_scatterer
from .solver import SolverError
from .synthesis import (
    DatasetError,
    FarFieldDataset,
    add_noise,
    build_direction_set,
    load_dataset,
    parse_band,
    save_dataset,
    synthesize,
)

logger = logging.getLogger("echoform")

EXIT_CONFIG = 2
EXIT_FAILURE = 1


class ConfigError(ValueError):
    pass


def _alphas(text: str) -> tuple[float, float]:
    try:
        a = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad alphas {text!r}") from exc
    if len(a) != 2:
        raise argparse.ArgumentTypeError("expected two values a1,a2")
    return a


def _add_scatterer_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--geometry", default="egg", help="egg, kite, disk:a=..,cx=..,cy=.. or trig:...")
    p.add_argument("--bc", choices=("dirichlet", "neumann", "impedance"), default="dirichlet")
    p.add_argument("--lambda", dest="lam", default=None, metavar="EXPR", help="impedance profile in t")
    p.add_argument("--band", default="20:50:0.1", help="k_minus:k_plus:dk")
    p.add_argument("--directions", type=int, default=64)
    p.add_argument("--set", dest="config", choices=("A1", "A2"), default="A2")
    p.add_argument("--alphas", type=_alphas, default=(8.0, 10.0))
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--engine", choices=("bie", "oracle"), default="bie")


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", type=Path, help="dataset file; otherwise synthesize from the scatterer options")
    _add_scatterer_args(p)


def _dataset(args) -> FarFieldDataset:
    if getattr(args, "data", None):
        return load_dataset(args.data)
    spec = make_scatterer(args.geometry, args.bc, args.lam)
    grid = parse_band(args.band)
    pairs = build_direction_set(args.directions, args.config, alphas=args.alphas)
    clean = synthesize(spec, pairs, grid, engine=args.engine, threads=args.threads)
    return add_noise(clean, args.noise, args.seed)


def _emit(args, payload, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(text)


def cmd_synthesize(args) -> int:
    if not args.out:
        raise ConfigError("--out is required")
    data = _dataset(args)
    save_dataset(data, args.out)
    _emit(args, data.manifest(), f"wrote {data.count} records to {args.out}")
    return 0


def _write_grid(grid, out: Path, stem: str) -> list[Path]:
    csv_path, pgm_path = out / f"{stem}.csv", out / f"{stem}.pgm"
    write_grid_csv(grid, csv_path)
    write_pgm(grid, pgm_path)
    return [csv_path, pgm_path, pgm_path.with_name(pgm_path.name + ".json")]


def cmd_pipeline(args) -> int:
    out = Path(args.out or "echoform-out")
    created = not out.exists()
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        data = _dataset(args)
        config = PipelineConfig(
            grid=parse_grid(args.grid),
            indicator=args.indicator,
            mode="concave" if args.concave else "convex",
            rule=args.rule,
        )
        result = run_pipeline(data, config)
        written += _write_grid(result.grid, out, f"indicator_{result.grid.name}")
        report_path = out / "report.json"
        write_json(result.report, report_path)
        written.append(report_path)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        if created and out.exists() and not any(out.iterdir()):
            out.rmdir()
        raise
    _emit(args, {"classification": result.classification, "outputs": [str(p) for p in written]},
          f"classification: {result.classification}\nreport: {out / 'report.json'}")
    return 0


def cmd_reconstruct(args) -> int:
    data = _dataset(args)
    cal = get_calibration()
    spec = parse_grid(args.grid)
    if args.indicator == "T":
        grid = indicator_T(data, spec, cal)
    else:
        gamma = estimate_impedance(data).gamma if data.directions.kind == "A2" else np.ones(data.directions.l)
        grid = indicator_I(data, gamma, spec, cal)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    paths = _write_grid(grid, out, f"indicator_{grid.name}")
    _emit(args, {"outputs": [str(p) for p in paths], **grid.diagnostics}, "\n".join(map(str, paths)))
    return 0


def cmd_impedance(args) -> int:
    data = _dataset(args)
    if args.with_boundary:
        cal = get_calibration()
        curve = parse_curve(args.boundary or args.geometry)
        obs = data.directions.observations()
        table = {}
        for i in range(data.directions.l):
            xhat = obs[i, 0]
            beta = f"{math.atan2(xhat[1], xhat[0]):.6f}"
            try:
                table[beta] = lambda_with_boundary(data.ks, data.values[i, 0], curve, xhat, cal)
            except RecoveryError as exc:
                logger.warning("direction %s: %s", beta, exc)
                table[beta] = None
        payload = {"method": "with-boundary", "lambda": table}
        text = "\n".join(f"{b}\t{v}" for b, v in table.items())
    else:
        est = estimate_impedance(data, mode="concave" if args.concave else "convex", rule=args.rule)
        payload = {"method": "no-boundary", **est.to_dict()}
        text = f"classification: {est.label}\n" + "\n".join(
            f"{r.beta:.6f}\t{r.L[0]:.5f}\t{r.L[1]:.5f}\t{r.lam}" for r in est.rows
        )
    if args.out:
        write_json(payload, args.out)
    _emit(args, payload, text)
    return 0


def cmd_classify(args) -> int:
    data = _dataset(args)
    est = estimate_impedance(data, mode="concave" if args.concave else "convex", rule=args.rule)
    dev = np.abs(est.L_table - 1.0)
    payload = {"classification": est.label, "max_dev": dev.max(axis=0).tolist(), "min_dev": dev.min(axis=0).tolist()}
    _emit(args, payload, est.label)
    return 0


def cmd_oracle(args) -> int:
    rows = benchmark_rows(args.nodes)
    worst = max(r["diff"] for r in rows)
    if args.json:
        print(json.dumps([{**r, "value": [r["value"].real, r["value"].imag],
                           "reference": [r["reference"].real, r["reference"].imag]} for r in rows], indent=2))
    else:
        print("case,source,re,im,ref_re,ref_im,diff")
        for r in rows:
            v, ref = r["value"], r["reference"]
            print(f"{r['case']},{r['source']},{v.real:.6f},{v.imag:.6f},{ref.real:.4f},{ref.imag:.4f},{r['diff']:.2e}")
    if worst > TOLERANCE:
        print(f"max difference {worst:.3e} exceeds {TOLERANCE:g}", file=sys.stderr)
        return EXIT_FAILURE
    return 0


def cmd_calibrate(args) -> int:
    cal = fit_calibration()
    if args.out:
        cal.save(args.out)
    _emit(args, json.loads(cal.to_json()), cal.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="echoform", description=__doc__)
    parser.add_argument("--version", action="version", version=f"echoform {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", parents=[common], help="write a far-field dataset")
    _add_scatterer_args(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_synthesize)

    for name, func, helptext in (
        ("pipeline", cmd_pipeline, "full reconstruction with report and heatmaps"),
        ("reconstruct", cmd_reconstruct, "indicator grid only"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _add_data_args(p)
        p.add_argument("--grid", default="-3:3:-3:3:0.01", help="xmin:xmax:ymin:ymax:h")
        p.add_argument("--indicator", choices=("I", "T"), default="I" if name == "pipeline" else "T")
        p.add_argument("--concave", action="store_true")
        p.add_argument("--rule", choices=("either", "both", "first"), default=None,
                   help="rotation-column rule (default: either if convex, both if concave)")
        p.add_argument("--out", type=Path)
        p.set_defaults(func=func)

    p = sub.add_parser("impedance", parents=[common], help="impedance recovery")
    _add_data_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--with-boundary", action="store_true")
    g.add_argument("--no-boundary", action="store_true")
    p.add_argument("--boundary", help="known boundary curve (defaults to --geometry)")
    p.add_argument("--concave", action="store_true")
    p.add_argument("--rule", choices=("either", "both", "first"), default=None,
                   help="rotation-column rule (default: either if convex, both if concave)")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_impedance)

    p = sub.add_parser("classify", parents=[common], help="Dirichlet-or-Neumann versus impedance")
    _add_data_args(p)
    p.add_argument("--concave", action="store_true")
    p.add_argument("--rule", choices=("either", "both", "first"), default=None,
                   help="rotation-column rule (default: either if convex, both if concave)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle", parents=[common], help="disk benchmark: oracle and solver against published values")
    p.add_argument("--nodes", type=int, default=None, help="force a quadrature size")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("calibrate", parents=[common], help="fit the phase-convention record")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, DatasetError, IndicatorError, GeometryError, ExpressionSyntaxError,
            NonPositiveProfileError) as exc:
        print(f"echoform: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, CalibrationError, RecoveryError, NoDetection, OSError, ValueError) as exc:
        print(f"echoform: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
