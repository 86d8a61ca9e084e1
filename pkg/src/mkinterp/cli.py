"""Command-line front end: fit, evaluate, power reports, convergence studies.

Exit codes are part of the contract: 0 success, 2 malformed input,
3 solver not converged, 4 singular design (feature Gram without full row
rank), 5 evaluation points outside the domain.

Configuration is a flat ``key = value`` text file (``#`` comments allowed)
whose keys mirror the command-line flags; flags override file values.
Numeric CSV output uses shortest round-trip decimals.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .exceptions import DuplicateNodes, PointOutsideDomain
from .features import Domain, FeatureModel
from .interpolant import (
    Interpolant,
    NodeSet,
    banach_norm_via_tensor,
    evaluate,
    from_json,
    to_json,
)
from .power import (
    convergence_study,
    domain_grid,
    fill_distance,
    power_function,
    power_function_p2_closed,
)
from .solver import SolverOptions, solve_multilinear
from .tensors import FeatureGram

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_DESIGN = 4
EXIT_DOMAIN = 5

_DEFAULTS = {
    "kernel": "power",
    "order": 2,
    "truncation": 8,
    "decay": 0.5,
    "domain": "-1:1",
    "tol": 1e-10,
    "seed": 0,
    "grid": 101,
    "fnorm": 1.0,
}


class CliInputError(Exception):
    """Malformed input; maps to exit code 2."""


def _fmt(value) -> str:
    return repr(float(value))


def parse_domain(text: str) -> Domain:
    lowers, uppers = [], []
    for part in text.split(","):
        pieces = part.split(":")
        if len(pieces) != 2:
            raise CliInputError(f"bad domain segment {part!r}; expected lo:hi")
        try:
            lo, hi = float(pieces[0]), float(pieces[1])
        except ValueError as err:
            raise CliInputError(f"bad domain segment {part!r}") from err
        lowers.append(lo)
        uppers.append(hi)
    try:
        return Domain(lowers, uppers)
    except ValueError as err:
        raise CliInputError(str(err)) from err


def read_config(path: str) -> dict:
    cfg = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliInputError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (piece.strip() for piece in line.split("=", 1))
                cfg[key] = value
    except OSError as err:
        raise CliInputError(f"cannot read config {path}: {err}") from err
    return cfg


def _merge_settings(args) -> dict:
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        for key, value in read_config(args.config).items():
            if key not in _DEFAULTS and key != "node_counts":
                raise CliInputError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in list(_DEFAULTS) + ["node_counts"]:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["order"] = int(cfg["order"])
    cfg["truncation"] = int(cfg["truncation"])
    cfg["decay"] = float(cfg["decay"])
    cfg["tol"] = float(cfg["tol"])
    cfg["seed"] = int(cfg["seed"])
    cfg["grid"] = int(cfg["grid"])
    cfg["fnorm"] = float(cfg["fnorm"])
    return cfg


def build_model(cfg: dict, dim: int) -> FeatureModel:
    domain = parse_domain(str(cfg["domain"]))
    if domain.dim != dim:
        raise CliInputError(
            f"domain has dimension {domain.dim} but data has dimension {dim}"
        )
    kernel = str(cfg["kernel"])
    if kernel == "power":
        return FeatureModel.power_series(domain, cfg["truncation"], cfg["decay"])
    if kernel == "trig":
        return FeatureModel.trigonometric(domain, cfg["truncation"], cfg["decay"])
    if kernel == "custom":
        raise CliInputError("custom kernels must be loaded through the API")
    raise CliInputError(f"unknown kernel family {kernel!r}")


def read_points_csv(path: str, expect_values: bool, allow_empty: bool = False):
    """Read a CSV with header x1..xd[,y]; returns (points, values or None)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise CliInputError(f"{path}: empty file") from None
            header = [h.strip() for h in header]
            has_values = header[-1] == "y"
            coord_names = header[:-1] if has_values else header
            d = len(coord_names)
            if d < 1 or coord_names != [f"x{i + 1}" for i in range(d)]:
                raise CliInputError(f"{path}: header must be x1,...,xd[,y]")
            if expect_values and not has_values:
                raise CliInputError(f"{path}: missing y column")
            points, values = [], []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != len(header):
                    raise CliInputError(f"{path}:{lineno}: expected {len(header)} fields")
                try:
                    nums = [float(cell) for cell in row]
                except ValueError:
                    raise CliInputError(f"{path}:{lineno}: non-numeric field") from None
                if has_values:
                    points.append(nums[:-1])
                    values.append(nums[-1])
                else:
                    points.append(nums)
    except OSError as err:
        raise CliInputError(f"cannot read {path}: {err}") from err
    pts = np.asarray(points, dtype=float).reshape(len(points), d)
    if pts.shape[0] == 0 and not allow_empty:
        raise CliInputError(f"{path}: no data rows")
    return pts, (np.asarray(values, dtype=float) if has_values else None)


def _node_set(points, values) -> NodeSet:
    try:
        return NodeSet(points, values)
    except DuplicateNodes as err:
        i, j = err.pair
        raise CliInputError(f"duplicate points at rows {i + 2} and {j + 2}") from err


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_fit(args) -> int:
    cfg = _merge_settings(args)
    points, values = read_points_csv(args.data, expect_values=True)
    nodes = _node_set(points, values)
    model = build_model(cfg, points.shape[1])
    gram = FeatureGram.from_model(model, nodes.points)
    if not gram.full_row_rank:
        detail = (f"truncation K={model.truncation} < n={nodes.n}"
                  if model.truncation < nodes.n else "rank-deficient feature Gram")
        print(f"error: singular design ({detail})", file=sys.stderr)
        return EXIT_DESIGN

    opts = SolverOptions(residual_tol=cfg["tol"], rng_seed=cfg["seed"])
    report = solve_multilinear(gram, cfg["order"], nodes.values, opts)
    s = Interpolant(model, nodes, cfg["order"], report.coefficients, gram, report)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(to_json(s) + "\n")
    report_path = args.report or args.out + ".report.json"
    report_doc = {
        "converged": report.converged,
        "residual_norm": report.residual_norm,
        "iterations": report.iterations,
        "norm": banach_norm_via_tensor(s),
        "order": cfg["order"],
        "n": nodes.n,
        "truncation": model.truncation,
    }
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report_doc, fh, indent=2)
        fh.write("\n")
    if not report.converged:
        print(f"error: solver stopped at residual {report.residual_norm:.3e}",
              file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        with open(args.interpolant, "r", encoding="utf-8") as fh:
            s = from_json(fh.read())
    except (OSError, ValueError, KeyError) as err:
        raise CliInputError(f"cannot load interpolant: {err}") from err

    if args.points:
        points, _ = read_points_csv(args.points, expect_values=False,
                                    allow_empty=True)
    else:
        cfg = _merge_settings(args)
        points = domain_grid(s.model.domain, cfg["grid"])

    d = s.model.domain.dim
    header = [f"x{i + 1}" for i in range(d)] + ["s", "flag"]
    rows = []
    any_outside = False
    for x in points:
        try:
            rows.append([_fmt(v) for v in x] + [_fmt(evaluate(s, x)), ""])
        except PointOutsideDomain:
            any_outside = True
            rows.append([_fmt(v) for v in x] + ["", "outside_domain"])
    _write_csv(args.out, header, rows)
    return EXIT_DOMAIN if any_outside else EXIT_OK


def cmd_power(args) -> int:
    cfg = _merge_settings(args)
    points, values = read_points_csv(args.nodes, expect_values=False)
    nodes = _node_set(points, values if values is not None else np.zeros(len(points)))
    model = build_model(cfg, points.shape[1])
    opts = SolverOptions(residual_tol=cfg["tol"], rng_seed=cfg["seed"])
    grid = domain_grid(model.domain, cfg["grid"])
    m = cfg["order"]

    d = model.domain.dim
    header = [f"x{i + 1}" for i in range(d)] + ["p_m", "p_2", "bound"]
    rows = []
    for x in grid:
        pm = power_function(model, nodes, m, x, opts)
        p2 = power_function_p2_closed(model, nodes, x)
        rows.append([_fmt(v) for v in x]
                    + [_fmt(pm), _fmt(p2), _fmt(2.0 * cfg["fnorm"] * pm)])
    _write_csv(args.out, header, rows)
    return EXIT_OK


def cmd_study(args) -> int:
    cfg = _merge_settings(args)
    try:
        counts = [int(piece) for piece in str(cfg["node_counts"]).split(",")]
    except (KeyError, ValueError):
        raise CliInputError("node_counts must be a comma-separated integer list") from None
    if not counts or any(b <= a for a, b in zip(counts, counts[1:])):
        raise CliInputError("node_counts must be strictly increasing")

    domain = parse_domain(str(cfg["domain"]))
    model = build_model(cfg, domain.dim)
    rng = np.random.default_rng(cfg["seed"])
    f_alpha = rng.standard_normal(model.truncation)
    opts = SolverOptions(residual_tol=cfg["tol"], rng_seed=cfg["seed"])
    eval_grid = domain_grid(model.domain, cfg["grid"])

    from .exceptions import NotConverged
    from .interpolant import banach_norm_direct
    try:
        result = convergence_study(model, f_alpha, cfg["order"], counts,
                                   eval_grid, opts)
    except NotConverged as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONVERGENCE

    slope_text = "" if result.slope is None else _fmt(result.slope)
    rows = [[str(r.n), _fmt(r.h), _fmt(r.max_error), _fmt(r.max_bound), slope_text]
            for r in result.rows]
    _write_csv(args.out, ["n", "h", "max_error", "max_bound", "slope"], rows)

    f_norm = banach_norm_direct(f_alpha, cfg["order"] / (cfg["order"] - 1))
    return EXIT_OK if result.bound_dominates(1e-6 * (1.0 + f_norm)) else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--kernel", choices=["power", "trig"], help="feature family")
    p.add_argument("--order", type=int, help="even interpolation order m")
    p.add_argument("--truncation", type=int, help="number of features K")
    p.add_argument("--decay", type=float, help="weight decay parameter")
    p.add_argument("--domain", help="box as lo:hi[,lo:hi...]")
    p.add_argument("--tol", type=float, help="solver residual tolerance")
    p.add_argument("--seed", type=int, help="RNG seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mkinterp",
                                     description="multi-kernel scattered-data interpolation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit an interpolant from a data CSV")
    p_fit.add_argument("data", help="CSV with header x1,...,xd,y")
    p_fit.add_argument("--out", required=True, help="interpolant JSON path")
    p_fit.add_argument("--report", help="fit report JSON path")
    _add_model_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_eval = sub.add_parser("eval", help="evaluate a serialized interpolant")
    p_eval.add_argument("interpolant", help="interpolant JSON path")
    p_eval.add_argument("--points", help="CSV of evaluation points (x1,...,xd)")
    p_eval.add_argument("--grid", type=int, help="uniform grid points per dimension")
    p_eval.add_argument("--out", required=True, help="output CSV path")
    p_eval.add_argument("--config", help="flat key = value configuration file")
    p_eval.set_defaults(func=cmd_eval)

    p_power = sub.add_parser("power", help="power function report on a grid")
    p_power.add_argument("nodes", help="CSV of data nodes (x1,...,xd[,y])")
    p_power.add_argument("--out", required=True, help="output CSV path")
    p_power.add_argument("--grid", type=int, help="evaluation grid per dimension")
    p_power.add_argument("--fnorm", type=float, help="target norm in the error bound")
    _add_model_flags(p_power)
    p_power.set_defaults(func=cmd_power)

    p_study = sub.add_parser("study", help="fill-distance convergence study")
    p_study.add_argument("--node-counts", dest="node_counts",
                         help="strictly increasing list, e.g. 4,8,16,32")
    p_study.add_argument("--out", required=True, help="output CSV path")
    p_study.add_argument("--grid", type=int, help="evaluation grid per dimension")
    _add_model_flags(p_study)
    p_study.set_defaults(func=cmd_study)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliInputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
