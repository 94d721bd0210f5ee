"""
Command-line interface for the Direction Set Toolkit.

Subcommands generate fixture clouds, compute direction sets, caps and covers,
classify clouds, analyze secant slopes and render figures. Every command prints
a one-line summary followed by a machine-readable `RESULT {json}` line.
"""

import argparse
import json
import os
import sys
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import config
from .config import load_profile, print_config, validate_config
from .core.caps import CapReport, eps_cover_test, largest_empty_arc, largest_empty_cap
from .core.direction_set import DirectionSet, unoriented_directions
from .core.geometry import rp1_angle, rp1_angles
from .core.secants import (
    missed_vertical,
    refinement_study,
    secant_slopes,
    slope_connected_hull,
    slope_fill_test,
)
from .core.trichotomy import classify
from .errors import ComputationError, DirsetError, InputValidationError, MalformedInput
from .registry import generate, list_generator_kinds, list_profiles
from .utils import serialization as io
from .utils.logging import configure_logging, get_logger
from .utils.svg import histogram_svg, ring_svg, sphere_svg, write_svg

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_COMPUTATION = 3

# Commands that accept free-form --key value generator parameters
PARAM_COMMANDS = ("gen", "refine")

REFINEMENT_COLUMNS = ["depth", "n", "max_abs_slope", "fill_eps", "M", "eps", "filled_bound"]


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with all subcommands."""
    parser = argparse.ArgumentParser(prog="dirset", description="Direction Set Toolkit CLI", allow_abbrev=False)
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (0 = one per CPU)")
    parser.add_argument("--log-level", default=None, help="Logging level (DEBUG, INFO, WARNING, ...)")
    parser.add_argument("--log-file", default=None, help="Also write log records to this file")
    parser.add_argument("--profile", default=None, help="YAML profile with thresholds/runtime defaults")

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    gen = subparsers.add_parser("gen", allow_abbrev=False, help="Generate a fixture cloud (extra --param value pairs allowed)")
    gen.add_argument("kind", help=f"Generator kind ({', '.join(list_generator_kinds())})")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", required=True, help="Output CSV")

    dirs = subparsers.add_parser("dirs", allow_abbrev=False, help="Compute the projective direction set of a cloud")
    dirs.add_argument("input", help="Point CSV")
    dirs.add_argument("--oriented", action="store_true", help="Also store the oriented direction set")
    dirs.add_argument("--tol", type=float, default=None)
    dirs.add_argument("--pair-budget", type=int, default=None)
    dirs.add_argument("--seed", type=int, default=None)
    dirs.add_argument("--out", required=True, help="Output JSON")

    caps = subparsers.add_parser("caps", allow_abbrev=False, help="Largest empty cap of a direction set")
    caps.add_argument("input", help="Direction set JSON")
    caps.add_argument("--method", choices=["auto", "sampled"], default="auto")
    caps.add_argument("--k", type=int, default=None)
    caps.add_argument("--seed", type=int, default=None)
    caps.add_argument("--no-refine", action="store_true", help="Skip local refinement of sampled caps")
    caps.add_argument("--out", required=True, help="Output JSON")

    cover = subparsers.add_parser("cover", allow_abbrev=False, help="eps-cover test of a direction set")
    cover.add_argument("input", help="Direction set JSON")
    cover.add_argument("--eps", type=float, required=True)
    cover.add_argument("--net-density", type=float, default=None)
    cover.add_argument("--out", required=True, help="Output JSON")

    cls = subparsers.add_parser("classify", allow_abbrev=False, help="Classify a cloud (class_i / class_ii / class_iii)")
    cls.add_argument("input", help="Point CSV")
    cls.add_argument("--eps-hole", type=float, default=None)
    cls.add_argument("--eps-cover", type=float, default=None)
    cls.add_argument("--tol", type=float, default=None)
    cls.add_argument("--net-density", type=float, default=None)
    cls.add_argument("--pair-budget", type=int, default=None)
    cls.add_argument("--seed", type=int, default=None)
    cls.add_argument("--method", choices=["auto", "sampled"], default="auto")
    cls.add_argument("--k", type=int, default=None)
    cls.add_argument("--out", required=True, help="Output JSON")

    slopes = subparsers.add_parser("slopes", allow_abbrev=False, help="Secant slopes of planar function samples")
    slopes.add_argument("input", help="Point CSV (x, f(x))")
    slopes.add_argument("--M", type=float, default=None)
    slopes.add_argument("--eps", type=float, default=None)
    slopes.add_argument("--dedup", action="store_true", help="Drop repeated slopes")
    slopes.add_argument("--out", required=True, help="Output CSV")

    refine = subparsers.add_parser("refine", allow_abbrev=False, help="Refinement study of a function profile")
    refine.add_argument("kind", help=f"Function profile ({', '.join(list_profiles())})")
    refine.add_argument("--depths", default="4..12", help="'a..b' or a comma list")
    refine.add_argument("--M", type=float, default=None)
    refine.add_argument("--eps", type=float, default=None)
    refine.add_argument("--out", required=True, help="Output CSV")

    plot = subparsers.add_parser("plot", allow_abbrev=False, help="Render dirs.json, cap.json or slopes.csv as SVG")
    plot.add_argument("input", help="dirs.json, cap.json or slopes.csv")
    plot.add_argument("--dirs", default=None, help="Direction set JSON drawn under a cap")
    plot.add_argument("--bins", type=int, default=50)
    plot.add_argument("--M", type=float, default=None, help="Histogram window [-M, M]")
    plot.add_argument("--out", required=True, help="Output SVG")

    subparsers.add_parser("config", allow_abbrev=False, help="Print the current configuration")
    return parser


def _coerce(text: str) -> Any:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_params(extras: List[str]) -> Dict[str, Any]:
    """
    Turn trailing `--key value` tokens into a parameter mapping.

    Raises:
        InputValidationError: On dangling or malformed tokens.
    """
    params: Dict[str, Any] = {}
    tokens = list(extras)
    while tokens:
        key = tokens.pop(0)
        if not key.startswith("--") or len(key) < 3:
            raise InputValidationError(f"unexpected argument '{key}'")
        if not tokens or tokens[0].startswith("--"):
            raise InputValidationError(f"parameter '{key}' needs a value")
        params[key[2:].replace("-", "_")] = _coerce(tokens.pop(0))
    return params


def parse_depths(text: str) -> List[int]:
    """
    Parse '4..12' (inclusive) or '4,6,8'.

    Raises:
        InputValidationError: If the text is not a depth list.
    """
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
            depths = list(range(low, high + 1))
        else:
            depths = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise InputValidationError(f"bad --depths '{text}': {e}") from e
    if not depths:
        raise InputValidationError(f"--depths '{text}' is empty")
    return depths


def _pick(value: Any, profile: Dict[str, Any], key: str, default: Any) -> Any:
    if value is not None:
        return value
    return profile.get(key, default)


def _dump_result(result: Dict[str, Any]) -> str:
    return json.dumps(result, sort_keys=True, separators=(",", ":"))


def _cmd_gen(args: argparse.Namespace, profile: Dict[str, Any], params: Dict[str, Any]) -> Tuple[str, Dict[str, Any]]:
    seed = _pick(args.seed, profile, "seed", config.DEFAULT_SEED)
    cloud = generate(kind=args.kind, seed=seed, **params)
    echo = {"command": "gen", "kind": args.kind, "params": params, "seed": seed}
    io.write_points_csv(args.out, cloud, comment=io.provenance(echo))
    result = {"kind": args.kind, "params": params, "seed": seed, "n": cloud.n, "dim": cloud.dim, "out": args.out}
    return f"Generated {args.kind}: {cloud.n} points in R^{cloud.dim} -> {args.out}", result


def _cmd_dirs(args: argparse.Namespace, profile: Dict[str, Any], threads: Optional[int]) -> Tuple[str, Dict[str, Any]]:
    tol = _pick(args.tol, profile, "tol", config.DEFAULT_TOL)
    pair_budget = _pick(args.pair_budget, profile, "pair_budget", None)
    seed = _pick(args.seed, profile, "seed", config.DEFAULT_SEED)
    cloud = io.read_points_csv(args.input)
    dirs = unoriented_directions(cloud, tol, pair_budget, seed, threads, include_oriented=args.oriented)
    echo = {"command": "dirs", "input": args.input, "tol": tol, "pair_budget": pair_budget, "seed": seed,
            "oriented": args.oriented}
    io.write_json(args.out, io.envelope("direction_set", dirs.to_record(), echo))
    summary = f"{len(dirs)} projective classes from {dirs.pair_count_examined} pairs -> {args.out}"
    return summary, {"n_classes": len(dirs), "pairs_examined": dirs.pair_count_examined, "out": args.out}


def _load_dirs(path: str) -> DirectionSet:
    return DirectionSet.from_record(io.unwrap(io.read_json(path), "direction_set"))


def _cmd_caps(args: argparse.Namespace, profile: Dict[str, Any], threads: Optional[int]) -> Tuple[str, Dict[str, Any]]:
    k = _pick(args.k, profile, "k", config.DEFAULT_SAMPLED_K)
    seed = _pick(args.seed, profile, "seed", config.DEFAULT_SEED)
    dirs = _load_dirs(args.input)
    cap = largest_empty_cap(dirs, method=args.method, k=k, seed=seed, refine=not args.no_refine, threads=threads)
    echo = {"command": "caps", "input": args.input, "method": args.method, "k": k, "seed": seed,
            "refine": not args.no_refine}
    io.write_json(args.out, io.envelope("cap_report", cap.to_record(), echo))
    summary = f"Largest empty cap: radius {cap.radius!r} ({cap.method}, {cap.quality}) -> {args.out}"
    return summary, {"radius": cap.radius, "center": cap.center.to_list(), "quality": cap.quality, "out": args.out}


def _cmd_cover(args: argparse.Namespace, profile: Dict[str, Any], threads: Optional[int]) -> Tuple[str, Dict[str, Any]]:
    net_density = _pick(args.net_density, profile, "net_density", None)
    dirs = _load_dirs(args.input)
    cert = eps_cover_test(dirs, args.eps, net_density, threads=threads)
    echo = {"command": "cover", "input": args.input, "eps": args.eps, "net_density": cert.net_density}
    io.write_json(args.out, io.envelope("coverage_certificate", cert.to_record(), echo))
    summary = f"eps-cover at {args.eps!r}: covered={cert.covered} ({cert.covered_fraction:.4f} of net) -> {args.out}"
    return summary, {"covered": cert.covered, "covered_fraction": cert.covered_fraction, "out": args.out}


def _graph_side_file(out: str) -> str:
    return os.path.splitext(out)[0] + ".graph.csv"


def _cmd_classify(
    args: argparse.Namespace, profile: Dict[str, Any], threads: Optional[int]
) -> Tuple[str, Dict[str, Any]]:
    eps_hole = _pick(args.eps_hole, profile, "eps_hole", config.DEFAULT_EPS_HOLE)
    eps_cover = _pick(args.eps_cover, profile, "eps_cover", config.DEFAULT_EPS_COVER)
    tol = _pick(args.tol, profile, "tol", config.DEFAULT_TOL)
    net_density = _pick(args.net_density, profile, "net_density", None)
    pair_budget = _pick(args.pair_budget, profile, "pair_budget", None)
    seed = _pick(args.seed, profile, "seed", config.DEFAULT_SEED)
    k = _pick(args.k, profile, "k", config.DEFAULT_SAMPLED_K)

    cloud = io.read_points_csv(args.input)
    result = classify(cloud, eps_hole, eps_cover, tol, pair_budget, seed, net_density, args.method, k, threads)

    echo = {"command": "classify", "input": args.input, "eps_hole": eps_hole, "eps_cover": eps_cover, "tol": tol,
            "net_density": net_density, "pair_budget": pair_budget, "seed": seed, "method": args.method, "k": k}
    inline = cloud.n < config.GRAPH_INLINE_LIMIT
    record = result.to_record(graph_inline=inline)
    if result.graph is not None and not inline:
        side = _graph_side_file(args.out)
        columns = [f"b{c + 1}" for c in range(cloud.dim - 1)] + ["value"]
        rows = np.column_stack([result.graph.base_points, result.graph.values])
        io.write_table_csv(side, (dict(zip(columns, row)) for row in rows), columns, comment=io.provenance(echo))
        record["graph"]["graph_file"] = os.path.basename(side)
    io.write_json(args.out, io.envelope("classification", record, echo))

    summary = f"{result.verdict.value}: cap radius {result.cap.radius!r}"
    machine: Dict[str, Any] = {"verdict": result.verdict.value, "cap_radius": result.cap.radius, "out": args.out}
    if result.graph is not None:
        summary += f", lipschitz {result.graph.lipschitz_constant!r} (bound {result.graph.bound!r})"
        machine["lipschitz_constant"] = result.graph.lipschitz_constant
    return summary + f" -> {args.out}", machine


def _cmd_slopes(args: argparse.Namespace, profile: Dict[str, Any], threads: Optional[int]) -> Tuple[str, Dict[str, Any]]:
    M = _pick(args.M, profile, "M", 10.0)
    eps = _pick(args.eps, profile, "eps", 0.1)
    cloud = io.read_points_csv(args.input)
    if cloud.dim != 2:
        raise InputValidationError(f"slopes needs planar samples (x, f(x)), got d = {cloud.dim}")
    order = np.argsort(cloud.points[:, 0], kind="stable")
    xs, ys = cloud.points[order, 0], cloud.points[order, 1]

    s = secant_slopes(xs, ys, dedup=args.dedup, threads=threads)
    fill = slope_fill_test(s, M, eps)
    hull = slope_connected_hull(s)
    vertical_missed = missed_vertical(xs, ys, threads)
    echo = {"command": "slopes", "input": args.input, "M": M, "eps": eps, "dedup": args.dedup}
    io.write_column_csv(args.out, "slope", s.slopes, comment=io.provenance(echo))

    machine = {
        "n_slopes": len(s),
        "filled": fill.filled,
        "fill_eps": fill.fill_eps,
        "witness": fill.witness,
        "hull": [hull.low, hull.high],
        "max_gap": hull.max_gap,
        "missed_vertical": vertical_missed,
        "M": M,
        "eps": eps,
        "out": args.out,
    }
    summary = f"{len(s)} slopes in [{hull.low!r}, {hull.high!r}]; [-M, M] filled at eps: {fill.filled} -> {args.out}"
    return summary, machine


def _cmd_refine(args: argparse.Namespace, profile: Dict[str, Any], params: Dict[str, Any],
                threads: Optional[int]) -> Tuple[str, Dict[str, Any]]:
    M = _pick(args.M, profile, "M", 10.0)
    eps = _pick(args.eps, profile, "eps", 0.1)
    depths = parse_depths(args.depths)
    rows = refinement_study(args.kind, params, depths, M, eps, threads)
    echo = {"command": "refine", "kind": args.kind, "params": params, "depths": depths, "M": M, "eps": eps}
    io.write_table_csv(args.out, (row.to_record() for row in rows), REFINEMENT_COLUMNS, comment=io.provenance(echo))
    for row in rows:
        print(
            f"depth {row.depth:>2}  n {row.n:>8}  max|slope| {row.max_abs_slope:.6g}  "
            f"fill_eps {row.fill_eps:.6g}  filled_bound {row.filled_bound:.6g}"
        )
    summary = f"Refinement of {args.kind} over {len(rows)} depths -> {args.out}"
    return summary, {"rows": [row.to_record() for row in rows], "out": args.out}


def _plot_directions(dirs: DirectionSet, cap: Optional[CapReport]) -> str:
    if dirs.dim == 2:
        if cap is None and len(dirs):
            cap = largest_empty_arc(dirs)
        angles = rp1_angles(dirs.projective) if len(dirs) else np.empty(0)
        if cap is None:
            return ring_svg(angles)
        return ring_svg(angles, rp1_angle(cap.center), cap.radius)
    if dirs.dim == 3:
        if cap is None:
            return sphere_svg(dirs.projective)
        return sphere_svg(dirs.projective, cap.center.rep, cap.radius)
    raise InputValidationError(f"plot supports d = 2 or 3, got d = {dirs.dim}")


def _cmd_plot(args: argparse.Namespace) -> Tuple[str, Dict[str, Any]]:
    if args.input.endswith(".csv"):
        table = io.read_table_csv(args.input)
        if table and "slope" not in table[0]:
            raise MalformedInput(f"'{args.input}' has no 'slope' column")
        values = np.array([float(row["slope"]) for row in table])
        window = None
        if args.M is not None:
            window = (-args.M, args.M)
        text = histogram_svg(values, bins=args.bins, window=window)
        shown = "slope histogram"
    else:
        payload = io.read_json(args.input)
        kind = payload.get("kind")
        if kind == "direction_set":
            text = _plot_directions(DirectionSet.from_record(io.unwrap(payload, "direction_set")), None)
            shown = "direction set"
        elif kind == "cap_report":
            cap = CapReport.from_record(io.unwrap(payload, "cap_report"))
            dim = cap.center.dim
            dirs = _load_dirs(args.dirs) if args.dirs else DirectionSet(
                dim=dim, n_points=0, projective=np.empty((0, dim)), pair_count_examined=0
            )
            text = _plot_directions(dirs, cap)
            shown = "cap"
        else:
            raise MalformedInput(f"cannot plot a '{kind}' file")
    write_svg(args.out, text)
    return f"Plotted {shown} -> {args.out}", {"figure": shown, "out": args.out}


def _dispatch(args: argparse.Namespace, extras: List[str], profile: Dict[str, Any]) -> Tuple[str, Dict[str, Any]]:
    threads = _pick(args.threads, profile, "threads", None)
    if threads is not None and threads < 0:
        raise InputValidationError(f"--threads must be >= 0, got {threads}")

    if args.command in PARAM_COMMANDS:
        params = parse_params(extras)
    elif extras:
        raise InputValidationError(f"unrecognized arguments: {' '.join(extras)}")

    if args.command == "gen":
        return _cmd_gen(args, profile, params)
    if args.command == "dirs":
        return _cmd_dirs(args, profile, threads)
    if args.command == "caps":
        return _cmd_caps(args, profile, threads)
    if args.command == "cover":
        return _cmd_cover(args, profile, threads)
    if args.command == "classify":
        return _cmd_classify(args, profile, threads)
    if args.command == "slopes":
        return _cmd_slopes(args, profile, threads)
    if args.command == "refine":
        return _cmd_refine(args, profile, params, threads)
    if args.command == "plot":
        return _cmd_plot(args)
    raise InputValidationError(f"unknown command '{args.command}'")


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run the command-line interface.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:]).

    Returns:
        Exit code: 0 on success, 2 on invalid input, 3 on computation errors.
    """
    parser = build_parser()
    try:
        args, extras = parser.parse_known_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    configure_logging(level=args.log_level or config.LOG_LEVEL, log_file=args.log_file)

    if args.command is None:
        parser.print_help()
        return EXIT_OK
    if args.command == "config":
        print_config()
        return EXIT_OK

    problem = validate_config()
    if problem:
        logger.error(f"Invalid configuration: {problem}")
        return EXIT_INVALID

    try:
        profile = load_profile(args.profile) if args.profile else {}
        summary, result = _dispatch(args, extras, profile)
    except InputValidationError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ComputationError, DirsetError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_COMPUTATION
    except OSError as e:
        logger.error(f"I/O error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_COMPUTATION

    print(summary)
    print(f"RESULT {_dump_result(result)}")
    return EXIT_OK


def main() -> None:
    """Console entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
