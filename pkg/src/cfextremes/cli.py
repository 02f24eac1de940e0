from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable
from fractions import Fraction
from pathlib import Path
from typing import Any

import mpmath
import numpy as np

from cfextremes import __version__
from cfextremes.core.cantor import (
    ConstructionParams,
    MassAssignment,
    Mode,
    build_levels,
    gap_epsilon_log,
    holder_check,
    log_count_m,
    tree_summary,
)
from cfextremes.core.cf_core import (
    CFWord,
    cylinder_interval,
    expand_real,
    required_precision,
    running_stats,
)
from cfextremes.core.dimension import (
    box_count_dim,
    closed_form_dim,
    construction_inputs,
    dim_curve,
    dyadic_scales,
    inclusion_upper_bound,
    lemma46_bound,
    remark_bound,
    wang_wu_upper,
)
from cfextremes.core.errors import CfError, DomainError
from cfextremes.core.export import (
    dim_curve_csv,
    dumps_json,
    intervals_from_tree,
    samples_csv,
)
from cfextremes.core.gauss_lab import (
    galambos_cdf_compare,
    gauss_measure,
    simulate_extremes,
    summarize,
)
from cfextremes.core.growth import Family, GrowthSpec
from cfextremes.core.intervals import fraction_str, parse_fraction
from cfextremes.core.manifest import (
    create_run_manifest,
    load_manifest,
    output_checksum,
    write_manifest,
)
from cfextremes.core.preset_library import (
    PresetConfig,
    discover_presets,
    find_preset,
    load_config,
    search_presets,
)
from cfextremes.core.profiles import PROFILES, get_profile

logger = logging.getLogger("cfextremes")

FAMILIES = {
    "polynomial": Family.POLYNOMIAL,
    "single": Family.SINGLE_EXP,
    "doubly": Family.DOUBLY_EXP,
}

# A handler returns (output text, resolved params, seed).
Result = tuple[str, dict[str, Any], int | None]


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


# ============================================================================
# GROWTH SPEC RESOLUTION
# ============================================================================

def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("growth function")
    g.add_argument("--family", choices=sorted(FAMILIES))
    g.add_argument("--p", type=float, help="power of the polynomial family")
    g.add_argument("--alpha", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--base", type=float, help="base of the single-exp family (default e)")
    g.add_argument("--beta", type=float)
    g.add_argument("--config", help="YAML file with a spec section")
    g.add_argument("--preset", help="built-in or user preset name")


def _resolve_spec(args: argparse.Namespace) -> tuple[GrowthSpec, dict[str, Any]]:
    """Growth spec from --config/--preset, with explicit flags taking precedence."""
    config: PresetConfig | None = None
    if args.config:
        config = load_config(args.config)
    elif args.preset:
        entry = find_preset(args.preset)
        if entry is None:
            raise DomainError(f"unknown preset {args.preset!r}")
        config = entry.load()

    data: dict[str, Any] = config.spec.to_dict() if config else {}
    for key in ("family", "p", "alpha", "b", "c", "base", "beta"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if "family" not in data:
        raise DomainError("give --family, --config or --preset")
    return GrowthSpec.from_dict(data), dict(config.construction) if config else {}


# ============================================================================
# SUBCOMMANDS
# ============================================================================

def _cmd_expand(args: argparse.Namespace) -> Result:
    if (args.rational is None) == (args.real is None):
        raise DomainError("give exactly one of --rational or --real")
    precision = args.precision or required_precision(args.n)
    if args.rational is not None:
        x: Fraction | mpmath.mpf = parse_fraction(args.rational)
    else:
        with mpmath.workprec(precision):
            x = mpmath.mpf(args.real)
    expansion = expand_real(x, args.n, precision)
    stats = running_stats(expansion.word)
    payload = {
        "command": "expand",
        "method": "gauss_map_certified",
        "digits": list(expansion.word),
        "truncated": expansion.truncated,
        "T": [t for t, _ in stats],
        "S": [s for _, s in stats],
    }
    params = {
        "n": args.n,
        "precision_bits": precision,
        "rational": args.rational,
        "real": args.real,
    }
    return dumps_json(payload), params, None


def _cmd_cylinder(args: argparse.Namespace) -> Result:
    word = CFWord.parse(args.digits)
    interval, length = cylinder_interval(word)
    payload = {
        "command": "cylinder",
        "digits": list(word),
        "interval": interval.to_dict(),
        "length": {"method": "exact", "value": fraction_str(length)},
        "gauss_measure": {"method": "log_ratio", "value": gauss_measure(interval)},
    }
    return dumps_json(payload), {"digits": list(word)}, None


def _cmd_simulate(args: argparse.Namespace) -> Result:
    profile = get_profile(args.profile)
    config = profile.to_config(
        n_digits=args.n, trials=args.trials, seed=args.seed, precision_bits=args.precision
    )
    workers = args.workers or profile.workers
    ys = args.y if args.y is not None else list(profile.ys)
    samples = simulate_extremes(config, workers=workers)
    if args.csv:
        Path(args.csv).write_text(samples_csv(samples), encoding="utf-8")
    payload = {
        "command": "simulate",
        "config": config.to_dict(),
        "galambos": {
            "method": "empirical_vs_exp(-1/y)",
            "rows": [c.to_dict() for c in galambos_cdf_compare(samples, ys)],
        },
        "summary": {"method": "median", **summarize(samples)},
    }
    params = {**config.to_dict(), "ys": ys, "profile": profile.name}
    return dumps_json(payload), params, config.seed


def _construction_params(args: argparse.Namespace) -> tuple[ConstructionParams, int]:
    spec, construction = _resolve_spec(args)
    N = args.N if args.N is not None else construction.get("N")
    mode = Mode(args.mode or construction.get("mode", "exact"))
    budget = args.budget or construction.get("budget", 10**6)
    depth = args.depth if args.depth is not None else int(construction.get("depth", 3))
    params = ConstructionParams.for_spec(spec, N=N, mode=mode, budget=int(budget))
    return params, depth


def _cmd_levelset(args: argparse.Namespace) -> Result:
    params, depth = _construction_params(args)
    payload: dict[str, Any] = {"command": "levelset", "params": params.to_dict()}
    if params.mode is Mode.EXACT:
        tree = build_levels(params, depth)
        payload["method"] = "exact"
        payload["summary"] = tree_summary(tree)
        if not args.summary_only:
            payload["tree"] = tree.to_dict()
        if args.holder_s is not None:
            rng = np.random.default_rng(args.seed)
            ratio = holder_check(MassAssignment(tree), args.holder_s, args.holder_trials, rng)
            payload["holder"] = {"method": "sampled_max", "s": args.holder_s, "max_ratio": ratio}
    else:
        payload["method"] = "log_only"
        payload["levels"] = [
            {
                "n": k,
                "log_m": log_count_m(params, k).to_dict(),
                "log_eps": gap_epsilon_log(params, k).to_dict(),
            }
            for k in range(1, depth + 1)
        ]
    resolved = {**params.to_dict(), "depth": depth}
    return dumps_json(payload), resolved, args.seed if args.holder_s is not None else None


def _lemma46_entry(
    spec: GrowthSpec, n_max: int, partials: bool
) -> tuple[dict[str, Any], int | None]:
    """lemma46 estimate and N, or a not-applicable record when the construction fails it."""
    try:
        params = ConstructionParams.for_spec(spec, mode=Mode.LOG_ONLY)
    except DomainError as e:
        logger.info("lemma46 skipped: %s", e)
        return {"method": "lemma46", "applicable": False, "reason": str(e)}, None
    try:
        estimate = lemma46_bound(*construction_inputs(params, n_max), n_max)
    except DomainError as e:
        logger.info("lemma46 skipped (N=%d): %s", params.N, e)
        return {"method": "lemma46", "applicable": False, "reason": str(e)}, params.N
    return estimate.to_dict(include_partials=partials), params.N


def _cmd_dim(args: argparse.Namespace) -> Result:
    spec, _ = _resolve_spec(args)
    estimates = [closed_form_dim(spec), remark_bound(spec, args.n_max)]
    if spec.family is Family.DOUBLY_EXP:
        estimates.append(wang_wu_upper(spec))
        estimates.append(inclusion_upper_bound(spec))
    entries = [e.to_dict(include_partials=args.partials) for e in estimates]
    payload: dict[str, Any] = {"command": "dim", "spec": spec.to_dict(), "n_max": args.n_max}
    if spec.family is not Family.POLYNOMIAL:
        entry, N = _lemma46_entry(spec, args.n_max, args.partials)
        entries.insert(2, entry)
        payload["threshold_N"] = N
    payload["estimates"] = entries
    return dumps_json(payload), {"spec": spec.to_dict(), "n_max": args.n_max}, None


def _cmd_dim_curve(args: argparse.Namespace) -> Result:
    spec, _ = _resolve_spec(args)
    rows = dim_curve(spec, args.param, args.grid)
    params = {"spec": spec.to_dict(), "param": args.param, "grid": list(args.grid)}
    return dim_curve_csv(args.param, rows), params, None


def _cmd_boxcount(args: argparse.Namespace) -> Result:
    data = json.loads(Path(args.tree).read_text(encoding="utf-8"))
    intervals = intervals_from_tree(data, args.level)
    estimate = box_count_dim(intervals, dyadic_scales(args.first, args.last, args.grid_base))
    payload = {"command": "boxcount", "intervals": len(intervals), "estimate": estimate.to_dict()}
    params = {
        "tree": args.tree,
        "level": args.level,
        "scales": [args.first, args.last, args.grid_base],
    }
    return dumps_json(payload), params, None


def _cmd_presets(args: argparse.Namespace) -> Result:
    builtin, user = discover_presets()
    found = search_presets(user + builtin, args.query)
    payload = {
        "command": "presets",
        "query": args.query,
        "presets": [
            {
                "name": entry.name,
                "description": entry.metadata.description,
                "tags": list(entry.metadata.tags),
                "builtin": entry.is_builtin,
                "path": str(entry.path),
            }
            for entry in found
        ],
    }
    return dumps_json(payload), {"query": args.query}, None


def _cmd_replay(args: argparse.Namespace) -> Result:
    manifest = load_manifest(args.manifest_file)
    _, output, _, _ = _execute(list(manifest.argv))
    match = manifest.matches(output)
    payload = {
        "command": "replay",
        "replayed": manifest.command,
        "match": match,
        "expected": manifest.checksum,
        "actual": output_checksum(output),
        "version": {"manifest": manifest.version, "current": __version__},
    }
    return dumps_json(payload), {"manifest": args.manifest_file, "match": match}, manifest.seed


# ============================================================================
# PARSER AND ENTRY POINT
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfextremes", description="Extreme values of continued-fraction digits"
    )
    parser.add_argument("--version", action="version", version=f"cfextremes {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--out", help="write output to this file instead of stdout")
    parser.add_argument("--manifest", help="write the run manifest here (default: stderr)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="continued-fraction digits of a rational or real")
    p.add_argument("--rational", help="exact rational such as 5/7")
    p.add_argument("--real", help="decimal string read at --precision bits")
    p.add_argument("--n", type=int, default=10, help="number of digits")
    p.add_argument("--precision", type=int, help="mantissa bits (default 4n + 64)")
    p.set_defaults(handler=_cmd_expand)

    p = sub.add_parser("cylinder", help="cylinder interval, length and Gauss measure")
    p.add_argument("--digits", required=True, help="comma-separated digits, e.g. 1,2,2")
    p.set_defaults(handler=_cmd_cylinder)

    p = sub.add_parser("simulate", help="Gauss-measure Monte Carlo for T_n and S_n")
    p.add_argument("--profile", choices=sorted(PROFILES), default="smoke")
    p.add_argument("--n", type=int, help="digits per trial")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--precision", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--y", type=_float_list, help="comma-separated y values")
    p.add_argument("--csv", help="write per-trial samples to this CSV file")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("levelset", help="nested construction: tree or log-domain counts")
    _add_spec_flags(p)
    p.add_argument("--N", type=int, help="override the threshold index")
    p.add_argument("--depth", type=int)
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--budget", type=int)
    p.add_argument("--summary-only", action="store_true", help="omit node lists")
    p.add_argument("--holder-s", type=float, help="run the Holder check at this exponent")
    p.add_argument("--holder-trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_levelset)

    p = sub.add_parser("dim", help="dimension table values and numeric bounds")
    _add_spec_flags(p)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--partials", action="store_true", help="include convergence partials")
    p.set_defaults(handler=_cmd_dim)

    p = sub.add_parser("dim-curve", help="closed-form dimension along a parameter sweep (CSV)")
    _add_spec_flags(p)
    p.add_argument("--param", required=True, choices=["alpha", "b", "c", "beta", "power", "base"])
    p.add_argument("--grid", required=True, type=_float_list, help="comma-separated values")
    p.set_defaults(handler=_cmd_dim_curve)

    p = sub.add_parser("boxcount", help="box-counting estimate from a levelset tree JSON")
    p.add_argument("--tree", required=True)
    p.add_argument("--level", type=int, help="tree level (default deepest)")
    p.add_argument("--first", type=int, default=2, help="coarsest scale exponent")
    p.add_argument("--last", type=int, default=12, help="finest scale exponent")
    p.add_argument("--grid-base", type=int, choices=[2, 3], default=2)
    p.set_defaults(handler=_cmd_boxcount)

    p = sub.add_parser("presets", help="list built-in and user presets")
    p.add_argument("--query", default="", help="match against name, description and tags")
    p.set_defaults(handler=_cmd_presets)

    p = sub.add_parser("replay", help="re-run a manifest and compare checksums")
    p.add_argument("manifest_file")
    p.set_defaults(handler=_cmd_replay)
    return parser


def _execute(argv: list[str]) -> tuple[argparse.Namespace, str, dict[str, Any], int | None]:
    args = build_parser().parse_args(argv)
    handler: Callable[[argparse.Namespace], Result] = args.handler
    output, params, seed = handler(args)
    return args, output, params, seed


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        output, params, seed = args.handler(args)
    except CfError as e:
        print(f"cfextremes: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"cfextremes: {e}", file=sys.stderr)
        return 1

    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)

    manifest = create_run_manifest(args.command, _replay_argv(argv), params, output, seed)
    if args.manifest:
        write_manifest(manifest, args.manifest)
    else:
        print(manifest.to_json(), file=sys.stderr)

    if args.command == "replay":
        return 0 if params["match"] else 1
    return 0


def _replay_argv(argv: list[str]) -> list[str]:
    """argv without the options that only choose where output goes."""
    out: list[str] = []
    skip = False
    for token in argv:
        if skip:
            skip = False
            continue
        if token in ("--out", "--manifest"):
            skip = True
            continue
        if token.startswith(("--out=", "--manifest=")):
            continue
        out.append(token)
    return out


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
