"""Command-line front end: bound tables, single routes and walks, PPP dumps,
and the Monte Carlo experiment harness.

Config files are flat JSON objects whose keys mirror the long flag names
(without leading dashes, e.g. {"trials": 1000, "h-over-R": [10, 25]});
explicit flags override file values.  Numeric flags accept scientific
notation.  Exit codes: 0 success, 2 config error, 3 when any experiment
verdict is `violated`.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .bounds import empty_wedge_prob_exact, empty_wedge_prob_upper, hop_bounds, sigma_total
from .experiments import EXP_ROUTE, RUNNERS, ExperimentConfig, substream
from .network import NetworkParams, RegionSpec, generate_ppp, nodes_csv
from .routing import path_trace_csv, route_between_points, route_packet
from .walk import walk_trace, walk_trace_csv


class CliConfigError(Exception):
    pass


# (flag, dest, kind, help) tables; kind drives both argparse setup and
# config file coercion.  kinds: float, count, str, floats
_GLOBAL_OPTS = [
    ("--seed", "seed", "count", "root random seed (default: 0)"),
    ("--out", "out", "str", "write output to this file instead of stdout"),
    ("--format", "format", "str", "output format, json or csv (default: json)"),
    ("--threads", "threads", "count",
     "worker processes for trial-parallel experiments, 0 = all cores; never "
     "affects results (default: 1)"),
]

_PARAM_OPTS = [
    ("--lambda", "lam", "float", "node density per unit area"),
    ("--R", "R", "float", "transmission range"),
    ("--eta", "eta", "float", "wedge fraction, opening angle 2*eta*pi (default: 0.5)"),
    ("--region", "region", "str", "region kind, disk or square (default: disk)"),
    ("--size", "size", "float", "region size: disk radius or square side"),
    ("--N", "N", "float", "expected node count (with --d; region fixed to a unit disk)"),
    ("--d", "d", "float", "normalized transmission-disc area pi R^2 / |A| (with --N)"),
]

_SUB_OPTS = {
    "bounds": [
        ("--N", "N", "float", "expected node count"),
        ("--d", "d", "float", "normalized transmission-disc area"),
        ("--eta", "eta", "float", "wedge fraction (default: 0.5)"),
        ("--h-over-R", "h_over_R", "floats",
         "also emit expected-hop bounds for these h/R values"),
        ("--max-i", "max_i", "count",
         "also emit the empty-wedge probability table for i = 1..max-i"),
    ],
    "route": _PARAM_OPTS
    + [
        ("--policy", "policy", "str",
         "relay rule: random_wedge, greedy, mfr, nfp or compass "
         "(default: random_wedge)"),
        ("--hop-cap", "hop_cap", "count",
         "relay-transmission cap (default: ceil(40 h/R) + 100)"),
        ("--h-over-R", "h_over_R", "floats",
         "synthetic source-destination distance over R (default: 10)"),
        ("--src", "src", "count", "route between node ids: source id"),
        ("--dst", "dst", "count", "route between node ids: destination id"),
    ],
    "walk": [
        ("--h-over-R", "h_over_R", "floats", "start distance over R (default: 10)"),
        ("--R", "R", "float", "transmission range (default: 1)"),
        ("--eta", "eta", "float", "wedge fraction (default: 0.5)"),
        ("--hop-cap", "hop_cap", "count", "step cap (default: 100 h/R + 10000)"),
    ],
    "gen": _PARAM_OPTS,
    "exp": _PARAM_OPTS
    + [
        ("--trials", "trials", "count", "Monte Carlo trials (default: 1000)"),
        ("--h-over-R", "h_over_R", "floats",
         "hopcount/eta distance grid (default: 10)"),
        ("--r-over-R", "r_over_R", "floats",
         "stepdist distance grid (default: 1.01 1.5 2 5 20)"),
        ("--eta-list", "eta_list", "floats",
         "uwedge/eta wedge-fraction grid (default: 0.25 0.5 0.75 1.0)"),
        ("--max-i", "max_i", "count", "uwedge largest node count (default: 10)"),
        ("--hop-cap", "hop_cap", "count", "hopcount relay-transmission cap"),
        ("--net-trials", "net_trials", "count",
         "stepdist networked-variant trials, 0 disables (default: 20000)"),
    ],
}

_DEFAULTS = {
    "seed": 0,
    "format": "json",
    "threads": 1,
    "eta": 0.5,
    "region": "disk",
    "policy": "random_wedge",
    "trials": 1000,
    "h_over_R": [10.0],
    "r_over_R": [1.01, 1.5, 2.0, 5.0, 20.0],
    "eta_list": [0.25, 0.5, 0.75, 1.0],
    "max_i": 10,
    "net_trials": 20000,
}

# per-command overrides: for `bounds` the hop and empty-wedge tables are
# emitted only when their flags are given
_NO_DEFAULT = {"bounds": ("h_over_R", "max_i")}


def _count(s):
    return int(float(s))


_ARG_KIND = {
    "float": {"type": float},
    "count": {"type": _count},
    "str": {"type": str},
    "floats": {"type": float, "nargs": "+"},
}


def _coerce(kind: str, value, key: str):
    try:
        if kind == "float":
            return float(value)
        if kind == "count":
            return int(float(value))
        if kind == "str":
            return str(value)
        if kind == "floats":
            seq = value if isinstance(value, (list, tuple)) else [value]
            return [float(v) for v in seq]
    except (TypeError, ValueError):
        raise CliConfigError(f"config key {key!r}: cannot interpret {value!r} as {kind}")
    raise CliConfigError(f"unknown option kind {kind}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wedgeroute",
        description="Random wedge-relay routing: bounds, simulation, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descr = {
        "bounds": "evaluate closed-form bounds for a parameter point",
        "route": "route a single packet and print the outcome or path trace",
        "walk": "simulate one distance walk and print its trace",
        "gen": "dump one Poisson node field",
        "exp": "run an experiment (connectivity|hopcount|stepdist|prop1|eta|uwedge)",
    }
    for name, opts in _SUB_OPTS.items():
        p = sub.add_parser(name, help=descr[name])
        if name == "exp":
            p.add_argument("which", choices=sorted(RUNNERS))
        p.add_argument(
            "--config",
            type=str,
            default=None,
            help="flat JSON config whose keys mirror the flag names; "
            "explicit flags override it",
        )
        seen = set()
        for flag, dest, kind, help_text in opts + _GLOBAL_OPTS:
            if dest in seen:
                continue
            seen.add(dest)
            p.add_argument(flag, dest=dest, default=None, help=help_text, **_ARG_KIND[kind])
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise CliConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise CliConfigError(
            f"malformed config {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        )
    if not isinstance(cfg, dict):
        raise CliConfigError(f"config {path} must be a flat JSON object")
    return cfg


def _merge_config(args: argparse.Namespace, command: str) -> dict:
    """Resolve values with precedence: CLI flag > config file > default."""
    table = {}
    for flag, dest, kind, _help in _SUB_OPTS[command] + _GLOBAL_OPTS:
        table[flag.lstrip("-")] = (dest, kind)
    resolved = {dest: getattr(args, dest) for dest, _ in table.values()}
    if command == "exp":
        resolved["which"] = args.which
    if args.config is not None:
        file_cfg = _load_config(args.config)
        for key, value in file_cfg.items():
            if key not in table:
                raise CliConfigError(f"unknown config key {key!r} for subcommand {command!r}")
            dest, kind = table[key]
            if resolved[dest] is None:
                resolved[dest] = _coerce(kind, value, key)
    skip = _NO_DEFAULT.get(command, ())
    for dest, value in list(resolved.items()):
        if value is None and dest in _DEFAULTS and dest not in skip:
            resolved[dest] = _DEFAULTS[dest]
    if resolved.get("format") not in ("json", "csv"):
        raise CliConfigError(f"format must be json or csv, got {resolved.get('format')!r}")
    return resolved


def _require(cfg: dict, names: list[str], context: str):
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise CliConfigError(f"{context} requires {', '.join('--' + m for m in missing)}")


def _build_params(cfg: dict, auto_size_h: float | None = None) -> NetworkParams:
    """NetworkParams from either (--N, --d) or (--lambda, --R, --size).

    With (--N, --d) the region size defaults to 1 and R, lam are derived.
    With --lambda/--R and no --size, a disk region is auto-sized to fit
    auto_size_h (when given) with a 4R margin.
    """
    kind = cfg["region"]
    if kind not in ("disk", "square"):
        raise CliConfigError(f"region must be disk or square, got {kind!r}")
    has_nd = cfg.get("N") is not None or cfg.get("d") is not None
    if has_nd:
        if cfg.get("lam") is not None or cfg.get("R") is not None:
            raise CliConfigError("give either --N/--d or --lambda/--R/--size, not both")
        _require(cfg, ["N", "d"], "parameterization by expected counts")
        size = cfg.get("size") if cfg.get("size") is not None else 1.0
        region = RegionSpec(kind, size)
        area = region.area
        R = math.sqrt(cfg["d"] * area / math.pi)
        lam = cfg["N"] / area
    else:
        _require(cfg, ["lam", "R"], "parameterization by density")
        if cfg.get("size") is None:
            if auto_size_h is None or kind != "disk":
                raise CliConfigError("--size is required (no auto-size for this command)")
            size = auto_size_h / 2.0 + 4.0 * cfg["R"]
        else:
            size = cfg["size"]
        region = RegionSpec(kind, size)
        R = cfg["R"]
        lam = cfg["lam"]
    try:
        return NetworkParams(lam, R, cfg["eta"], region)
    except ValueError as exc:
        raise CliConfigError(str(exc))


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        print(text)


def _cmd_bounds(cfg: dict) -> tuple[str, int]:
    _require(cfg, ["N", "d"], "bounds")
    report = sigma_total(cfg["N"], cfg["d"], cfg["eta"])
    payload = report.as_dict()
    if cfg.get("h_over_R") is not None:
        rows = []
        for ho_r in cfg["h_over_R"]:
            hb = hop_bounds(ho_r, 1.0, 1.0)
            rows.append({"h_over_R": ho_r, **hb.as_dict()})
        payload["hop_bounds"] = rows
    if cfg.get("max_i") is not None:
        payload["empty_wedge"] = [
            {
                "i": i,
                "exact": empty_wedge_prob_exact(i, cfg["eta"]),
                "upper": empty_wedge_prob_upper(i, cfg["eta"]),
            }
            for i in range(1, cfg["max_i"] + 1)
        ]
    if cfg["format"] == "csv":
        lines = ["quantity,value"]
        for key in ("sigma_interior", "sigma_edge", "sigma_total", "N", "d", "eta"):
            lines.append(f"{key},{payload[key]!r}")
        for row in payload.get("hop_bounds", []):
            lines.append(f"hop_lower[h_over_R={row['h_over_R']:g}],{row['lower']!r}")
            lines.append(f"hop_upper[h_over_R={row['h_over_R']:g}],{row['upper']!r}")
        for row in payload.get("empty_wedge", []):
            lines.append(f"U_exact[i={row['i']}],{row['exact']!r}")
            lines.append(f"U_upper[i={row['i']}],{row['upper']!r}")
        return "\n".join(lines), 0
    return json.dumps(payload, indent=2), 0


def _cmd_route(cfg: dict) -> tuple[str, int]:
    from .routing import POLICIES

    if cfg["policy"] not in POLICIES:
        raise CliConfigError(f"policy must be one of {', '.join(POLICIES)}")
    params = _build_params(cfg, auto_size_h=(cfg["h_over_R"][0]) * (cfg.get("R") or 1.0))
    rng = substream(cfg["seed"], EXP_ROUTE)
    ns = generate_ppp(params, rng)
    if cfg.get("src") is not None or cfg.get("dst") is not None:
        _require(cfg, ["src", "dst"], "routing between node ids")
        try:
            outcome = route_packet(
                ns, cfg["src"], cfg["dst"], cfg["policy"], params, cfg.get("hop_cap"), rng
            )
        except ValueError as exc:
            raise CliConfigError(str(exc))
        dst_pos = ns.positions[cfg["dst"]]
        dst_id = cfg["dst"]
    else:
        h = cfg["h_over_R"][0] * params.R
        src_pos, dst_pos = (-h / 2.0, 0.0), (h / 2.0, 0.0)
        outcome = route_between_points(
            ns, src_pos, dst_pos, cfg["policy"], params, cfg.get("hop_cap"), rng
        )
        dst_id = None
    if cfg["format"] == "csv":
        return path_trace_csv(outcome, ns, dst_pos, dst_id=dst_id), 0
    return json.dumps(outcome.as_dict(), indent=2), 0


def _cmd_walk(cfg: dict) -> tuple[str, int]:
    R = cfg.get("R") if cfg.get("R") is not None else 1.0
    trace = walk_trace(
        cfg["h_over_R"][0] * R, R=R, eta=cfg["eta"], hop_cap=cfg.get("hop_cap"), seed=cfg["seed"]
    )
    if cfg["format"] == "csv":
        return walk_trace_csv(trace), 0
    return json.dumps({"trace": [{"t": s.t, "r": s.r} for s in trace]}, indent=2), 0


def _cmd_gen(cfg: dict) -> tuple[str, int]:
    params = _build_params(cfg)
    ns = generate_ppp(params, cfg["seed"])
    if cfg["format"] == "csv":
        return nodes_csv(ns), 0
    rows = [
        {"id": i, "x": float(x), "y": float(y)} for i, (x, y) in enumerate(ns.positions)
    ]
    return json.dumps(rows, indent=2), 0


def _cmd_exp(cfg: dict) -> tuple[str, int]:
    which = cfg["which"]
    auto_h = max(cfg["h_over_R"]) * (cfg.get("R") or 1.0) if which == "hopcount" else None
    params = _build_params(cfg, auto_size_h=auto_h)
    exp_cfg = ExperimentConfig(
        params=params,
        trials=cfg["trials"],
        seed=cfg["seed"],
        h_over_R=tuple(cfg["h_over_R"]),
        eta_list=tuple(cfg["eta_list"]),
        r_over_R=tuple(cfg["r_over_R"]),
        max_i=cfg["max_i"],
        hop_cap=cfg.get("hop_cap"),
        net_trials=cfg["net_trials"],
        threads=cfg["threads"],
    )
    try:
        report = RUNNERS[which](exp_cfg)
    except ValueError as exc:
        raise CliConfigError(str(exc))
    return report.render(cfg["format"]), 3 if report.has_violation() else 0


_HANDLERS = {
    "bounds": _cmd_bounds,
    "route": _cmd_route,
    "walk": _cmd_walk,
    "gen": _cmd_gen,
    "exp": _cmd_exp,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _merge_config(args, args.command)
        text, code = _HANDLERS[args.command](cfg)
    except CliConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _emit(text, cfg.get("out"))
    return code


if __name__ == "__main__":
    sys.exit(main())
