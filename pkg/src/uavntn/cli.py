"""Command-line entry point: ``uavntn {run,sweep,presets,validate}``.

Exit codes: 0 success, 2 usage error, 3 invalid configuration, 4 run or
output failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import sys
from pathlib import Path

from .config import SECTIONS, ConfigError, ScenarioConfig, preset, preset_names
from .engine import WORKERS_ENV, run_campaigns
from .io import emit_results, parse_config, parse_value

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUN = 0, 2, 3, 4
FORMATS = ("csv", "json")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def resolve_key(key: str) -> tuple[str, dataclasses.Field]:
    """Map ``section.key`` or a unique bare field name to its dotted form."""
    if "." in key:
        sec, _, name = key.partition(".")
        fields = {f.name: f for f in dataclasses.fields(SECTIONS[sec])} if sec in SECTIONS else {}
        if name not in fields:
            raise ConfigError(f"unknown config key {key}")
        return key, fields[name]
    hits = [(sec, f) for sec, typ in SECTIONS.items() for f in dataclasses.fields(typ) if f.name == key]
    if len(hits) != 1:
        raise ConfigError(f"unknown config key {key}" if not hits else f"ambiguous key {key}; use section.{key}")
    sec, f = hits[0]
    return f"{sec}.{key}", f


def _assignments(items: list[str]) -> dict[str, object]:
    out = {}
    for item in items:
        key, sep, text = item.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {item!r}")
        dotted, f = resolve_key(key.strip())
        out[dotted] = parse_value(dotted, f, text)
    return out


def _base_config(args) -> ScenarioConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = parse_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("one of --config or --preset is required")
    overrides = _assignments(args.set or [])
    if args.drops is not None:
        overrides["simulation.n_drops"] = args.drops
    if args.seed is not None:
        overrides["simulation.master_seed"] = args.seed
    return cfg.replace(**overrides) if overrides else cfg


def _sweep_configs(base: ScenarioConfig, vary: list[str]) -> list[ScenarioConfig]:
    axes = []
    for item in vary:
        key, sep, values = item.partition("=")
        if not sep or not values:
            raise ConfigError(f"--vary expects key=v1,v2,..., got {item!r}")
        dotted, f = resolve_key(key.strip())
        axes.append([(dotted, parse_value(dotted, f, v)) for v in values.split(",")])
    configs = []
    for combo in itertools.product(*axes):
        tag = "_".join(f"{k.split('.')[-1]}={v:g}" if isinstance(v, float) else f"{k.split('.')[-1]}={v}" for k, v in combo)
        configs.append(base.replace(name=f"{base.name}__{tag}", **dict(combo)))
    return configs


def _write(summaries, out: Path, formats: list[str], timestamp: str | None) -> None:
    for s in summaries:
        for fmt in formats:
            path = emit_results(s, fmt, out / f"{s.scenario}.{fmt}", timestamp=timestamp)
            print(f"wrote {path}")


def _report(summaries) -> None:
    for s in summaries:
        print(f"{s.scenario}: {s.n_drops} drops")
        for (pop, direction), st in s.stats.items():
            sc = st.scalars()
            print(
                f"  {pop} {direction}: n={sc['n']} outage={sc['outage']:.3f} "
                f"median_sinr={sc['median_sinr_db']:.2f} dB mean_rate={sc['mean_rate'] / 1e3:.1f} kbit/s"
            )
        if s.relief:
            print(f"  relief: {s.relief}")
        if s.partition:
            print(f"  partition: {s.partition}")


def _add_common(p: argparse.ArgumentParser, with_out: bool = True) -> None:
    p.add_argument("--config", help="scenario config file (.ini, or a .json result to re-run)")
    p.add_argument("--preset", help="named preset, see `uavntn presets`")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key (repeatable)")
    p.add_argument("--drops", type=int, help="override simulation.n_drops")
    p.add_argument("--seed", type=int, help="override simulation.master_seed")
    if with_out:
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--format", default="csv,json", help="comma-separated subset of csv,json (default both)")
        p.add_argument("--workers", type=int, help=f"parallel drop workers (default ${WORKERS_ENV} or 1)")
        p.add_argument("--timestamp", help="fixed metadata timestamp for reproducible result files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uavntn", description="TN / LEO-NTN UAV coverage simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_common(sub.add_parser("run", help="run one campaign"))
    sw = sub.add_parser("sweep", help="run a cartesian sweep over config keys")
    _add_common(sw)
    sw.add_argument("--vary", action="append", required=True, metavar="KEY=V1,V2", help="swept key (repeatable)")
    sub.add_parser("presets", help="list preset names")
    _add_common(sub.add_parser("validate", help="parse and validate a config without running"), with_out=False)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        for name in preset_names():
            print(name)
        return EXIT_OK
    try:
        cfg = _base_config(args)
        if args.command == "validate":
            print(f"{cfg.name}: ok ({cfg.mode}, {cfg.simulation.n_drops} drops)")
            return EXIT_OK
        formats = [f.strip() for f in args.format.split(",") if f.strip()]
        bad = [f for f in formats if f not in FORMATS]
        if bad or not formats:
            raise ConfigError(f"--format must be a subset of {','.join(FORMATS)}")
        configs = _sweep_configs(cfg, args.vary) if args.command == "sweep" else [cfg]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summaries = run_campaigns(configs, args.workers)
        _report(summaries)
        _write(summaries, Path(args.out), formats, args.timestamp)
    except Exception as exc:  # noqa: BLE001 - reported as a diagnostic with nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
