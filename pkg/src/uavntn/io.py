"""Scenario config files and result serialization.

Config files are INI-style key-value text with one section per
:class:`~uavntn.config.ScenarioConfig` part::

    [scenario]
    name = my_run
    preset = case3.standalone     ; optional starting point

    [deployment]
    elevation = 87

Results are written as CSV (one row per sample) or JSON (full summary with
scalars and sorted sample arrays). Both formats are versioned by
``SCHEMA_VERSION``.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import datetime as dt
import functools
import json
import math
import os
import subprocess
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODES, SECTIONS, ConfigError, ScenarioConfig, describe_range, preset, preset_names
from .engine import DIRECTIONS, POPULATIONS, MetricsSummary, PopulationStats

SCHEMA_VERSION = 1
SCENARIO_KEYS = ("name", "preset")
SAMPLE_KINDS = ("sinr_db", "rate_bps")
CSV_HEADER = ("scenario", "population", "direction", "metric", "value")


# ---------------------------------------------------------------- config files


def _field_types() -> dict[str, dict[str, dataclasses.Field]]:
    return {sec: {f.name: f for f in dataclasses.fields(typ)} for sec, typ in SECTIONS.items()}


def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def parse_value(key: str, f: dataclasses.Field, text: str):
    """Convert config text to the field's type, naming the key on failure."""
    text = _unquote(text)
    kind = type(f.default)
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(text)
        if kind is int:
            value = float(text)
            if value != int(value):
                raise ValueError(text)
            return int(value)
        if kind is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"{key} = {text!r} is not a valid {kind.__name__}; valid range {describe_range(f)}") from None
    return text


def _required_message() -> str:
    return (
        "config must set scenario.preset (one of "
        + ", ".join(preset_names())
        + ") or simulation.mode (one of "
        + ", ".join(MODES)
        + "); every other key defaults"
    )


def config_from_mapping(sections: dict[str, dict[str, str]], origin: str = "<config>") -> ScenarioConfig:
    """Build a validated config from ``{section: {key: text}}``."""
    fields = _field_types()
    scen = dict(sections.get("scenario", {}))
    for key in scen:
        if key not in SCENARIO_KEYS:
            raise ConfigError(f"{origin}: unknown key scenario.{key}; allowed: {', '.join(SCENARIO_KEYS)}")
    for sec in sections:
        if sec != "scenario" and sec not in fields:
            raise ConfigError(f"{origin}: unknown section [{sec}]; allowed: scenario, {', '.join(fields)}")
    has_mode = "mode" in sections.get("simulation", {})
    if "preset" not in scen and not has_mode:
        raise ConfigError(f"{origin}: {_required_message()}")

    if "preset" in scen:
        cfg = preset(_unquote(scen["preset"]))
    else:
        cfg = ScenarioConfig()
    updates = {}
    for sec, items in sections.items():
        if sec == "scenario":
            continue
        for key, text in items.items():
            if key not in fields[sec]:
                raise ConfigError(
                    f"{origin}: unknown key {sec}.{key}; allowed in [{sec}]: {', '.join(fields[sec])}"
                )
            updates[f"{sec}.{key}"] = parse_value(f"{sec}.{key}", fields[sec][key], text)
    if "name" in scen:
        updates["name"] = _unquote(scen["name"])
    try:
        return cfg.replace(**updates)
    except ConfigError as exc:
        raise ConfigError(f"{origin}: {exc}") from None


def parse_config_text(text: str, origin: str = "<config>") -> ScenarioConfig:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=(";", "#"), default_section="__defaults__"
    )
    parser.optionxform = str  # keys are case sensitive
    # keys before any section header belong to [scenario]
    if text.lstrip() and not text.lstrip().startswith("["):
        text = "[scenario]\n" + text
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from None
    sections = {sec: dict(parser.items(sec)) for sec in parser.sections()}
    return config_from_mapping(sections, origin)


def parse_config(path) -> ScenarioConfig:
    """Read and validate a scenario config file.

    A ``.json`` path is treated as a result file and its config echo is
    returned, so any emitted result can be re-run directly.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    if path.suffix == ".json":
        try:
            return ScenarioConfig.from_dict(json.loads(text)["metadata"]["config"])
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: not a result file with a config echo ({exc})") from None
    return parse_config_text(text, str(path))


def format_config(cfg: ScenarioConfig) -> str:
    """Full INI text for ``cfg``; ``parse_config_text`` inverts it exactly."""
    lines = ["[scenario]", f"name = {cfg.name}", ""]
    for sec in SECTIONS:
        lines.append(f"[{sec}]")
        for f in dataclasses.fields(getattr(cfg, sec)):
            value = getattr(getattr(cfg, sec), f.name)
            lines.append(f"{f.name} = {value!r}" if isinstance(value, float) else f"{f.name} = {value}")
        lines.append("")
    return "\n".join(lines)


def write_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(format_config(cfg), encoding="utf-8", newline="\n")


# ---------------------------------------------------------------- results


@functools.lru_cache(maxsize=1)
def version_string() -> str:
    """Package version plus the source revision when run from a checkout."""
    try:
        rev = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"{__version__}+{rev}" if rev else __version__


def _timestamp(timestamp: str | None) -> str:
    if timestamp is not None:
        return timestamp
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc) if epoch else dt.datetime.now(dt.timezone.utc)
    return when.replace(microsecond=0).isoformat()


def _num(x):
    """JSON-safe scalar: NaN and infinities become null."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def summary_to_dict(summary: MetricsSummary, *, timestamp: str | None = None) -> dict:
    tables = []
    for pop in POPULATIONS:
        for direction in DIRECTIONS:
            st = summary[(pop, direction)]
            tables.append(
                {
                    "population": pop,
                    "direction": direction,
                    "scalars": {k: _num(v) for k, v in st.scalars().items()},
                    "sinr_db": [float(v) for v in st.sinr_db],
                    "rate_bps": [float(v) for v in st.rate_bps],
                }
            )
    return {
        "schema_version": SCHEMA_VERSION,
        "metadata": {
            "scenario": summary.scenario,
            "master_seed": summary.config.simulation.master_seed,
            "n_drops": summary.n_drops,
            "version": version_string(),
            "timestamp": _timestamp(timestamp),
            "config": summary.config.to_dict(),
        },
        "threshold_db": summary.config.simulation.sinr_threshold,
        "tables": tables,
        "relief": {k: _num(v) for k, v in summary.relief.items()},
        "partition": {k: _num(v) for k, v in summary.partition.items()},
    }


def summary_from_dict(d: dict) -> MetricsSummary:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
    meta = d["metadata"]
    cfg = ScenarioConfig.from_dict(meta["config"])
    stats = {}
    for t in d["tables"]:
        stats[(t["population"], t["direction"])] = PopulationStats(
            np.asarray(t["sinr_db"], dtype=float), np.asarray(t["rate_bps"], dtype=float), d["threshold_db"]
        )

    def back(x):
        return float("nan") if x is None else x

    return MetricsSummary(
        meta["scenario"],
        cfg,
        meta["n_drops"],
        stats,
        {k: back(v) for k, v in d.get("relief", {}).items()},
        {k: back(v) for k, v in d.get("partition", {}).items()},
    )


def _open_for_write(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror}") from exc


def write_csv(summary: MetricsSummary, path) -> None:
    with _open_for_write(Path(path)) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for pop in POPULATIONS:
            for direction in DIRECTIONS:
                st = summary[(pop, direction)]
                for kind in SAMPLE_KINDS:
                    for v in getattr(st, kind):
                        w.writerow((summary.scenario, pop, direction, kind, repr(float(v))))


def write_json(summary: MetricsSummary, path, *, timestamp: str | None = None) -> None:
    payload = json.dumps(summary_to_dict(summary, timestamp=timestamp), indent=1, allow_nan=False)
    with _open_for_write(Path(path)) as fh:
        fh.write(payload + "\n")


def emit_results(summary: MetricsSummary, fmt: str, path, *, timestamp: str | None = None) -> Path:
    """Write ``summary`` as ``csv`` or ``json`` and return the path."""
    path = Path(path)
    if fmt == "csv":
        write_csv(summary, path)
    elif fmt == "json":
        write_json(summary, path, timestamp=timestamp)
    else:
        raise ValueError(f"unknown result format {fmt!r}; expected csv or json")
    return path


def load_json(path) -> MetricsSummary:
    return summary_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_csv(path) -> dict[tuple[str, str, str, str], np.ndarray]:
    """Samples keyed by ``(scenario, population, direction, metric)``."""
    out: dict[tuple, list[float]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        for scen, pop, direction, metric, value in reader:
            out.setdefault((scen, pop, direction, metric), []).append(float(value))
    return {k: np.asarray(v) for k, v in out.items()}
