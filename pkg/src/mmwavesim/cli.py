"""Command-line entry point: config parsing, campaign execution, output files.

The config file is a flat key = value format with dotted section names
(network.*, antenna.*, radio.*, channel.*, model.*, association.*,
run.*), '#' comments, and blank lines. Flags override file keys. Every
run writes a manifest in the same grammar; re-running from the manifest
reproduces the output directory byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ChannelFileError
from .montecarlo import CampaignResult, SimulationConfig, run_campaign


class ConfigError(ValueError):
    """Unparseable, unknown, or invalid configuration input."""


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "on", "1"):
        return True
    if lowered in ("false", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# dotted config key -> (SimulationConfig field, parser)
_KEYS = {
    "network.area_side": ("area_side", float),
    "network.grid_rows": ("grid_rows", int),
    "network.grid_cols": ("grid_cols", int),
    "network.n_ue": ("n_ue", int),
    "network.quota": ("quota", int),
    "antenna.bs_rows": ("bs_rows", int),
    "antenna.bs_cols": ("bs_cols", int),
    "antenna.ue_rows": ("ue_rows", int),
    "antenna.ue_cols": ("ue_cols", int),
    "antenna.n_streams": ("n_streams", int),
    "radio.frequency_hz": ("frequency_hz", float),
    "radio.bandwidth_hz": ("bandwidth_hz", float),
    "radio.bs_power_dbm": ("bs_power_dbm", float),
    "radio.noise_density_dbm_hz": ("noise_density_dbm_hz", float),
    "channel.n_clusters": ("n_clusters", int),
    "channel.n_subpaths": ("n_subpaths", int),
    "channel.subpath_phase": ("subpath_phase", _parse_bool),
    "channel.source": ("channel_source", str),
    "channel.file": ("channel_file", str),
    "model.interference": ("interference", str),
    "model.power_norm": ("power_norm", str),
    "model.oim_literal": ("oim_literal", _parse_bool),
    "association.scheme": ("association_scheme", str),
    "association.utility": ("utility", str),
    "association.max_iterations": ("max_iterations", int),
    "run.drops": ("drops", int),
    "run.seed": ("seed", int),
    "run.workers": ("workers", int),
}
_FIELD_TO_KEY = {field: key for key, (field, _) in _KEYS.items()}


def _read_config_file(path) -> dict:
    overrides = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key = key.strip()
        value = value.strip()
        if key == "meta.tool_version":
            continue
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key '{key}'")
        field, parse = _KEYS[key]
        try:
            overrides[field] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for '{key}': {exc}") from exc
    return overrides


def _build_config(overrides: dict) -> SimulationConfig:
    try:
        return SimulationConfig(**overrides)
    except ValueError as exc:
        field = next((f for f in overrides if f in str(exc)), None)
        key = f" ({_FIELD_TO_KEY[field]})" if field else ""
        raise ConfigError(f"invalid configuration{key}: {exc}") from exc


def parse_config(path) -> SimulationConfig:
    """Resolved config from a file: stated keys override the defaults."""
    return _build_config(_read_config_file(path))


def resolve_config(config_path, flag_overrides: dict) -> SimulationConfig:
    overrides = _read_config_file(config_path) if config_path else {}
    overrides.update(flag_overrides)
    return _build_config(overrides)


def _fmt(value: float) -> str:
    """Fixed 15-significant-digit decimal for byte-stable CSV output."""
    return format(float(value), ".15g")


def _manifest_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_manifest(path, config: SimulationConfig) -> None:
    lines = [f"meta.tool_version = {__version__}"]
    for key, (field, _) in _KEYS.items():
        value = getattr(config, field)
        if value is None:
            continue
        lines.append(f"{key} = {_manifest_value(value)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_outputs(out_dir, campaign: CampaignResult) -> None:
    """Emit manifest, per-sample CSVs, distribution tables, and drop records."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = campaign.config
    scheme = config.association_scheme
    write_manifest(out / "manifest.cfg", config)

    with open(out / "rates.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("drop,ue,scheme,model,rate_bps_hz,served\n")
        for drop in campaign.drops:
            for res in drop.results:
                beta = res.outcome.activation.beta
                for k in range(config.n_ue):
                    served = 1 if beta[k] >= 0 else 0
                    fh.write(f"{drop.drop_index},{k},{scheme},{res.model.value},"
                             f"{_fmt(res.rates[k])},{served}\n")

    with open(out / "inp_power.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("drop,ue,scheme,model,inp_dbw\n")
        for drop in campaign.drops:
            for res in drop.results:
                for k in range(config.n_ue):
                    if res.outcome.activation.beta[k] >= 0:
                        fh.write(f"{drop.drop_index},{k},{scheme},{res.model.value},"
                                 f"{_fmt(res.inp_power_dbw[k])}\n")

    with open(out / "dropped.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("drop,scheme,count\n")
        for drop in campaign.drops:
            fh.write(f"{drop.drop_index},{scheme},{drop.n_dropped}\n")

    for (metric, model), dist in campaign.distributions.items():
        name = f"cdf_{metric}_{scheme}" + (f"_{model}" if model else "") + ".csv"
        with open(out / name, "w", encoding="utf-8", newline="") as fh:
            fh.write("value,cum_prob\n")
            for value, prob in zip(dist.values, dist.cum_prob):
                fh.write(f"{_fmt(value)},{_fmt(prob)}\n")

    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("metric,scheme,model,n_samples,p10,p50,p90\n")
        for (metric, model), dist in campaign.distributions.items():
            fh.write(f"{metric},{scheme},{model or ''},{dist.n_samples},"
                     f"{_fmt(dist.quantile(0.1))},{_fmt(dist.quantile(0.5))},"
                     f"{_fmt(dist.quantile(0.9))}\n")

    with open(out / "drops.jsonl", "w", encoding="utf-8", newline="") as fh:
        for drop in campaign.drops:
            record = {
                "drop": drop.drop_index,
                "scheme": scheme,
                "ue_positions": [[float(x) for x in row] for row in drop.ue_positions],
                "results": [
                    {
                        "model": res.model.value,
                        "beta": list(res.outcome.activation.beta),
                        "dropped": sorted(res.outcome.dropped),
                        "utility": res.utility,
                        "iterations": res.outcome.iterations,
                    }
                    for res in drop.results
                ],
            }
            fh.write(json.dumps(record) + "\n")


def _flag_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.drops is not None:
        overrides["drops"] = args.drops
    if args.association is not None:
        overrides["association_scheme"] = args.association
    if args.interference is not None:
        overrides["interference"] = args.interference
    if args.channel is not None:
        overrides["channel_source"] = args.channel
    if args.channels is not None:
        overrides["channel_file"] = args.channels
    if args.utility is not None:
        overrides["utility"] = args.utility
    if args.power_norm is not None:
        overrides["power_norm"] = args.power_norm
    if args.oim_literal is not None:
        overrides["oim_literal"] = args.oim_literal == "on"
    if args.workers is not None:
        overrides["workers"] = args.workers
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Monte Carlo downlink simulation of a mmWave cellular network")
    parser.add_argument("--config", help="config file (flat dotted key = value)")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--drops", type=int, help="number of drops")
    parser.add_argument("--association", choices=["max-sinr", "wcs"])
    parser.add_argument("--interference", choices=["oim", "bim", "both"])
    parser.add_argument("--channel", choices=["acm", "import"],
                        help="channel source: synthesize or read --channels")
    parser.add_argument("--channels", help="channel file for --channel import")
    parser.add_argument("--utility", choices=["sum", "log"])
    parser.add_argument("--power-norm", dest="power_norm",
                        choices=["paper", "per_stream"])
    parser.add_argument("--oim-literal", dest="oim_literal", choices=["on", "off"],
                        help="sum the printed form of the omnidirectional "
                             "covariance instead of the physical reading")
    parser.add_argument("--workers", type=int, help="parallel drop workers")
    parser.add_argument("--out", required=True, help="output directory")
    return parser


def run(args: argparse.Namespace) -> int:
    try:
        config = resolve_config(args.config, _flag_overrides(args))
        campaign = run_campaign(config)
        write_outputs(args.out, campaign)
    except (ConfigError, ChannelFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    return run(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
