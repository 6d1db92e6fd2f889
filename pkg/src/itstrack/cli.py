"""Command-line front end: config parsing, sweep execution, CSV/manifest output.

Experiments are described by a small INI file with one section per concern;
every key is optional and falls back to the defaults used throughout the
simulation study.  A run writes the three CSV families (NMSE sweep, AoA
trajectory, SE sweep) plus ``manifest.txt`` — itself a valid config that
reproduces every CSV byte for byte.
"""

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .channel import DynamicsParams
from .harness import SCHEMES, SimConfig, run_monte_carlo, variant

EXPERIMENT_KINDS = ("nmse_vs_snr", "aoa_trajectory", "se_vs_snr")

DEFAULT_SCHEMES = {
    "nmse_vs_snr": ("map_myopic", "map_exploratory", "ml_myopic"),
    "aoa_trajectory": ("map_myopic", "map_exploratory", "ml_myopic"),
    "se_vs_snr": ("map_myopic", "ml_myopic", "perfect_csi"),
}

DEFAULT_SNR = {
    "nmse_vs_snr": "-10:5:20",
    "aoa_trajectory": "5",
    "se_vs_snr": "-10:5:20",
}

OUT_DIR_ENV = "ITSTRACK_OUT_DIR"


class ConfigError(Exception):
    """Raised for malformed or out-of-range configuration input."""


@dataclass
class ExperimentSpec:
    """A fully resolved experiment: what to run and where to write it."""

    kind: str
    sim: SimConfig
    output_dir: str
    schemes: tuple

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if len(self.schemes) == 0:
            raise ConfigError("scheme list must be non-empty")


def parse_snr_spec(text: str) -> tuple:
    """Expand 'lo:step:hi' (inclusive) or a comma list into SNR values in dB."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad SNR range {text!r}, expected lo:step:hi")
        try:
            lo, step, hi = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"bad SNR range {text!r}") from None
        if step <= 0.0 or hi < lo:
            raise ConfigError(f"bad SNR range {text!r}: need step > 0 and hi >= lo")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return tuple(lo + i * step for i in range(count))
    try:
        values = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"bad SNR list {text!r}") from None
    if not values:
        raise ConfigError("SNR grid must be non-empty")
    return values


# section -> key -> (converter name, target attribute)
_SCHEMA = {
    "experiment": {"kind": None, "schemes": None, "output_dir": None},
    "geometry": {
        "num_elements": ("int", "num_elements"),
        "carrier_frequency": ("float", "carrier_frequency"),
        "antenna_position": ("floats3", "antenna_position"),
        "rho0": ("float", "rho0"),
        "nlos_correlation": ("str", "nlos_correlation"),
        "nlos_corr_coeff": ("float", "nlos_corr_coeff"),
    },
    "dynamics": {
        "sigma_phi": ("float", "sigma_phi"),
        "sigma_beta": ("float", "sigma_beta"),
        "kappa": ("float", "kappa"),
    },
    "simulation": {
        "num_blocks": ("int", "num_blocks"),
        "num_trials": ("int", "num_trials"),
        "snr_grid_db": ("snr", "snr_grid_db"),
        "mismatch": ("str", "mismatch"),
        "master_seed": ("int", "master_seed"),
        "pilot_power": ("float", "pilot_power"),
        "initial_beta": ("float", "initial_beta"),
        "phi_grid_points": ("int", "phi_grid_points"),
        "ml_grid_points": ("int", "ml_grid_points"),
    },
}


def _convert(kind: str, raw: str, where: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "floats3":
            values = tuple(float(p) for p in raw.split(","))
            if len(values) != 3:
                raise ValueError("need three comma-separated numbers")
            return values
        if kind == "snr":
            return parse_snr_spec(raw)
        return raw.strip()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(path: str) -> ExperimentSpec:
    """Read an experiment config, filling unset keys with the study defaults."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")

    kind = parser.get("experiment", "kind", fallback="nmse_vs_snr").strip()
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"experiment.kind must be one of {EXPERIMENT_KINDS}")

    sim_kwargs = {}
    dyn_kwargs = {}
    for section in ("geometry", "dynamics", "simulation"):
        if not parser.has_section(section):
            continue
        for key, raw in parser[section].items():
            conv, attr = _SCHEMA[section][key]
            value = _convert(conv, raw, f"{section}.{key}")
            if section == "dynamics":
                dyn_kwargs[attr] = value
            else:
                sim_kwargs[attr] = value
    if "snr_grid_db" not in sim_kwargs:
        sim_kwargs["snr_grid_db"] = parse_snr_spec(DEFAULT_SNR[kind])

    try:
        dynamics = DynamicsParams(**dyn_kwargs)
        sim = SimConfig(dynamics=dynamics, **sim_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    schemes_raw = parser.get("experiment", "schemes", fallback=None)
    if schemes_raw is None:
        schemes = DEFAULT_SCHEMES[kind]
    else:
        schemes = tuple(s.strip() for s in schemes_raw.split(",") if s.strip())
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ConfigError(f"experiment.schemes: unknown scheme {scheme!r}")

    output_dir = parser.get("experiment", "output_dir", fallback="results").strip()
    return ExperimentSpec(kind=kind, sim=sim, output_dir=output_dir,
                          schemes=schemes)


def default_spec(kind: str = "nmse_vs_snr") -> ExperimentSpec:
    """The fully resolved spec an empty config file expands to."""
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    sim = SimConfig(snr_grid_db=parse_snr_spec(DEFAULT_SNR[kind]))
    return ExperimentSpec(kind=kind, sim=sim, output_dir="results",
                          schemes=DEFAULT_SCHEMES[kind])


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def spec_to_ini(spec: ExperimentSpec) -> str:
    """Serialize a resolved spec as config text (parse_config round-trips it)."""
    sim = spec.sim
    dyn = sim.dynamics
    lines = [
        "[experiment]",
        f"kind = {spec.kind}",
        f"schemes = {', '.join(spec.schemes)}",
        f"output_dir = {spec.output_dir}",
        "",
        "[geometry]",
        f"num_elements = {sim.num_elements}",
        f"carrier_frequency = {_fmt(sim.carrier_frequency)}",
        f"antenna_position = {', '.join(repr(float(v)) for v in sim.antenna_position)}",
        f"rho0 = {_fmt(sim.rho0)}",
        f"nlos_correlation = {sim.nlos_correlation}",
        f"nlos_corr_coeff = {_fmt(sim.nlos_corr_coeff)}",
        "",
        "[dynamics]",
        f"sigma_phi = {_fmt(dyn.sigma_phi)}",
        f"sigma_beta = {_fmt(dyn.sigma_beta)}",
        f"kappa = {_fmt(dyn.kappa)}",
        "",
        "[simulation]",
        f"num_blocks = {sim.num_blocks}",
        f"num_trials = {sim.num_trials}",
        f"snr_grid_db = {', '.join(repr(float(v)) for v in sim.snr_grid_db)}",
        f"mismatch = {sim.mismatch}",
        f"master_seed = {sim.master_seed}",
        f"pilot_power = {_fmt(sim.pilot_power)}",
        f"initial_beta = {_fmt(sim.initial_beta)}",
        f"phi_grid_points = {sim.phi_grid_points}",
        f"ml_grid_points = {sim.ml_grid_points}",
        "",
    ]
    return "\n".join(lines)


def _write_lines(path: str, lines: list):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def run_experiment(spec: ExperimentSpec, n_workers: int = 1) -> int:
    """Run every scheme of the experiment and write CSVs plus the manifest.

    Returns 0 on success.  On I/O failure any partially written output file
    is removed and 1 is returned.
    """
    tables = {}
    for scheme in spec.schemes:
        cfg = variant(spec.sim, scheme=scheme)
        tables[scheme] = run_monte_carlo(cfg, n_workers=n_workers)

    written = []
    try:
        os.makedirs(spec.output_dir, exist_ok=True)

        path = os.path.join(spec.output_dir, "nmse_vs_snr.csv")
        lines = ["snr_db,scheme,nmse_channel,nmse_aoa"]
        for scheme in spec.schemes:
            for row in tables[scheme].rows:
                lines.append(f"{repr(float(row.snr_db))},{scheme},"
                             f"{repr(row.nmse_channel)},{repr(row.nmse_aoa)}")
        written.append(path)
        _write_lines(path, lines)

        path = os.path.join(spec.output_dir, "aoa_trajectory.csv")
        snr0 = spec.sim.snr_grid_db[0]
        first = spec.schemes[0]
        true_phi = tables[first].trajectories[snr0][0]
        for scheme in spec.schemes[1:]:
            if not np.array_equal(tables[scheme].trajectories[snr0][0], true_phi):
                raise RuntimeError("designated-trial truths diverged across schemes")
        lines = ["block,true_phi_rad," + ",".join(spec.schemes)]
        for t in range(true_phi.size):
            cells = [str(t + 1), repr(float(true_phi[t]))]
            cells += [repr(float(tables[s].trajectories[snr0][1][t]))
                      for s in spec.schemes]
            lines.append(",".join(cells))
        written.append(path)
        _write_lines(path, lines)

        path = os.path.join(spec.output_dir, "se_vs_snr.csv")
        lines = ["snr_db,scheme,mean_se_bits"]
        for scheme in spec.schemes:
            for row in tables[scheme].rows:
                lines.append(f"{repr(float(row.snr_db))},{scheme},"
                             f"{repr(row.mean_se)}")
        written.append(path)
        _write_lines(path, lines)

        path = os.path.join(spec.output_dir, "manifest.txt")
        written.append(path)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(spec_to_ini(spec))
    except OSError as exc:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="track",
        description="Simulate MAP tracking of a mobile link through a "
                    "transmitting surface and export the results as CSV.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the experiment in a config file")
    run_p.add_argument("config_path")
    run_p.add_argument("--out", help="output directory (overrides config and "
                       f"the {OUT_DIR_ENV} environment variable)")
    run_p.add_argument("--seed", type=int, help="override the master seed")
    run_p.add_argument("--trials", type=int, help="override the trial count")
    run_p.add_argument("--threads", type=int, default=1,
                       help="worker processes for the Monte Carlo sweep")

    def_p = sub.add_parser("defaults", help="print the resolved default config")
    def_p.add_argument("--kind", choices=EXPERIMENT_KINDS, default="nmse_vs_snr")

    args = parser.parse_args(argv)

    if args.command == "defaults":
        sys.stdout.write(spec_to_ini(default_spec(args.kind)))
        return 0

    try:
        spec = parse_config(args.config_path)
        sim_overrides = {}
        if args.seed is not None:
            sim_overrides["master_seed"] = args.seed
        if args.trials is not None:
            sim_overrides["num_trials"] = args.trials
        if sim_overrides:
            spec.sim = variant(spec.sim, **sim_overrides)
        out_dir = args.out or os.environ.get(OUT_DIR_ENV) or spec.output_dir
        spec.output_dir = out_dir
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run_experiment(spec, n_workers=max(1, args.threads))


if __name__ == "__main__":
    sys.exit(main())
