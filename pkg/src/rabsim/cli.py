"""Scenario runner: named experiments mapped onto the analysis layer.

Subcommands
-----------
rab-populations    |11>/|rr> population inversion under the matched drive
heatmap            |rr> population over the (V, omega) plane
gate-fidelity      time-resolved average gate fidelity for CZ or CNOT
fidelity-vs-gamma  final average fidelity across a range of decay rates

Every run writes one CSV (documented per-scenario column contract) plus a
JSON sidecar with the fully resolved parameters in angular units, the
integration step, convergence deltas and wall time.  Rates cross the CLI
boundary in cyclic units (MHz / kHz) to match how they are usually quoted;
all internal math is angular, and the conversion happens in exactly one
place (:func:`cyclic_to_angular`).

Exit codes: 0 success, 2 validation/usage error, 3 integrator or quadrature
health error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import analysis, dynamics, hilbert, models
from .analysis import QuadratureResolutionError
from .dynamics import IntegratorHealthError, TimeGrid
from .models import DriveParams, GateKind

SCENARIOS = ("rab-populations", "heatmap", "gate-fidelity", "fidelity-vs-gamma")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INTEGRATOR = 3
EXIT_IO = 4

#: Steps per fastest period used by the scenarios.  The hard ceiling is 50;
#: the default is finer because over a full gate window (~5600 fast periods)
#: the ceiling leaves ~1e-4 norm damping on the fastest eigencomponent,
#: while 400 keeps norm drift and eigenvalue negativity below 1e-8.
DEFAULT_DT_DIVISOR = 400

_TIME_FMT = "{:.12g}"


class ValidationError(ValueError):
    """One or more configuration fields failed validation."""


def cyclic_to_angular(value: float, scale: float) -> float:
    """Convert a cyclic frequency to angular units: value * scale * 2*pi.

    ``scale`` is the unit prefix (1e6 for MHz, 1e3 for kHz).  This is the
    single conversion site between CLI units and internal rad/s.
    """
    return 2.0 * math.pi * value * scale


@dataclass
class ScenarioConfig:
    """Fully resolved configuration for one scenario run."""

    scenario: str
    gate: GateKind = GateKind.CZ
    omega_m_mhz: float = 2.0
    omega_ratio: float = 7.5
    gamma_khz: float = 0.0
    v_over_om: float | None = None
    grid_n: int = 16
    dt_divisor: int = DEFAULT_DT_DIVISOR
    # heatmap extent (units of Omega_m) and cells per axis
    v_min: float = 10.0
    v_max: float = 20.0
    w_min: float = 5.0
    w_max: float = 10.0
    resolution: int = 60
    # fidelity-vs-gamma sweep: gamma_khz is the sweep maximum
    gamma_points: int = 9
    out: str = ""

    def drive_params(self) -> DriveParams:
        omega_m = cyclic_to_angular(self.omega_m_mhz, 1e6)
        omega = self.omega_ratio * omega_m
        gamma = cyclic_to_angular(self.gamma_khz, 1e3)
        if self.v_over_om is None:
            v = models.rri_condition(omega_m, omega, self.gate)
        else:
            v = self.v_over_om * omega_m
        return DriveParams(omega_m=omega_m, omega=omega, v=v, gamma=gamma, gate=self.gate)


# Per-scenario defaults where they differ from the dataclass baseline: the
# population and heatmap scenarios are decay-free, the fidelity scenarios
# use the 1.5 kHz operating point, and the gamma sweep reads gamma_khz as
# its maximum (default 2 kHz).
_SCENARIO_GAMMA_DEFAULTS = {
    "rab-populations": 0.0,
    "heatmap": 0.0,
    "gate-fidelity": 1.5,
    "fidelity-vs-gamma": 2.0,
}

_CONFIG_FILE_KEYS = {
    "gate": str,
    "omega_m_mhz": float,
    "omega_ratio": float,
    "gamma_khz": float,
    "v_over_om": float,
    "grid_n": int,
    "dt_divisor": int,
    "v_min": float,
    "v_max": float,
    "w_min": float,
    "w_max": float,
    "resolution": int,
    "gamma_points": int,
    "out": str,
}


def _read_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values: dict = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_FILE_KEYS:
            raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
        caster = _CONFIG_FILE_KEYS[key]
        try:
            values[key] = caster(value)
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rabsim",
        description="Two-atom Rydberg antiblockade and gate-fidelity scenarios.",
    )
    sub = parser.add_subparsers(dest="scenario", required=True, metavar="scenario")
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--gate", choices=["cz", "cnot"], default=None)
        p.add_argument("--omega-m-mhz", type=float, default=None,
                       help="peak Rabi amplitude, cyclic MHz (default 2)")
        p.add_argument("--omega-ratio", type=float, default=None,
                       help="modulation frequency over Omega_m (default 7.5)")
        p.add_argument("--gamma-khz", type=float, default=None,
                       help="decay rate, cyclic kHz (fidelity-vs-gamma: sweep maximum)")
        p.add_argument("--v-over-om", type=float, default=None,
                       help="override the RRI strength, units of Omega_m "
                            "(default: matched condition for the gate)")
        p.add_argument("--grid-n", type=int, default=None,
                       help="fidelity quadrature points per axis (default 16)")
        p.add_argument("--dt-divisor", type=int, default=None,
                       help=f"integration steps per fastest period (default {DEFAULT_DT_DIVISOR})")
        p.add_argument("--out", type=str, default=None, help="output CSV path")
        p.add_argument("--config", type=str, default=None,
                       help="flat key = value config file; flags override it")
    return parser


def parse_config(argv=None) -> ScenarioConfig:
    """Resolve a ScenarioConfig from argv: flags > config file > defaults."""
    args = _build_parser().parse_args(argv)
    config = ScenarioConfig(scenario=args.scenario)
    config.gamma_khz = _SCENARIO_GAMMA_DEFAULTS[args.scenario]
    config.out = args.scenario.replace("-", "_") + ".csv"

    if args.config is not None:
        for key, value in _read_config_file(args.config).items():
            if key == "gate":
                value = _parse_gate(value)
            setattr(config, key, value)
    flag_fields = ("gate", "omega_m_mhz", "omega_ratio", "gamma_khz",
                   "v_over_om", "grid_n", "dt_divisor", "out")
    for key in flag_fields:
        value = getattr(args, key)
        if value is not None:
            if key == "gate":
                value = _parse_gate(value)
            setattr(config, key, value)

    _validate(config)
    return config


def _parse_gate(value) -> GateKind:
    if isinstance(value, GateKind):
        return value
    try:
        return GateKind(str(value).lower())
    except ValueError:
        raise ValidationError(f"gate must be 'cz' or 'cnot', got {value!r}") from None


def _validate(config: ScenarioConfig) -> None:
    problems = []
    if not config.omega_m_mhz > 0:
        problems.append(f"omega_m_mhz must be > 0 (got {config.omega_m_mhz})")
    if not config.omega_ratio > 0:
        problems.append(f"omega_ratio must be > 0 (got {config.omega_ratio})")
    if config.gamma_khz < 0:
        problems.append(f"gamma_khz must be >= 0 (got {config.gamma_khz})")
    if config.v_over_om is not None and config.v_over_om < 0:
        problems.append(f"v_over_om must be >= 0 (got {config.v_over_om})")
    if config.grid_n < 4:
        problems.append(f"grid_n must be >= 4 (got {config.grid_n})")
    if config.dt_divisor < dynamics.MIN_STEPS_PER_PERIOD:
        problems.append(
            f"dt_divisor must be >= {dynamics.MIN_STEPS_PER_PERIOD} (got {config.dt_divisor})"
        )
    if config.scenario == "heatmap":
        if not (0 < config.v_min < config.v_max):
            problems.append(f"need 0 < v_min < v_max (got {config.v_min}, {config.v_max})")
        if not (0 < config.w_min < config.w_max):
            problems.append(f"need 0 < w_min < w_max (got {config.w_min}, {config.w_max})")
        if config.resolution < 2:
            problems.append(f"resolution must be >= 2 (got {config.resolution})")
        if config.gamma_khz != 0.0:
            problems.append("heatmap requires gamma_khz = 0")
    if config.scenario == "fidelity-vs-gamma" and config.gamma_points < 2:
        problems.append(f"gamma_points must be >= 2 (got {config.gamma_points})")
    if not config.out:
        problems.append("out path must not be empty")
    if problems:
        raise ValidationError("invalid configuration: " + "; ".join(problems))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_TIME_FMT.format(x) for x in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read back a CSV written by this tool: (header, float matrix)."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    return header, np.array(rows)


def _write_sidecar(csv_path: Path, payload: dict) -> Path:
    sidecar = csv_path.with_suffix(".json")
    sidecar.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return sidecar


def _base_payload(config: ScenarioConfig, params: DriveParams, grid: TimeGrid | None) -> dict:
    payload = {
        "scenario": config.scenario,
        "config": {k: (v.value if isinstance(v, GateKind) else v)
                   for k, v in asdict(config).items()},
        "resolved_angular": {
            "omega_m_rad_per_s": params.omega_m,
            "omega_rad_per_s": params.omega,
            "v_rad_per_s": params.v,
            "v_over_omega_m": params.v / params.omega_m,
            "gamma_rad_per_s": params.gamma,
        },
        "gate": params.gate.value,
    }
    if grid is not None:
        payload["grid"] = {
            "dt_s": grid.dt,
            "n_steps": grid.n_steps,
            "t_end_s": grid.t_end,
            "sample_stride": grid.sample_stride,
        }
    return payload


def _run_rab_populations(config: ScenarioConfig, out: Path) -> dict:
    params = config.drive_params()
    t_end = models.gate_time(params)
    grid = TimeGrid.build(params, t_end, dt_divisor=config.dt_divisor)
    rho0 = hilbert.projector(hilbert.G1, hilbert.G1)
    traj = dynamics.propagate_density(params, rho0, grid)
    p11 = traj.basis_populations(hilbert.index_of(hilbert.G1, hilbert.G1))
    prr = traj.basis_populations(hilbert.index_of(hilbert.RYD, hilbert.RYD))
    _write_csv(out, ["t_us", "p_11", "p_rr"],
               zip(traj.times * 1e6, p11, prr))
    check = dynamics.convergence_check(
        params, rho0, grid, lambda rho: float(np.real(rho[8, 8]))
    )
    payload = _base_payload(config, params, grid)
    payload["convergence"] = {"dt_halving_delta_p_rr": check.delta, "passed": check.passed}
    payload["peak_p_rr"] = float(np.max(prr))
    return payload


def _run_heatmap(config: ScenarioConfig, out: Path) -> dict:
    params = config.drive_params()
    grid_result = analysis.sweep_heatmap(
        params,
        v_range=(config.v_min, config.v_max),
        w_range=(config.w_min, config.w_max),
        resolution=config.resolution,
        dt_divisor=config.dt_divisor,
    )
    rows = []
    for i, v in enumerate(grid_result.v_axis):
        for j, w in enumerate(grid_result.w_axis):
            rows.append((v, w, grid_result.p_rr[i, j]))
    _write_csv(out, ["v_over_om", "w_over_om", "p_rr"], rows)
    # Convergence probe at the configured operating point.
    ridge_grid = TimeGrid.build(
        params, math.pi * params.omega / params.omega_m**2, dt_divisor=config.dt_divisor
    )
    check = dynamics.convergence_check(
        params, hilbert.projector(hilbert.G1, hilbert.G1), ridge_grid,
        lambda rho: float(np.real(rho[8, 8])),
    )
    payload = _base_payload(config, params, None)
    payload["convergence"] = {"dt_halving_delta_p_rr": check.delta, "passed": check.passed}
    payload["failed_cells"] = int(np.count_nonzero(~np.isfinite(grid_result.p_rr)))
    return payload


def _run_gate_fidelity(config: ScenarioConfig, out: Path) -> dict:
    params = config.drive_params()
    t_end = models.gate_time(params)
    grid = TimeGrid.build(params, t_end, dt_divisor=config.dt_divisor)
    report = analysis.fidelity_time_series(params, grid, config.grid_n)
    _write_csv(out, ["t_us", "fbar"], zip(report.times * 1e6, report.fbar))
    payload = _base_payload(config, params, grid)
    payload["final_fbar"] = report.final_fbar
    payload["convergence"] = {"quadrature_doubling_delta": report.convergence_delta}
    payload["grid_n"] = report.grid_n
    return payload


def _run_fidelity_vs_gamma(config: ScenarioConfig, out: Path) -> dict:
    params = config.drive_params().with_gamma(0.0)
    gamma_khz_values = np.linspace(0.0, config.gamma_khz, config.gamma_points)
    gammas = [cyclic_to_angular(g, 1e3) for g in gamma_khz_values]
    points = analysis.fidelity_vs_gamma(
        params, gammas, grid_n=config.grid_n, dt_divisor=config.dt_divisor
    )
    _write_csv(out, ["gamma_khz", "fbar_final"],
               zip(gamma_khz_values, [f for _, f in points]))
    payload = _base_payload(config, params, None)
    payload["fbar_final"] = {f"{g:.6g}": f for g, f in zip(gamma_khz_values, (f for _, f in points))}
    payload["convergence"] = {"quadrature_grid_n": config.grid_n}
    return payload


_RUNNERS = {
    "rab-populations": _run_rab_populations,
    "heatmap": _run_heatmap,
    "gate-fidelity": _run_gate_fidelity,
    "fidelity-vs-gamma": _run_fidelity_vs_gamma,
}


def run_scenario(config: ScenarioConfig) -> int:
    """Execute the configured scenario, writing the CSV and JSON sidecar."""
    out = Path(config.out)
    started = time.perf_counter()
    payload = _RUNNERS[config.scenario](config, out)
    payload["wall_time_s"] = time.perf_counter() - started
    payload["csv"] = str(out)
    _write_sidecar(out, payload)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except ValidationError as exc:
        print(f"rabsim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if exc.code is not None else EXIT_VALIDATION
    try:
        return run_scenario(config)
    except ValidationError as exc:
        print(f"rabsim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"rabsim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (IntegratorHealthError, QuadratureResolutionError) as exc:
        print(f"rabsim: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except OSError as exc:
        print(f"rabsim: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
