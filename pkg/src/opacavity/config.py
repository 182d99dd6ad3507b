"""JSON run-configuration parsing with aggregated validation.

Every physical quantity in the configuration carries its unit in the key name
(tau_seconds, start_rad_per_s, quantization_hz, ...).  A dimensionless flag
forces tau = 1 s so rad/s values are read directly as tau*delta.  Validation
collects every problem it can find and reports them in a single error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .dynamics import ScanProtocol, SolverOptions
from .model import CavityParams, DetuningSweep, Drive

COMMANDS = ("spectrum1", "spectrum2", "scan", "calibrate")


class ConfigError(ValueError):
    """One or more configuration problems, aggregated."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__(
            "invalid configuration:\n"
            + "\n".join(f"  - {p}" for p in self.problems)
        )


@dataclass(frozen=True)
class RunConfig:
    """Fully validated inputs for one CLI run."""

    command: str
    params: CavityParams
    drive: Drive
    sweep: DetuningSweep | None
    branch: str | None
    protocol: ScanProtocol | None
    solver: SolverOptions
    dimensionless: bool
    finesse: float | None
    threshold_power_watts: float | None
    raw: dict
    boxcar_samples: int


def _number(block: dict, key: str, problems: list[str], *, required=False,
            default=None):
    if key not in block:
        if required:
            problems.append(f"missing required key {key!r}")
        return default
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{key!r} must be a number, got {value!r}")
        return default
    return float(value)


def _integer(block: dict, key: str, problems: list[str], *, required=False,
             default=None):
    if key not in block:
        if required:
            problems.append(f"missing required key {key!r}")
        return default
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, int):
        problems.append(f"{key!r} must be an integer, got {value!r}")
        return default
    return value


def _parse_cavity(raw: dict, dimensionless: bool, problems: list[str]) -> CavityParams | None:
    block = raw.get("cavity", {})
    if not isinstance(block, dict):
        problems.append("'cavity' must be an object")
        return None
    kwargs = {}
    for key in ("t_hr", "t_c", "a_loss"):
        value = _number(block, key, problems)
        if value is not None:
            kwargs[key] = value
    geometry = block.get("geometry")
    tau = _number(block, "tau_seconds", problems)
    if dimensionless:
        if tau is not None or geometry is not None:
            problems.append(
                "dimensionless mode fixes tau = 1; drop 'tau_seconds'/'geometry'"
            )
        kwargs["tau_seconds"] = 1.0
    elif geometry is not None:
        if tau is not None:
            problems.append("give either 'tau_seconds' or 'geometry', not both")
        if not isinstance(geometry, dict):
            problems.append("'geometry' must be an object")
        else:
            geo = {}
            for key, name in (
                ("mirror_spacing_m", "mirror_spacing_m"),
                ("crystal_length_m", "crystal_length_m"),
                ("crystal_index", "crystal_index"),
            ):
                value = _number(geometry, key, problems)
                if value is not None:
                    geo[name] = value
            try:
                kwargs["tau_seconds"] = CavityParams.from_geometry(**geo).tau_seconds
            except ValueError as exc:
                problems.append(f"cavity geometry: {exc}")
    elif tau is not None:
        kwargs["tau_seconds"] = tau
    else:
        kwargs["tau_seconds"] = CavityParams.default().tau_seconds
    try:
        return CavityParams(**kwargs)
    except ValueError as exc:
        problems.append(f"cavity: {exc}")
        return None


def _parse_drive(raw: dict, problems: list[str]) -> Drive | None:
    block = raw.get("drive", {})
    if not isinstance(block, dict):
        problems.append("'drive' must be an object")
        return None
    pump_power = _number(block, "pump_power_watts", problems)
    threshold_power = _number(block, "threshold_power_watts", problems)
    ratio = _number(block, "pump_ratio", problems)
    common = {}
    for key in ("seed_amplitude", "seed_phase_rad", "pump_offset_rad_per_s"):
        value = _number(block, key, problems)
        if value is not None:
            common[key] = value
    try:
        if pump_power is not None or threshold_power is not None:
            if ratio is not None:
                problems.append(
                    "give either 'pump_ratio' or the power pair, not both"
                )
                return None
            if pump_power is None or threshold_power is None:
                problems.append(
                    "absolute pump calibration needs both 'pump_power_watts' "
                    "and 'threshold_power_watts'"
                )
                return None
            return Drive.from_powers(pump_power, threshold_power, **common)
        return Drive(pump_ratio=ratio if ratio is not None else 0.0, **common)
    except ValueError as exc:
        problems.append(f"drive: {exc}")
        return None


def _parse_sweep(raw: dict, params: CavityParams | None,
                 problems: list[str]) -> DetuningSweep | None:
    block = raw.get("sweep")
    if block is None:
        problems.append("missing required block 'sweep'")
        return None
    if not isinstance(block, dict):
        problems.append("'sweep' must be an object")
        return None
    kind = block.get("kind", "symmetric")
    points = _integer(block, "points", problems, required=True)
    # Keep validating the block even when the cavity failed, so one error
    # report covers everything; a placeholder tau only scales the values.
    tau = params.tau_seconds if params is not None else 1.0

    def _in_rad(base_key: str):
        """Value given either dimensionless (tau_delta_*) or in rad/s."""
        td = _number(block, f"tau_delta_{base_key}", problems)
        rad = _number(block, f"delta_rad_per_s_{base_key}", problems)
        if td is not None and rad is not None:
            problems.append(
                f"give either 'tau_delta_{base_key}' or "
                f"'delta_rad_per_s_{base_key}', not both"
            )
            return None
        if td is not None:
            return td / tau
        return rad

    sweep = None
    try:
        if kind == "symmetric":
            max_abs = _in_rad("max")
            if max_abs is None:
                problems.append("symmetric sweep needs 'tau_delta_max' "
                                "or 'delta_rad_per_s_max'")
            elif points is not None:
                sweep = DetuningSweep.symmetric(max_abs, points)
        elif kind == "linear":
            start = _in_rad("start")
            stop = _in_rad("stop")
            if start is None or stop is None:
                problems.append("linear sweep needs start and stop detunings")
            elif points is not None:
                sweep = DetuningSweep.linear(start, stop, points)
        else:
            problems.append(f"unknown sweep kind {kind!r}")
    except ValueError as exc:
        problems.append(f"sweep: {exc}")
    return sweep if params is not None else None


def _parse_protocol(raw: dict, params: CavityParams | None,
                    problems: list[str]) -> ScanProtocol | None:
    block = raw.get("protocol")
    if block is None:
        problems.append("missing required block 'protocol'")
        return None
    if not isinstance(block, dict):
        problems.append("'protocol' must be an object")
        return None
    kind = block.get("kind")
    duration_s = _number(block, "duration_seconds", problems)
    duration_rt = _number(block, "duration_roundtrips", problems)
    if duration_s is not None and duration_rt is not None:
        problems.append(
            "give either 'duration_seconds' or 'duration_roundtrips', not both"
        )
        return None
    if duration_s is None and duration_rt is None:
        problems.append("protocol needs a duration")
        return None
    if duration_rt is not None:
        if params is None:
            return None
        duration_s = duration_rt * params.tau_seconds
    try:
        if kind == "hold":
            return ScanProtocol.hold(
                duration_s,
                cavity_detuning_rad_per_s=_number(
                    block, "cavity_detuning_rad_per_s", problems, default=0.0),
                seed_offset_rad_per_s=_number(
                    block, "seed_offset_rad_per_s", problems, default=0.0),
            )
        if kind == "cavity_length_scan":
            start = _number(block, "start_rad_per_s", problems, required=True)
            end = _number(block, "end_rad_per_s", problems, required=True)
            if start is None or end is None:
                return None
            return ScanProtocol.cavity_length_scan(duration_s, start, end)
        if kind == "seed_frequency_scan":
            start = _number(block, "start_rad_per_s", problems, required=True)
            end = _number(block, "end_rad_per_s", problems, required=True)
            if start is None or end is None:
                return None
            return ScanProtocol.seed_frequency_scan(
                duration_s, start, end,
                quantization_hz=_number(
                    block, "quantization_hz", problems, default=0.0),
            )
        problems.append(f"unknown protocol kind {kind!r}")
        return None
    except ValueError as exc:
        problems.append(f"protocol: {exc}")
        return None


def _parse_solver(raw: dict, problems: list[str]) -> tuple[SolverOptions, int]:
    block = raw.get("solver", {})
    if not isinstance(block, dict):
        problems.append("'solver' must be an object")
        return SolverOptions(), 1
    kwargs = {}
    step = _number(block, "step_roundtrips", problems)
    if step is not None:
        kwargs["step_roundtrips"] = step
    stride = _integer(block, "sample_every", problems)
    if stride is not None:
        kwargs["sample_every"] = stride
    cap = _integer(block, "max_samples", problems)
    if cap is not None:
        kwargs["max_samples"] = cap
    boxcar = _integer(block, "boxcar_samples", problems, default=1)
    if boxcar is None or boxcar < 1:
        if boxcar is not None:
            problems.append("'boxcar_samples' must be a positive integer")
        boxcar = 1
    try:
        return SolverOptions(**kwargs), boxcar
    except ValueError as exc:
        problems.append(f"solver: {exc}")
        return SolverOptions(), boxcar


def load_config(path: str | Path, command: str) -> RunConfig:
    """Parse and validate a JSON configuration for the given subcommand.

    Raises
    ------
    ConfigError
        With every detected problem listed, so a bad file is fixed in one
        round trip rather than one missing key at a time.
    """
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    problems: list[str] = []
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["top-level config must be a JSON object"])

    dimensionless = raw.get("dimensionless", False)
    if not isinstance(dimensionless, bool):
        problems.append("'dimensionless' must be a boolean")
        dimensionless = False

    params = _parse_cavity(raw, dimensionless, problems)
    drive = _parse_drive(raw, problems)
    solver, boxcar = _parse_solver(raw, problems)

    sweep = None
    protocol = None
    branch = None
    finesse = None
    threshold_power = None

    if command in ("spectrum1", "spectrum2"):
        sweep = _parse_sweep(raw, params, problems)
    if command == "spectrum2":
        branch = raw.get("branch")
        if branch not in ("plus", "minus"):
            problems.append(
                f"'branch' must be \"plus\" or \"minus\", got {branch!r}"
            )
    if command == "scan":
        protocol = _parse_protocol(raw, params, problems)
    if command == "calibrate":
        finesse = _number(raw, "finesse", problems)
        threshold_power = _number(raw, "threshold_power_watts", problems)
        if finesse is None and threshold_power is None:
            problems.append(
                "calibrate needs 'finesse' and/or 'threshold_power_watts'"
            )
        if finesse is not None and not finesse > 1.0:
            problems.append(f"'finesse' must exceed 1, got {finesse}")
        if threshold_power is not None and not threshold_power > 0.0:
            problems.append(
                f"'threshold_power_watts' must be positive, got {threshold_power}"
            )

    if problems:
        raise ConfigError(problems)
    assert params is not None and drive is not None
    return RunConfig(
        command=command,
        params=params,
        drive=drive,
        sweep=sweep,
        branch=branch,
        protocol=protocol,
        solver=solver,
        dimensionless=dimensionless,
        finesse=finesse,
        threshold_power_watts=threshold_power,
        raw=raw,
        boxcar_samples=boxcar,
    )
