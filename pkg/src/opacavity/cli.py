"""Command-line entry point.

Subcommands
-----------
spectrum1   cavity-scan transmission spectrum (pump locked to the seed)
spectrum2   seed-scan spectrum with the flagged degenerate point
scan        time-domain protocol integration (hold / length scan / seed scan)
calibrate   loss, decay-rate and coupling calibration from measured numbers

Exit codes: 0 success, 1 numeric failure, 2 validation failure.  Data files
are CSV with a '#' header block carrying the resolved configuration; an
optional --figure renders the corresponding plot next to the data.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .dynamics import integrate, narrow_feature
from .model import (
    CavityParams,
    ParameterError,
    ThresholdError,
    coupling_from_threshold,
    decay_rates,
    finesse_to_loss,
)
from .report import (
    calibration_lines,
    render_spectrum_figure,
    render_trace_figure,
    write_spectrum_csv,
    write_trace_csv,
)
from .spectra import cavity_scan_spectrum, seed_scan_spectrum
from .steady_state import degenerate_steady_state, output_fields

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_VALIDATION = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opacavity",
        description="Cavity parametric-amplifier spectra and scan dynamics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_out in (
        ("spectrum1", True),
        ("spectrum2", True),
        ("scan", True),
        ("calibrate", False),
    ):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="JSON configuration file")
        cmd.add_argument(
            "--out",
            required=needs_out,
            default=None,
            help="output file (CSV for data commands, text for calibrate)",
        )
        cmd.add_argument(
            "--quiet", action="store_true", help="suppress progress messages"
        )
        if needs_out:
            cmd.add_argument(
                "--figure",
                default=None,
                help="also render a figure of the result to this path",
            )
    return parser


def _resolved_config(cfg: RunConfig) -> dict:
    resolved: dict = {
        "command": cfg.command,
        "dimensionless": cfg.dimensionless,
        "cavity": {
            "t_hr": cfg.params.t_hr,
            "t_c": cfg.params.t_c,
            "a_loss": cfg.params.a_loss,
            "tau_seconds": cfg.params.tau_seconds,
        },
        "drive": {
            "pump_ratio": cfg.drive.pump_ratio,
            "seed_amplitude": cfg.drive.seed_amplitude,
            "seed_phase_rad": cfg.drive.seed_phase_rad,
            "pump_offset_rad_per_s": cfg.drive.pump_offset_rad_per_s,
        },
        "solver": {
            "step_roundtrips": cfg.solver.step_roundtrips,
            "sample_every": cfg.solver.sample_every,
            "max_samples": cfg.solver.max_samples,
            "boxcar_samples": cfg.boxcar_samples,
        },
        "version": __version__,
    }
    if cfg.branch is not None:
        resolved["branch"] = cfg.branch
    if cfg.sweep is not None:
        resolved["sweep"] = {
            "points": len(cfg.sweep),
            "delta_rad_per_s_min": float(cfg.sweep.values[0]),
            "delta_rad_per_s_max": float(cfg.sweep.values[-1]),
        }
    if cfg.protocol is not None:
        proto = cfg.protocol
        resolved["protocol"] = {
            "kind": proto.kind,
            "duration_seconds": proto.duration_seconds,
            "cavity_detuning_start": proto.cavity_detuning_start,
            "cavity_detuning_end": proto.cavity_detuning_end,
            "seed_offset_start": proto.seed_offset_start,
            "seed_offset_end": proto.seed_offset_end,
            "quantization_hz": proto.quantization_hz,
        }
    if cfg.finesse is not None:
        resolved["finesse"] = cfg.finesse
    if cfg.threshold_power_watts is not None:
        resolved["threshold_power_watts"] = cfg.threshold_power_watts
    return resolved


def _cmd_spectrum(cfg: RunConfig, args) -> int:
    if cfg.command == "spectrum1":
        spectrum = cavity_scan_spectrum(cfg.sweep, cfg.drive, cfg.params)
    else:
        spectrum = seed_scan_spectrum(cfg.sweep, cfg.drive, cfg.params, cfg.branch)
    if not np.all(np.isfinite(spectrum.p_norm)):
        print("numeric failure: non-finite power in spectrum", file=sys.stderr)
        return EXIT_NUMERIC
    write_spectrum_csv(args.out, spectrum, cfg.command, _resolved_config(cfg))
    if args.figure:
        render_spectrum_figure(args.figure, spectrum)
    if not args.quiet:
        print(f"wrote {len(spectrum)} points to {args.out}")
    return EXIT_OK


def _cmd_scan(cfg: RunConfig, args) -> int:
    trace = integrate(cfg.protocol, cfg.drive, cfg.params, cfg.solver)
    if not np.all(np.isfinite(trace.photocurrent)):
        print("numeric failure: non-finite photocurrent", file=sys.stderr)
        return EXIT_NUMERIC

    summary: dict[str, float] = {
        "final_photocurrent": float(abs(trace.final_state) ** 2
                                    * 2.0 * decay_rates(cfg.params).gamma_c)
    }
    proto = cfg.protocol
    if proto.kind == "hold" and proto.seed_offset_start == 0.0:
        state = degenerate_steady_state(
            proto.cavity_detuning_start, cfg.drive, cfg.params
        )
        predicted = abs(output_fields(state, cfg.drive, cfg.params).a_out) ** 2
        summary["steady_state_photocurrent"] = float(predicted)
    if proto.kind == "seed_frequency_scan":
        try:
            metrics = narrow_feature(trace, smoothing_samples=cfg.boxcar_samples)
            summary["feature_width_hz"] = metrics.width_hz
            summary["feature_center_hz"] = metrics.center_hz
            summary["feature_flat_variation"] = metrics.flat_variation
            summary["feature_background"] = metrics.background_power
            summary["feature_extreme"] = metrics.extreme_power
        except ParameterError:
            pass  # feature not resolved; the raw trace is still the answer
    write_trace_csv(args.out, trace, _resolved_config(cfg), summary)
    if args.figure:
        render_trace_figure(args.figure, trace)
    if not args.quiet:
        print(f"wrote {len(trace)} samples to {args.out}")
    return EXIT_OK


def _cmd_calibrate(cfg: RunConfig, args) -> int:
    params = cfg.params
    report: dict[str, float] = {}
    if cfg.finesse is not None:
        total_loss = finesse_to_loss(cfg.finesse)
        report["finesse"] = cfg.finesse
        report["total_roundtrip_loss"] = total_loss
        inferred = total_loss - params.t_hr - params.t_c
        if inferred <= 0.0:
            print(
                "validation failure: finesse-implied loss is below the mirror "
                "transmissivities alone",
                file=sys.stderr,
            )
            return EXIT_VALIDATION
        report["internal_loss_inferred"] = inferred
        params = CavityParams(
            t_hr=params.t_hr,
            t_c=params.t_c,
            a_loss=inferred,
            tau_seconds=params.tau_seconds,
        )
    rates = decay_rates(params)
    report["gamma_in"] = rates.gamma_in
    report["gamma_c"] = rates.gamma_c
    report["gamma_l"] = rates.gamma_l
    report["gamma"] = rates.gamma
    if cfg.threshold_power_watts is not None:
        beta_th = math.sqrt(cfg.threshold_power_watts)
        report["threshold_power_watts"] = cfg.threshold_power_watts
        report["threshold_amplitude_sqrt_watts"] = beta_th
        report["coupling_per_sqrt_watt"] = coupling_from_threshold(
            rates.gamma, beta_th
        )
    lines = calibration_lines(report)
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        if not args.quiet:
            print(f"wrote calibration report to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if args.command in ("spectrum1", "spectrum2"):
            return _cmd_spectrum(cfg, args)
        if args.command == "scan":
            return _cmd_scan(cfg, args)
        return _cmd_calibrate(cfg, args)
    except (ParameterError, ThresholdError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
