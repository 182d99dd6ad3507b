"""Deterministic tabular output and optional figure rendering.

CSV files open with a '#'-prefixed header block that records the fully
resolved configuration for provenance, then a plain header row and data rows.
Floats are written with 17 significant digits in lowercase scientific
notation so identical configurations produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dynamics import TimeTrace
from .spectra import Spectrum

_FLOAT_FMT = "{:.16e}"


def format_float(value: float) -> str:
    return _FLOAT_FMT.format(float(value))


def _header_lines(command: str, resolved_config: dict) -> list[str]:
    return [
        f"# opacavity {command}",
        "# config: " + json.dumps(resolved_config, sort_keys=True),
    ]


def write_spectrum_csv(
    path: str | Path, spectrum: Spectrum, command: str, resolved_config: dict
) -> None:
    lines = _header_lines(command, resolved_config)
    if spectrum.case == 2:
        lines.append("tau_delta,delta_rad_s,p_norm,is_degenerate")
        for td, d, p, flag in zip(
            spectrum.tau_delta, spectrum.delta, spectrum.p_norm,
            spectrum.degenerate_mask,
        ):
            lines.append(
                f"{format_float(td)},{format_float(d)},{format_float(p)},"
                f"{1 if flag else 0}"
            )
    else:
        lines.append("tau_delta,delta_rad_s,p_norm")
        for td, d, p in zip(spectrum.tau_delta, spectrum.delta, spectrum.p_norm):
            lines.append(f"{format_float(td)},{format_float(d)},{format_float(p)}")
    _write_lines(path, lines)


def write_trace_csv(
    path: str | Path,
    trace: TimeTrace,
    resolved_config: dict,
    summary: dict[str, float],
) -> None:
    lines = _header_lines("scan", resolved_config)
    lines.append("t_seconds,re_a,im_a,photocurrent")
    for t, a, i_t in zip(trace.t_seconds, trace.a, trace.photocurrent):
        lines.append(
            f"{format_float(t)},{format_float(a.real)},{format_float(a.imag)},"
            f"{format_float(i_t)}"
        )
    for key in sorted(summary):
        lines.append(f"# summary {key}={format_float(summary[key])}")
    _write_lines(path, lines)


def calibration_lines(report: dict[str, float]) -> list[str]:
    return [f"{key}={format_float(value)}" for key, value in report.items()]


def _write_lines(path: str | Path, lines: list[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def render_spectrum_figure(path: str | Path, spectrum: Spectrum) -> None:
    """Save a figure of the normalized spectrum next to its data file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.plot(spectrum.tau_delta, spectrum.p_norm, lw=1.2, color="tab:blue")
    flagged = spectrum.degenerate_mask
    if np.any(flagged):
        ax.plot(
            spectrum.tau_delta[flagged],
            spectrum.p_norm[flagged],
            "o",
            ms=5,
            color="tab:red",
            label="degenerate point",
        )
        ax.legend(frameon=False)
    label = "cavity scan" if spectrum.case == 1 else f"seed scan ({spectrum.branch})"
    ax.set_title(f"{label}, pump ratio {spectrum.drive.pump_ratio:g}")
    ax.set_xlabel(r"$\tau\,\Delta$")
    ax.set_ylabel("normalized output power")
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def render_trace_figure(path: str | Path, trace: TimeTrace) -> None:
    """Save a photocurrent-versus-time figure for a scan trace."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.plot(trace.t_seconds, trace.normalized_photocurrent, lw=0.8,
            color="tab:blue")
    ax.set_title(f"{trace.protocol.kind}, pump ratio {trace.drive.pump_ratio:g}")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("normalized photocurrent")
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
