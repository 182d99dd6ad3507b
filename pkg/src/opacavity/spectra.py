"""Normalized transmission spectra over detuning sweeps.

Two measurement configurations are supported:

* cavity scan (case 1): pump locked to exactly twice the seed frequency, the
  cavity length swept.  Every sweep point is the exact degenerate steady
  state; phase-sensitive gain carves a dip (out-of-phase seed) or a peak
  (in-phase seed) into the bare Lorentzian and, at higher pump, splits the
  line into two maxima.

* seed scan (case 2): cavity and pump held, seed frequency swept.  Away from
  the degeneracy point the recorded power is the incoherent sum of signal and
  idler transmissions; the single degenerate sample keeps the phase-sensitive
  value, producing a delta-like discontinuity.  That sample is emitted as
  exactly one flagged point, never smeared over the grid; the time-resolved
  smearing seen in experiments belongs to the dynamics module.

All powers are normalized to the pump-off transmission at zero detuning,
computed analytically (never from a grid maximum).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import CavityParams, DetuningSweep, Drive, ParameterError
from .steady_state import _degenerate_amplitude, _require_lossy

BRANCHES = ("plus", "minus")


@dataclass(frozen=True)
class Spectrum:
    """Ordered sweep of normalized output powers.

    delta and tau_delta are the physical and dimensionless detuning columns;
    p_norm is the output power normalized to the pump-off zero-detuning
    reference; degenerate_mask flags the single exactly-degenerate sample
    (case 2 only).
    """

    delta: np.ndarray
    tau_delta: np.ndarray
    p_norm: np.ndarray
    degenerate_mask: np.ndarray
    case: int
    branch: str | None
    drive: Drive
    params: CavityParams

    def __post_init__(self) -> None:
        if np.any(self.p_norm < 0.0):
            raise ParameterError("normalized power must be non-negative")
        flagged = int(np.count_nonzero(self.degenerate_mask))
        if flagged > 1 or (flagged and self.case != 2):
            raise ParameterError(
                "at most one degenerate point, and only in a seed scan"
            )
        for name in ("delta", "tau_delta", "p_norm", "degenerate_mask"):
            getattr(self, name).flags.writeable = False

    def __len__(self) -> int:
        return int(self.delta.size)


@dataclass(frozen=True)
class SplittingReport:
    """Dip/peak structure extracted from a cavity-scan spectrum.

    When has_splitting is False the spectrum is single-peaked (or monotone)
    and only peak_detuning/peak_power are filled in.  Interpolated positions
    come from a three-point quadratic fit around the discrete extrema.
    symmetry_defect combines the dip-centering and peak-imbalance errors in
    grid-step / relative-power units.
    """

    has_splitting: bool
    dip_detuning: float | None = None
    dip_power: float | None = None
    left_peak_detuning: float | None = None
    left_peak_power: float | None = None
    right_peak_detuning: float | None = None
    right_peak_power: float | None = None
    symmetry_defect: float | None = None
    peak_detuning: float | None = None
    peak_power: float | None = None


def reference_power(params: CavityParams, a_in: float = 1.0) -> float:
    """Pump-off transmitted power at zero detuning, |2*sqrt(gc*gin)*A/gamma|^2."""
    rates = params.rates
    _require_lossy(rates.gamma)
    amplitude = 2.0 * math.sqrt(rates.gamma_c * rates.gamma_in) * a_in / rates.gamma
    return amplitude * amplitude


def _require_two_ports(params: CavityParams) -> None:
    rates = params.rates
    if rates.gamma_in == 0.0 or rates.gamma_c == 0.0:
        raise ParameterError(
            "normalized spectra need both ports coupled (t_hr > 0 and t_c > 0)"
        )


def cavity_scan_spectrum(
    sweep: DetuningSweep, drive: Drive, params: CavityParams
) -> Spectrum:
    """Normalized transmission vs cavity detuning at fixed pump-seed phase.

    The pump is locked to exactly twice the seed frequency for the whole
    sweep, so every point is a degenerate steady state and the pump offset is
    irrelevant.  Requires a seed (seed_amplitude > 0) to normalize against.
    """
    rates = params.rates
    _require_lossy(rates.gamma)
    _require_two_ports(params)
    if not drive.seed_amplitude > 0.0:
        raise ParameterError("cavity scan requires a positive seed amplitude")
    td = sweep.tau_delta(params.tau_seconds)
    a = _degenerate_amplitude(td, drive, rates.gamma, rates.gamma_in)
    power = 2.0 * rates.gamma_c * np.abs(a) ** 2
    p_norm = power / reference_power(params, drive.seed_amplitude)
    return Spectrum(
        delta=sweep.values.copy(),
        tau_delta=td,
        p_norm=p_norm,
        degenerate_mask=np.zeros(len(sweep), dtype=bool),
        case=1,
        branch=None,
        drive=drive,
        params=params,
    )


def seed_scan_spectrum(
    sweep: DetuningSweep, drive: Drive, params: CavityParams, branch: str
) -> Spectrum:
    """Total normalized output power vs seed detuning at fixed cavity and pump.

    The continuous branch sums the signal and idler transmissions,

        |gamma / (1j*u + gamma - gb^2/(1j*u + gamma))|^2
            + |gamma*gb / ((gamma - 1j*u)^2 - gb^2)|^2,    u = tau*delta,

    while the exactly degenerate sample (delta == 0, centered pump) is
    replaced by the phase-sensitive value gamma^2/(gamma -+ gb)^2 selected by
    branch: "plus" is the amplifier (in-phase seed), "minus" the deamplifier
    (out-of-phase seed).  Warns when the sweep lacks the exact zero sample.
    """
    if branch not in BRANCHES:
        raise ParameterError(f"branch must be one of {BRANCHES}, got {branch!r}")
    if drive.pump_offset_rad_per_s != 0.0:
        raise ParameterError(
            "seed-scan spectrum uses the centered-pump closed form; "
            "pump_offset_rad_per_s must be 0"
        )
    rates = params.rates
    _require_lossy(rates.gamma)
    _require_two_ports(params)
    gamma = rates.gamma
    gb = drive.pump_ratio * gamma
    td = sweep.tau_delta(params.tau_seconds)

    d = 1j * td + gamma
    signal_term = np.abs(gamma / (d - gb * gb / d)) ** 2
    idler_term = np.abs(gamma * gb / ((gamma - 1j * td) ** 2 - gb * gb)) ** 2
    p_norm = signal_term + idler_term

    mask = sweep.values == 0.0
    if np.any(mask):
        sign = -1.0 if branch == "plus" else 1.0
        p_norm = np.where(mask, (gamma / (gamma + sign * gb)) ** 2, p_norm)
    else:
        warnings.warn(
            "sweep has no exact zero-detuning sample; the degenerate point "
            "of the seed-scan spectrum is not represented",
            stacklevel=2,
        )
    return Spectrum(
        delta=sweep.values.copy(),
        tau_delta=td,
        p_norm=p_norm,
        degenerate_mask=mask,
        case=2,
        branch=branch,
        drive=drive,
        params=params,
    )


def _parabolic_vertex(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Vertex of the parabola through three points (exact for quadratics)."""
    denom = (x[0] - x[1]) * (x[0] - x[2]) * (x[1] - x[2])
    a = (x[2] * (y[1] - y[0]) + x[1] * (y[0] - y[2]) + x[0] * (y[2] - y[1])) / denom
    if a == 0.0:
        return float(x[1]), float(y[1])
    b = (
        x[2] ** 2 * (y[0] - y[1])
        + x[1] ** 2 * (y[2] - y[0])
        + x[0] ** 2 * (y[1] - y[2])
    ) / denom
    xv = -b / (2.0 * a)
    c = y[0] - a * x[0] ** 2 - b * x[0]
    return float(xv), float(a * xv * xv + b * xv + c)


def find_splitting(spectrum: Spectrum) -> SplittingReport:
    """Locate the central dip and its two flanking maxima, if any.

    Works on the discrete samples first: the two tallest local maxima are the
    candidate peaks, and the dip is the global minimum of the samples strictly
    between them (ties broken toward smaller |delta|).  All three features are
    refined with three-point quadratic interpolation.  A monotone or
    single-peaked spectrum yields has_splitting=False with the single-peak
    location instead; that is an answer, not an error.
    """
    if len(spectrum) < 5:
        raise ParameterError("splitting analysis needs at least 5 sweep points")
    x = spectrum.delta
    y = spectrum.p_norm
    n = y.size

    def _single_peak() -> SplittingReport:
        i_pk = int(np.argmax(y))
        if 0 < i_pk < n - 1:
            pk_x, pk_y = _parabolic_vertex(x[i_pk - 1 : i_pk + 2], y[i_pk - 1 : i_pk + 2])
        else:
            pk_x, pk_y = float(x[i_pk]), float(y[i_pk])
        return SplittingReport(
            has_splitting=False, peak_detuning=pk_x, peak_power=pk_y
        )

    inner = np.arange(1, n - 1)
    is_max = (y[inner] > y[inner - 1]) & (y[inner] > y[inner + 1])
    maxima = inner[is_max]
    if maxima.size < 2:
        return _single_peak()
    order = maxima[np.argsort(y[maxima])[::-1]]
    i_left, i_right = sorted(int(i) for i in order[:2])

    between = np.arange(i_left + 1, i_right)
    y_between = y[between]
    candidates = between[y_between == y_between.min()]
    i_dip = int(candidates[np.argmin(np.abs(x[candidates]))])
    if y[i_dip] >= min(y[i_left], y[i_right]):
        return _single_peak()

    dip_x, dip_y = _parabolic_vertex(x[i_dip - 1 : i_dip + 2], y[i_dip - 1 : i_dip + 2])
    lx, ly = _parabolic_vertex(x[i_left - 1 : i_left + 2], y[i_left - 1 : i_left + 2])
    rx, ry = _parabolic_vertex(x[i_right - 1 : i_right + 2], y[i_right - 1 : i_right + 2])

    grid_step = float(np.median(np.diff(x)))
    defect = max(abs(lx + rx) / grid_step, abs(ly - ry) / max(ly, ry))
    return SplittingReport(
        has_splitting=True,
        dip_detuning=dip_x,
        dip_power=dip_y,
        left_peak_detuning=lx,
        left_peak_power=ly,
        right_peak_detuning=rx,
        right_peak_power=ry,
        symmetry_defect=defect,
    )
