"""Stationary intracavity and propagating fields of the driven cavity.

Degenerate operation (pump locked to twice the seed frequency) obeys the
single-mode mean-field equation

    tau * da/dt = -(1j*tau*delta + gamma) * a + gb * conj(a) + sqrt(2*gamma_in) * a_in

with gb = pump_ratio * gamma.  Splitting a into real and imaginary parts turns
the stationarity condition into a 2x2 real linear system whose determinant
gamma^2 * (1 - r^2) + (tau*delta)^2 is strictly positive below threshold, so
the steady state is unique and solved exactly here (no iteration).  The
equivalent amplitude/phase form of the stationarity condition is kept as an
independent residual check, see :func:`polar_residual`.

When the seed is scanned against a pump held at 2 * (cavity resonance +
offset), an idler at the mirror frequency builds up and the pair obeys two
coupled equations; :func:`nondegenerate_steady_state` solves the resulting
2x2 complex linear system in (a, conj(a_i)).  For a centered pump (offset 0)
the transmitted amplitudes have a closed form, :func:`analytic_outputs`,
which serves as an oracle for the general solver.

Propagating fields follow from the boundary conditions

    a_out = sqrt(2*gamma_c) * a
    a_ref = -a_in + sqrt(2*gamma_in) * a
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    CavityParams,
    DegeneratePhaseError,
    Drive,
    ParameterError,
    ThresholdError,
)


@dataclass(frozen=True)
class IntracavityState:
    """Complex signal and idler amplitudes in a tagged rotating frame."""

    a: complex | np.ndarray
    a_i: complex | np.ndarray = 0.0 + 0.0j
    frame: str = "seed"


@dataclass(frozen=True)
class OutputFields:
    """Propagating fields created at the two cavity ports."""

    a_out: complex | np.ndarray
    a_ref: complex | np.ndarray
    a_i_out: complex | np.ndarray = 0.0 + 0.0j


def _require_lossy(gamma: float) -> None:
    if not gamma > 0.0:
        raise ParameterError("cavity has zero total loss; gamma must be > 0")


def empty_cavity_output(delta, params: CavityParams, a_in: float = 1.0):
    """Transmitted amplitude of the bare (pump-off) cavity.

    2 * sqrt(gamma_c * gamma_in) * a_in / (gamma + 1j * tau * delta); a
    Lorentzian of half-width gamma in tau*delta.
    """
    rates = params.rates
    _require_lossy(rates.gamma)
    td = params.tau_seconds * np.asarray(delta, dtype=float)
    num = 2.0 * math.sqrt(rates.gamma_c * rates.gamma_in) * a_in
    out = num / (rates.gamma + 1j * td)
    return complex(out) if np.isscalar(delta) else out


def _degenerate_amplitude(tau_delta, drive: Drive, gamma: float, gamma_in: float):
    """Closed-form unique steady state of the degenerate equation.

    Derived by Cramer's rule on the real/imaginary split; equivalent form
    a = (conj(D) * F + gb * conj(F)) / det with D = gamma + 1j*tau*delta.
    """
    r = drive.pump_ratio
    if r >= 1.0:
        raise ThresholdError(f"pump_ratio {r} is at or above threshold")
    gb = r * gamma
    forcing = math.sqrt(2.0 * gamma_in) * drive.seed_input()
    det = gamma * gamma * (1.0 - r * r) + tau_delta * tau_delta
    assert np.all(det > 0.0), "sub-threshold determinant must be positive"
    return ((gamma - 1j * tau_delta) * forcing + gb * forcing.conjugate()) / det


def degenerate_steady_state(
    delta, drive: Drive, params: CavityParams
) -> IntracavityState:
    """Unique stationary field with the pump at exactly twice the seed frequency.

    Parameters
    ----------
    delta : float or ndarray
        Cavity-seed detuning(s) [rad/s], convention delta = omega_c - omega.
    drive : Drive
        Pump ratio and seed amplitude/phase.
    params : CavityParams
        Cavity under test.
    """
    rates = params.rates
    _require_lossy(rates.gamma)
    td = params.tau_seconds * np.asarray(delta, dtype=float)
    a = _degenerate_amplitude(td, drive, rates.gamma, rates.gamma_in)
    if np.isscalar(delta):
        return IntracavityState(a=complex(a), a_i=0.0 + 0.0j, frame="seed")
    return IntracavityState(a=a, a_i=np.zeros_like(a), frame="seed")


def polar_residual(
    state: IntracavityState, delta: float, drive: Drive, params: CavityParams
) -> tuple[float, float]:
    """Amplitude/phase stationarity residuals at a candidate state.

    Evaluates the two real conditions obtained by writing the stationary field
    as a = alpha * exp(-1j*phi):

        r1 = -gamma*alpha + gb*alpha*cos(2*phi) + sqrt(2*gamma_in)*A_in*cos(phi - varphi)
        r2 = -tau*delta*alpha + gb*alpha*sin(2*phi) + sqrt(2*gamma_in)*A_in*sin(phi - varphi)

    Both vanish at any true steady state, independently of how it was found.
    """
    a = complex(state.a)
    alpha = abs(a)
    if alpha == 0.0:
        raise DegeneratePhaseError("polar phase undefined for a zero field")
    phi = -cmath.phase(a)
    rates = params.rates
    gb = drive.pump_ratio * rates.gamma
    td = params.tau_seconds * delta
    coupling = math.sqrt(2.0 * rates.gamma_in) * drive.seed_amplitude
    varphi = drive.seed_phase_rad
    r1 = -rates.gamma * alpha + gb * alpha * math.cos(2 * phi) + coupling * math.cos(phi - varphi)
    r2 = -td * alpha + gb * alpha * math.sin(2 * phi) + coupling * math.sin(phi - varphi)
    return (r1, r2)


def nondegenerate_steady_state(
    delta, drive: Drive, params: CavityParams
) -> IntracavityState:
    """Stationary signal/idler pair for a pump held near twice the resonance.

    The idler detuning follows from energy conservation,
    delta_i = -2*pump_offset - delta.  Solves

        (1j*tau*delta + gamma) * a - gb * conj(a_i) = sqrt(2*gamma_in) * a_in
        (gamma - 1j*tau*delta_i) * conj(a_i) = gb * a

    as a linear system in (a, conj(a_i)); the idler is conjugated back on
    return.  The system cannot be singular below threshold (each diagonal
    factor has modulus >= gamma > gb).
    """
    rates = params.rates
    _require_lossy(rates.gamma)
    r = drive.pump_ratio
    if r >= 1.0:
        raise ThresholdError(f"pump_ratio {r} is at or above threshold")
    gb = r * rates.gamma
    tau = params.tau_seconds
    td = tau * np.asarray(delta, dtype=float)
    td_i = tau * (-2.0 * drive.pump_offset_rad_per_s) - td
    forcing = math.sqrt(2.0 * rates.gamma_in) * drive.seed_input()

    d_sig = 1j * td + rates.gamma
    d_idl = rates.gamma - 1j * td_i
    det = d_sig * d_idl - gb * gb
    assert np.all(np.abs(det) > 0.0), "nondegenerate system must be regular"
    a = d_idl * forcing / det
    a_i_conj = gb * forcing / det
    a_i = np.conjugate(a_i_conj)
    if np.isscalar(delta):
        return IntracavityState(a=complex(a), a_i=complex(a_i), frame="seed")
    return IntracavityState(a=a, a_i=a_i, frame="seed")


def analytic_outputs(delta, drive: Drive, params: CavityParams):
    """Closed-form transmitted signal/idler amplitudes for a centered pump.

    Valid only for pump_offset == 0 (so delta_i = -delta):

        A_out   = 2*sqrt(gamma_c*gamma_in) * a_in
                  / (1j*tau*delta + gamma - gb^2 / (1j*tau*delta + gamma))
        A_i_out = 2*sqrt(gamma_c*gamma_in) * gb * conj(a_in)
                  / ((gamma - 1j*tau*delta)^2 - gb^2)

    Returns
    -------
    (a_out, a_i_out) : complex or ndarray pair
    """
    if drive.pump_offset_rad_per_s != 0.0:
        raise ParameterError(
            "closed-form outputs require a centered pump (offset 0); "
            "use nondegenerate_steady_state for a detuned pump"
        )
    rates = params.rates
    _require_lossy(rates.gamma)
    r = drive.pump_ratio
    gb = r * rates.gamma
    td = params.tau_seconds * np.asarray(delta, dtype=float)
    front = 2.0 * math.sqrt(rates.gamma_c * rates.gamma_in)
    a_in = drive.seed_input()

    d = 1j * td + rates.gamma
    a_out = front * a_in / (d - gb * gb / d)
    a_i_out = front * gb * a_in.conjugate() / ((rates.gamma - 1j * td) ** 2 - gb * gb)
    if np.isscalar(delta):
        return complex(a_out), complex(a_i_out)
    return a_out, a_i_out


def output_fields(
    state: IntracavityState, drive: Drive, params: CavityParams
) -> OutputFields:
    """Apply the port boundary conditions to an intracavity state."""
    rates = params.rates
    root_c = math.sqrt(2.0 * rates.gamma_c)
    root_in = math.sqrt(2.0 * rates.gamma_in)
    a_in = drive.seed_input()
    return OutputFields(
        a_out=root_c * state.a,
        a_ref=-a_in + root_in * state.a,
        a_i_out=root_c * state.a_i,
    )
