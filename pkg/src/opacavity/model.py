"""Physical parameters, unit conventions and calibration helpers.

All loss quantities are fractional power losses per cavity roundtrip, so the
field decay rates are dimensionless per-roundtrip quantities:

    gamma_in = t_hr / 2      (input/back mirror)
    gamma_c  = t_c / 2       (output/coupling mirror)
    gamma_l  = a_loss / 2    (internal losses)
    gamma    = gamma_in + gamma_c + gamma_l

Detunings carry physical units (rad/s) and enter the field equations only
through the dimensionless product tau * delta, where tau is the cavity
roundtrip time.  Pump strength is expressed as the dimensionless ratio of the
pump amplitude to the parametric-oscillation threshold amplitude, so the gain
term is pump_ratio * gamma without ever needing the nonlinear coupling and the
pump amplitude separately.  An optional mapping to absolute pump power uses
amplitude proportional to sqrt(power).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Speed of light in vacuum [m/s], exact by definition.
C_VACUUM = 299792458.0

# Default cavity: two-mirror standing-wave resonator with an intracavity
# nonlinear crystal.  Internal loss is back-computed from the measured total
# roundtrip loss (4.24%) minus the two mirror transmissivities; override as
# needed.
DEFAULT_T_HR = 0.002
DEFAULT_T_C = 0.033
DEFAULT_A_LOSS = 0.0074
DEFAULT_MIRROR_SPACING_M = 0.063
DEFAULT_CRYSTAL_LENGTH_M = 0.012
DEFAULT_CRYSTAL_INDEX = 1.83  # KTP-class crystal near 1064 nm


class ParameterError(ValueError):
    """A physical parameter is outside its valid domain."""


class ThresholdError(ValueError):
    """Pump amplitude at or above the parametric-oscillation threshold."""


class DegeneratePhaseError(ValueError):
    """Polar decomposition requested for a zero-amplitude field."""


@dataclass(frozen=True)
class DecayRates:
    """Per-roundtrip field decay rates of the subharmonic cavity mode."""

    gamma_in: float
    gamma_c: float
    gamma_l: float
    gamma: float


@dataclass(frozen=True)
class CavityParams:
    """Dual-port cavity description at the subharmonic wavelength.

    Parameters
    ----------
    t_hr : float
        Power transmissivity of the back (input) mirror, in [0, 1).
    t_c : float
        Power transmissivity of the output coupling mirror, in [0, 1).
    a_loss : float
        Residual roundtrip internal power loss, in [0, 1).
    tau_seconds : float
        Cavity roundtrip time [s], > 0.
    """

    t_hr: float = DEFAULT_T_HR
    t_c: float = DEFAULT_T_C
    a_loss: float = DEFAULT_A_LOSS
    tau_seconds: float = 1.0

    def __post_init__(self) -> None:
        for name in ("t_hr", "t_c", "a_loss"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ParameterError(f"{name} must lie in [0, 1), got {value}")
        total = self.t_hr + self.t_c + self.a_loss
        if total >= 1.0:
            raise ParameterError(
                f"total roundtrip power loss must stay below 1, got {total}"
            )
        if not self.tau_seconds > 0.0:
            raise ParameterError(
                f"tau_seconds must be positive, got {self.tau_seconds}"
            )

    @classmethod
    def from_geometry(
        cls,
        mirror_spacing_m: float = DEFAULT_MIRROR_SPACING_M,
        crystal_length_m: float = DEFAULT_CRYSTAL_LENGTH_M,
        crystal_index: float = DEFAULT_CRYSTAL_INDEX,
        *,
        t_hr: float = DEFAULT_T_HR,
        t_c: float = DEFAULT_T_C,
        a_loss: float = DEFAULT_A_LOSS,
    ) -> "CavityParams":
        """Build cavity parameters with tau derived from the geometry."""
        tau = roundtrip_time(mirror_spacing_m, crystal_length_m, crystal_index)
        return cls(t_hr=t_hr, t_c=t_c, a_loss=a_loss, tau_seconds=tau)

    @classmethod
    def default(cls) -> "CavityParams":
        """The stock cavity with tau derived from the default geometry."""
        return cls.from_geometry()

    @property
    def rates(self) -> DecayRates:
        return decay_rates(self)


def decay_rates(params: CavityParams) -> DecayRates:
    """Per-roundtrip decay rates; gamma is the exact sum of the three parts."""
    gamma_in = params.t_hr / 2.0
    gamma_c = params.t_c / 2.0
    gamma_l = params.a_loss / 2.0
    return DecayRates(
        gamma_in=gamma_in,
        gamma_c=gamma_c,
        gamma_l=gamma_l,
        gamma=gamma_in + gamma_c + gamma_l,
    )


def oscillation_threshold(gamma: float, g: float) -> float:
    """Pump amplitude at which parametric gain balances total cavity loss.

    Parameters
    ----------
    gamma : float
        Total per-roundtrip decay rate, > 0.
    g : float
        Nonlinear coupling per unit pump amplitude, > 0.

    Returns
    -------
    float
        Threshold pump amplitude gamma / g in the reciprocal units of g.
    """
    if not gamma > 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if not g > 0.0:
        raise ParameterError(f"nonlinear coupling must be positive, got {g}")
    return gamma / g


def coupling_from_threshold(gamma: float, threshold_amplitude: float) -> float:
    """Inverse of :func:`oscillation_threshold`: g = gamma / threshold."""
    if not gamma > 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if not threshold_amplitude > 0.0:
        raise ParameterError(
            f"threshold amplitude must be positive, got {threshold_amplitude}"
        )
    return gamma / threshold_amplitude


def finesse_to_loss(finesse: float) -> float:
    """Total roundtrip power loss implied by a measured finesse.

    Uses the high-finesse relation loss = 2*pi / finesse.
    """
    if not finesse > 1.0:
        raise ParameterError(f"finesse must exceed 1, got {finesse}")
    return 2.0 * math.pi / finesse


def loss_to_finesse(loss: float) -> float:
    """Inverse of :func:`finesse_to_loss` on (0, 1)."""
    if not 0.0 < loss < 1.0:
        raise ParameterError(f"loss must lie in (0, 1), got {loss}")
    return 2.0 * math.pi / loss


def roundtrip_time(
    mirror_spacing_m: float,
    crystal_length_m: float = 0.0,
    crystal_index: float = 1.0,
) -> float:
    """Standing-wave cavity roundtrip time from its geometry.

    tau = 2 * (L + (n - 1) * L_crystal) / c, i.e. the crystal contributes its
    optical path in excess of the vacuum path it displaces.
    """
    if mirror_spacing_m < 0.0 or crystal_length_m < 0.0:
        raise ParameterError("lengths must be non-negative")
    if crystal_index < 1.0:
        raise ParameterError(
            f"crystal index must be >= 1, got {crystal_index}"
        )
    optical_path = mirror_spacing_m + (crystal_index - 1.0) * crystal_length_m
    return 2.0 * optical_path / C_VACUUM


@dataclass(frozen=True)
class Drive:
    """Pump and seed configuration.

    The pump phase is identically zero by convention; the seed enters with
    complex amplitude seed_amplitude * exp(-1j * seed_phase_rad) relative to
    it.  pump_ratio is the pump amplitude divided by the oscillation-threshold
    amplitude and must stay strictly below 1.  pump_offset_rad_per_s is half
    the detuning of the pump from twice the cavity resonance, i.e. the pump
    frequency is 2 * (cavity resonance + offset).
    """

    pump_ratio: float = 0.0
    seed_amplitude: float = 1.0
    seed_phase_rad: float = 0.0
    pump_offset_rad_per_s: float = 0.0
    pump_power_watts: float | None = None
    threshold_power_watts: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.pump_ratio:
            raise ParameterError(
                f"pump_ratio must be non-negative, got {self.pump_ratio}"
            )
        if self.pump_ratio >= 1.0:
            raise ThresholdError(
                "pump_ratio must stay strictly below the oscillation "
                f"threshold (1.0), got {self.pump_ratio}"
            )
        if self.seed_amplitude < 0.0:
            raise ParameterError(
                f"seed_amplitude must be non-negative, got {self.seed_amplitude}"
            )

    @classmethod
    def from_powers(
        cls,
        pump_power_watts: float,
        threshold_power_watts: float,
        *,
        seed_amplitude: float = 1.0,
        seed_phase_rad: float = 0.0,
        pump_offset_rad_per_s: float = 0.0,
    ) -> "Drive":
        """Derive pump_ratio from absolute powers via amplitude ~ sqrt(power)."""
        if not threshold_power_watts > 0.0:
            raise ParameterError(
                f"threshold power must be positive, got {threshold_power_watts}"
            )
        if pump_power_watts < 0.0:
            raise ParameterError(
                f"pump power must be non-negative, got {pump_power_watts}"
            )
        ratio = math.sqrt(pump_power_watts / threshold_power_watts)
        return cls(
            pump_ratio=ratio,
            seed_amplitude=seed_amplitude,
            seed_phase_rad=seed_phase_rad,
            pump_offset_rad_per_s=pump_offset_rad_per_s,
            pump_power_watts=pump_power_watts,
            threshold_power_watts=threshold_power_watts,
        )

    def seed_input(self) -> complex:
        """Complex seed amplitude A_in * exp(-1j * phase)."""
        return self.seed_amplitude * complex(
            math.cos(self.seed_phase_rad), -math.sin(self.seed_phase_rad)
        )


@dataclass(frozen=True)
class DetuningSweep:
    """Strictly increasing grid of cavity-seed detunings [rad/s]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ParameterError("sweep must be a non-empty 1-d sequence")
        if not np.all(np.diff(values) > 0.0):
            raise ParameterError(
                "sweep values must be strictly increasing with no duplicates"
            )
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def includes_degenerate(self) -> bool:
        """True when the exact degeneracy sample (delta == 0) is present."""
        return bool(np.any(self.values == 0.0))

    def tau_delta(self, tau_seconds: float) -> np.ndarray:
        """Dimensionless detunings tau * delta."""
        return tau_seconds * self.values

    @classmethod
    def linear(cls, start: float, stop: float, points: int) -> "DetuningSweep":
        if points < 1:
            raise ParameterError(f"points must be >= 1, got {points}")
        if points == 1:
            return cls(np.array([float(start)]))
        return cls(np.linspace(start, stop, points))

    @classmethod
    def symmetric(cls, max_abs: float, points: int) -> "DetuningSweep":
        """Grid symmetric about zero with an exact zero sample.

        points must be odd; every positive sample has an exactly negated
        partner, which keeps mirror-symmetry checks meaningful at machine
        precision.
        """
        if max_abs <= 0.0:
            raise ParameterError(f"max_abs must be positive, got {max_abs}")
        if points < 3 or points % 2 == 0:
            raise ParameterError(
                f"symmetric sweep needs an odd number of points >= 3, got {points}"
            )
        half = (points - 1) // 2
        positive = np.linspace(0.0, max_abs, half + 1)
        return cls(np.concatenate([-positive[:0:-1], positive]))

    @classmethod
    def from_tau_delta(
        cls, tau_delta_values: Sequence[float] | np.ndarray, tau_seconds: float
    ) -> "DetuningSweep":
        """Build from dimensionless tau * delta samples."""
        if not tau_seconds > 0.0:
            raise ParameterError(
                f"tau_seconds must be positive, got {tau_seconds}"
            )
        return cls(np.asarray(tau_delta_values, dtype=float) / tau_seconds)
