"""Time-domain integration of the intracavity field under scan protocols.

A single complex mean-field equation in the frame rotating at half the pump
frequency covers both measurement configurations:

    tau * da/dt = -(1j*tau*delta_c(t) + gamma) * a + gb * conj(a)
                  + sqrt(2*gamma_in) * A_in * exp(-1j * phase(t))

    phase(t) = phi0 + integral of seed_offset(t') dt'

where delta_c = omega_c - omega_p/2 is the cavity detuning from half the pump
and seed_offset = omega - omega_p/2 the instantaneous seed offset.  Signal and
idler appear as counter-rotating components of the same a(t), so beat notes
and the dynamically smeared narrow feature of the seed scan emerge from one
equation.  For a constant seed at offset zero the equation reduces exactly to
the degenerate steady-state model.

The accumulated drive phase is anchored at the protocol's nominal degeneracy
crossing (seed_offset == 0) when the scan crosses it, and at the protocol
start otherwise.  Anchoring at the crossing pins the pump-seed phase seen at
degeneracy to phi0, which is what the experimental phase servo enforces; for
holds and for protocols that never reach degeneracy the choice is
inconsequential (it shifts beat phases only).

Integration is a fixed-step classical fourth-order Runge-Kutta scheme on the
dimensionless time s = t/tau.  Its fixed point under constant forcing equals
the algebraic steady state exactly, so relaxation endpoints are limited by
transient decay, not step size; step-halving agreement is the configured
convergence gate for everything else.  Piecewise-constant scanned frequencies
(the zero-order-hold model of a stepped oscillator) are handled as exact
segment boundaries snapped to the step grid.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .model import CavityParams, Drive, ParameterError
from .spectra import reference_power
from .steady_state import _require_lossy

PROTOCOL_KINDS = ("hold", "cavity_length_scan", "seed_frequency_scan")


@dataclass(frozen=True)
class ScanProtocol:
    """What is swept, over what range, for how long.

    Detunings/offsets are rad/s; the optional quantization models a stepped
    oscillator (zero-order hold on the scanned seed offset) with the step
    given in Hz; 0 means a continuous scan.
    """

    kind: str
    duration_seconds: float
    cavity_detuning_start: float = 0.0
    cavity_detuning_end: float = 0.0
    seed_offset_start: float = 0.0
    seed_offset_end: float = 0.0
    quantization_hz: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in PROTOCOL_KINDS:
            raise ParameterError(
                f"kind must be one of {PROTOCOL_KINDS}, got {self.kind!r}"
            )
        if not self.duration_seconds > 0.0:
            raise ParameterError(
                f"duration must be positive, got {self.duration_seconds}"
            )
        if self.quantization_hz < 0.0:
            raise ParameterError(
                f"quantization step must be >= 0, got {self.quantization_hz}"
            )
        if self.quantization_hz > 0.0 and self.kind != "seed_frequency_scan":
            raise ParameterError(
                "frequency quantization applies to seed_frequency_scan only"
            )
        if self.kind == "hold":
            if (
                self.cavity_detuning_start != self.cavity_detuning_end
                or self.seed_offset_start != self.seed_offset_end
            ):
                raise ParameterError("hold protocols cannot ramp anything")

    @classmethod
    def hold(
        cls,
        duration_seconds: float,
        cavity_detuning_rad_per_s: float = 0.0,
        seed_offset_rad_per_s: float = 0.0,
    ) -> "ScanProtocol":
        return cls(
            kind="hold",
            duration_seconds=duration_seconds,
            cavity_detuning_start=cavity_detuning_rad_per_s,
            cavity_detuning_end=cavity_detuning_rad_per_s,
            seed_offset_start=seed_offset_rad_per_s,
            seed_offset_end=seed_offset_rad_per_s,
        )

    @classmethod
    def cavity_length_scan(
        cls, duration_seconds: float, start_rad_per_s: float, end_rad_per_s: float
    ) -> "ScanProtocol":
        return cls(
            kind="cavity_length_scan",
            duration_seconds=duration_seconds,
            cavity_detuning_start=start_rad_per_s,
            cavity_detuning_end=end_rad_per_s,
        )

    @classmethod
    def seed_frequency_scan(
        cls,
        duration_seconds: float,
        start_rad_per_s: float,
        end_rad_per_s: float,
        quantization_hz: float = 0.0,
    ) -> "ScanProtocol":
        return cls(
            kind="seed_frequency_scan",
            duration_seconds=duration_seconds,
            seed_offset_start=start_rad_per_s,
            seed_offset_end=end_rad_per_s,
            quantization_hz=quantization_hz,
        )

    def nominal_seed_offset(self, t_seconds) -> np.ndarray:
        """Unquantized seed offset [rad/s] at the given times."""
        frac = np.asarray(t_seconds, dtype=float) / self.duration_seconds
        return self.seed_offset_start + frac * (
            self.seed_offset_end - self.seed_offset_start
        )

    def cavity_detuning(self, t_seconds) -> np.ndarray:
        """Cavity detuning from half the pump [rad/s] at the given times."""
        frac = np.asarray(t_seconds, dtype=float) / self.duration_seconds
        return self.cavity_detuning_start + frac * (
            self.cavity_detuning_end - self.cavity_detuning_start
        )


@dataclass(frozen=True)
class SolverOptions:
    """Fixed-step integrator controls.

    step_roundtrips is the RK4 step in units of the roundtrip time.
    Samples are recorded every sample_every steps (auto-derived from
    max_samples when None); trailing steps that do not fill a whole sampling
    interval are integrated but not tabulated, keeping the sample spacing
    uniform (the exact final state is always available on the trace).
    """

    step_roundtrips: float = 0.25
    sample_every: int | None = None
    max_samples: int = 100_000
    initial_state: complex | None = None

    def __post_init__(self) -> None:
        if not self.step_roundtrips > 0.0:
            raise ParameterError(
                f"step_roundtrips must be positive, got {self.step_roundtrips}"
            )
        if self.sample_every is not None and self.sample_every < 1:
            raise ParameterError("sample_every must be a positive integer")
        if self.max_samples < 2:
            raise ParameterError("max_samples must be at least 2")

    def halved(self) -> "SolverOptions":
        """Same options at half the step (doubled sampling stride keeps times)."""
        stride = None if self.sample_every is None else 2 * self.sample_every
        return replace(self, step_roundtrips=self.step_roundtrips / 2.0,
                       sample_every=stride)


@dataclass(frozen=True)
class TimeTrace:
    """Uniformly sampled trajectory and derived photocurrent.

    a is the intracavity amplitude in the half-pump rotating frame; a_out the
    transmitted amplitude; photocurrent its squared modulus.  final_state is
    the exact field at the end of integration (which may lie beyond the last
    tabulated sample if the sampling stride does not divide the step count).
    """

    t_seconds: np.ndarray
    a: np.ndarray
    a_out: np.ndarray
    photocurrent: np.ndarray
    final_state: complex
    step_roundtrips: float
    protocol: ScanProtocol
    drive: Drive
    params: CavityParams
    frame: str = "half_pump"

    def __post_init__(self) -> None:
        for name in ("t_seconds", "a", "a_out", "photocurrent"):
            getattr(self, name).flags.writeable = False

    def __len__(self) -> int:
        return int(self.t_seconds.size)

    @property
    def normalized_photocurrent(self) -> np.ndarray:
        """Photocurrent over the pump-off zero-detuning reference power."""
        reference = reference_power(self.params, self.drive.seed_amplitude)
        if reference == 0.0:
            raise ParameterError(
                "normalization undefined: zero seed or closed output port"
            )
        return self.photocurrent / reference

    def smoothed_photocurrent(self, window_samples: int) -> np.ndarray:
        """Boxcar-averaged normalized photocurrent (window in samples)."""
        i_norm = self.normalized_photocurrent
        if window_samples <= 1:
            return i_norm
        kernel = np.ones(int(window_samples)) / float(window_samples)
        return np.convolve(i_norm, kernel, mode="same")


@dataclass(frozen=True)
class FeatureMetrics:
    """Shape of the narrow feature in a seed-frequency scan trace."""

    kind: str  # "dip" or "peak"
    width_hz: float
    center_hz: float
    extreme_power: float
    background_power: float
    flat_variation: float


def _segments(protocol: ScanProtocol, tau: float, total_steps: int, h: float):
    """Split the run into (step0, step1, w0, dw_ds, phase_at_start) pieces.

    w is the dimensionless drive offset tau*seed_offset; dw_ds its rate of
    change per unit s (chirp).  Quantized scans produce one constant-w piece
    per oscillator step, boundaries snapped to the integration grid, with
    exact accumulated phases; the anchor puts zero accumulated phase on the
    nominal degeneracy crossing when the scan contains one.
    """
    w_start = tau * protocol.seed_offset_start
    w_end = tau * protocol.seed_offset_end
    # Rates follow the nominal duration so that sample times map exactly onto
    # the protocol's scanned values; the final (partial) step extrapolates.
    total_s = protocol.duration_seconds / tau

    if protocol.kind != "seed_frequency_scan" or protocol.quantization_hz == 0.0:
        dw_ds = (w_end - w_start) / total_s if total_s > 0 else 0.0
        # Anchor the accumulated phase at the nominal zero crossing.
        if dw_ds != 0.0 and (w_start == 0.0 or w_start * w_end < 0.0 or w_end == 0.0):
            s_cross = -w_start / dw_ds
            phase0 = -(w_start * s_cross + 0.5 * dw_ds * s_cross * s_cross)
        else:
            phase0 = 0.0
        return [(0, total_steps, w_start, dw_ds, phase0)]

    w_step = tau * 2.0 * math.pi * protocol.quantization_hz
    rate = (w_end - w_start) / total_s
    if rate == 0.0:
        level = w_step * round(w_start / w_step)
        return [(0, total_steps, level, 0.0, 0.0)]

    k_start = round(w_start / w_step)
    k_end = round(w_end / w_step)
    direction = 1 if k_end >= k_start else -1
    pieces = []
    step_lo = 0
    k = k_start
    while True:
        if k == k_end:
            step_hi = total_steps
        else:
            # Boundary where round(w_nom / w_step) hands over to the next level.
            edge = (k + 0.5 * direction) * w_step
            s_edge = (edge - w_start) / rate
            step_hi = min(total_steps, max(step_lo, int(round(s_edge / h))))
        if step_hi > step_lo:
            pieces.append([step_lo, step_hi, k * w_step])
        if k == k_end or step_hi >= total_steps:
            break
        step_lo = step_hi
        k += direction

    # Exact accumulated phase at piece starts; anchor inside the k == 0 piece
    # (phase is constant there), else at the start of the run.
    phases = [0.0]
    for step0, step1, level in pieces:
        phases.append(phases[-1] + level * (step1 - step0) * h)
    anchor = 0.0
    for idx, (step0, step1, level) in enumerate(pieces):
        if level == 0.0:
            anchor = phases[idx]
            break
    return [
        (step0, step1, level, 0.0, phases[idx] - anchor)
        for idx, (step0, step1, level) in enumerate(pieces)
    ]


def integrate(
    protocol: ScanProtocol,
    drive: Drive,
    params: CavityParams,
    options: SolverOptions | None = None,
) -> TimeTrace:
    """Integrate the rotating-frame field equation over a protocol.

    Parameters
    ----------
    protocol : ScanProtocol
        Hold, cavity-length scan or seed-frequency scan.
    drive : Drive
        Pump ratio and seed; phi0 is drive.seed_phase_rad.
    params : CavityParams
        Cavity under test; sets tau and the decay rates.
    options : SolverOptions, optional
        Step size, sampling and initial state (default zero field).

    Returns
    -------
    TimeTrace
    """
    options = options or SolverOptions()
    rates = params.rates
    _require_lossy(rates.gamma)
    gamma = rates.gamma
    gb = drive.pump_ratio * gamma
    tau = params.tau_seconds

    h = options.step_roundtrips
    # Relative epsilon absorbs rounding when the duration is an exact number
    # of steps expressed through tau (duration = n * h * tau).
    span = protocol.duration_seconds / tau / h
    total_steps = max(1, int(math.ceil(span * (1.0 - 1e-14))))
    if options.sample_every is not None:
        stride = options.sample_every
    else:
        stride = max(1, -(-total_steps // (options.max_samples - 1)))
    n_samples = total_steps // stride + 1

    dc0 = tau * protocol.cavity_detuning_start
    dc_slope = (
        tau * (protocol.cavity_detuning_end - protocol.cavity_detuning_start)
        / (protocol.duration_seconds / tau)
    )
    forcing = math.sqrt(2.0 * rates.gamma_in) * drive.seed_amplitude
    phi0 = drive.seed_phase_rad

    sample_s = np.empty(n_samples)
    sample_a = np.empty(n_samples, dtype=complex)
    a = complex(options.initial_state) if options.initial_state is not None else 0.0j
    sample_s[0] = 0.0
    sample_a[0] = a
    filled = 1

    scanning_cavity = dc_slope != 0.0
    coef0 = -(gamma + 1j * dc0)
    for step0, step1, w0, dw_ds, phase_start in _segments(
        protocol, tau, total_steps, h
    ):
        s0 = step0 * h
        drive_phasor = cmath.exp(-1j * (phi0 + phase_start))
        # Per-half-step drive multiplier; for a chirp it advances by a fixed
        # twiddle each half step, for constant w it is fixed.
        half_mult = cmath.exp(-1j * (w0 * h / 2.0 + dw_ds * h * h / 8.0))
        twiddle = cmath.exp(-1j * dw_ds * h * h / 4.0)
        chirped = dw_ds != 0.0
        c_mid = c_end = coef = 0.0j
        if not scanning_cavity:
            coef = c_mid = c_end = coef0
        sixth = h / 6.0
        half = h / 2.0
        for n in range(step0, step1):
            if scanning_cavity:
                s = s0 + (n - step0) * h
                coef = -(gamma + 1j * (dc0 + dc_slope * s))
                c_mid = -(gamma + 1j * (dc0 + dc_slope * (s + half)))
                c_end = -(gamma + 1j * (dc0 + dc_slope * (s + h)))
            d_mid = drive_phasor * half_mult
            if chirped:
                half_mult *= twiddle
            d_end = d_mid * half_mult
            if chirped:
                half_mult *= twiddle
            f0 = forcing * drive_phasor
            f_mid = forcing * d_mid
            f_end = forcing * d_end
            k1 = coef * a + gb * a.conjugate() + f0
            a2 = a + half * k1
            k2 = c_mid * a2 + gb * a2.conjugate() + f_mid
            a3 = a + half * k2
            k3 = c_mid * a3 + gb * a3.conjugate() + f_mid
            a4 = a + h * k3
            k4 = c_end * a4 + gb * a4.conjugate() + f_end
            a = a + sixth * (k1 + 2.0 * (k2 + k3) + k4)
            drive_phasor = d_end
            if (n + 1) % stride == 0:
                sample_s[filled] = (n + 1) * h
                sample_a[filled] = a
                filled += 1

    sample_s = sample_s[:filled]
    sample_a = sample_a[:filled]
    a_out = math.sqrt(2.0 * rates.gamma_c) * sample_a
    return TimeTrace(
        t_seconds=sample_s * tau,
        a=sample_a,
        a_out=a_out,
        photocurrent=np.abs(a_out) ** 2,
        final_state=a,
        step_roundtrips=h,
        protocol=protocol,
        drive=drive,
        params=params,
    )


def simulate_length_scan(
    protocol: ScanProtocol,
    drive: Drive,
    params: CavityParams,
    options: SolverOptions | None = None,
) -> TimeTrace:
    """Cavity-length scan trace; slow scans trace out the static spectrum."""
    if protocol.kind != "cavity_length_scan":
        raise ParameterError(
            f"expected a cavity_length_scan protocol, got {protocol.kind!r}"
        )
    return integrate(protocol, drive, params, options)


def simulate_frequency_scan(
    protocol: ScanProtocol,
    drive: Drive,
    params: CavityParams,
    options: SolverOptions | None = None,
) -> TimeTrace:
    """Seed-frequency scan trace (optionally with a stepped oscillator)."""
    if protocol.kind != "seed_frequency_scan":
        raise ParameterError(
            f"expected a seed_frequency_scan protocol, got {protocol.kind!r}"
        )
    return integrate(protocol, drive, params, options)


def dominant_beat_frequency(trace: TimeTrace) -> float | None:
    """Dominant non-DC frequency [Hz] of the photocurrent, or None.

    Hann-windowed discrete Fourier analysis with parabolic interpolation of
    the log-magnitude peak.  Returns None when the photocurrent carries no
    oscillation (pure DC within numerical noise), e.g. a pump-off hold.
    """
    i_t = trace.photocurrent
    n = i_t.size
    if n < 8:
        raise ParameterError("trace too short for spectral analysis")
    dt = float(trace.t_seconds[1] - trace.t_seconds[0])
    centered = i_t - i_t.mean()
    window = np.hanning(n)
    mag = np.abs(np.fft.rfft(centered * window))
    dc_scale = float(np.abs(np.fft.rfft(i_t * window)[0]))
    if mag[1:].size == 0:
        return None
    k = 1 + int(np.argmax(mag[1:]))
    if mag[k] <= 1e-9 * max(dc_scale, 1e-300):
        return None
    if 1 <= k < mag.size - 1 and mag[k - 1] > 0.0 and mag[k + 1] > 0.0:
        la, lb, lc = np.log(mag[k - 1 : k + 2])
        denom = la - 2.0 * lb + lc
        shift = 0.5 * (la - lc) / denom if denom != 0.0 else 0.0
    else:
        shift = 0.0
    return (k + shift) / (n * dt)


def narrow_feature(
    trace: TimeTrace,
    smoothing_samples: int = 1,
    discard_fraction: float = 0.05,
) -> FeatureMetrics:
    """Measure the narrow feature of a seed-frequency scan photocurrent.

    The trace is optionally boxcar-smoothed, the initial transient discarded,
    and time mapped to the nominal (unquantized) seed offset.  The background
    is the median level, robust against both flat wings and symmetric beat
    oscillation; the feature is the contiguous region around the extreme
    sample that stays beyond half depth, with linear interpolation at the
    crossings.  flat_variation is the relative spread over the central half
    of that region.
    """
    if trace.protocol.kind != "seed_frequency_scan":
        raise ParameterError("feature analysis expects a seed-frequency scan trace")
    i_n = trace.smoothed_photocurrent(smoothing_samples)
    n0 = int(discard_fraction * i_n.size)
    pad = max(n0, smoothing_samples)
    i_n = i_n[pad : i_n.size - max(1, smoothing_samples)]
    t = trace.t_seconds[pad : trace.t_seconds.size - max(1, smoothing_samples)]
    if i_n.size < 16:
        raise ParameterError("trace too short for feature analysis")
    offset_hz = trace.protocol.nominal_seed_offset(t) / (2.0 * math.pi)

    background = float(np.median(i_n))
    # Search the extremum near the nominal crossing (inner half of the scan).
    span = float(np.max(np.abs(offset_hz)))
    inner = np.nonzero(np.abs(offset_hz) <= 0.5 * span)[0]
    if inner.size == 0:
        inner = np.arange(i_n.size)
    i_min = inner[np.argmin(i_n[inner])]
    i_max = inner[np.argmax(i_n[inner])]
    if background - i_n[i_min] >= i_n[i_max] - background:
        kind, i_ext = "dip", int(i_min)
    else:
        kind, i_ext = "peak", int(i_max)
    extreme = float(i_n[i_ext])
    threshold = 0.5 * (background + extreme)

    def _beyond(value: float) -> bool:
        return value < threshold if kind == "dip" else value > threshold

    lo = i_ext
    while lo > 0 and _beyond(i_n[lo - 1]):
        lo -= 1
    hi = i_ext
    while hi < i_n.size - 1 and _beyond(i_n[hi + 1]):
        hi += 1
    if lo == 0 or hi == i_n.size - 1:
        raise ParameterError("feature is not resolved within the scanned range")

    def _crossing(outside: int, inside: int) -> float:
        x0, x1 = offset_hz[outside], offset_hz[inside]
        y0, y1 = i_n[outside], i_n[inside]
        return float(x0 + (threshold - y0) * (x1 - x0) / (y1 - y0))

    left = _crossing(lo - 1, lo)
    right = _crossing(hi + 1, hi)
    width = abs(right - left)
    center = 0.5 * (left + right)

    flat_lo = center - 0.25 * width
    flat_hi = center + 0.25 * width
    flat = i_n[(offset_hz >= flat_lo) & (offset_hz <= flat_hi)]
    if flat.size:
        flat_variation = float((flat.max() - flat.min()) / abs(flat.mean()))
    else:
        flat_variation = float("nan")
    return FeatureMetrics(
        kind=kind,
        width_hz=width,
        center_hz=center,
        extreme_power=extreme,
        background_power=background,
        flat_variation=flat_variation,
    )
