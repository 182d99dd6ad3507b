import dataclasses
import math

import numpy as np
import pytest

from opacavity import (
    DetuningSweep,
    ParameterError,
    ScanProtocol,
    SolverOptions,
    cavity_scan_spectrum,
    degenerate_steady_state,
    dominant_beat_frequency,
    empty_cavity_output,
    find_splitting,
    integrate,
    narrow_feature,
    simulate_frequency_scan,
    simulate_length_scan,
)
from conftest import drive


def roundtrips(params, n):
    return n * params.tau_seconds


def trimmed(trace, fraction):
    """Trace with the leading fraction of samples dropped (transient)."""
    n0 = int(fraction * len(trace))
    return dataclasses.replace(
        trace,
        t_seconds=trace.t_seconds[n0:],
        a=trace.a[n0:],
        a_out=trace.a_out[n0:],
        photocurrent=trace.photocurrent[n0:],
    )


def test_protocol_validation():
    with pytest.raises(ParameterError):
        ScanProtocol.hold(0.0)
    with pytest.raises(ParameterError):
        ScanProtocol.seed_frequency_scan(1.0, -1.0, 1.0, quantization_hz=-2.0)
    with pytest.raises(ParameterError):
        ScanProtocol(kind="wobble", duration_seconds=1.0)
    with pytest.raises(ParameterError):
        ScanProtocol(
            kind="hold", duration_seconds=1.0,
            cavity_detuning_start=0.0, cavity_detuning_end=1.0,
        )
    with pytest.raises(ParameterError):
        ScanProtocol(
            kind="cavity_length_scan", duration_seconds=1.0, quantization_hz=5.0
        )


def test_solver_options_validation():
    with pytest.raises(ParameterError):
        SolverOptions(step_roundtrips=0.0)
    with pytest.raises(ParameterError):
        SolverOptions(sample_every=0)
    halved = SolverOptions(step_roundtrips=0.5, sample_every=4).halved()
    assert halved.step_roundtrips == 0.25
    assert halved.sample_every == 8


def test_hold_relaxes_to_degenerate_steady_state(params, gamma):
    d = drive(r=0.5, phi=math.pi / 2)
    horizon = roundtrips(params, 20.0 / (gamma * 0.5))
    trace = integrate(ScanProtocol.hold(horizon), d, params,
                      SolverOptions(step_roundtrips=0.5))
    target = degenerate_steady_state(0.0, d, params).a
    assert abs(trace.final_state - target) < 1e-8


def test_hold_with_offset_seed_matches_empty_cavity_magnitude(params, gamma):
    tau = params.tau_seconds
    offset = 1.5 * gamma / tau
    d = drive(r=0.0)
    proto = ScanProtocol.hold(roundtrips(params, 4000), seed_offset_rad_per_s=offset)
    trace = integrate(proto, d, params, SolverOptions(step_roundtrips=0.5))
    tail = np.abs(trace.a[-200:])
    expected = abs(empty_cavity_output(offset, params)) / math.sqrt(2 * 0.0165)
    assert np.max(np.abs(tail - expected)) < 1e-8
    assert np.ptp(tail) < 1e-10  # constant modulus after the transient


def test_hold_with_offset_and_cavity_detuning_uses_their_difference(params, gamma):
    # effective seed-cavity detuning is delta_c - delta(seed offset)
    tau = params.tau_seconds
    offset = 2.0 * gamma / tau
    detuning = 0.5 * gamma / tau
    proto = ScanProtocol.hold(
        roundtrips(params, 4000),
        cavity_detuning_rad_per_s=detuning,
        seed_offset_rad_per_s=offset,
    )
    trace = integrate(proto, drive(r=0.0), params, SolverOptions(step_roundtrips=0.5))
    expected = abs(empty_cavity_output(detuning - offset, params)) / math.sqrt(
        2 * 0.0165
    )
    assert abs(abs(trace.final_state) - expected) < 1e-8


def test_beat_note_frequency_tracks_twice_the_offset(params, gamma):
    tau = params.tau_seconds
    d = drive(r=0.5, phi=math.pi / 2)
    estimates = {}
    for mult in (1.0, 2.0):
        offset = mult * gamma / tau
        proto = ScanProtocol.hold(roundtrips(params, 30000),
                                  seed_offset_rad_per_s=offset)
        trace = integrate(proto, d, params,
                          SolverOptions(step_roundtrips=0.5, sample_every=4))
        measured = dominant_beat_frequency(trace)
        expected = 2.0 * offset / (2.0 * math.pi)
        bin_width = 1.0 / (trace.t_seconds[-1] - trace.t_seconds[0])
        assert abs(measured - expected) < bin_width
        estimates[mult] = measured
    assert estimates[2.0] / estimates[1.0] == pytest.approx(2.0, rel=1e-3)


def test_beat_note_absent_for_pump_off_steady_hold(params):
    proto = ScanProtocol.hold(roundtrips(params, 8000))
    trace = integrate(proto, drive(r=0.0), params, SolverOptions(step_roundtrips=0.5))
    assert dominant_beat_frequency(trimmed(trace, 0.5)) is None


def test_step_halving_changes_samples_below_tolerance(params, gamma):
    d = drive(r=0.5, phi=math.pi / 4)
    proto = ScanProtocol.hold(
        roundtrips(params, 2048),
        cavity_detuning_rad_per_s=gamma / params.tau_seconds,
    )
    coarse_opts = SolverOptions(step_roundtrips=0.5, sample_every=8)
    coarse = integrate(proto, d, params, coarse_opts)
    fine = integrate(proto, d, params, coarse_opts.halved())
    assert np.array_equal(coarse.t_seconds, fine.t_seconds)
    scale = np.max(np.abs(fine.a))
    assert np.max(np.abs(coarse.a - fine.a)) < 1e-9 * scale


def test_free_decay_is_monotone(params):
    proto = ScanProtocol.hold(roundtrips(params, 2000))
    trace = integrate(
        proto,
        drive(r=0.9, phi=0.0, a_in=0.0),
        params,
        SolverOptions(step_roundtrips=0.5, sample_every=2,
                      initial_state=1.0 + 0.5j),
    )
    mags = np.abs(trace.a)
    assert np.all(np.diff(mags) < 0.0)
    assert np.all(trace.photocurrent >= 0.0)


def test_warm_start_stays_on_steady_state(params):
    d = drive(r=0.71, phi=math.pi / 2)
    target = degenerate_steady_state(0.0, d, params).a
    proto = ScanProtocol.hold(roundtrips(params, 500))
    trace = integrate(proto, d, params,
                      SolverOptions(step_roundtrips=0.25, initial_state=target))
    assert np.max(np.abs(trace.a - target)) < 1e-12 * abs(target)


def test_single_step_matches_reference_rk4_update(params, gamma):
    """Drift coefficients: one integrator step equals a hand-built RK4 step
    of the degenerate equation when the seed offset is zero."""
    tau = params.tau_seconds
    d = drive(r=0.71, phi=0.3)
    h = 0.5
    for td in (0.0, 0.7 * gamma, -3.0 * gamma):
        proto = ScanProtocol.hold(h * tau, cavity_detuning_rad_per_s=td / tau)
        trace = integrate(proto, d, params, SolverOptions(step_roundtrips=h))

        gb = d.pump_ratio * gamma
        forcing = math.sqrt(2 * 0.001) * d.seed_input()

        def rhs(field):
            return -(1j * td + gamma) * field + gb * field.conjugate() + forcing

        a = 0.0j
        k1 = rhs(a)
        k2 = rhs(a + 0.5 * h * k1)
        k3 = rhs(a + 0.5 * h * k2)
        k4 = rhs(a + h * k3)
        reference = a + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        assert trace.final_state == pytest.approx(reference, rel=1e-15, abs=1e-18)


def test_sampling_is_uniform_and_starts_at_zero(params):
    proto = ScanProtocol.hold(roundtrips(params, 1000))
    trace = integrate(proto, drive(r=0.3), params,
                      SolverOptions(step_roundtrips=0.5, sample_every=16))
    assert trace.t_seconds[0] == 0.0
    spacing = np.diff(trace.t_seconds)
    assert np.max(np.abs(spacing - spacing[0])) < 1e-20


def test_length_scan_envelope_converges_to_static_spectrum(params, gamma):
    """Sup-norm distance to the static spectrum falls monotonically with scan
    time; the slowest rate lands within 2%."""
    tau = params.tau_seconds
    d = drive(r=0.9, phi=math.pi / 2)
    span = 2.0 * gamma
    errors = []
    for per_linewidth in (125.0, 500.0, 2000.0):
        duration_rt = (2 * span / gamma) * (per_linewidth / gamma)
        proto = ScanProtocol.cavity_length_scan(
            duration_rt * tau, -span / tau, span / tau
        )
        trace = simulate_length_scan(proto, d, params,
                                     SolverOptions(step_roundtrips=0.5))
        keep = int(0.05 * len(trace))
        t = trace.t_seconds[keep:]
        i_norm = trace.normalized_photocurrent[keep:]
        deltas = trace.protocol.cavity_detuning(t)
        static = cavity_scan_spectrum(DetuningSweep(deltas), d, params).p_norm
        errors.append(float(np.max(np.abs(i_norm - static)) / np.max(static)))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.02


def test_length_scan_asymmetric_phase_displaces_envelope_dip(params, gamma):
    """An off-quadrature seed shifts the dip away from zero detuning in the
    scanned trace, matching the static spectrum's dip location."""
    tau = params.tau_seconds
    d = drive(r=0.9, phi=math.pi / 2 - 0.07)
    span = 2.0 * gamma
    duration_rt = (2 * span / gamma) * (500.0 / gamma)
    proto = ScanProtocol.cavity_length_scan(duration_rt * tau, -span / tau, span / tau)
    trace = simulate_length_scan(proto, d, params, SolverOptions(step_roundtrips=0.5))
    keep = int(0.05 * len(trace))
    i_norm = trace.normalized_photocurrent[keep:]
    deltas = trace.protocol.cavity_detuning(trace.t_seconds[keep:])
    # interior minimum of the envelope between the two envelope maxima
    static = cavity_scan_spectrum(
        DetuningSweep.symmetric(span / tau, 2001), d, params
    )
    static_dip = find_splitting(static).dip_detuning
    mid = (np.abs(deltas * tau) < gamma).nonzero()[0]
    scanned_dip = deltas[mid[np.argmin(i_norm[mid])]]
    assert abs(static_dip) > 0.05 * gamma / tau  # genuinely displaced
    assert scanned_dip == pytest.approx(static_dip, abs=0.02 * gamma / tau)


def test_length_scan_pump_off_traces_lorentzian(params, gamma):
    tau = params.tau_seconds
    span = 3.0 * gamma
    duration_rt = (2 * span / gamma) * (500.0 / gamma)
    proto = ScanProtocol.cavity_length_scan(duration_rt * tau, -span / tau, span / tau)
    trace = simulate_length_scan(proto, drive(r=0.0), params,
                                 SolverOptions(step_roundtrips=0.5))
    keep = int(0.05 * len(trace))
    td = tau * trace.protocol.cavity_detuning(trace.t_seconds[keep:])
    lorentzian = gamma**2 / (gamma**2 + td**2)
    residual = np.abs(trace.normalized_photocurrent[keep:] - lorentzian)
    assert np.max(residual) < 0.01


def test_quantized_frequency_scan_square_feature_dimensionless(unit_tau_params):
    """Stepped-oscillator scan on the tau = 1 cavity: flat bottom at the
    deamplified level, width of one quantization step."""
    params = unit_tau_params
    w_step = 5.0e-4  # tau*delta per oscillator step, well inside the linewidth
    f_step = w_step / (2 * math.pi)  # Hz with tau = 1 s
    beat_period = math.pi / w_step
    dwell = 3.0 * beat_period
    duration = 9.0 * dwell
    span = 4.5 * w_step
    proto = ScanProtocol.seed_frequency_scan(
        duration, -span, span, quantization_hz=f_step
    )
    d = drive(r=0.5, phi=math.pi / 2)
    trace = simulate_frequency_scan(
        proto, d, params, SolverOptions(step_roundtrips=1.0, sample_every=2)
    )
    dt_samples = trace.t_seconds[1] - trace.t_seconds[0]
    smoothing = int(round(beat_period / dt_samples))
    metrics = narrow_feature(trace, smoothing_samples=smoothing)
    assert metrics.kind == "dip"
    assert metrics.width_hz == pytest.approx(f_step, rel=0.25)
    assert metrics.flat_variation < 0.05
    assert metrics.extreme_power == pytest.approx(1.0 / 2.25, rel=0.02)
    assert metrics.background_power == pytest.approx(2.2222, rel=0.05)


def test_frequency_scan_pump_off_has_no_narrow_feature(unit_tau_params, gamma):
    """Without the pump the scan just traces the broad cavity line; any
    measured 'feature' spans a large fraction of the scanned range."""
    params = unit_tau_params
    span = 0.5 * gamma
    proto = ScanProtocol.seed_frequency_scan(8.0e4, -span, span)
    trace = simulate_frequency_scan(
        proto, drive(r=0.0), params, SolverOptions(step_roundtrips=0.5,
                                                   sample_every=4)
    )
    full_span_hz = 2 * span / (2 * math.pi)
    try:
        metrics = narrow_feature(trace)
    except ParameterError:
        return  # broader than the scanned range: clearly not narrow
    assert metrics.width_hz > 0.3 * full_span_hz


def test_zero_offset_hold_photocurrent_is_dc_only(params):
    proto = ScanProtocol.hold(roundtrips(params, 8000))
    trace = integrate(proto, drive(r=0.5, phi=math.pi / 2), params,
                      SolverOptions(step_roundtrips=0.5))
    assert dominant_beat_frequency(trimmed(trace, 0.5)) is None


def test_continuous_scan_feature_narrows_with_rate(unit_tau_params, gamma):
    params = unit_tau_params
    d = drive(r=0.5, phi=math.pi / 2)
    span = 0.5 * gamma
    widths = []
    for duration in (2.0e4, 8.0e4, 3.2e5):
        proto = ScanProtocol.seed_frequency_scan(duration, -span, span)
        trace = simulate_frequency_scan(
            proto, d, params, SolverOptions(step_roundtrips=0.5, sample_every=4)
        )
        widths.append(narrow_feature(trace).width_hz)
    assert widths[0] > widths[1] > widths[2]


def test_scan_wrappers_enforce_protocol_kind(params):
    hold = ScanProtocol.hold(roundtrips(params, 10))
    with pytest.raises(ParameterError):
        simulate_length_scan(hold, drive(), params)
    with pytest.raises(ParameterError):
        simulate_frequency_scan(hold, drive(), params)


def test_narrow_feature_requires_frequency_scan(params):
    proto = ScanProtocol.hold(roundtrips(params, 64))
    trace = integrate(proto, drive(r=0.3), params)
    with pytest.raises(ParameterError):
        narrow_feature(trace)
