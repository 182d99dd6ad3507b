"""Phase-sensitive parametric amplification in a dual-port cavity.

Steady-state transmission spectra (cavity scans and seed scans with their
delta-like degenerate point) and time-domain scan dynamics (relaxation, beat
notes, dynamically smeared narrow features) of a below-threshold optical
parametric amplifier, plus calibration helpers and a CLI.
"""

__version__ = "0.1.0"

from .dynamics import (
    FeatureMetrics,
    ScanProtocol,
    SolverOptions,
    TimeTrace,
    dominant_beat_frequency,
    integrate,
    narrow_feature,
    simulate_frequency_scan,
    simulate_length_scan,
)
from .model import (
    C_VACUUM,
    CavityParams,
    DecayRates,
    DegeneratePhaseError,
    DetuningSweep,
    Drive,
    ParameterError,
    ThresholdError,
    coupling_from_threshold,
    decay_rates,
    finesse_to_loss,
    loss_to_finesse,
    oscillation_threshold,
    roundtrip_time,
)
from .spectra import (
    Spectrum,
    SplittingReport,
    cavity_scan_spectrum,
    find_splitting,
    reference_power,
    seed_scan_spectrum,
)
from .steady_state import (
    IntracavityState,
    OutputFields,
    analytic_outputs,
    degenerate_steady_state,
    empty_cavity_output,
    nondegenerate_steady_state,
    output_fields,
    polar_residual,
)

__all__ = [
    "C_VACUUM",
    "CavityParams",
    "DecayRates",
    "DegeneratePhaseError",
    "DetuningSweep",
    "Drive",
    "FeatureMetrics",
    "IntracavityState",
    "OutputFields",
    "ParameterError",
    "ScanProtocol",
    "SolverOptions",
    "Spectrum",
    "SplittingReport",
    "ThresholdError",
    "TimeTrace",
    "analytic_outputs",
    "cavity_scan_spectrum",
    "coupling_from_threshold",
    "decay_rates",
    "degenerate_steady_state",
    "dominant_beat_frequency",
    "empty_cavity_output",
    "find_splitting",
    "finesse_to_loss",
    "integrate",
    "loss_to_finesse",
    "narrow_feature",
    "nondegenerate_steady_state",
    "oscillation_threshold",
    "output_fields",
    "polar_residual",
    "reference_power",
    "roundtrip_time",
    "seed_scan_spectrum",
    "simulate_frequency_scan",
    "simulate_length_scan",
    "__version__",
]
