"""pulsepol: Monte Carlo simulator and analysis toolkit for fast pulse
polarimetry and spin QND readout.

The package models a balanced polarimeter probing with short coherent
pulses: photon counting statistics (vacuum noise), the Faraday-rotation
coupling to a collective atomic spin, the charge-sensitive amplifier and
pulse-shaping electronics, and the statistical reductions (Gaussian fits,
shot-noise scaling, two-pulse correlations) used to characterize such a
system.
"""

__version__ = "0.1.0"

from .errors import (
    AnalysisError,
    ClippingError,
    ConfigError,
    DegenerateDataError,
    PeakAtEdgeError,
    PulsepolError,
    SimulationError,
    TooFewSamplesError,
)
from .stokes import (
    CountingModel,
    PolarimeterSample,
    PulseConfig,
    UnitsBasis,
    exact_outcome_pmf,
    pulse_stream,
    sample_vacuum_counts,
    sample_vacuum_outcome,
    vacuum_sigma,
)
from .spin import (
    ConditionalVarianceResult,
    FeasibilityReport,
    InteractionParams,
    QndOutcomePair,
    SpinEnsembleState,
    check_qnd_feasibility,
    conditional_variance,
    kappa_squared,
    rotated_jy_mean_shift,
    sample_qnd_outcome,
    sample_qnd_pair,
    sample_qnd_pairs,
)
from .detector import (
    DetectorChainConfig,
    PeakReadout,
    WaveformTrace,
    calibrate_ballistic_deficit,
    calibrate_peak_response,
    detect_photons,
    read_peak,
    synth_preamp_waveform,
    synth_shaper_waveform,
)
from .analysis import (
    CorrelationResult,
    GaussianFitResult,
    HistogramResult,
    MeasurementRecord,
    ScalingFitResult,
    chi_square_gof,
    correlation,
    fit_gaussian,
    fit_sigma_scaling,
    histogram,
)
from .config import (
    RunConfig,
    SWEEP_PHOTON_NUMBERS,
    default_run_config,
    load_run_config,
)
from .runners import (
    run_qnd,
    run_sweep,
    run_two_pulse,
    run_vacuum,
    run_waveform_demo,
)

__all__ = [
    "AnalysisError",
    "ClippingError",
    "ConditionalVarianceResult",
    "ConfigError",
    "CorrelationResult",
    "CountingModel",
    "DegenerateDataError",
    "DetectorChainConfig",
    "FeasibilityReport",
    "GaussianFitResult",
    "HistogramResult",
    "InteractionParams",
    "MeasurementRecord",
    "PeakAtEdgeError",
    "PeakReadout",
    "PolarimeterSample",
    "PulseConfig",
    "PulsepolError",
    "QndOutcomePair",
    "RunConfig",
    "SWEEP_PHOTON_NUMBERS",
    "ScalingFitResult",
    "SimulationError",
    "SpinEnsembleState",
    "TooFewSamplesError",
    "UnitsBasis",
    "WaveformTrace",
    "calibrate_ballistic_deficit",
    "calibrate_peak_response",
    "check_qnd_feasibility",
    "chi_square_gof",
    "conditional_variance",
    "correlation",
    "default_run_config",
    "detect_photons",
    "exact_outcome_pmf",
    "fit_gaussian",
    "fit_sigma_scaling",
    "histogram",
    "kappa_squared",
    "load_run_config",
    "pulse_stream",
    "read_peak",
    "rotated_jy_mean_shift",
    "run_qnd",
    "run_sweep",
    "run_two_pulse",
    "run_vacuum",
    "run_waveform_demo",
    "sample_qnd_outcome",
    "sample_qnd_pair",
    "sample_qnd_pairs",
    "sample_vacuum_counts",
    "sample_vacuum_outcome",
    "vacuum_sigma",
    "synth_preamp_waveform",
    "synth_shaper_waveform",
]
