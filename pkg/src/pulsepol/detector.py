"""Electronic detection chain: photodiodes, charge-sensitive preamplifier,
CR-RC shaping amplifier, and ADC peak readout.

The polarimeter difference current is integrated on the preamp feedback
capacitor (one voltage step of e/C_f per electron, exponential return with
time constant R_f*C_f) and shaped into a peaked pulse whose height is
proportional to the collected charge.  Every stage is linear in the charge,
so pile-up obeys superposition and a single unit-charge response can be
scaled per pulse.  Readout inverts the chain: peak voltage times
C_f/(G*e), corrected for the ballistic deficit of the finite collection
ramp and the droop of the preamp tail under the shaper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal

from .errors import ClippingError, PeakAtEdgeError, SimulationError
from .stokes import PolarimeterSample, UnitsBasis

__all__ = [
    "DetectorChainConfig",
    "ELEMENTARY_CHARGE",
    "PeakReadout",
    "TwoChainReadout",
    "WaveformTrace",
    "calibrate_ballistic_deficit",
    "calibrate_peak_response",
    "detect_counts",
    "detect_photons",
    "read_difference_two_chains",
    "read_peak",
    "shaper_step_response",
    "synth_preamp_waveform",
    "synth_shaper_waveform",
]

ELEMENTARY_CHARGE = 1.602176634e-19  # C

# Default trace grid: 10 ns samples over a 20 us window, charge arriving
# at 2 us so the shaped peak sits well inside the record.
DEFAULT_SAMPLE_PERIOD = 10e-9
DEFAULT_WINDOW = 20e-6
DEFAULT_ARRIVAL_TIME = 2e-6

_CALIBRATION_DT = 1e-9  # grid for the numeric peak-response oracles


@dataclass(frozen=True)
class DetectorChainConfig:
    """Parameters of the full photodiode + amplifier + ADC chain.

    ``assumed_feedback_capacitance`` is the value the readout calibration
    believes; leaving it None means the calibration is perfect.  Setting it
    away from ``feedback_capacitance`` models a mis-calibrated sensitivity,
    which rescales every reconstructed count.
    """

    quantum_efficiency: float = 0.9
    feedback_capacitance: float = 1e-12
    feedback_resistance: float = 300e6
    shaper_peak_time: float = 2.3e-6
    shaper_gain: float = 200.0
    shaper_order: int = 1
    extinction_ratio: float = 1e-5
    excess_noise_electrons: float = 80.0
    adc_full_scale: float = 5.0
    adc_bits: int = 14
    assumed_feedback_capacitance: float | None = None
    peak_strategy: str = "global_max"

    def __post_init__(self) -> None:
        if not 0.0 <= self.quantum_efficiency <= 1.0:
            raise ValueError(f"quantum_efficiency must be in [0, 1], got {self.quantum_efficiency!r}")
        if not 0.0 <= self.extinction_ratio <= 1.0:
            raise ValueError(f"extinction_ratio must be in [0, 1], got {self.extinction_ratio!r}")
        if not self.feedback_capacitance > 0:
            raise ValueError("feedback_capacitance must be positive")
        if not self.feedback_resistance > 0:
            raise ValueError("feedback_resistance must be positive")
        if not self.shaper_peak_time > 0:
            raise ValueError("shaper_peak_time must be positive")
        if not self.shaper_gain > 0:
            raise ValueError("shaper_gain must be positive")
        if self.shaper_order < 1:
            raise ValueError("shaper_order must be >= 1")
        if self.excess_noise_electrons < 0:
            raise ValueError("excess_noise_electrons must be >= 0")
        if not self.adc_full_scale > 0:
            raise ValueError("adc_full_scale must be positive")
        if self.adc_bits < 1:
            raise ValueError("adc_bits must be >= 1")
        if self.peak_strategy not in ("global_max", "fixed_time"):
            raise ValueError(f"unknown peak_strategy {self.peak_strategy!r}")
        if self.assumed_feedback_capacitance is None:
            object.__setattr__(self, "assumed_feedback_capacitance", self.feedback_capacitance)
        elif not self.assumed_feedback_capacitance > 0:
            raise ValueError("assumed_feedback_capacitance must be positive")

    def sensitivity(self) -> float:
        """Preamp sensitivity in volts per electron (e / C_f)."""
        return ELEMENTARY_CHARGE / self.feedback_capacitance

    def tail_time(self) -> float:
        """Preamp discharge time constant R_f * C_f."""
        return self.feedback_resistance * self.feedback_capacitance

    def volts_per_electron_shaped(self) -> float:
        """Step-gain of the whole chain at the shaper output, G * e / C_f."""
        return self.shaper_gain * self.sensitivity()

    def adc_step(self) -> float:
        """LSB of the bipolar ADC: full span 2*full_scale over 2**bits codes."""
        return 2.0 * self.adc_full_scale / (2 ** self.adc_bits)


@dataclass(frozen=True)
class WaveformTrace:
    """Uniformly sampled voltage record.  Value object; samples are read-only."""

    sample_period: float
    samples: np.ndarray
    t0: float = 0.0

    def __post_init__(self) -> None:
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        samples = np.array(self.samples, dtype=float, copy=True)
        if samples.ndim != 1 or len(samples) < 2:
            raise ValueError("samples must be a 1-D array of length >= 2")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.sample_period * np.arange(len(self.samples))

    @property
    def duration(self) -> float:
        return self.sample_period * (len(self.samples) - 1)

    def save_txt(self, path) -> None:
        """Write a plain two-column text file (time_seconds, volts)."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# time_seconds voltage_volts\n")
            for t, v in zip(self.times, self.samples):
                fh.write(f"{float(t)!r} {float(v)!r}\n")


# ---------------------------------------------------------------------------
# photon -> photoelectron conversion
# ---------------------------------------------------------------------------

def detect_counts(
    n_plus: np.ndarray,
    n_minus: np.ndarray,
    config: DetectorChainConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized photodiode stage: extinction crosstalk plus eta-thinning.

    Each incident photon reaches its own port with probability (1 - ext),
    leaks to the opposite port with probability ext, and is then detected
    with probability eta, so each output port collects
    Binomial(n_own, eta*(1-ext)) + Binomial(n_opposite, eta*ext) counts.
    Fractional inputs (continuous-limit counts) are thinned by matching the
    binomial mean and variance with Gaussian draws.
    """
    eta = config.quantum_efficiency
    ext = config.extinction_ratio
    if eta == 1.0 and ext == 0.0:
        return np.asarray(n_plus, float), np.asarray(n_minus, float)
    p_keep = eta * (1.0 - ext)
    p_cross = eta * ext
    n_plus = np.asarray(n_plus, float)
    n_minus = np.asarray(n_minus, float)
    whole = bool(
        np.all(n_plus == np.floor(n_plus)) and np.all(n_minus == np.floor(n_minus))
    )
    if whole:
        ip = n_plus.astype(np.int64)
        im = n_minus.astype(np.int64)
        out_plus = rng.binomial(ip, p_keep) + rng.binomial(im, p_cross)
        out_minus = rng.binomial(im, p_keep) + rng.binomial(ip, p_cross)
        return out_plus.astype(float), out_minus.astype(float)
    mean_plus = p_keep * n_plus + p_cross * n_minus
    mean_minus = p_keep * n_minus + p_cross * n_plus
    var_plus = p_keep * (1 - p_keep) * n_plus + p_cross * (1 - p_cross) * n_minus
    var_minus = p_keep * (1 - p_keep) * n_minus + p_cross * (1 - p_cross) * n_plus
    out_plus = mean_plus + rng.standard_normal(n_plus.shape) * np.sqrt(var_plus)
    out_minus = mean_minus + rng.standard_normal(n_minus.shape) * np.sqrt(var_minus)
    return np.maximum(out_plus, 0.0), np.maximum(out_minus, 0.0)


def detect_photons(
    incident: PolarimeterSample,
    config: DetectorChainConfig,
    rng: np.random.Generator,
) -> PolarimeterSample:
    """Convert an incident-photon sample into photoelectron counts."""
    if incident.units_basis is not UnitsBasis.INCIDENT_PHOTONS:
        raise ValueError("sample is already in photoelectron units")
    n_plus, n_minus = detect_counts(
        np.array([incident.n_plus]), np.array([incident.n_minus]), config, rng
    )
    return PolarimeterSample(
        float(n_plus[0]), float(n_minus[0]), units_basis=UnitsBasis.PHOTOELECTRONS
    )


# ---------------------------------------------------------------------------
# waveform synthesis
# ---------------------------------------------------------------------------

def synth_preamp_waveform(
    charge_electrons: float,
    pulse_duration: float,
    config: DetectorChainConfig,
    *,
    sample_period: float = DEFAULT_SAMPLE_PERIOD,
    window: float = DEFAULT_WINDOW,
    arrival_time: float = DEFAULT_ARRIVAL_TIME,
) -> WaveformTrace:
    """Charge-sensitive preamp output for one charge deposit.

    Linear ramp of length ``pulse_duration`` up to charge * (e/C_f) volts,
    then exponential discharge with time constant R_f*C_f.  A zero-length
    pulse gives an ideal voltage step.  The charge may be negative or
    fractional (it is the signed difference current of the polarimeter).
    """
    if not math.isfinite(charge_electrons):
        raise ValueError("charge_electrons must be finite")
    if pulse_duration < 0:
        raise ValueError("pulse_duration must be >= 0")
    tail = config.tail_time()
    if pulse_duration >= tail / 100.0:
        raise SimulationError(
            f"pulse_duration {pulse_duration:.3g} s is not impulse-like versus the "
            f"preamp tail {tail:.3g} s (need < tail/100)"
        )
    if arrival_time < 0:
        raise ValueError("arrival_time must be >= 0")
    if arrival_time + pulse_duration >= window:
        raise SimulationError(
            f"trace window {window:.3g} s is shorter than the pulse "
            f"(arrival {arrival_time:.3g} s + duration {pulse_duration:.3g} s)"
        )
    n = int(round(window / sample_period))
    if n < 2:
        raise ValueError("window must cover at least two samples")
    t = np.arange(n) * sample_period
    rel = t - arrival_time
    amplitude = charge_electrons * config.sensitivity()
    if pulse_duration == 0:
        shape = np.where(rel >= 0, np.exp(-np.maximum(rel, 0.0) / tail), 0.0)
    else:
        ramp = np.clip(rel / pulse_duration, 0.0, 1.0)
        decay = np.exp(-np.maximum(rel - pulse_duration, 0.0) / tail)
        shape = ramp * decay
    return WaveformTrace(sample_period, amplitude * shape, t0=0.0)


def shaper_step_response(
    config: DetectorChainConfig, sample_period: float, n: int
) -> np.ndarray:
    """Unit-step response of the CR-RC^order shaper on an n-sample grid.

    Normalized so a unit voltage step peaks at exactly the shaper gain G at
    t = shaper_peak_time: for order k the response is G * (t/(k*tau))^k *
    exp(k - t/tau) with tau = peak_time / k.
    """
    k = config.shaper_order
    tau = config.shaper_peak_time / k
    t = np.arange(n) * sample_period
    x = t / tau
    return config.shaper_gain * (x / k) ** k * np.exp(k - x)


def synth_shaper_waveform(
    preamp: WaveformTrace, config: DetectorChainConfig
) -> WaveformTrace:
    """Apply the shaping filter to a preamp trace.

    The input is treated as piecewise constant between samples and convolved
    with the sampled step response, which makes the transform exactly linear
    and reproduces the nominal peak gain G for a clean step input.
    """
    dt = preamp.sample_period
    if dt > config.shaper_peak_time / 50.0:
        raise SimulationError(
            f"sample period {dt:.3g} s under-resolves the shaper "
            f"(need <= peak_time/50 = {config.shaper_peak_time / 50:.3g} s)"
        )
    if preamp.duration < 5.0 * config.shaper_peak_time:
        raise SimulationError(
            f"preamp trace covers {preamp.duration:.3g} s; "
            f"need >= 5x peak time ({5 * config.shaper_peak_time:.3g} s)"
        )
    increments = np.diff(preamp.samples, prepend=0.0)
    kernel = shaper_step_response(config, dt, len(preamp))
    out = signal.fftconvolve(increments, kernel)[: len(preamp)]
    return WaveformTrace(dt, out, t0=preamp.t0)


# ---------------------------------------------------------------------------
# peak-response calibration oracles (1 ns numeric grid, cached)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=128)
def _ramp_vs_step_factor(peak_time: float, order: int, pulse_duration: float) -> float:
    # peak(linear ramp of length T) / peak(ideal step), no preamp tail
    dt = _CALIBRATION_DT
    n_ramp = max(1, int(round(pulse_duration / dt)))
    n = n_ramp + int(round(5 * peak_time / dt))
    tau = peak_time / order
    x = (np.arange(n) * dt) / tau
    s = (x / order) ** order * np.exp(order - x)
    cumulative = np.concatenate(([0.0], np.cumsum(s)))
    ramp_response = (cumulative[n_ramp:] - cumulative[:-n_ramp]) / n_ramp
    return float(ramp_response.max() / s.max())


def calibrate_ballistic_deficit(
    config: DetectorChainConfig, pulse_duration: float
) -> float:
    """Peak-height loss of a finite charge-collection ramp versus a step.

    Returns peak(ramp of length pulse_duration) / peak(ideal step) for the
    configured shaper, evaluated numerically on a 1 ns grid.  Tends to 1 as
    the ramp shrinks and decreases monotonically with ramp length.
    """
    if pulse_duration < 0:
        raise ValueError("pulse_duration must be >= 0")
    if pulse_duration >= config.shaper_peak_time:
        raise SimulationError(
            f"pulse_duration {pulse_duration:.3g} s must be shorter than the "
            f"shaper peak time {config.shaper_peak_time:.3g} s"
        )
    if pulse_duration == 0:
        return 1.0
    return _ramp_vs_step_factor(
        config.shaper_peak_time, config.shaper_order, pulse_duration
    )


@lru_cache(maxsize=128)
def _chain_peak_factor(
    peak_time: float, order: int, tail_time: float, pulse_duration: float
) -> float:
    # shaped peak for a unit preamp pulse (ramp + exponential tail) relative
    # to the ideal step gain; folds in both the ballistic deficit and the
    # droop of the preamp tail under the shaper
    dt = _CALIBRATION_DT
    n = int(round((pulse_duration + 6 * peak_time) / dt))
    t = np.arange(n) * dt
    if pulse_duration == 0:
        shape = np.exp(-t / tail_time)
    else:
        ramp = np.clip(t / pulse_duration, 0.0, 1.0)
        shape = ramp * np.exp(-np.maximum(t - pulse_duration, 0.0) / tail_time)
    tau = peak_time / order
    x = t / tau
    kernel = (x / order) ** order * np.exp(order - x)
    out = signal.fftconvolve(np.diff(shape, prepend=0.0), kernel)[:n]
    return float(out.max())


def calibrate_peak_response(
    config: DetectorChainConfig, pulse_duration: float
) -> float:
    """Shaped-peak height per unit charge relative to the ideal step gain.

    This is the factor actually applied in read_peak: the ballistic
    deficit of the finite collection ramp combined with the slight droop
    caused by the preamp discharging through R_f*C_f while the shaper
    integrates.  Both effects are charge-independent, so dividing them out
    restores an exactly unit reconstruction slope.
    """
    if pulse_duration < 0:
        raise ValueError("pulse_duration must be >= 0")
    if pulse_duration >= config.shaper_peak_time:
        raise SimulationError(
            f"pulse_duration {pulse_duration:.3g} s must be shorter than the "
            f"shaper peak time {config.shaper_peak_time:.3g} s"
        )
    return _chain_peak_factor(
        config.shaper_peak_time,
        config.shaper_order,
        config.tail_time(),
        pulse_duration,
    )


# ---------------------------------------------------------------------------
# ADC peak readout
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeakReadout:
    """Result of sampling the shaped pulse: quantized peak voltage and the
    reconstructed charge difference and half-difference."""

    peak_voltage: float
    delta_n_electrons: float
    j_y_prime: float
    peak_time: float
    peak_index: int


@dataclass(frozen=True)
class TwoChainReadout:
    """Digital difference of two independently read amplifier chains."""

    delta_n_electrons: float
    j_y_prime: float
    plus: PeakReadout
    minus: PeakReadout


def _quantize(values: np.ndarray, config: DetectorChainConfig) -> np.ndarray:
    step = config.adc_step()
    return np.round(values / step) * step


def read_peak(
    shaped: WaveformTrace,
    config: DetectorChainConfig,
    rng: np.random.Generator,
    *,
    pulse_duration: float | None = None,
    fixed_sample_time: float | None = None,
) -> PeakReadout:
    """Digitize the shaped trace and reconstruct the charge difference.

    One input-referred Gaussian noise draw (``excess_noise_electrons`` rms)
    is added at the readout stage, the trace is quantized over the bipolar
    ADC range, and the maximum-magnitude sample (or, with the fixed-time
    strategy, the sample at ``fixed_sample_time``) is converted back to
    electrons via C_f/(G*e) and the peak-response calibration for
    ``pulse_duration`` (None means step calibration).  Raises ClippingError
    if the trace exceeds the ADC range and PeakAtEdgeError if the extremum
    is only attained at the trace boundary.
    """
    v = shaped.samples
    if config.excess_noise_electrons > 0:
        noise = rng.normal(0.0, config.excess_noise_electrons * config.volts_per_electron_shaped())
        v = v + noise
    if np.max(np.abs(v)) > config.adc_full_scale:
        raise ClippingError(
            f"trace peak {np.max(np.abs(v)):.3g} V exceeds ADC full scale "
            f"{config.adc_full_scale:.3g} V"
        )
    q = _quantize(v, config)
    if config.peak_strategy == "fixed_time" or fixed_sample_time is not None:
        if fixed_sample_time is None:
            raise ValueError("fixed_time strategy needs fixed_sample_time")
        idx = int(round((fixed_sample_time - shaped.t0) / shaped.sample_period))
        if not 0 < idx < len(q) - 1:
            raise PeakAtEdgeError(
                f"fixed sample time {fixed_sample_time:.3g} s is at or outside the trace edges"
            )
    else:
        magnitude = np.abs(q)
        candidates = np.flatnonzero(magnitude == magnitude.max())
        interior = candidates[(candidates > 0) & (candidates < len(q) - 1)]
        if len(interior) == 0:
            raise PeakAtEdgeError("trace extremum sits on the first or last sample")
        idx = int(interior[0])
    peak_v = float(q[idx])
    factor = 1.0 if pulse_duration is None else calibrate_peak_response(config, pulse_duration)
    electrons = (
        peak_v
        * config.assumed_feedback_capacitance
        / (config.shaper_gain * ELEMENTARY_CHARGE)
        / factor
    )
    return PeakReadout(
        peak_voltage=peak_v,
        delta_n_electrons=electrons,
        j_y_prime=electrons / 2.0,
        peak_time=shaped.t0 + idx * shaped.sample_period,
        peak_index=idx,
    )


def read_difference_two_chains(
    n_plus_electrons: float,
    n_minus_electrons: float,
    pulse_duration: float,
    config: DetectorChainConfig,
    rng: np.random.Generator,
    **trace_kwargs,
) -> TwoChainReadout:
    """Cross-check topology: one amplifier chain per port, digital subtraction.

    The default topology feeds the polarimeter difference current into a
    single preamp; for a linear chain the two are equivalent up to readout
    noise (which enters once per chain here rather than once total).  Note
    the per-port signal is ~J electrons, so the ADC range must accommodate
    it even when the difference is small.
    """
    readouts = []
    for charge in (n_plus_electrons, n_minus_electrons):
        preamp = synth_preamp_waveform(charge, pulse_duration, config, **trace_kwargs)
        shaped = synth_shaper_waveform(preamp, config)
        readouts.append(read_peak(shaped, config, rng, pulse_duration=pulse_duration))
    delta = readouts[0].delta_n_electrons - readouts[1].delta_n_electrons
    return TwoChainReadout(
        delta_n_electrons=delta,
        j_y_prime=delta / 2.0,
        plus=readouts[0],
        minus=readouts[1],
    )
