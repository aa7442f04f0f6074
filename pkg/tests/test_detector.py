"""Detection-chain tests: thinning statistics, waveform synthesis against
the sensitivity and peak-time contracts, ballistic-deficit calibration, and
the ADC readout round trip."""

import math

import numpy as np
import pytest

from pulsepol import (
    ClippingError,
    CountingModel,
    DetectorChainConfig,
    PeakAtEdgeError,
    PolarimeterSample,
    PulseConfig,
    SimulationError,
    UnitsBasis,
    WaveformTrace,
    calibrate_ballistic_deficit,
    calibrate_peak_response,
    detect_photons,
    pulse_stream,
    read_peak,
    sample_vacuum_counts,
    synth_preamp_waveform,
    synth_shaper_waveform,
)
from pulsepol.detector import ELEMENTARY_CHARGE, detect_counts


def noiseless(**kwargs) -> DetectorChainConfig:
    base = dict(excess_noise_electrons=0.0, extinction_ratio=0.0)
    base.update(kwargs)
    return DetectorChainConfig(**base)


# ---------------------------------------------------------------------------
# config invariants
# ---------------------------------------------------------------------------

def test_sensitivity_is_0p16_microvolts_per_electron():
    config = DetectorChainConfig()
    assert config.sensitivity() == pytest.approx(0.16e-6, rel=0.005)
    assert config.tail_time() == pytest.approx(300e-6, rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        DetectorChainConfig(quantum_efficiency=1.1)
    with pytest.raises(ValueError):
        DetectorChainConfig(extinction_ratio=-0.1)
    with pytest.raises(ValueError):
        DetectorChainConfig(adc_bits=0)
    with pytest.raises(ValueError):
        DetectorChainConfig(peak_strategy="sometimes")


# ---------------------------------------------------------------------------
# photodiode stage
# ---------------------------------------------------------------------------

def test_perfect_detector_is_identity():
    config = noiseless(quantum_efficiency=1.0)
    incident = PolarimeterSample(123.0, 45.0)
    out = detect_photons(incident, config, pulse_stream(1, 0))
    assert (out.n_plus, out.n_minus) == (123.0, 45.0)
    assert out.units_basis is UnitsBasis.PHOTOELECTRONS


def test_blind_detector_gives_zero_counts():
    # with eta = 0 even the extinction leakage is undetected
    config = DetectorChainConfig(quantum_efficiency=0.0, extinction_ratio=1e-3)
    incident = PolarimeterSample(1000.0, 500.0)
    out = detect_photons(incident, config, pulse_stream(2, 0))
    assert out.n_plus == 0.0
    assert out.n_minus == 0.0


def test_detect_rejects_photoelectron_input():
    config = DetectorChainConfig()
    already = PolarimeterSample(10.0, 5.0, units_basis=UnitsBasis.PHOTOELECTRONS)
    with pytest.raises(ValueError):
        detect_photons(already, config, pulse_stream(3, 0))


def test_thinning_scales_variance_by_eta_discrete():
    # fixed-total split of 2J = 1e6: each photon lands detected-left /
    # detected-right / lost with probs eta/2, eta/2, 1-eta, so
    # Var(J_y') = eta * J/2 exactly
    eta = 0.9
    two_j = 1e6
    n_draws = 200_000
    pulse = PulseConfig(mean_photon_number=two_j)
    rng = pulse_stream(4, 0)
    n_plus, n_minus = sample_vacuum_counts(pulse, CountingModel.BINOMIAL_SPLIT, rng, n_draws)
    pe_plus, pe_minus = detect_counts(n_plus, n_minus, noiseless(quantum_efficiency=eta), rng)
    j_y = (pe_plus - pe_minus) / 2.0
    expected = eta * two_j / 4.0
    se = expected * math.sqrt(2.0 / n_draws)
    assert abs(np.var(j_y, ddof=1) - expected) < 3.0 * se


def test_thinning_scales_variance_by_eta_continuous():
    eta = 0.9
    two_j = 1e6
    n_draws = 200_000
    pulse = PulseConfig(mean_photon_number=two_j)
    rng = pulse_stream(5, 0)
    n_plus, n_minus = sample_vacuum_counts(pulse, CountingModel.GAUSSIAN_LIMIT, rng, n_draws)
    pe_plus, pe_minus = detect_counts(n_plus, n_minus, noiseless(quantum_efficiency=eta), rng)
    j_y = (pe_plus - pe_minus) / 2.0
    expected = eta * two_j / 4.0
    se = expected * math.sqrt(2.0 / n_draws)
    assert abs(np.var(j_y, ddof=1) - expected) < 3.0 * se


def test_extinction_leakage_cancels_in_the_difference():
    config = DetectorChainConfig(quantum_efficiency=0.9, extinction_ratio=1e-3)
    n = np.full(50_000, 1e6)
    rng = pulse_stream(6, 0)
    pe_plus, pe_minus = detect_counts(n, n, config, rng)
    j_y = (pe_plus - pe_minus) / 2.0
    assert abs(np.mean(j_y)) < 3.0 * np.std(j_y) / math.sqrt(len(j_y))


# ---------------------------------------------------------------------------
# preamp waveform
# ---------------------------------------------------------------------------

def test_preamp_plateau_for_1e6_electrons():
    trace = synth_preamp_waveform(1e6, 400e-9, DetectorChainConfig())
    assert np.max(trace.samples) == pytest.approx(0.16, rel=0.005)


def test_preamp_zero_charge_is_flat():
    trace = synth_preamp_waveform(0.0, 400e-9, DetectorChainConfig())
    assert np.all(trace.samples == 0.0)


def test_preamp_decays_by_1_over_e_after_one_tail_time():
    config = DetectorChainConfig()
    trace = synth_preamp_waveform(
        1e6, 400e-9, config, sample_period=100e-9, window=340e-6, arrival_time=1e-6
    )
    peak_idx = int(np.argmax(trace.samples))
    tail_samples = int(round(config.tail_time() / trace.sample_period))
    ratio = trace.samples[peak_idx + tail_samples] / trace.samples[peak_idx]
    assert ratio == pytest.approx(math.exp(-1.0), rel=1e-9)


def test_preamp_negative_charge_flips_sign():
    trace = synth_preamp_waveform(-1e6, 400e-9, DetectorChainConfig())
    assert np.min(trace.samples) == pytest.approx(-0.16, rel=0.005)


def test_preamp_rejects_slow_pulses_and_short_windows():
    config = DetectorChainConfig()
    with pytest.raises(SimulationError):
        synth_preamp_waveform(1e6, 10e-6, config)  # > tail/100 = 3 us
    with pytest.raises(SimulationError):
        synth_preamp_waveform(1e6, 400e-9, config, window=1e-6, arrival_time=0.9e-6)


# ---------------------------------------------------------------------------
# shaper waveform
# ---------------------------------------------------------------------------

def step_trace(amplitude: float, dt: float = 10e-9, window: float = 20e-6, t_step: float = 2e-6):
    n = int(round(window / dt))
    t = np.arange(n) * dt
    return WaveformTrace(dt, np.where(t >= t_step, amplitude, 0.0))


def test_step_gain_and_peak_time():
    # ideal 0.16 V step -> peak G * 0.16 = 32 V at 2.3 us after the step
    config = noiseless()
    shaped = synth_shaper_waveform(step_trace(0.16), config)
    peak_idx = int(np.argmax(shaped.samples))
    assert shaped.samples[peak_idx] == pytest.approx(32.0, rel=1e-3)
    peak_delay = shaped.times[peak_idx] - 2e-6
    assert abs(peak_delay - config.shaper_peak_time) <= shaped.sample_period


def test_step_gain_accuracy_at_fine_sampling():
    config = noiseless()
    dt = config.shaper_peak_time / 100.0
    shaped = synth_shaper_waveform(step_trace(1.0, dt=dt, window=30e-6), config)
    assert np.max(shaped.samples) == pytest.approx(config.shaper_gain, rel=1e-3)


def test_zero_trace_shapes_to_zero():
    config = DetectorChainConfig()
    zero = WaveformTrace(10e-9, np.zeros(2000))
    shaped = synth_shaper_waveform(zero, config)
    assert np.all(shaped.samples == 0.0)


def test_two_pulse_superposition():
    # responses to charges 5 us apart add linearly to < 0.1%
    config = noiseless()
    a = synth_preamp_waveform(1e5, 400e-9, config, arrival_time=2e-6)
    b = synth_preamp_waveform(1e5, 400e-9, config, arrival_time=7e-6)
    combined = WaveformTrace(a.sample_period, a.samples + b.samples)
    shaped_sum = synth_shaper_waveform(combined, config)
    sum_shaped = synth_shaper_waveform(a, config).samples + synth_shaper_waveform(b, config).samples
    scale = np.max(np.abs(sum_shaped))
    assert np.max(np.abs(shaped_sum.samples - sum_shaped)) < 1e-3 * scale
    # the second peak rides on the first tail: single-pulse peaks differ
    assert np.max(shaped_sum.samples) > np.max(synth_shaper_waveform(a, config).samples)


def test_shaper_rejects_bad_traces():
    config = DetectorChainConfig()
    coarse = WaveformTrace(1e-6, np.zeros(30))  # dt > peak_time / 50
    with pytest.raises(SimulationError):
        synth_shaper_waveform(coarse, config)
    short = WaveformTrace(10e-9, np.zeros(100))  # 1 us < 5 peak times
    with pytest.raises(SimulationError):
        synth_shaper_waveform(short, config)


def test_higher_order_shaper_keeps_peak_contract():
    config = noiseless(shaper_order=4)
    shaped = synth_shaper_waveform(step_trace(1.0), config)
    peak_idx = int(np.argmax(shaped.samples))
    assert shaped.samples[peak_idx] == pytest.approx(config.shaper_gain, rel=1e-3)
    assert abs((shaped.times[peak_idx] - 2e-6) - config.shaper_peak_time) <= shaped.sample_period


# ---------------------------------------------------------------------------
# ballistic deficit
# ---------------------------------------------------------------------------

def test_ballistic_factor_limits_and_monotonicity():
    config = DetectorChainConfig()
    assert calibrate_ballistic_deficit(config, 0.0) == 1.0
    f_400 = calibrate_ballistic_deficit(config, 400e-9)
    assert 0.9 < f_400 < 1.0
    assert f_400 == pytest.approx(0.99874, abs=5e-4)
    f_long = calibrate_ballistic_deficit(config, 2.2e-6)
    assert f_long < f_400
    with pytest.raises(SimulationError):
        calibrate_ballistic_deficit(config, config.shaper_peak_time)


def test_peak_response_includes_tail_droop():
    # the preamp discharges through R_f C_f while the shaper integrates, so
    # the full-chain factor sits slightly below the pure ballistic one
    config = DetectorChainConfig()
    full = calibrate_peak_response(config, 400e-9)
    ballistic = calibrate_ballistic_deficit(config, 400e-9)
    assert full < ballistic
    assert full == pytest.approx(ballistic, rel=0.01)


# ---------------------------------------------------------------------------
# peak readout
# ---------------------------------------------------------------------------

def chain_readout(delta_n: float, config: DetectorChainConfig, seed: int = 9, duration: float = 400e-9):
    preamp = synth_preamp_waveform(delta_n, duration, config)
    shaped = synth_shaper_waveform(preamp, config)
    return read_peak(shaped, config, pulse_stream(seed, 0), pulse_duration=duration)


def test_noiseless_round_trip_2000_electrons():
    config = noiseless()
    result = chain_readout(2000.0, config)
    lsb_j_y = config.adc_step() * config.feedback_capacitance / (
        config.shaper_gain * ELEMENTARY_CHARGE
    ) / 2.0
    assert abs(result.j_y_prime - 1000.0) <= 0.6 * lsb_j_y
    assert result.delta_n_electrons == pytest.approx(2000.0, rel=0.01)


def test_round_trip_handles_negative_charge():
    config = noiseless()
    result = chain_readout(-2000.0, config)
    assert result.delta_n_electrons == pytest.approx(-2000.0, rel=0.01)
    assert result.peak_voltage < 0


def test_excess_noise_reconstructs_at_80_electrons():
    config = DetectorChainConfig()  # 80 e rms
    flat = WaveformTrace(10e-9, np.zeros(256))
    values = np.array(
        [
            read_peak(flat, config, pulse_stream(10, i)).delta_n_electrons
            for i in range(10_000)
        ]
    )
    assert abs(np.mean(values)) < 3.0
    assert np.std(values, ddof=1) == pytest.approx(80.0, abs=3.0)


def test_clipping_raises():
    config = noiseless()
    big = WaveformTrace(10e-9, np.linspace(0.0, 6.0, 512))  # exceeds 5 V full scale
    with pytest.raises(ClippingError):
        read_peak(big, config, pulse_stream(11, 0))


def test_peak_only_at_edge_raises():
    config = noiseless()
    falling = WaveformTrace(10e-9, np.linspace(1.0, 0.0, 512))
    with pytest.raises(PeakAtEdgeError):
        read_peak(falling, config, pulse_stream(12, 0))


def test_constant_trace_reads_interior_sample():
    config = noiseless()
    flat = WaveformTrace(10e-9, np.full(512, 0.25))
    result = read_peak(flat, config, pulse_stream(13, 0))
    assert 0 < result.peak_index < 511
    assert result.peak_voltage == pytest.approx(0.25, abs=config.adc_step())


def test_fixed_time_strategy_reads_requested_sample():
    config = noiseless(peak_strategy="fixed_time")
    shaped = synth_shaper_waveform(synth_preamp_waveform(2000.0, 400e-9, config), config)
    peak_idx = int(np.argmax(np.abs(shaped.samples)))
    t_peak = shaped.times[peak_idx]
    result = read_peak(
        shaped, config, pulse_stream(14, 0), pulse_duration=400e-9, fixed_sample_time=t_peak
    )
    assert result.peak_index == peak_idx
    with pytest.raises(ValueError):
        read_peak(shaped, config, pulse_stream(14, 0), pulse_duration=400e-9)


def test_reconstruction_linearity_over_three_decades():
    # wide-range, high-resolution digitizer isolates the analog chain's
    # linearity; the default 14-bit +/-5 V ADC clips near 1.5e5 electrons
    config = noiseless(adc_full_scale=400.0, adc_bits=24)
    charges = np.logspace(4, 7, 7)
    recovered = np.array([chain_readout(q, config).delta_n_electrons for q in charges])
    slope, offset = np.polyfit(charges, recovered, 1)
    assert slope == pytest.approx(1.0, abs=0.01)
    assert abs(offset) < 1e-3 * charges.max()
    np.testing.assert_allclose(recovered, charges, rtol=0.01)


def test_miscalibrated_capacitance_rescales_readout():
    config = noiseless()
    skewed = noiseless(assumed_feedback_capacitance=0.9487e-12)
    ratio = chain_readout(2e4, skewed).delta_n_electrons / chain_readout(2e4, config).delta_n_electrons
    assert ratio == pytest.approx(0.9487, rel=1e-3)


def test_two_chain_subtraction_matches_difference_topology():
    from pulsepol.detector import read_difference_two_chains

    # per-port signals are large, so give the digitizer the range for them
    config = noiseless(adc_full_scale=400.0, adc_bits=24)
    two_chain = read_difference_two_chains(60_000.0, 58_000.0, 400e-9, config, pulse_stream(15, 0))
    direct = chain_readout(2000.0, config)
    lsb_e = config.adc_step() * config.feedback_capacitance / (
        config.shaper_gain * ELEMENTARY_CHARGE
    )
    assert abs(two_chain.delta_n_electrons - direct.delta_n_electrons) <= 2 * lsb_e
    assert two_chain.j_y_prime == pytest.approx(1000.0, rel=0.01)


@pytest.mark.parametrize("duration", [100e-9, 200e-9, 600e-9])
def test_round_trip_at_alternate_pulse_durations(duration):
    config = noiseless()
    result = chain_readout(2000.0, config, duration=duration)
    assert result.delta_n_electrons == pytest.approx(2000.0, rel=0.01)
