"""Spin-coupling tests: feasibility conditions, readout shift, variance
broadening, and two-pulse correlation against bivariate-normal oracles."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulsepol import (
    InteractionParams,
    PulseConfig,
    SimulationError,
    SpinEnsembleState,
    TooFewSamplesError,
    check_qnd_feasibility,
    conditional_variance,
    kappa_squared,
    pulse_stream,
    rotated_jy_mean_shift,
    sample_qnd_outcome,
    sample_qnd_pair,
    sample_qnd_pairs,
)
from pulsepol.spin import sample_qnd_counts

TWO_PI = 2.0 * math.pi


def spins_with_kappa(kappa2: float, pulse: PulseConfig, var_sz: float = 2.5e5):
    """Solve alpha*t1 so that (a t1 J)^2 var_sz = kappa2 * J/2."""
    j = pulse.j()
    alpha_t1 = math.sqrt(kappa2 * (j / 2.0) / (j**2 * var_sz)) if kappa2 > 0 else 0.0
    spins = SpinEnsembleState(mean_sz=0.0, var_sz=var_sz, atom_count=int(4 * var_sz))
    return InteractionParams.from_product(alpha_t1), spins


# ---------------------------------------------------------------------------
# ensemble state
# ---------------------------------------------------------------------------

def test_linewidth_lifetime_product_enforced():
    spins = SpinEnsembleState(excited_lifetime=30e-9)
    assert spins.natural_linewidth * spins.excited_lifetime == pytest.approx(1.0, rel=1e-12)
    # explicit consistent pair is accepted
    SpinEnsembleState(excited_lifetime=30e-9, natural_linewidth=1.0 / 30e-9)
    with pytest.raises(ValueError):
        SpinEnsembleState(excited_lifetime=30e-9, natural_linewidth=TWO_PI * 29e6)


def test_state_validation():
    with pytest.raises(ValueError):
        SpinEnsembleState(var_sz=-1.0)
    with pytest.raises(ValueError):
        SpinEnsembleState(atom_count=-5)
    with pytest.raises(ValueError):
        SpinEnsembleState(coherence_time=0.0)


# ---------------------------------------------------------------------------
# feasibility
# ---------------------------------------------------------------------------

def test_feasibility_passes_for_narrowband_far_detuned_probe():
    # Yb-like linewidth: Gamma = 2*pi*29 MHz, so tau_e = 1/Gamma ~ 5.5 ns
    pulse = PulseConfig(
        mean_photon_number=3.7e6,
        duration=400e-9,
        detuning=TWO_PI * 1e9,
        probe_linewidth=TWO_PI * 5e6,
    )
    spins = SpinEnsembleState(coherence_time=1.0, excited_lifetime=1.0 / (TWO_PI * 29e6))
    report = check_qnd_feasibility(pulse, spins)
    assert report.passed
    assert all(c.margin > 1 for c in report.conditions)
    # the 30 ns lifetime variant (with its own consistent linewidth) also passes
    slow = SpinEnsembleState(coherence_time=1.0, excited_lifetime=30e-9)
    assert check_qnd_feasibility(pulse, slow).passed


def test_feasibility_fails_when_pulse_shorter_than_lifetime():
    pulse = PulseConfig(mean_photon_number=1e6, duration=10e-9)
    spins = SpinEnsembleState(excited_lifetime=30e-9)
    report = check_qnd_feasibility(pulse, spins)
    assert not report.passed
    failing = [c for c in report.conditions if not c.satisfied]
    assert any("lifetime" in c.name for c in failing)


def test_feasibility_boundaries_fail():
    # probe linewidth equal to the natural linewidth: strict inequality fails
    spins = SpinEnsembleState(excited_lifetime=30e-9)
    pulse = PulseConfig(
        mean_photon_number=1e6,
        duration=400e-9,
        probe_linewidth=spins.natural_linewidth,
    )
    report = check_qnd_feasibility(pulse, spins)
    assert not any(c.satisfied for c in report.conditions if "probe linewidth" in c.name)
    # coherence-time tie (T2 exactly 10 T) also fails
    tie = SpinEnsembleState(excited_lifetime=30e-9, coherence_time=10 * 400e-9)
    report = check_qnd_feasibility(PulseConfig(1e6, duration=400e-9), tie)
    assert not any(c.satisfied for c in report.conditions if "coherence" in c.name)


def test_feasibility_rejects_nonpositive_inputs():
    pulse = PulseConfig(mean_photon_number=1e6, detuning=-1.0)
    with pytest.raises(ValueError):
        check_qnd_feasibility(pulse, SpinEnsembleState())


# ---------------------------------------------------------------------------
# readout shift
# ---------------------------------------------------------------------------

def test_shift_examples():
    params = InteractionParams.from_product(1e-6)
    pulse = PulseConfig(mean_photon_number=4e6)
    assert rotated_jy_mean_shift(params, pulse, 0.0) == 0.0
    assert rotated_jy_mean_shift(params, pulse, 500.0) == pytest.approx(1000.0, rel=1e-12)
    assert rotated_jy_mean_shift(params, pulse, -500.0) == pytest.approx(-1000.0, rel=1e-12)


def test_shift_rejects_large_rotation():
    params = InteractionParams.from_product(1e-3)
    pulse = PulseConfig(mean_photon_number=4e6)
    with pytest.raises(SimulationError):
        rotated_jy_mean_shift(params, pulse, 200.0)  # alpha*t1*sz = 0.2


@settings(max_examples=50, deadline=None)
@given(sz=st.floats(min_value=-1e4, max_value=1e4, allow_nan=False))
def test_shift_sign_antisymmetry(sz):
    params = InteractionParams.from_product(1e-6)
    pulse = PulseConfig(mean_photon_number=4e6)
    assert rotated_jy_mean_shift(params, pulse, -sz) == -rotated_jy_mean_shift(params, pulse, sz)


# ---------------------------------------------------------------------------
# single-pulse QND statistics
# ---------------------------------------------------------------------------

def test_no_atom_limit_matches_vacuum():
    pulse = PulseConfig(mean_photon_number=3.7e6)
    params = InteractionParams.from_product(0.0)
    spins = SpinEnsembleState(mean_sz=0.0, var_sz=1e5)
    n_plus, n_minus, _ = sample_qnd_counts(
        params, pulse, spins, pulse_stream(21, 0), 50_000
    )
    j_y = (n_plus - n_minus) / 2.0
    sigma = math.sqrt(pulse.j() / 2.0)
    assert sigma == pytest.approx(961.77, abs=0.01)
    assert np.std(j_y, ddof=1) == pytest.approx(sigma, rel=0.02)


@pytest.mark.parametrize("kappa2", [1.0, 9.0])
def test_broadened_variance(kappa2):
    pulse = PulseConfig(mean_photon_number=4e6)
    params, spins = spins_with_kappa(kappa2, pulse)
    n_draws = 100_000
    n_plus, n_minus, _ = sample_qnd_counts(params, pulse, spins, pulse_stream(31, 0), n_draws)
    j_y = (n_plus - n_minus) / 2.0
    predicted = (pulse.j() / 2.0) * (1.0 + kappa2)
    se = predicted * math.sqrt(2.0 / n_draws)
    assert abs(np.var(j_y, ddof=1) - predicted) < 3.0 * se


def test_kappa_one_doubles_variance():
    # (a t1 J)^2 var = J/2  ->  total sigma = sqrt(J), sqrt(2) x vacuum
    pulse = PulseConfig(mean_photon_number=4e6)
    params, spins = spins_with_kappa(1.0, pulse)
    assert kappa_squared(params, pulse, spins) == pytest.approx(1.0, rel=1e-12)
    n_plus, n_minus, _ = sample_qnd_counts(params, pulse, spins, pulse_stream(37, 0), 100_000)
    j_y = (n_plus - n_minus) / 2.0
    assert np.std(j_y, ddof=1) == pytest.approx(math.sqrt(pulse.j()), rel=0.02)


def test_mean_linearity_in_sz():
    pulse = PulseConfig(mean_photon_number=4e6)
    params = InteractionParams.from_product(1e-6)
    gain = params.alpha_t1 * pulse.j()  # expected slope
    means = np.array([-500.0, 0.0, 500.0])
    observed = []
    for i, mean_sz in enumerate(means):
        spins = SpinEnsembleState(mean_sz=mean_sz, var_sz=0.0)
        n_plus, n_minus, _ = sample_qnd_counts(params, pulse, spins, pulse_stream(41, i), 20_000)
        observed.append(np.mean((n_plus - n_minus) / 2.0))
    slope = np.polyfit(means, observed, 1)[0]
    # se of each mean is sigma/sqrt(n) ~ 7.1; slope uncertainty follows
    assert slope == pytest.approx(gain, abs=0.05 * gain)


def test_sample_qnd_outcome_returns_latent_spin():
    pulse = PulseConfig(mean_photon_number=4e6)
    params, spins = spins_with_kappa(1.0, pulse)
    sample, true_sz = sample_qnd_outcome(params, pulse, spins, pulse_stream(43, 0))
    assert math.isfinite(true_sz)
    assert sample.j_y_prime == (sample.n_plus - sample.n_minus) / 2.0


def test_linearization_guard_on_state():
    pulse = PulseConfig(mean_photon_number=4e6)
    params = InteractionParams.from_product(1e-3)
    spins = SpinEnsembleState(mean_sz=0.0, var_sz=2.5e5)  # 3 sigma reach = 1500
    with pytest.raises(SimulationError):
        sample_qnd_counts(params, pulse, spins, pulse_stream(47, 0), 10)


# ---------------------------------------------------------------------------
# two-pulse probing
# ---------------------------------------------------------------------------

def test_pair_shares_the_latent_spin_bit_identically():
    pulse = PulseConfig(mean_photon_number=4e6)
    params, spins = spins_with_kappa(1.0, pulse)
    pair = sample_qnd_pair(params, pulse, spins, 5e-6, pulse_stream(53, 0))
    assert pair.true_sz_second == pair.true_sz
    assert pair.backaction_evading
    assert pair.pulse_separation == 5e-6


def test_pair_redraws_beyond_coherence_time():
    pulse = PulseConfig(mean_photon_number=4e6)
    params, spins = spins_with_kappa(1.0, pulse)
    with pytest.warns(UserWarning, match="coherence time"):
        pair = sample_qnd_pair(params, pulse, spins, 2.0, pulse_stream(59, 0))
    assert pair.true_sz_second != pair.true_sz


def test_vacuum_pairs_are_uncorrelated():
    pulse = PulseConfig(mean_photon_number=3.7e6)
    params = InteractionParams.from_product(0.0)
    spins = SpinEnsembleState(var_sz=2.5e5)
    n_pairs = 10_000
    j1, j2, _ = sample_qnd_pairs(params, pulse, spins, 5e-6, pulse_stream(61, 0), n_pairs)
    r = np.corrcoef(j1, j2)[0, 1]
    assert abs(r) < 3.0 / math.sqrt(n_pairs)


def test_kappa_one_pair_correlation_is_half():
    pulse = PulseConfig(mean_photon_number=4e6)
    params, spins = spins_with_kappa(1.0, pulse)
    j1, j2, _ = sample_qnd_pairs(params, pulse, spins, 5e-6, pulse_stream(67, 0), 100_000)
    r = np.corrcoef(j1, j2)[0, 1]
    assert r == pytest.approx(0.5, abs=0.01)


def test_zero_spin_variance_gives_zero_correlation():
    pulse = PulseConfig(mean_photon_number=4e6)
    params = InteractionParams.from_product(1e-6)
    spins = SpinEnsembleState(mean_sz=100.0, var_sz=0.0)
    j1, j2, _ = sample_qnd_pairs(params, pulse, spins, 5e-6, pulse_stream(72, 0), 10_000)
    assert abs(np.corrcoef(j1, j2)[0, 1]) < 0.03


# ---------------------------------------------------------------------------
# conditional variance
# ---------------------------------------------------------------------------

def test_conditional_variance_needs_enough_pairs():
    with pytest.raises(TooFewSamplesError):
        conditional_variance((np.ones(50), np.ones(50)))


def test_vacuum_pairs_show_no_reduction():
    pulse = PulseConfig(mean_photon_number=4e6)
    params = InteractionParams.from_product(0.0)
    spins = SpinEnsembleState(var_sz=2.5e5)
    j1, j2, _ = sample_qnd_pairs(params, pulse, spins, 5e-6, pulse_stream(73, 0), 50_000)
    result = conditional_variance((j1, j2))
    vacuum_var = pulse.j() / 2.0
    assert result.residual_variance == pytest.approx(vacuum_var, rel=0.03)
    assert result.unconditioned_variance == pytest.approx(vacuum_var, rel=0.03)
    assert result.reduction_factor == pytest.approx(1.0, abs=0.02)


@pytest.mark.parametrize(
    "kappa2,expected,tol",
    [(1.0, 0.5, 0.025), (9.0, 0.1, 0.02)],
)
def test_reduction_factor_tracks_measurement_strength(kappa2, expected, tol):
    pulse = PulseConfig(mean_photon_number=4e6)
    params, spins = spins_with_kappa(kappa2, pulse)
    j1, j2, _ = sample_qnd_pairs(params, pulse, spins, 5e-6, pulse_stream(79, 0), 100_000)
    result = conditional_variance((j1, j2))
    assert result.reduction_factor == pytest.approx(expected, abs=tol)
    # residual = (J/2) * (1 + 2k^2) / (1 + k^2) for the bivariate-normal model
    model_residual = (pulse.j() / 2.0) * (1 + 2 * kappa2) / (1 + kappa2)
    assert result.residual_variance == pytest.approx(model_residual, rel=0.03)


def test_conditional_variance_accepts_pair_objects():
    pulse = PulseConfig(mean_photon_number=4e6)
    params, spins = spins_with_kappa(1.0, pulse)
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # 5 us is well inside T2: no warning expected
        pairs = [
            sample_qnd_pair(params, pulse, spins, 5e-6, pulse_stream(83, i))
            for i in range(200)
        ]
    result = conditional_variance(pairs)
    assert result.n_pairs == 200
    assert 0.0 < result.reduction_factor < 1.0
