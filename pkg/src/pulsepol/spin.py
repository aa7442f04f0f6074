"""Spin ensemble, Faraday-rotation coupling, and repeated QND probing.

The probe couples to the collective spin through a Faraday interaction that
commutes with S_z, so measuring the rotated polarization is a quantum
non-demolition readout of the spin: to first order in the small rotation
angle the pulse readout becomes J_y' + (alpha*t1) * J * S_z, i.e. a fixed
spin value shifts the vacuum-noise distribution without broadening it.
Averaged over a Gaussian spin state the readout variance is

    J/2 + (alpha*t1*J)^2 * Var(S_z)

and two pulses probing the same ensemble share the latent S_z (back-action
evasion), which is what the pair sampler and the conditional-variance
figure of merit exercise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SimulationError, TooFewSamplesError
from .stokes import (
    CountingModel,
    PolarimeterSample,
    PulseConfig,
    sample_vacuum_counts,
    _lift_negative_counts,
)

__all__ = [
    "ConditionalVarianceResult",
    "DEFAULT_ALPHA_T1",
    "FeasibilityCondition",
    "FeasibilityReport",
    "InteractionParams",
    "QndOutcomePair",
    "SMALL_ROTATION_LIMIT",
    "SpinEnsembleState",
    "check_qnd_feasibility",
    "conditional_variance",
    "kappa_squared",
    "rotated_jy_mean_shift",
    "sample_qnd_counts",
    "sample_qnd_outcome",
    "sample_qnd_pair",
    "sample_qnd_pairs",
]

# First-order expansion of the rotation is trusted only below this angle.
SMALL_ROTATION_LIMIT = 0.1

# Illustrative default coupling: gives measurement strength kappa^2 = 1 at
# 2J = 4e6 photons with Var(S_z) = N/4 for N = 1e6 atoms.  Not a physical
# calibration; the coupling is a free parameter of the model.
DEFAULT_ALPHA_T1 = 1e-6


@dataclass(frozen=True)
class SpinEnsembleState:
    """Gaussian-moment description of the collective spin.

    Only the first two moments of S_z enter the readout statistics, so the
    state is (mean_sz, var_sz) plus the timescales needed by the
    feasibility check.  ``natural_linewidth`` is 1/excited_lifetime; it may
    be given explicitly but must then agree with the lifetime.
    """

    mean_sz: float = 0.0
    var_sz: float = 0.0
    atom_count: int = 0
    coherence_time: float = 1.0
    excited_lifetime: float = 5.488e-9
    natural_linewidth: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean_sz):
            raise ValueError("mean_sz must be finite")
        if not (math.isfinite(self.var_sz) and self.var_sz >= 0):
            raise ValueError(f"var_sz must be >= 0, got {self.var_sz!r}")
        if self.atom_count < 0:
            raise ValueError("atom_count must be >= 0")
        if not self.coherence_time > 0:
            raise ValueError("coherence_time must be positive")
        if not self.excited_lifetime > 0:
            raise ValueError("excited_lifetime must be positive")
        if self.natural_linewidth is None:
            object.__setattr__(self, "natural_linewidth", 1.0 / self.excited_lifetime)
        elif abs(self.natural_linewidth * self.excited_lifetime - 1.0) > 1e-9:
            raise ValueError(
                "natural_linewidth must equal 1/excited_lifetime "
                f"(got product {self.natural_linewidth * self.excited_lifetime!r})"
            )

    def sigma_sz(self) -> float:
        return math.sqrt(self.var_sz)


@dataclass(frozen=True)
class InteractionParams:
    """Faraday coupling strength and interaction time.

    The two only ever enter through their product alpha*t1 (radians of
    polarization rotation per unit of S_z per photon-normalized Stokes
    component); :meth:`from_product` builds the common case where only the
    product is known.
    """

    coupling_alpha: float
    interaction_time: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.coupling_alpha):
            raise ValueError("coupling_alpha must be finite")
        if self.interaction_time < 0:
            raise ValueError("interaction_time must be >= 0")

    @classmethod
    def from_product(cls, alpha_t1: float) -> "InteractionParams":
        return cls(coupling_alpha=alpha_t1, interaction_time=1.0)

    @property
    def alpha_t1(self) -> float:
        return self.coupling_alpha * self.interaction_time

    def small_rotation_ok(self, sz_value: float) -> bool:
        """First-order rotation valid for this specific spin value."""
        return abs(self.alpha_t1 * sz_value) < SMALL_ROTATION_LIMIT

    def linearization_ok(self, spins: SpinEnsembleState) -> bool:
        """First-order rotation valid out to 3 sigma of the spin state."""
        reach = abs(spins.mean_sz) + 3.0 * spins.sigma_sz()
        return abs(self.alpha_t1) * reach < SMALL_ROTATION_LIMIT


@dataclass(frozen=True)
class QndOutcomePair:
    """Two readouts of the same spin state.

    ``true_sz_second`` equals ``true_sz`` whenever the pulse separation
    stayed inside the coherence time; otherwise the second pulse saw an
    independent redraw and the pair is flagged decorrelated.
    """

    first: PolarimeterSample
    second: PolarimeterSample
    true_sz: float
    pulse_separation: float
    true_sz_second: float | None = None

    def __post_init__(self) -> None:
        if self.pulse_separation < 0:
            raise ValueError("pulse_separation must be >= 0")
        if self.true_sz_second is None:
            object.__setattr__(self, "true_sz_second", self.true_sz)

    @property
    def backaction_evading(self) -> bool:
        return self.true_sz_second == self.true_sz


@dataclass(frozen=True)
class FeasibilityCondition:
    name: str
    satisfied: bool
    margin: float
    detail: str


@dataclass(frozen=True)
class FeasibilityReport:
    conditions: tuple[FeasibilityCondition, ...]

    @property
    def passed(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.conditions:
            status = "ok" if c.satisfied else "FAIL"
            lines.append(f"{status:4s} {c.name}: {c.detail} (margin {c.margin:.3g}x)")
        lines.append("overall: " + ("pass" if self.passed else "fail"))
        return lines


def check_qnd_feasibility(pulse: PulseConfig, spins: SpinEnsembleState) -> FeasibilityReport:
    """Check the timescale/linewidth hierarchy required for a clean QND probe.

    Four strict inequalities are evaluated: the excited-state lifetime must
    be shorter than the pulse, the pulse must be at least ten times shorter
    than the spin coherence time (a tie fails), the probe linewidth must be
    below the natural linewidth, and the natural linewidth below the
    detuning.  Each condition is reported with its margin, the factor by
    which the inequality holds (margin > 1 means satisfied).
    """
    t_pulse = pulse.duration
    tau_e = spins.excited_lifetime
    t2 = spins.coherence_time
    gamma = spins.natural_linewidth
    gamma_p = pulse.probe_linewidth
    delta = pulse.detuning
    for label, value in [
        ("pulse duration", t_pulse),
        ("excited lifetime", tau_e),
        ("coherence time", t2),
        ("probe linewidth", gamma_p),
        ("natural linewidth", gamma),
        ("detuning", delta),
    ]:
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{label} must be positive and finite, got {value!r}")

    conditions = (
        FeasibilityCondition(
            name="excited lifetime < pulse duration",
            satisfied=tau_e < t_pulse,
            margin=t_pulse / tau_e,
            detail=f"tau_e = {tau_e:.3g} s vs T = {t_pulse:.3g} s",
        ),
        FeasibilityCondition(
            name="pulse much shorter than coherence time (10x)",
            satisfied=10.0 * t_pulse < t2,
            margin=t2 / (10.0 * t_pulse),
            detail=f"10 T = {10 * t_pulse:.3g} s vs T2 = {t2:.3g} s",
        ),
        FeasibilityCondition(
            name="probe linewidth < natural linewidth",
            satisfied=gamma_p < gamma,
            margin=gamma / gamma_p,
            detail=f"Gamma_p = {gamma_p:.3g} rad/s vs Gamma = {gamma:.3g} rad/s",
        ),
        FeasibilityCondition(
            name="natural linewidth < detuning",
            satisfied=gamma < delta,
            margin=delta / gamma,
            detail=f"Gamma = {gamma:.3g} rad/s vs Delta = {delta:.3g} rad/s",
        ),
    )
    return FeasibilityReport(conditions=conditions)


def rotated_jy_mean_shift(
    params: InteractionParams,
    pulse: PulseConfig,
    sz_value: float,
) -> float:
    """Deterministic readout shift alpha*t1*J*sz for an x-polarized probe.

    The x-polarized probe carries J_x = J, so a spin value sz rotates the
    mean of J_y' by alpha*t1*J*sz.  Rejected outside the first-order
    rotation regime |alpha*t1*sz| < 0.1.
    """
    if not params.small_rotation_ok(sz_value):
        raise SimulationError(
            f"|alpha*t1*Sz| = {abs(params.alpha_t1 * sz_value):.3g} is outside the "
            f"first-order rotation regime (< {SMALL_ROTATION_LIMIT})"
        )
    return params.alpha_t1 * pulse.j() * sz_value


def kappa_squared(
    params: InteractionParams,
    pulse: PulseConfig,
    spins: SpinEnsembleState,
) -> float:
    """Measurement strength: spin-induced readout variance over vacuum variance."""
    j = pulse.j()
    if j == 0:
        return 0.0
    return (params.alpha_t1 * j) ** 2 * spins.var_sz / (j / 2.0)


def _require_linearization(params: InteractionParams, spins: SpinEnsembleState) -> None:
    if not params.linearization_ok(spins):
        reach = abs(spins.mean_sz) + 3.0 * spins.sigma_sz()
        raise SimulationError(
            f"|alpha*t1| * (|<Sz>| + 3 sigma_Sz) = {abs(params.alpha_t1) * reach:.3g} "
            f"violates the first-order rotation regime (< {SMALL_ROTATION_LIMIT})"
        )


def sample_qnd_counts(
    params: InteractionParams,
    pulse: PulseConfig,
    spins: SpinEnsembleState,
    rng: np.random.Generator,
    size: int,
    model: CountingModel = CountingModel.GAUSSIAN_LIMIT,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batch QND sampler; returns (n_plus, n_minus, true_sz) arrays.

    Each pulse draws a latent spin value from the Gaussian state, then a
    vacuum count pair shifted by the deterministic rotation for that value.
    The marginal readout variance is J/2 + (alpha*t1*J)^2 * var_sz.
    """
    _require_linearization(params, spins)
    true_sz = rng.normal(spins.mean_sz, spins.sigma_sz(), size)
    n_plus, n_minus = sample_vacuum_counts(pulse, model, rng, size)
    shift = params.alpha_t1 * pulse.j() * true_sz
    n_plus = n_plus + shift
    n_minus = n_minus - shift
    n_plus, n_minus = _lift_negative_counts(n_plus, n_minus)
    return n_plus, n_minus, true_sz


def sample_qnd_outcome(
    params: InteractionParams,
    pulse: PulseConfig,
    spins: SpinEnsembleState,
    rng: np.random.Generator,
    model: CountingModel = CountingModel.GAUSSIAN_LIMIT,
) -> tuple[PolarimeterSample, float]:
    """Draw one QND readout; returns the sample and the latent spin value."""
    n_plus, n_minus, true_sz = sample_qnd_counts(params, pulse, spins, rng, 1, model)
    return PolarimeterSample(float(n_plus[0]), float(n_minus[0])), float(true_sz[0])


def sample_qnd_pair(
    params: InteractionParams,
    pulse: PulseConfig,
    spins: SpinEnsembleState,
    separation: float,
    rng: np.random.Generator,
    model: CountingModel = CountingModel.GAUSSIAN_LIMIT,
) -> QndOutcomePair:
    """Probe the same spin state with two pulses ``separation`` seconds apart.

    One latent S_z draw serves both pulses; each adds its own vacuum noise.
    The predicted Pearson correlation of the two readouts is
    kappa^2 / (1 + kappa^2).  A separation at or beyond the coherence time
    warns and redraws an independent spin value for the second pulse.
    """
    if separation < 0:
        raise ValueError("separation must be >= 0")
    _require_linearization(params, spins)
    decorrelated = separation >= spins.coherence_time
    if decorrelated:
        warnings.warn(
            f"pulse separation {separation:.3g} s >= coherence time "
            f"{spins.coherence_time:.3g} s: second pulse sees an independent spin draw",
            stacklevel=2,
        )
    sz1 = float(rng.normal(spins.mean_sz, spins.sigma_sz()))
    sz2 = float(rng.normal(spins.mean_sz, spins.sigma_sz())) if decorrelated else sz1
    samples = []
    for sz in (sz1, sz2):
        n_plus, n_minus = sample_vacuum_counts(pulse, model, rng, 1)
        shift = params.alpha_t1 * pulse.j() * sz
        n_p, n_m = _lift_negative_counts(n_plus + shift, n_minus - shift)
        samples.append(PolarimeterSample(float(n_p[0]), float(n_m[0])))
    return QndOutcomePair(
        first=samples[0],
        second=samples[1],
        true_sz=sz1,
        pulse_separation=separation,
        true_sz_second=sz2,
    )


def sample_qnd_pairs(
    params: InteractionParams,
    pulse: PulseConfig,
    spins: SpinEnsembleState,
    separation: float,
    rng: np.random.Generator,
    size: int,
    model: CountingModel = CountingModel.GAUSSIAN_LIMIT,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized pair sampler; returns (j_y_1, j_y_2, true_sz) arrays."""
    if separation < 0:
        raise ValueError("separation must be >= 0")
    _require_linearization(params, spins)
    if separation >= spins.coherence_time:
        warnings.warn(
            f"pulse separation {separation:.3g} s >= coherence time "
            f"{spins.coherence_time:.3g} s: second pulse sees an independent spin draw",
            stacklevel=2,
        )
        sz1 = rng.normal(spins.mean_sz, spins.sigma_sz(), size)
        sz2 = rng.normal(spins.mean_sz, spins.sigma_sz(), size)
    else:
        sz1 = rng.normal(spins.mean_sz, spins.sigma_sz(), size)
        sz2 = sz1
    gain = params.alpha_t1 * pulse.j()
    out = []
    for sz in (sz1, sz2):
        n_plus, n_minus = sample_vacuum_counts(pulse, model, rng, size)
        out.append((n_plus - n_minus) / 2.0 + gain * sz)
    return out[0], out[1], sz1


@dataclass(frozen=True)
class ConditionalVarianceResult:
    """Linear-regression variance budget of a readout pair.

    ``residual_variance`` is min over beta of Var(J2 - beta*J1), i.e. the
    second readout's variance after the best linear prediction from the
    first.  ``reduction_factor`` = 1 - beta is the fraction of the
    spin-noise variance that survives conditioning: subtracting the vacuum
    floor, (residual - J/2) / (broadened - J/2) = 1 - beta, which for the
    Gaussian model equals 1 / (1 + kappa^2).
    """

    residual_variance: float
    beta: float
    unconditioned_variance: float
    reduction_factor: float
    n_pairs: int


def _pairs_to_arrays(pairs) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(pairs, tuple) and len(pairs) == 2:
        return np.asarray(pairs[0], float), np.asarray(pairs[1], float)
    first = np.array([p.first.j_y_prime for p in pairs], float)
    second = np.array([p.second.j_y_prime for p in pairs], float)
    return first, second


def conditional_variance(pairs, min_pairs: int = 100) -> ConditionalVarianceResult:
    """Residual variance of the second readout given the first.

    Accepts a list of QndOutcomePair or a (j1, j2) array pair.  For
    back-action-evading pairs the spin-noise contribution shrinks by
    1/(1 + kappa^2) while the vacuum floor J/2 remains, so the reported
    reduction factor isolates how much spin information the first pulse
    extracted.
    """
    j1, j2 = _pairs_to_arrays(pairs)
    n = len(j1)
    if n != len(j2):
        raise ValueError("pair arrays must have equal length")
    if n < min_pairs:
        raise TooFewSamplesError(f"need at least {min_pairs} pairs, got {n}")
    var1 = float(np.var(j1, ddof=1))
    var2 = float(np.var(j2, ddof=1))
    if var1 == 0:
        raise ValueError("first readout has zero variance; regression undefined")
    cov = float(np.cov(j1, j2, ddof=1)[0, 1])
    beta = cov / var1
    residual = var2 - cov**2 / var1
    return ConditionalVarianceResult(
        residual_variance=residual,
        beta=beta,
        unconditioned_variance=var2,
        reduction_factor=1.0 - beta,
        n_pairs=n,
    )
