"""Counting statistics of a coherent probe pulse on a balanced polarimeter.

An x-polarized coherent pulse carrying ``2J`` photons on average is split
50/50 onto two photodiodes and the readout is the half-difference of the
two counts, J_y' = (n_plus - n_minus) / 2.  With nothing in the beam the
readout is zero-mean with variance J/2 ("vacuum noise"); the samplers here
reproduce that statistic either exactly in the continuous limit or through
a discrete partition of photons, and exact_outcome_pmf provides a
brute-force enumeration oracle against which the discrete samplers can be
checked.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CountingModel",
    "ENUMERATION_LIMIT",
    "GAUSSIAN_MODEL_MIN_PHOTONS",
    "PolarimeterSample",
    "PulseConfig",
    "UnitsBasis",
    "exact_outcome_pmf",
    "pulse_stream",
    "sample_vacuum_counts",
    "sample_vacuum_outcome",
    "vacuum_sigma",
]

# Enumeration oracle refuses totals above this (memory/runtime bound).
ENUMERATION_LIMIT = 10_000

# Below this mean photon number the Gaussian limit is a poor stand-in for
# the discrete partition (relative skew corrections scale like (2J)^-1/2).
GAUSSIAN_MODEL_MIN_PHOTONS = 1e4


class UnitsBasis(enum.Enum):
    """Whether counts refer to photons incident on the polarimeter or to
    photoelectrons after the photodiodes."""

    INCIDENT_PHOTONS = "incident_photons"
    PHOTOELECTRONS = "photoelectrons"


class CountingModel(enum.Enum):
    """How the two polarimeter counts are drawn for a no-atom pulse.

    POISSON_SPLIT
        Total ~ Poisson(2J) split independently; equivalently each port is
        an independent Poisson(J).  Var(J_y') = J/2 for every J.
    BINOMIAL_SPLIT
        Fixed total of round(2J) photons, each sent to either port with
        probability 1/2.  Var(J_y') = round(2J)/4.
    GAUSSIAN_LIMIT
        J_y' ~ Normal(0, sqrt(J/2)) directly; the large-2J limit of the
        discrete models and the fast default above ~1e4 photons per pulse.
    """

    POISSON_SPLIT = "poisson"
    BINOMIAL_SPLIT = "binomial"
    GAUSSIAN_LIMIT = "gaussian"


@dataclass(frozen=True)
class PulseConfig:
    """Coherent probe pulse.

    Parameters
    ----------
    mean_photon_number : float
        Average photons per pulse (the "2J" of the counting statistics).
    duration : float
        Pulse length in seconds; sets the charge-collection ramp of the
        detection chain.
    detuning : float
        Probe detuning from atomic resonance, rad/s.  Only enters the
        feasibility checks.
    probe_linewidth : float
        Probe laser linewidth, rad/s.  Only enters the feasibility checks.
    """

    mean_photon_number: float
    duration: float = 400e-9
    detuning: float = 2 * math.pi * 1e9
    probe_linewidth: float = 2 * math.pi * 5e6

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean_photon_number) or self.mean_photon_number < 0:
            raise ValueError(
                f"mean_photon_number must be finite and >= 0, got {self.mean_photon_number!r}"
            )
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration!r}")

    def j(self) -> float:
        """Stokes J = mean_photon_number / 2 (2 * j() == mean_photon_number exactly)."""
        return self.mean_photon_number / 2.0


@dataclass(frozen=True)
class PolarimeterSample:
    """One polarimeter outcome: counts at the two ports.

    Counts are stored as floats: the discrete samplers always produce whole
    numbers, while the Gaussian limit and the Faraday-rotation shift produce
    fractional counts.  The half-difference is never rounded.
    """

    n_plus: float
    n_minus: float
    units_basis: UnitsBasis = UnitsBasis.INCIDENT_PHOTONS

    def __post_init__(self) -> None:
        if not (math.isfinite(self.n_plus) and math.isfinite(self.n_minus)):
            raise ValueError("counts must be finite")
        if self.n_plus < 0 or self.n_minus < 0:
            raise ValueError(
                f"counts must be nonnegative, got ({self.n_plus!r}, {self.n_minus!r})"
            )

    @property
    def j_y_prime(self) -> float:
        """Half-difference (n_plus - n_minus) / 2."""
        return (self.n_plus - self.n_minus) / 2.0


def pulse_stream(seed: int, pulse_index: int, lane: int = 0) -> np.random.Generator:
    """Independent, reproducible random stream for one pulse.

    Streams derived from the same (seed, lane, pulse_index) are bit-identical
    across runs, and streams for distinct indices are statistically
    independent, so pulse batches can be fanned out over workers without
    changing any result.  ``lane`` separates unrelated consumers of the same
    seed (e.g. the points of a photon-number sweep).
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(lane, pulse_index))
    return np.random.default_rng(ss)


def vacuum_sigma(pulse: PulseConfig) -> float:
    """Shot-noise standard deviation sqrt(J/2) of the no-atom readout."""
    return math.sqrt(pulse.mean_photon_number / 4.0)


def _lift_negative_counts(n_plus: np.ndarray, n_minus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Keep counts nonnegative without touching the half-difference.  Only
    # reachable in pathological regimes (Gaussian model at tiny 2J).
    shift = np.maximum(0.0, -np.minimum(n_plus, n_minus))
    if np.any(shift > 0):
        n_plus = n_plus + shift
        n_minus = n_minus + shift
    return n_plus, n_minus


def sample_vacuum_counts(
    pulse: PulseConfig,
    model: CountingModel,
    rng: np.random.Generator,
    size: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``size`` no-atom count pairs; returns (n_plus, n_minus) arrays.

    All three models give E[J_y'] = 0 and Var[J_y'] -> J/2; draws are
    deterministic given the generator state.
    """
    two_j = pulse.mean_photon_number
    j = pulse.j()
    if model is CountingModel.POISSON_SPLIT:
        n_plus = rng.poisson(j, size).astype(float)
        n_minus = rng.poisson(j, size).astype(float)
    elif model is CountingModel.BINOMIAL_SPLIT:
        total = int(round(two_j))
        n_plus = rng.binomial(total, 0.5, size).astype(float)
        n_minus = total - n_plus
    elif model is CountingModel.GAUSSIAN_LIMIT:
        if 0 < two_j < GAUSSIAN_MODEL_MIN_PHOTONS:
            warnings.warn(
                f"GAUSSIAN_LIMIT at 2J={two_j:g} < {GAUSSIAN_MODEL_MIN_PHOTONS:g}: "
                "discrete counting models are the faithful choice here",
                stacklevel=2,
            )
        j_y = rng.normal(0.0, vacuum_sigma(pulse), size)
        n_plus = j + j_y
        n_minus = j - j_y
        n_plus, n_minus = _lift_negative_counts(n_plus, n_minus)
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown counting model {model!r}")
    return n_plus, n_minus


def sample_vacuum_outcome(
    pulse: PulseConfig,
    model: CountingModel,
    rng: np.random.Generator,
) -> PolarimeterSample:
    """Draw one no-atom polarimeter outcome."""
    n_plus, n_minus = sample_vacuum_counts(pulse, model, rng, size=1)
    return PolarimeterSample(float(n_plus[0]), float(n_minus[0]))


def exact_outcome_pmf(
    total_photons: int,
    model: CountingModel = CountingModel.BINOMIAL_SPLIT,
) -> dict[float, float]:
    """Exact pmf of J_y' for a fixed total split 50/50 between the ports.

    Enumeration oracle for the discrete samplers: n_plus ~ Binomial(total,
    1/2) and J_y' = n_plus - total/2, so the support is the half-integer
    lattice {-total/2, ..., +total/2} in unit steps.  Probabilities sum to
    one to better than 1e-12.
    """
    if model is not CountingModel.BINOMIAL_SPLIT:
        raise ValueError("exact enumeration is defined for BINOMIAL_SPLIT only")
    if total_photons != int(total_photons) or total_photons < 0:
        raise ValueError(f"total_photons must be a nonnegative integer, got {total_photons!r}")
    total = int(total_photons)
    if total > ENUMERATION_LIMIT:
        raise ValueError(
            f"total_photons={total} exceeds the enumeration bound {ENUMERATION_LIMIT}"
        )
    # exact integer combinatorics, then one correctly-rounded division each:
    # C(n, k+1) = C(n, k) * (n - k) // (k + 1) stays exact in big ints
    denominator = 1 << total
    coefficient = 1
    pmf: dict[float, float] = {}
    for k in range(total + 1):
        pmf[k - total / 2.0] = coefficient / denominator
        coefficient = coefficient * (total - k) // (k + 1)
    return pmf
