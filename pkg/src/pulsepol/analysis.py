"""Statistical reduction of pulse-train polarimeter records: Gaussian fits,
shot-noise scaling fits, histograms, and pair correlations."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DegenerateDataError, TooFewSamplesError
from .stokes import UnitsBasis

__all__ = [
    "CorrelationResult",
    "GaussianFitResult",
    "HistogramResult",
    "MeasurementRecord",
    "ScalingFitResult",
    "chi_square_gof",
    "correlation",
    "fit_gaussian",
    "fit_sigma_scaling",
    "histogram",
]

MIN_FIT_SAMPLES = 100
MIN_SCALING_POINTS = 3


@dataclass(frozen=True)
class MeasurementRecord:
    """A pulse train's readouts plus the settings that produced them."""

    readouts: np.ndarray
    photon_number_2j: float
    pulse_duration: float
    units_basis: UnitsBasis
    seed: int

    def __post_init__(self) -> None:
        readouts = np.array(self.readouts, dtype=float, copy=True)
        if readouts.ndim != 1 or len(readouts) == 0:
            raise ValueError("readouts must be a nonempty 1-D array")
        if not np.all(np.isfinite(readouts)):
            raise ValueError("readouts must be finite")
        readouts.setflags(write=False)
        object.__setattr__(self, "readouts", readouts)

    def __len__(self) -> int:
        return len(self.readouts)


@dataclass(frozen=True)
class GaussianFitResult:
    mu: float
    sigma: float
    mu_err: float
    sigma_err: float
    ks_statistic: float
    ks_pvalue: float
    n_samples: int

    def summary_lines(self) -> list[str]:
        return [
            f"n_samples: {self.n_samples}",
            f"mu: {self.mu!r}",
            f"mu_err: {self.mu_err!r}",
            f"sigma: {self.sigma!r}",
            f"sigma_err: {self.sigma_err!r}",
            f"ks_statistic: {self.ks_statistic!r}",
            f"ks_pvalue: {self.ks_pvalue!r}",
        ]


def _as_readouts(record) -> np.ndarray:
    if isinstance(record, MeasurementRecord):
        return record.readouts
    return np.asarray(record, dtype=float)


def fit_gaussian(record) -> GaussianFitResult:
    """Maximum-likelihood Gaussian fit with estimator uncertainties.

    mu and sigma are the sample mean and (N-1)-normalized standard
    deviation; mu_err = sigma/sqrt(N) and sigma_err = sigma/sqrt(2(N-1)).
    Goodness of fit is a KS test of the data against Normal(mu, sigma).
    """
    x = _as_readouts(record)
    n = len(x)
    if n < MIN_FIT_SAMPLES:
        raise TooFewSamplesError(f"Gaussian fit needs >= {MIN_FIT_SAMPLES} readouts, got {n}")
    mu = float(np.mean(x))
    sigma = float(np.std(x, ddof=1))
    mu_err = sigma / math.sqrt(n)
    sigma_err = sigma / math.sqrt(2.0 * (n - 1))
    if sigma == 0.0:
        # degenerate data cannot look Gaussian
        ks_stat, ks_p = 1.0, 0.0
    else:
        ks = stats.kstest(x, "norm", args=(mu, sigma))
        ks_stat, ks_p = float(ks.statistic), float(ks.pvalue)
    return GaussianFitResult(
        mu=mu,
        sigma=sigma,
        mu_err=mu_err,
        sigma_err=sigma_err,
        ks_statistic=ks_stat,
        ks_pvalue=ks_p,
        n_samples=n,
    )


@dataclass(frozen=True)
class ScalingFitResult:
    """Fit of sigma = sqrt(epsilon * J / 2) across photon numbers."""

    epsilon: float
    epsilon_err: float
    points: tuple[tuple[float, float, float], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


def fit_sigma_scaling(points) -> ScalingFitResult:
    """Weighted least squares of sigma^2 = epsilon * J/2 through the origin.

    ``points`` is a sequence of (2J, sigma, sigma_err) triples.  The fit is
    linear in epsilon with per-point variance (2*sigma*sigma_err)^2; if any
    point carries a nonpositive error the fit falls back to equal weights.
    """
    pts = tuple((float(a), float(b), float(c)) for a, b, c in points)
    if len(pts) < MIN_SCALING_POINTS:
        raise TooFewSamplesError(
            f"scaling fit needs >= {MIN_SCALING_POINTS} points, got {len(pts)}"
        )
    two_j = np.array([p[0] for p in pts])
    sigma = np.array([p[1] for p in pts])
    sigma_err = np.array([p[2] for p in pts])
    if np.any(two_j <= 0):
        raise ValueError("photon numbers must be positive")
    if np.unique(two_j).size < 2:
        raise DegenerateDataError("all points share one photon number; slope undefined")
    if two_j.max() / two_j.min() < 10.0:
        warnings.warn(
            f"photon numbers span only {two_j.max() / two_j.min():.2g}x; "
            "a decade or more is recommended for the scaling fit",
            stacklevel=2,
        )
    x = two_j / 4.0  # J/2
    y = sigma**2
    if np.all(sigma_err > 0) and np.all(sigma > 0):
        w = 1.0 / (2.0 * sigma * sigma_err) ** 2
        denom = float(np.sum(w * x * x))
        epsilon = float(np.sum(w * x * y) / denom)
        epsilon_err = math.sqrt(1.0 / denom)
    else:
        denom = float(np.sum(x * x))
        epsilon = float(np.sum(x * y) / denom)
        resid = y - epsilon * x
        epsilon_err = math.sqrt(max(float(np.sum(resid**2)), 0.0) / ((len(pts) - 1) * denom))
    return ScalingFitResult(epsilon=epsilon, epsilon_err=epsilon_err, points=pts)


@dataclass(frozen=True)
class HistogramResult:
    """Binned counts with edges; counts always sum to the sample size."""

    edges: np.ndarray
    counts: np.ndarray
    n_samples: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def bin_width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    def theory_curve(self, sigma: float, mu: float = 0.0) -> np.ndarray:
        """Expected per-bin counts for a Normal(mu, sigma) population,
        i.e. N * bin_width * pdf(bin center)."""
        if sigma <= 0:
            return np.zeros_like(self.centers)
        return self.n_samples * self.bin_width * stats.norm.pdf(self.centers, mu, sigma)


def histogram(record, bin_width: float | None = None, bin_count: int | None = None) -> HistogramResult:
    """Histogram a record with Scott's rule by default.

    Exactly one of ``bin_width``/``bin_count`` may be given.  All-equal data
    collapse to a single occupied bin rather than a zero-width range.
    """
    x = _as_readouts(record)
    n = len(x)
    if bin_width is not None and bin_count is not None:
        raise ValueError("give bin_width or bin_count, not both")
    if bin_width is not None and bin_width <= 0:
        raise ValueError(f"bin_width must be positive, got {bin_width!r}")
    if bin_count is not None and bin_count < 1:
        raise ValueError(f"bin_count must be >= 1, got {bin_count!r}")
    lo, hi = float(np.min(x)), float(np.max(x))
    if lo == hi:
        half = 0.5 * (abs(lo) if lo != 0 else 1.0)
        edges = np.array([lo - half, hi + half])
        counts = np.array([n])
        return HistogramResult(edges=edges, counts=counts, n_samples=n)
    if bin_count is None:
        if bin_width is None:
            bin_width = 3.49 * float(np.std(x, ddof=1)) / n ** (1.0 / 3.0)  # Scott's rule
            if bin_width == 0:
                bin_width = hi - lo
        bin_count = max(1, int(math.ceil((hi - lo) / bin_width)))
        edges = lo + bin_width * np.arange(bin_count + 1)
        # last edge may fall a hair short of the max through rounding
        if edges[-1] < hi:
            edges = np.append(edges, edges[-1] + bin_width)
    else:
        edges = np.linspace(lo, hi, bin_count + 1)
    counts, edges = np.histogram(x, bins=edges)
    return HistogramResult(edges=edges, counts=counts, n_samples=n)


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    ci_low: float
    ci_high: float
    n_pairs: int


def correlation(pairs) -> CorrelationResult:
    """Pearson correlation with a Fisher-z 95% confidence interval.

    ``pairs`` is a sequence of (x, y) tuples or a pair of equal-length
    arrays.  Raises on zero-variance input.
    """
    if isinstance(pairs, tuple) and len(pairs) == 2 and np.ndim(pairs[0]) == 1:
        x = np.asarray(pairs[0], float)
        y = np.asarray(pairs[1], float)
    else:
        arr = np.asarray(pairs, float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("pairs must be an (n, 2) sequence")
        x, y = arr[:, 0], arr[:, 1]
    n = len(x)
    if n != len(y):
        raise ValueError("pair arrays must have equal length")
    if n < MIN_FIT_SAMPLES:
        raise TooFewSamplesError(f"correlation needs >= {MIN_FIT_SAMPLES} pairs, got {n}")
    if np.std(x) == 0 or np.std(y) == 0:
        raise DegenerateDataError("zero-variance input; correlation undefined")
    r = float(np.corrcoef(x, y)[0, 1])
    if abs(r) >= 1.0:
        return CorrelationResult(r=r, ci_low=r, ci_high=r, n_pairs=n)
    z = math.atanh(r)
    half = 1.959963984540054 / math.sqrt(n - 3)
    return CorrelationResult(
        r=r, ci_low=math.tanh(z - half), ci_high=math.tanh(z + half), n_pairs=n
    )


def chi_square_gof(
    observed: np.ndarray,
    expected: np.ndarray,
    min_expected: float = 5.0,
) -> tuple[float, float, int]:
    """Pearson chi-square against expected counts, pooling sparse bins.

    Adjacent bins are merged until each pooled bin expects at least
    ``min_expected`` counts (the remainder folds into the last pool).
    Returns (statistic, p_value, dof) with dof = pools - 1.
    """
    obs = np.asarray(observed, float)
    exp = np.asarray(expected, float)
    if obs.shape != exp.shape:
        raise ValueError("observed and expected must have the same shape")
    pooled_obs: list[float] = []
    pooled_exp: list[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if pooled_exp:
            pooled_obs[-1] += acc_o
            pooled_exp[-1] += acc_e
        else:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
    if len(pooled_exp) < 2:
        raise DegenerateDataError("not enough occupied bins for a chi-square test")
    o = np.array(pooled_obs)
    e = np.array(pooled_exp)
    stat = float(np.sum((o - e) ** 2 / e))
    dof = len(e) - 1
    p = float(stats.chi2.sf(stat, dof))
    return stat, p, dof
