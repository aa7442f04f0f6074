"""Experiment runners: simulate pulse trains through the full chain, reduce
them, and persist plot-ready tables plus a JSON manifest per run.

Data files (records, histograms, sweep tables, waveforms) contain no
timestamps and are byte-identical across runs with the same configuration
and seed; the manifest records their SHA-256 digests alongside the resolved
configuration, so a run can be verified and reproduced from the manifest
alone.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    GaussianFitResult,
    MeasurementRecord,
    ScalingFitResult,
    correlation,
    fit_gaussian,
    fit_sigma_scaling,
    histogram,
)
from .config import RunConfig, SWEEP_PHOTON_NUMBERS, config_to_dict
from .detector import (
    DEFAULT_ARRIVAL_TIME,
    WaveformTrace,
    detect_counts,
    read_peak,
    synth_preamp_waveform,
    synth_shaper_waveform,
)
from .errors import AnalysisError, ConfigError, TooFewSamplesError
from .spin import conditional_variance, kappa_squared, sample_qnd_counts, sample_qnd_pairs
from .stokes import UnitsBasis, pulse_stream, sample_vacuum_counts, vacuum_sigma

__all__ = [
    "QndRunResult",
    "SweepRunResult",
    "TwoPulseRunResult",
    "VacuumRunResult",
    "WaveformRunResult",
    "run_qnd",
    "run_sweep",
    "run_two_pulse",
    "run_vacuum",
    "run_waveform_demo",
]

OUTPUT_ROOT_ENV = "PULSEPOL_OUT"


# ---------------------------------------------------------------------------
# persistence helpers
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_report(path: Path, items: list[tuple[str, object]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in items:
            fh.write(f"{key}: {value}\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _resolve_out_dir(config: RunConfig, out_dir, command: str) -> Path:
    if out_dir is not None:
        path = Path(out_dir)
    elif config.output_dir is not None:
        path = config.output_dir
    else:
        path = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs")) / command
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(
    out_dir: Path,
    command: str,
    config: RunConfig,
    summary: dict,
    data_files: list[Path],
    started: str,
) -> Path:
    manifest = {
        "tool": {"name": "pulsepol", "version": __version__},
        "command": command,
        "config": config_to_dict(config),
        "started_utc": started,
        "finished_utc": _utc_now(),
        "outputs": {
            p.name: {"sha256": _sha256(p), "bytes": p.stat().st_size} for p in data_files
        },
        "summary": summary,
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


class _RunWriter:
    """Tracks files written by a run and removes them if the run fails."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: list[Path] = []

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self.out_dir / name
        _write_csv(path, header, rows)
        self.files.append(path)
        return path

    def report(self, name: str, items: list[tuple[str, object]]) -> Path:
        path = self.out_dir / name
        _write_report(path, items)
        self.files.append(path)
        return path

    def trace(self, name: str, trace: WaveformTrace) -> Path:
        path = self.out_dir / name
        trace.save_txt(path)
        self.files.append(path)
        return path

    def discard_all(self) -> None:
        for path in self.files:
            try:
                path.unlink()
            except OSError:
                pass


# ---------------------------------------------------------------------------
# chain simulation
# ---------------------------------------------------------------------------

def _simulate_chain_readouts(config: RunConfig, n_pulses: int, lane: int = 0) -> np.ndarray:
    """Counts -> photoelectrons -> shaped waveform -> ADC peak -> J_y'.

    The chain is linear in the charge, so the shaped unit-charge response is
    synthesized once and scaled per pulse; readout noise, quantization and
    peak search still run on every pulse's trace.  Each pulse consumes its
    own (seed, lane, pulse_index) substream, so results are independent of
    batching or worker count.
    """
    pulse, det = config.pulse, config.detector
    unit_preamp = synth_preamp_waveform(1.0, pulse.duration, det)
    unit_shaped = synth_shaper_waveform(unit_preamp, det)
    unit = unit_shaped.samples
    fixed_time = None
    if det.peak_strategy == "fixed_time":
        # sample where the nominal pulse shape peaks
        fixed_time = unit_shaped.t0 + int(np.argmax(np.abs(unit))) * unit_shaped.sample_period
    readouts = np.empty(n_pulses)
    for i in range(n_pulses):
        rng = pulse_stream(config.seed, i, lane=lane)
        n_plus, n_minus = sample_vacuum_counts(pulse, config.counting_model, rng, 1)
        pe_plus, pe_minus = detect_counts(n_plus, n_minus, det, rng)
        delta = float(pe_plus[0] - pe_minus[0])
        trace = WaveformTrace(unit_shaped.sample_period, unit * delta, t0=unit_shaped.t0)
        peak = read_peak(
            trace, det, rng, pulse_duration=pulse.duration, fixed_sample_time=fixed_time
        )
        readouts[i] = peak.j_y_prime
    return readouts


def _photoelectron_sigma_theory(config: RunConfig) -> float:
    """Predicted vacuum sigma in photoelectron units, sqrt(eta * J / 2)."""
    return math.sqrt(config.detector.quantum_efficiency) * vacuum_sigma(config.pulse)


# ---------------------------------------------------------------------------
# vacuum-noise run
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VacuumRunResult:
    record: MeasurementRecord
    fit: GaussianFitResult | None
    fit_error: str | None
    out_dir: Path
    manifest_path: Path
    summary: dict


def run_vacuum(config: RunConfig, out_dir=None) -> VacuumRunResult:
    """Simulate a no-atom pulse train through the full chain and fit it.

    Writes record.csv, histogram.csv (with the Gaussian theory curve),
    report.txt and manifest.json.  If the fit refuses (too few pulses) the
    record is still written and the result carries ``fit_error`` instead of
    a fit.
    """
    if config.spins is not None or config.interaction is not None:
        raise ConfigError("vacuum run must not carry spins or interaction sections")
    started = _utc_now()
    out = _resolve_out_dir(config, out_dir, "vacuum")
    readouts = _simulate_chain_readouts(config, config.n_pulses)
    record = MeasurementRecord(
        readouts=readouts,
        photon_number_2j=config.pulse.mean_photon_number,
        pulse_duration=config.pulse.duration,
        units_basis=UnitsBasis.PHOTOELECTRONS,
        seed=config.seed,
    )
    sigma_theory = _photoelectron_sigma_theory(config)
    writer = _RunWriter(out)
    try:
        writer.csv(
            "record.csv",
            ["pulse_index", "j_y_prime_photoelectrons"],
            ((i, v) for i, v in enumerate(record.readouts)),
        )
        fit: GaussianFitResult | None = None
        fit_error: str | None = None
        try:
            fit = fit_gaussian(record)
        except TooFewSamplesError as exc:
            fit_error = str(exc)
        report: list[tuple[str, object]] = [
            ("command", "vacuum"),
            ("n_pulses", config.n_pulses),
            ("photon_number_2j", _fmt(config.pulse.mean_photon_number)),
            ("pulse_duration_seconds", _fmt(config.pulse.duration)),
            ("units_basis", record.units_basis.value),
            ("sigma_theory_photoelectrons", _fmt(sigma_theory)),
        ]
        if fit is not None:
            hist = histogram(record)
            theory = hist.theory_curve(sigma_theory)
            writer.csv(
                "histogram.csv",
                ["bin_center_photoelectrons", "count", "theory_count"],
                zip(hist.centers, hist.counts, theory),
            )
            report += [
                ("mu_hat", _fmt(fit.mu)),
                ("mu_err", _fmt(fit.mu_err)),
                ("sigma_hat", _fmt(fit.sigma)),
                ("sigma_err", _fmt(fit.sigma_err)),
                ("ks_statistic", _fmt(fit.ks_statistic)),
                ("ks_pvalue", _fmt(fit.ks_pvalue)),
            ]
        else:
            report.append(("fit_error", fit_error))
        writer.report("report.txt", report)
    except Exception:
        writer.discard_all()
        raise
    summary = {
        "n_pulses": config.n_pulses,
        "sigma_theory": sigma_theory,
        "sigma_hat": fit.sigma if fit else None,
        "sigma_err": fit.sigma_err if fit else None,
        "mu_hat": fit.mu if fit else None,
        "ks_pvalue": fit.ks_pvalue if fit else None,
        "fit_error": fit_error,
    }
    manifest_path = _write_manifest(out, "vacuum", config, summary, writer.files, started)
    return VacuumRunResult(
        record=record,
        fit=fit,
        fit_error=fit_error,
        out_dir=out,
        manifest_path=manifest_path,
        summary=summary,
    )


# ---------------------------------------------------------------------------
# photon-number sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRunResult:
    scaling: ScalingFitResult
    records: tuple[MeasurementRecord, ...]
    out_dir: Path
    manifest_path: Path
    summary: dict


def run_sweep(config: RunConfig, photon_numbers=None, out_dir=None) -> SweepRunResult:
    """Run one vacuum train per photon number and fit sigma = sqrt(eps*J/2).

    Each sweep point uses its own random-stream lane so points are
    statistically independent under a shared seed.  When the detector's
    assumed feedback capacitance differs from the physical one the fitted
    epsilon absorbs the mis-calibration; the report flags this explicitly
    as an assumed-calibration hypothesis rather than physics.
    """
    if config.spins is not None or config.interaction is not None:
        raise ConfigError("sweep run must not carry spins or interaction sections")
    values = tuple(float(v) for v in (photon_numbers or SWEEP_PHOTON_NUMBERS))
    if len(values) < 3:
        raise ConfigError(f"sweep needs at least 3 photon numbers, got {len(values)}")
    if any(v <= 0 for v in values):
        raise ConfigError("sweep photon numbers must all be positive")
    started = _utc_now()
    out = _resolve_out_dir(config, out_dir, "sweep")
    writer = _RunWriter(out)
    records: list[MeasurementRecord] = []
    points: list[tuple[float, float, float]] = []
    try:
        for lane, two_j in enumerate(values):
            sub = replace(config, pulse=replace(config.pulse, mean_photon_number=two_j))
            readouts = _simulate_chain_readouts(sub, config.n_pulses, lane=lane)
            record = MeasurementRecord(
                readouts=readouts,
                photon_number_2j=two_j,
                pulse_duration=config.pulse.duration,
                units_basis=UnitsBasis.PHOTOELECTRONS,
                seed=config.seed,
            )
            records.append(record)
            writer.csv(
                f"record_point{lane}.csv",
                ["pulse_index", "j_y_prime_photoelectrons"],
                ((i, v) for i, v in enumerate(readouts)),
            )
            fit = fit_gaussian(record)
            points.append((two_j, fit.sigma, fit.sigma_err))
        scaling = fit_sigma_scaling(points)
        writer.csv(
            "sweep.csv",
            [
                "photon_number_2j_incident",
                "sigma_hat_photoelectrons",
                "sigma_err_photoelectrons",
                "n_pulses",
            ],
            ((tj, s, se, config.n_pulses) for tj, s, se in points),
        )
        det = config.detector
        calibration_note = None
        if det.assumed_feedback_capacitance != det.feedback_capacitance:
            ratio = det.assumed_feedback_capacitance / det.feedback_capacitance
            calibration_note = (
                f"readout calibrated with C_f' = {ratio:.4g} x the physical C_f; "
                "the fitted epsilon reflects this assumed mis-calibration, not physics"
            )
        report: list[tuple[str, object]] = [
            ("command", "sweep"),
            ("n_pulses_per_point", config.n_pulses),
            ("photon_numbers_2j", " ".join(_fmt(v) for v in values)),
            ("epsilon_hat", _fmt(scaling.epsilon)),
            ("epsilon_err", _fmt(scaling.epsilon_err)),
        ]
        if calibration_note:
            report.append(("calibration_hypothesis", calibration_note))
        writer.report("report.txt", report)
    except Exception:
        writer.discard_all()
        raise
    summary = {
        "n_pulses_per_point": config.n_pulses,
        "photon_numbers_2j": list(values),
        "epsilon_hat": scaling.epsilon,
        "epsilon_err": scaling.epsilon_err,
        "calibration_hypothesis": calibration_note,
    }
    manifest_path = _write_manifest(out, "sweep", config, summary, writer.files, started)
    return SweepRunResult(
        scaling=scaling,
        records=tuple(records),
        out_dir=out,
        manifest_path=manifest_path,
        summary=summary,
    )


# ---------------------------------------------------------------------------
# QND broadening run
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QndRunResult:
    record: MeasurementRecord
    empirical_variance: float
    predicted_variance: float
    kappa_squared: float
    consistent: bool
    out_dir: Path
    manifest_path: Path
    summary: dict


def run_qnd(config: RunConfig, out_dir=None) -> QndRunResult:
    """Probe a spin ensemble and compare the readout variance budget.

    Operates at the polarimeter-count level (incident-photon units) where
    the broadened-variance prediction J/2 + (alpha*t1*J)^2 Var(S_z) is
    exact; the electronics only rescale both terms identically.
    """
    if config.spins is None or config.interaction is None:
        raise ConfigError("qnd run needs both spins and interaction sections")
    if not config.interaction.linearization_ok(config.spins):
        raise ConfigError(
            "interaction strength violates the first-order rotation regime "
            "for this spin state"
        )
    started = _utc_now()
    out = _resolve_out_dir(config, out_dir, "qnd")
    rng = pulse_stream(config.seed, 0)
    n_plus, n_minus, true_sz = sample_qnd_counts(
        config.interaction, config.pulse, config.spins, rng, config.n_pulses,
        model=config.counting_model,
    )
    readouts = (n_plus - n_minus) / 2.0
    record = MeasurementRecord(
        readouts=readouts,
        photon_number_2j=config.pulse.mean_photon_number,
        pulse_duration=config.pulse.duration,
        units_basis=UnitsBasis.INCIDENT_PHOTONS,
        seed=config.seed,
    )
    j = config.pulse.j()
    vacuum_var = j / 2.0
    gain = config.interaction.alpha_t1 * j
    broadening = gain**2 * config.spins.var_sz
    predicted = vacuum_var + broadening
    kappa2 = kappa_squared(config.interaction, config.pulse, config.spins)
    empirical = float(np.var(readouts, ddof=1))
    # variance of a variance estimate for Gaussian data: 2 sigma^4 / (n - 1)
    mc_se = predicted * math.sqrt(2.0 / (config.n_pulses - 1)) if config.n_pulses > 1 else float("inf")
    consistent = abs(empirical - predicted) <= 3.0 * mc_se
    writer = _RunWriter(out)
    try:
        writer.csv(
            "record.csv",
            ["pulse_index", "j_y_prime_incident_photons", "true_sz"],
            ((i, v, s) for i, (v, s) in enumerate(zip(readouts, true_sz))),
        )
        writer.report(
            "report.txt",
            [
                ("command", "qnd"),
                ("n_pulses", config.n_pulses),
                ("photon_number_2j", _fmt(config.pulse.mean_photon_number)),
                ("units_basis", record.units_basis.value),
                ("kappa_squared", _fmt(kappa2)),
                ("vacuum_variance", _fmt(vacuum_var)),
                ("broadening_term", _fmt(broadening)),
                ("predicted_variance", _fmt(predicted)),
                ("empirical_variance", _fmt(empirical)),
                ("mc_standard_error", _fmt(mc_se)),
                ("consistent_within_3se", str(consistent).lower()),
            ],
        )
    except Exception:
        writer.discard_all()
        raise
    summary = {
        "n_pulses": config.n_pulses,
        "kappa_squared": kappa2,
        "vacuum_variance": vacuum_var,
        "broadening_term": broadening,
        "predicted_variance": predicted,
        "empirical_variance": empirical,
        "consistent_within_3se": consistent,
    }
    manifest_path = _write_manifest(out, "qnd", config, summary, writer.files, started)
    return QndRunResult(
        record=record,
        empirical_variance=empirical,
        predicted_variance=predicted,
        kappa_squared=kappa2,
        consistent=consistent,
        out_dir=out,
        manifest_path=manifest_path,
        summary=summary,
    )


# ---------------------------------------------------------------------------
# two-pulse correlation run
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoPulseRunResult:
    correlation_r: float | None
    ci: tuple[float, float] | None
    predicted_r: float
    reduction_factor: float | None
    null_bound: float
    null_bound_satisfied: bool | None
    analysis_error: str | None
    out_dir: Path
    manifest_path: Path
    summary: dict


def run_two_pulse(config: RunConfig, separation: float, out_dir=None) -> TwoPulseRunResult:
    """Probe the same spin state twice per shot and correlate the readouts.

    In vacuum mode (no spins/interaction configured) the two readouts are
    independent shot noise and the report checks the 3/sqrt(N) null-
    correlation bound; with a spin ensemble the predicted correlation is
    kappa^2/(1+kappa^2) and the conditional-variance reduction 1/(1+kappa^2).
    """
    if separation < config.pulse.duration:
        raise ConfigError(
            f"pulse separation {separation:.3g} s must be >= the pulse duration "
            f"{config.pulse.duration:.3g} s"
        )
    qnd_mode = config.spins is not None and config.interaction is not None
    if (config.spins is None) != (config.interaction is None):
        raise ConfigError("two-pulse run needs both spins and interaction, or neither")
    started = _utc_now()
    out = _resolve_out_dir(config, out_dir, "two-pulse")
    rng = pulse_stream(config.seed, 0)
    n = config.n_pulses
    if qnd_mode:
        if not config.interaction.linearization_ok(config.spins):
            raise ConfigError(
                "interaction strength violates the first-order rotation regime "
                "for this spin state"
            )
        j1, j2, true_sz = sample_qnd_pairs(
            config.interaction, config.pulse, config.spins, separation, rng, n,
            model=config.counting_model,
        )
        kappa2 = kappa_squared(config.interaction, config.pulse, config.spins)
    else:
        p1_plus, p1_minus = sample_vacuum_counts(config.pulse, config.counting_model, rng, n)
        p2_plus, p2_minus = sample_vacuum_counts(config.pulse, config.counting_model, rng, n)
        j1 = (p1_plus - p1_minus) / 2.0
        j2 = (p2_plus - p2_minus) / 2.0
        true_sz = None
        kappa2 = 0.0
    predicted_r = kappa2 / (1.0 + kappa2)
    null_bound = 3.0 / math.sqrt(n)
    writer = _RunWriter(out)
    corr = cond = None
    analysis_error: str | None = None
    try:
        if true_sz is not None:
            rows = ((i, a, b, s) for i, (a, b, s) in enumerate(zip(j1, j2, true_sz)))
            header = [
                "pair_index",
                "j_y_prime_1_incident_photons",
                "j_y_prime_2_incident_photons",
                "true_sz",
            ]
        else:
            rows = ((i, a, b) for i, (a, b) in enumerate(zip(j1, j2)))
            header = ["pair_index", "j_y_prime_1_incident_photons", "j_y_prime_2_incident_photons"]
        writer.csv("pairs.csv", header, rows)
        report: list[tuple[str, object]] = [
            ("command", "two-pulse"),
            ("n_pairs", n),
            ("pulse_separation_seconds", _fmt(separation)),
            ("mode", "qnd" if qnd_mode else "vacuum"),
            ("kappa_squared", _fmt(kappa2)),
            ("predicted_r", _fmt(predicted_r)),
            ("null_bound_3_over_sqrt_n", _fmt(null_bound)),
        ]
        try:
            corr = correlation((j1, j2))
            cond = conditional_variance((j1, j2))
            report += [
                ("pearson_r", _fmt(corr.r)),
                ("r_ci95_low", _fmt(corr.ci_low)),
                ("r_ci95_high", _fmt(corr.ci_high)),
                ("null_bound_satisfied", str(abs(corr.r) < null_bound).lower()),
                ("unconditioned_variance", _fmt(cond.unconditioned_variance)),
                ("residual_variance", _fmt(cond.residual_variance)),
                ("regression_beta", _fmt(cond.beta)),
                ("spin_noise_reduction_factor", _fmt(cond.reduction_factor)),
                ("predicted_reduction_factor", _fmt(1.0 / (1.0 + kappa2))),
            ]
        except AnalysisError as exc:
            analysis_error = str(exc)
            report.append(("analysis_error", analysis_error))
        writer.report("report.txt", report)
    except Exception:
        writer.discard_all()
        raise
    null_ok = abs(corr.r) < null_bound if corr is not None else None
    summary = {
        "n_pairs": n,
        "separation": separation,
        "mode": "qnd" if qnd_mode else "vacuum",
        "kappa_squared": kappa2,
        "predicted_r": predicted_r,
        "pearson_r": corr.r if corr else None,
        "r_ci95": [corr.ci_low, corr.ci_high] if corr else None,
        "null_bound": null_bound,
        "null_bound_satisfied": null_ok,
        "reduction_factor": cond.reduction_factor if cond else None,
        "predicted_reduction_factor": 1.0 / (1.0 + kappa2),
        "analysis_error": analysis_error,
    }
    manifest_path = _write_manifest(out, "two-pulse", config, summary, writer.files, started)
    return TwoPulseRunResult(
        correlation_r=corr.r if corr else None,
        ci=(corr.ci_low, corr.ci_high) if corr else None,
        predicted_r=predicted_r,
        reduction_factor=cond.reduction_factor if cond else None,
        null_bound=null_bound,
        null_bound_satisfied=null_ok,
        analysis_error=analysis_error,
        out_dir=out,
        manifest_path=manifest_path,
        summary=summary,
    )


# ---------------------------------------------------------------------------
# waveform demo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WaveformRunResult:
    preamp: WaveformTrace
    shaped: WaveformTrace
    out_dir: Path
    manifest_path: Path
    summary: dict


def run_waveform_demo(config: RunConfig, charge_electrons: float, out_dir=None) -> WaveformRunResult:
    """Emit preamp and shaper traces for a single charge deposit."""
    started = _utc_now()
    out = _resolve_out_dir(config, out_dir, "waveform")
    preamp = synth_preamp_waveform(charge_electrons, config.pulse.duration, config.detector)
    shaped = synth_shaper_waveform(preamp, config.detector)
    plateau = float(np.max(np.abs(preamp.samples))) * math.copysign(1.0, charge_electrons or 1.0)
    peak_idx = int(np.argmax(np.abs(shaped.samples)))
    peak_v = float(shaped.samples[peak_idx])
    peak_t = float(shaped.times[peak_idx])
    writer = _RunWriter(out)
    try:
        writer.trace("preamp_waveform.txt", preamp)
        writer.trace("shaper_waveform.txt", shaped)
        writer.report(
            "report.txt",
            [
                ("command", "waveform"),
                ("charge_electrons", _fmt(charge_electrons)),
                ("pulse_duration_seconds", _fmt(config.pulse.duration)),
                ("preamp_plateau_volts", _fmt(plateau)),
                ("expected_plateau_volts", _fmt(charge_electrons * config.detector.sensitivity())),
                ("shaper_peak_volts", _fmt(peak_v)),
                ("shaper_peak_time_seconds", _fmt(peak_t)),
                ("shaper_peak_after_arrival_seconds", _fmt(peak_t - DEFAULT_ARRIVAL_TIME)),
            ],
        )
    except Exception:
        writer.discard_all()
        raise
    summary = {
        "charge_electrons": charge_electrons,
        "preamp_plateau_volts": plateau,
        "shaper_peak_volts": peak_v,
        "shaper_peak_time_seconds": peak_t,
        "shaper_peak_after_arrival_seconds": peak_t - DEFAULT_ARRIVAL_TIME,
    }
    manifest_path = _write_manifest(out, "waveform", config, summary, writer.files, started)
    return WaveformRunResult(
        preamp=preamp,
        shaped=shaped,
        out_dir=out,
        manifest_path=manifest_path,
        summary=summary,
    )
