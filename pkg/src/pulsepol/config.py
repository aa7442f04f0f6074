"""Run configuration: strict unit-suffixed YAML files and preset defaults.

Every physical quantity in a config file must carry an explicit unit
suffix ("400 ns", "1 pF", "300 MOhm"); bare numbers are rejected for
dimensional fields and unit strings are rejected for dimensionless ones.
Angular frequencies accept rad/s multiples or explicit "2pi*MHz"-style
suffixes; plain Hz is refused to keep factors of 2*pi visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .detector import DetectorChainConfig
from .errors import ConfigError
from .spin import DEFAULT_ALPHA_T1, InteractionParams, SpinEnsembleState
from .stokes import CountingModel, PulseConfig

__all__ = [
    "ALTERNATE_PULSE_DURATIONS",
    "RunConfig",
    "SWEEP_PHOTON_NUMBERS",
    "config_to_dict",
    "default_qnd_config",
    "default_run_config",
    "load_run_config",
    "parse_quantity",
    "run_config_from_dict",
]

# Photon-number sweep preset, covering one decade around the headline run.
SWEEP_PHOTON_NUMBERS = (1e6, 2e6, 3.7e6, 5e6, 7e6, 1e7)

# Shorter/longer probe pulses the chain is also characterized with.
ALTERNATE_PULSE_DURATIONS = (100e-9, 200e-9, 600e-9)

_TWO_PI = 2.0 * math.pi

_UNITS: dict[str, dict[str, float]] = {
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9},
    "capacitance": {"F": 1.0, "uF": 1e-6, "nF": 1e-9, "pF": 1e-12, "fF": 1e-15},
    "resistance": {"Ohm": 1.0, "kOhm": 1e3, "MOhm": 1e6, "GOhm": 1e9},
    "voltage": {"V": 1.0, "mV": 1e-3, "uV": 1e-6, "kV": 1e3},
    "angular_frequency": {
        "rad/s": 1.0,
        "krad/s": 1e3,
        "Mrad/s": 1e6,
        "Grad/s": 1e9,
        "2pi*Hz": _TWO_PI,
        "2pi*kHz": _TWO_PI * 1e3,
        "2pi*MHz": _TWO_PI * 1e6,
        "2pi*GHz": _TWO_PI * 1e9,
    },
}


def parse_quantity(value, dimension: str | None, field: str) -> float:
    """Parse one config value with strict unit checking.

    Dimensionless fields (dimension None) must be plain numbers; dimensional
    fields must be strings of the form "<number> <unit>" with a unit from the
    table for that dimension.
    """
    if dimension is None:
        if isinstance(value, bool):
            raise ConfigError(f"{field}: expected a plain number, got {value!r}")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            # YAML 1.1 reads unsigned exponents like 3.7e6 as strings
            try:
                return float(value)
            except ValueError:
                pass
        raise ConfigError(f"{field}: expected a plain number, got {value!r}")
    table = _UNITS[dimension]
    if not isinstance(value, str):
        raise ConfigError(
            f"{field}: expected '<number> <unit>' with a {dimension} unit "
            f"({', '.join(table)}), got {value!r}"
        )
    parts = value.strip().split()
    if len(parts) != 2:
        raise ConfigError(f"{field}: expected '<number> <unit>', got {value!r}")
    number, unit = parts
    if unit not in table:
        raise ConfigError(
            f"{field}: unknown {dimension} unit {unit!r} (allowed: {', '.join(table)})"
        )
    try:
        magnitude = float(number)
    except ValueError:
        raise ConfigError(f"{field}: {number!r} is not a number") from None
    return magnitude * table[unit]


@dataclass(frozen=True)
class RunConfig:
    """Everything one experiment run needs, resolved to SI units."""

    pulse: PulseConfig
    detector: DetectorChainConfig
    n_pulses: int
    seed: int
    counting_model: CountingModel
    output_dir: Path | None = None
    interaction: InteractionParams | None = None
    spins: SpinEnsembleState | None = None

    def __post_init__(self) -> None:
        if self.n_pulses < 1:
            raise ConfigError(f"n_pulses must be >= 1, got {self.n_pulses!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")

    def with_overrides(
        self,
        seed: int | None = None,
        n_pulses: int | None = None,
        counting_model: CountingModel | None = None,
    ) -> "RunConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        if n_pulses is not None:
            cfg = replace(cfg, n_pulses=n_pulses)
        if counting_model is not None:
            cfg = replace(cfg, counting_model=counting_model)
        return cfg


def default_run_config() -> RunConfig:
    """Headline vacuum-noise preset: 2J = 3.7e6, T = 400 ns, 1000 pulses."""
    return RunConfig(
        pulse=PulseConfig(mean_photon_number=3.7e6, duration=400e-9),
        detector=DetectorChainConfig(),
        n_pulses=1000,
        seed=20250811,
        counting_model=CountingModel.GAUSSIAN_LIMIT,
    )


def default_qnd_config() -> RunConfig:
    """QND preset: measurement strength kappa^2 = 1 on 1e6 unpolarized atoms."""
    atoms = 1_000_000
    return RunConfig(
        pulse=PulseConfig(mean_photon_number=4e6, duration=400e-9),
        detector=DetectorChainConfig(),
        n_pulses=100_000,
        seed=20250811,
        counting_model=CountingModel.GAUSSIAN_LIMIT,
        interaction=InteractionParams.from_product(DEFAULT_ALPHA_T1),
        spins=SpinEnsembleState(mean_sz=0.0, var_sz=atoms / 4.0, atom_count=atoms),
    )


# ---------------------------------------------------------------------------
# YAML config files
# ---------------------------------------------------------------------------

def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _build_pulse(raw: dict) -> PulseConfig:
    _check_keys(raw, {"mean_photon_number", "duration", "detuning", "probe_linewidth"}, "pulse")
    if "mean_photon_number" not in raw:
        raise ConfigError("pulse: mean_photon_number is required")
    kwargs = {"mean_photon_number": parse_quantity(raw["mean_photon_number"], None, "pulse.mean_photon_number")}
    if "duration" in raw:
        kwargs["duration"] = parse_quantity(raw["duration"], "time", "pulse.duration")
    if "detuning" in raw:
        kwargs["detuning"] = parse_quantity(raw["detuning"], "angular_frequency", "pulse.detuning")
    if "probe_linewidth" in raw:
        kwargs["probe_linewidth"] = parse_quantity(
            raw["probe_linewidth"], "angular_frequency", "pulse.probe_linewidth"
        )
    try:
        return PulseConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"pulse: {exc}") from exc


_DETECTOR_FIELDS: dict[str, str | None] = {
    "quantum_efficiency": None,
    "feedback_capacitance": "capacitance",
    "feedback_resistance": "resistance",
    "shaper_peak_time": "time",
    "shaper_gain": None,
    "shaper_order": None,
    "extinction_ratio": None,
    "excess_noise_electrons": None,
    "adc_full_scale": "voltage",
    "adc_bits": None,
    "assumed_feedback_capacitance": "capacitance",
    "peak_strategy": "str",
}


def _build_detector(raw: dict) -> DetectorChainConfig:
    _check_keys(raw, set(_DETECTOR_FIELDS), "detector")
    kwargs = {}
    for key, dim in _DETECTOR_FIELDS.items():
        if key not in raw:
            continue
        if dim == "str":
            if not isinstance(raw[key], str):
                raise ConfigError(f"detector.{key}: expected a string, got {raw[key]!r}")
            kwargs[key] = raw[key]
        else:
            kwargs[key] = parse_quantity(raw[key], dim, f"detector.{key}")
    for int_field in ("shaper_order", "adc_bits"):
        if int_field in kwargs:
            value = kwargs[int_field]
            if value != int(value):
                raise ConfigError(f"detector.{int_field}: expected an integer, got {value!r}")
            kwargs[int_field] = int(value)
    try:
        return DetectorChainConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"detector: {exc}") from exc


def _build_interaction(raw: dict) -> InteractionParams:
    _check_keys(raw, {"alpha_t1", "coupling_alpha", "interaction_time"}, "interaction")
    try:
        if "alpha_t1" in raw:
            if "coupling_alpha" in raw or "interaction_time" in raw:
                raise ConfigError("interaction: give alpha_t1 or the explicit pair, not both")
            return InteractionParams.from_product(
                parse_quantity(raw["alpha_t1"], None, "interaction.alpha_t1")
            )
        if "coupling_alpha" not in raw or "interaction_time" not in raw:
            raise ConfigError("interaction: need alpha_t1, or coupling_alpha plus interaction_time")
        return InteractionParams(
            coupling_alpha=parse_quantity(raw["coupling_alpha"], None, "interaction.coupling_alpha"),
            interaction_time=parse_quantity(raw["interaction_time"], "time", "interaction.interaction_time"),
        )
    except ValueError as exc:
        raise ConfigError(f"interaction: {exc}") from exc


def _build_spins(raw: dict) -> SpinEnsembleState:
    fields: dict[str, str | None] = {
        "mean_sz": None,
        "var_sz": None,
        "atom_count": None,
        "coherence_time": "time",
        "excited_lifetime": "time",
        "natural_linewidth": "angular_frequency",
    }
    _check_keys(raw, set(fields), "spins")
    kwargs = {}
    for key, dim in fields.items():
        if key in raw:
            kwargs[key] = parse_quantity(raw[key], dim, f"spins.{key}")
    if "atom_count" in kwargs:
        if kwargs["atom_count"] != int(kwargs["atom_count"]):
            raise ConfigError(f"spins.atom_count: expected an integer, got {kwargs['atom_count']!r}")
        kwargs["atom_count"] = int(kwargs["atom_count"])
    try:
        return SpinEnsembleState(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"spins: {exc}") from exc


def _build_run_section(raw: dict) -> dict:
    _check_keys(raw, {"n_pulses", "seed", "counting_model", "output_dir"}, "run")
    out: dict = {}
    if "n_pulses" in raw:
        n = parse_quantity(raw["n_pulses"], None, "run.n_pulses")
        if n != int(n):
            raise ConfigError(f"run.n_pulses: expected an integer, got {raw['n_pulses']!r}")
        out["n_pulses"] = int(n)
    if "seed" in raw:
        seed = raw["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError(f"run.seed: expected an integer, got {seed!r}")
        out["seed"] = seed
    if "counting_model" in raw:
        name = raw["counting_model"]
        try:
            out["counting_model"] = CountingModel(name)
        except ValueError:
            raise ConfigError(
                f"run.counting_model: unknown model {name!r} "
                f"(allowed: {', '.join(m.value for m in CountingModel)})"
            ) from None
    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str):
            raise ConfigError(f"run.output_dir: expected a path string, got {raw['output_dir']!r}")
        out["output_dir"] = Path(raw["output_dir"])
    return out


def load_run_config(path) -> RunConfig:
    """Load a YAML run configuration with strict unit and key checking."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path} is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    _check_keys(raw, {"pulse", "detector", "interaction", "spins", "run"}, str(path))
    for section in raw:
        if not isinstance(raw[section], dict):
            raise ConfigError(f"{path}: section {section!r} must be a mapping")

    base = default_run_config()
    pulse = _build_pulse(raw["pulse"]) if "pulse" in raw else base.pulse
    detector = _build_detector(raw.get("detector", {}))
    interaction = _build_interaction(raw["interaction"]) if "interaction" in raw else None
    spins = _build_spins(raw["spins"]) if "spins" in raw else None
    run = _build_run_section(raw.get("run", {}))
    return RunConfig(
        pulse=pulse,
        detector=detector,
        n_pulses=run.get("n_pulses", base.n_pulses),
        seed=run.get("seed", base.seed),
        counting_model=run.get("counting_model", base.counting_model),
        output_dir=run.get("output_dir"),
        interaction=interaction,
        spins=spins,
    )


# ---------------------------------------------------------------------------
# resolved (SI) dict round trip, used by the run manifest
# ---------------------------------------------------------------------------

def config_to_dict(config: RunConfig) -> dict:
    """Serialize a RunConfig to plain SI-valued types (JSON-safe)."""
    out: dict = {
        "pulse": {
            "mean_photon_number": config.pulse.mean_photon_number,
            "duration": config.pulse.duration,
            "detuning": config.pulse.detuning,
            "probe_linewidth": config.pulse.probe_linewidth,
        },
        "detector": {
            "quantum_efficiency": config.detector.quantum_efficiency,
            "feedback_capacitance": config.detector.feedback_capacitance,
            "feedback_resistance": config.detector.feedback_resistance,
            "shaper_peak_time": config.detector.shaper_peak_time,
            "shaper_gain": config.detector.shaper_gain,
            "shaper_order": config.detector.shaper_order,
            "extinction_ratio": config.detector.extinction_ratio,
            "excess_noise_electrons": config.detector.excess_noise_electrons,
            "adc_full_scale": config.detector.adc_full_scale,
            "adc_bits": config.detector.adc_bits,
            "assumed_feedback_capacitance": config.detector.assumed_feedback_capacitance,
            "peak_strategy": config.detector.peak_strategy,
        },
        "run": {
            "n_pulses": config.n_pulses,
            "seed": config.seed,
            "counting_model": config.counting_model.value,
            "output_dir": str(config.output_dir) if config.output_dir else None,
        },
    }
    if config.interaction is not None:
        out["interaction"] = {
            "coupling_alpha": config.interaction.coupling_alpha,
            "interaction_time": config.interaction.interaction_time,
        }
    if config.spins is not None:
        out["spins"] = {
            "mean_sz": config.spins.mean_sz,
            "var_sz": config.spins.var_sz,
            "atom_count": config.spins.atom_count,
            "coherence_time": config.spins.coherence_time,
            "excited_lifetime": config.spins.excited_lifetime,
            "natural_linewidth": config.spins.natural_linewidth,
        }
    return out


def run_config_from_dict(data: dict) -> RunConfig:
    """Rebuild a RunConfig from :func:`config_to_dict` output (e.g. a manifest)."""
    try:
        pulse = PulseConfig(**data["pulse"])
        detector = DetectorChainConfig(**data["detector"])
        run = data["run"]
        interaction = InteractionParams(**data["interaction"]) if "interaction" in data else None
        spins = SpinEnsembleState(**data["spins"]) if "spins" in data else None
        return RunConfig(
            pulse=pulse,
            detector=detector,
            n_pulses=int(run["n_pulses"]),
            seed=int(run["seed"]),
            counting_model=CountingModel(run["counting_model"]),
            output_dir=Path(run["output_dir"]) if run.get("output_dir") else None,
            interaction=interaction,
            spins=spins,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid resolved config: {exc}") from exc
