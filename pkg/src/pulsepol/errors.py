"""Exception taxonomy shared across the package.

The command-line front end maps these onto exit codes:
ConfigError -> 2, SimulationError -> 3, AnalysisError -> 4.
"""


class PulsepolError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PulsepolError):
    """Invalid run configuration or malformed config file."""


class SimulationError(PulsepolError):
    """Physics or signal-chain simulation failure."""


class AnalysisError(PulsepolError):
    """Statistical reduction failure (bad or insufficient data)."""


class ClippingError(SimulationError):
    """ADC input exceeded the full-scale range."""


class PeakAtEdgeError(SimulationError):
    """Waveform extremum sits on the first or last sample of the trace."""


class TooFewSamplesError(AnalysisError):
    """Estimator requires more samples than were provided."""


class DegenerateDataError(AnalysisError):
    """Input data carries no usable spread (e.g. zero variance)."""
