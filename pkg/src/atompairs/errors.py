"""Exception hierarchy shared across the toolkit.

The CLI maps these onto distinct exit codes, so raising the right class
matters for scripted use.
"""


class AtomPairsError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(AtomPairsError):
    """Invalid or missing configuration (bad field, unknown label, bad file)."""


class NumericError(AtomPairsError):
    """A numerical contract was violated (non-Hermitian input, unstable derivative)."""


class CoverageError(AtomPairsError):
    """Requested evaluation point lies outside the computed grid or window."""


class ResolutionError(CoverageError):
    """Frequency grid too coarse for the narrowest line; message carries the
    required spacing."""

    def __init__(self, spacing_hz, required_hz):
        self.spacing_hz = float(spacing_hz)
        self.required_hz = float(required_hz)
        super().__init__(
            f"grid spacing {spacing_hz:.3g} Hz too coarse; "
            f"need <= {required_hz:.3g} Hz"
        )


class FitFailure(AtomPairsError):
    """Histogram fit could not identify a peak above the floor."""
