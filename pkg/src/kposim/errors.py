"""Exception types raised by the simulation layers."""


class KposimError(Exception):
    """Base class for all library-specific errors."""


class InvalidDimensionError(KposimError):
    """Fock-space truncation dimension is too small to be meaningful."""


class TruncationError(KposimError):
    """Requested displacement amplitude does not fit the truncated basis."""


class DimensionMismatchError(KposimError):
    """Operands live on different Fock-space truncations."""


class AmbiguousLabelError(KposimError):
    """Two eigenstates claim the same (well, excitation) label, or the
    energy ordering no longer follows the labelled well structure."""

    def __init__(self, message: str, overlaps=None):
        super().__init__(message)
        self.overlaps = overlaps


class StiffnessError(KposimError):
    """Adaptive step size underflowed or the step budget was exhausted."""


class IntegratorFailureError(KposimError):
    """The integrated state violates trace or Hermiticity bounds."""


class SingularDenominatorError(KposimError):
    """A reflection term hit a (near) vanishing resonance denominator."""


class InsensitiveProbeError(KposimError):
    """Reflection anchors are too close to invert the linear readout map."""


class CalibrationError(KposimError):
    """Gate calibration failed to bracket a usable fidelity maximum."""


class MeasurementRangeError(KposimError):
    """A diagonal measurement lies outside the physical range [0, 1]."""


class ConfigError(KposimError):
    """Experiment configuration failed validation."""
