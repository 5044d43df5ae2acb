"""Exception types raised by the ANC simulator and decoder.

Module Information:
    - Filename: errors.py
    - Module: errors
    - Location: src/anc_decoder/

Every failure mode in the pipeline has its own class so callers can choose
between aborting, flagging, or falling back. Argument and configuration
problems also derive from ``ValueError``.
"""


class AncError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(AncError, ValueError):
    """An argument is outside its documented domain."""


class ConfigError(AncError, ValueError):
    """A decoder or sweep configuration is invalid."""


class DegenerateSampleError(AncError):
    """A sample is too small for its phase to be defined."""


class NoInterferenceError(AncError):
    """Two signals do not overlap, so there is nothing to decode jointly."""


class InconsistentAmplitudesError(AncError):
    """Amplitude estimates cannot explain an observed sample energy."""


class InconsistentStatisticsError(AncError):
    """The energy statistics admit no real amplitude pair."""


class DegenerateEventError(AncError):
    """A transformation event yields no usable amplitude."""


class AmbiguousEventError(AncError):
    """A transformation angle is too close to 0 or pi to assign amplitudes."""


class EstimationFailedError(AncError):
    """No amplitude estimate could be produced."""


class UndetectableTransformationsError(EstimationFailedError):
    """The detection threshold is below the noise floor."""


class DecodeFailedError(AncError):
    """A frame could not be decoded and no fallback was allowed."""


__all__ = [
    "AmbiguousEventError",
    "AncError",
    "ConfigError",
    "DecodeFailedError",
    "DegenerateEventError",
    "DegenerateSampleError",
    "EstimationFailedError",
    "InconsistentAmplitudesError",
    "InconsistentStatisticsError",
    "InvalidArgumentError",
    "NoInterferenceError",
    "UndetectableTransformationsError",
]
