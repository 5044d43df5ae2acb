"""Quasi-static flat fading, AWGN, and amplify-and-forward superposition.

Module Information:
    - Filename: channel.py
    - Module: channel
    - Location: src/anc_decoder/

The relay is transparent: each sender's path to a receiver collapses into
one (gain, phase) pair, and noise is injected once, at the receiver.
"""

#####################################
# Imports At the Top
#####################################

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError, NoInterferenceError

#####################################
# Domain Types
#####################################

Span = tuple[int, int]


@dataclass(frozen=True)
class ChannelParams:
    """Composite sender-to-receiver link, constant for one packet.

    Attributes:
        gain: Composite attenuation h (h' or h''), must be positive.
        phase_shift: Composite phase shift gamma in radians.
        noise_variance: Receiver noise variance per complex sample.
    """

    gain: float
    phase_shift: float = 0.0
    noise_variance: float = 0.0

    def __post_init__(self) -> None:
        if not self.gain > 0:
            raise InvalidArgumentError(f"channel gain must be > 0, got {self.gain}")
        if self.noise_variance < 0:
            raise InvalidArgumentError(
                f"noise variance must be >= 0, got {self.noise_variance}"
            )


@dataclass(frozen=True, eq=False)
class FrameTruth:
    """Ground truth of a noiseless superposition, kept for diagnostics.

    Attributes:
        a_amplitude: Received amplitude A of the first signal.
        b_amplitude: Received amplitude B of the second signal.
        theta: Phases of the first signal over the overlap.
        phi: Phases of the second signal over the overlap.
        initial_angle: R = theta - phi at the first overlap sample, in [0, 2pi).
    """

    a_amplitude: float
    b_amplitude: float
    theta: np.ndarray
    phi: np.ndarray
    initial_angle: float


@dataclass(frozen=True, eq=False)
class InterferedFrame:
    """Received samples with the overlap region marked.

    ``first_span`` and ``second_span`` are the half-open sample ranges of the
    two constituent packets; the overlap is their intersection.
    """

    samples: np.ndarray
    overlap_start: int
    overlap_end: int
    first_span: Span
    second_span: Span
    truth: FrameTruth | None = None

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def overlap(self) -> np.ndarray:
        """Samples where both signals are present."""
        return self.samples[self.overlap_start : self.overlap_end]

    def other_span(self, own_span: Span) -> Span:
        """Return the span of the packet that is not ``own_span``."""
        if tuple(own_span) == self.first_span:
            return self.second_span
        if tuple(own_span) == self.second_span:
            return self.first_span
        raise InvalidArgumentError(
            f"span {own_span} matches neither {self.first_span} nor {self.second_span}"
        )

    def with_samples(self, samples: np.ndarray) -> "InterferedFrame":
        """Copy of this frame carrying ``samples`` (e.g. after adding noise)."""
        return replace(self, samples=np.asarray(samples, dtype=np.complex128))


#####################################
# Channel Operations
#####################################


def apply_channel(samples: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Scale by ``gain`` and rotate by ``phase_shift``."""
    return params.gain * np.exp(1j * params.phase_shift) * np.asarray(samples, dtype=np.complex128)


def add_awgn(
    samples: np.ndarray, noise_variance: float, rng: np.random.Generator
) -> np.ndarray:
    """Add circularly-symmetric complex Gaussian noise.

    Each real dimension gets variance ``noise_variance / 2``. A zero variance
    returns a copy and leaves ``rng`` untouched.
    """
    if noise_variance < 0:
        raise InvalidArgumentError(f"noise variance must be >= 0, got {noise_variance}")
    s = np.asarray(samples, dtype=np.complex128)
    if noise_variance == 0:
        return s.copy()
    scale = np.sqrt(noise_variance / 2)
    noise = rng.standard_normal(s.size) + 1j * rng.standard_normal(s.size)
    return s + scale * noise.reshape(s.shape)


def superpose(sig_a: np.ndarray, sig_b: np.ndarray, offset: int) -> InterferedFrame:
    """Add ``sig_b`` onto ``sig_a`` starting at sample ``offset``.

    Raises:
        InvalidArgumentError: Negative offset.
        NoInterferenceError: The two signals share no sample.
    """
    a = np.asarray(sig_a, dtype=np.complex128)
    b = np.asarray(sig_b, dtype=np.complex128)
    if offset < 0:
        raise InvalidArgumentError(f"offset must be >= 0, got {offset}")
    overlap_start = offset
    overlap_end = min(a.size, offset + b.size)
    if overlap_end <= overlap_start:
        raise NoInterferenceError(
            f"offset {offset} leaves no overlap between {a.size} and {b.size} samples"
        )

    out = np.zeros(max(a.size, offset + b.size), dtype=np.complex128)
    out[: a.size] += a
    out[offset : offset + b.size] += b

    theta = np.angle(a[overlap_start:overlap_end])
    phi = np.angle(b[: overlap_end - overlap_start])
    truth = FrameTruth(
        a_amplitude=float(np.mean(np.abs(a))),
        b_amplitude=float(np.mean(np.abs(b))),
        theta=theta,
        phi=phi,
        initial_angle=float(np.mod(theta[0] - phi[0], 2 * np.pi)),
    )
    return InterferedFrame(
        samples=out,
        overlap_start=overlap_start,
        overlap_end=overlap_end,
        first_span=(0, int(a.size)),
        second_span=(offset, offset + int(b.size)),
        truth=truth,
    )


__all__ = [
    "ChannelParams",
    "FrameTruth",
    "InterferedFrame",
    "Span",
    "add_awgn",
    "apply_channel",
    "superpose",
]
