"""Estimate the two received amplitudes of an interfered MSK frame.

Module Information:
    - Filename: amplitude.py
    - Module: amplitude
    - Location: src/anc_decoder/

Key Concepts:
    - mu: mean overlap energy, A^2 + B^2 for scrambled bits
    - sigma: twice the energy mass above mu per sample; for MSK this is
      A^2 + B^2 + 2AB|cos R| within one packet, not the A^2 + B^2 + 4AB/pi
      the legacy joint estimator assumes
    - Transformation events: consecutive samples where the mixture flips
      between its constructive and destructive form because the two next
      bits differ; |X1|, |X2| and the angle from X1 to X2 give both
      amplitudes in closed form
    - The sender's own next bit at the event tells which root is its own

Three estimators are provided: direct (interference-free samples), legacy
(mu/sigma inversion, unassigned) and geometric (transformation events).
"""

#####################################
# Imports At the Top
#####################################

from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    AmbiguousEventError,
    DegenerateEventError,
    EstimationFailedError,
    InconsistentStatisticsError,
    InvalidArgumentError,
    UndetectableTransformationsError,
)
from .utils_logger import logger

#####################################
# Constants
#####################################

DEFAULT_THRESHOLD_FACTOR: float = 1.0
DEFAULT_TIE_EPSILON: float = 1e-3
# Threshold must exceed this fraction of mu even when no noise floor is known.
MIN_RELATIVE_THRESHOLD: float = 1e-9
# Energies within this relative distance of mu count as half above, half below.
ENERGY_TIE_TOLERANCE: float = 1e-9
OUTLIER_MADS: float = 3.0

TWO_PI: float = 2 * np.pi


#####################################
# Domain Types
#####################################


class EstimationMethod(Enum):
    """How an ``AmplitudeEstimate`` was obtained."""

    DIRECT = "direct"
    LEGACY = "legacy"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class EnergyStats:
    """Moment statistics of an overlap region."""

    mu: float
    sigma: float
    n_samples: int

    @property
    def threshold(self) -> float:
        """Default transformation threshold sigma - mu (= 2AB|cos R| noiseless)."""
        return self.sigma - self.mu


@dataclass(frozen=True)
class TransformationEvent:
    """One detected flip of the interference pattern.

    Attributes:
        index: Position of X2 within the overlap.
        x1_mag: |X1|, the sample before the flip.
        x2_mag: |X2|, the sample after the flip.
        angle: arg(X2 / X1) in [0, 2pi).
        self_next_bit: The decoder's own bit for the X1 -> X2 step.
    """

    index: int
    x1_mag: float
    x2_mag: float
    angle: float
    self_next_bit: int


@dataclass(frozen=True)
class AmplitudeEstimate:
    """Amplitudes assigned to the decoder (``a_self``) and its peer (``b_other``)."""

    a_self: float
    b_other: float
    method: EstimationMethod
    n_events: int = 0
    diagnostics: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        for name in ("a_self", "b_other"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be positive and finite, got {value}")


#####################################
# Moment statistics
#####################################


def _energies(samples: np.ndarray) -> np.ndarray:
    s = np.asarray(samples, dtype=np.complex128)
    if s.size == 0:
        raise InvalidArgumentError("need at least one sample")
    return s.real**2 + s.imag**2


def mean_energy(samples: np.ndarray) -> float:
    """Arithmetic mean of |y[n]|^2."""
    return float(np.mean(_energies(samples)))


def sigma_statistic(samples: np.ndarray, mu: float) -> float:
    """(2/N) times the energy of the samples above ``mu``.

    Samples whose energy equals ``mu`` to within ``ENERGY_TIE_TOLERANCE``
    contribute half their energy, so a frame of constant energy gives
    sigma == mu.
    """
    e = _energies(samples)
    tol = ENERGY_TIE_TOLERANCE * max(abs(mu), 1.0)
    above = e > mu + tol
    tied = np.abs(e - mu) <= tol
    return float(2.0 / e.size * (e[above].sum() + 0.5 * e[tied].sum()))


def energy_stats(samples: np.ndarray) -> EnergyStats:
    """Compute mu, sigma and N over ``samples``."""
    mu = mean_energy(samples)
    return EnergyStats(mu=mu, sigma=sigma_statistic(samples, mu), n_samples=int(np.size(samples)))


def sigma_identity(a: float, b: float, initial_angle: float) -> float:
    """sigma predicted for an MSK packet: A^2 + B^2 + 2AB|cos R|."""
    return a * a + b * b + 2 * a * b * abs(np.cos(initial_angle))


def legacy_sigma(a: float, b: float) -> float:
    """sigma assumed by the legacy estimator: A^2 + B^2 + 4AB/pi."""
    return a * a + b * b + 4 * a * b / np.pi


def legacy_joint_estimate(mu: float, sigma: float) -> tuple[float, float]:
    """Invert A^2 + B^2 = mu and sigma = mu + 4AB/pi.

    The two roots cannot be told apart from statistics alone, so they are
    returned as (larger, smaller) without any party assignment.

    Raises:
        InconsistentStatisticsError: AB <= 0 or mu - 2AB < 0.
    """
    ab = np.pi * (sigma - mu) / 4
    if ab <= 0:
        raise InconsistentStatisticsError(
            f"sigma={sigma:.6g} <= mu={mu:.6g} implies a zero amplitude"
        )
    s_plus = mu + 2 * ab
    s_minus = mu - 2 * ab
    if s_minus < 0:
        raise InconsistentStatisticsError(
            f"mu - 2AB = {s_minus:.6g} < 0 for mu={mu:.6g}, sigma={sigma:.6g}"
        )
    root_plus, root_minus = np.sqrt(s_plus), np.sqrt(s_minus)
    larger = (root_plus + root_minus) / 2
    smaller = (root_plus - root_minus) / 2
    if smaller <= 0:
        raise InconsistentStatisticsError(f"mu={mu:.6g}, sigma={sigma:.6g} give a zero amplitude")
    return float(larger), float(smaller)


#####################################
# Transformation events
#####################################


def detect_transformations(
    samples: np.ndarray,
    stats: EnergyStats,
    threshold_factor: float = DEFAULT_THRESHOLD_FACTOR,
    noise_floor: float = 0.0,
    straddle_mean: bool = False,
) -> np.ndarray:
    """Indices n (within ``samples``) where the energy jumps by more than the threshold.

    Args:
        samples: Overlap samples the statistics were computed on.
        stats: Output of ``energy_stats`` for the same samples.
        threshold_factor: Multiplier on sigma - mu.
        noise_floor: Smallest usable threshold, in energy units.
        straddle_mean: Also require |y[n-1]|^2 and |y[n]|^2 on opposite sides of mu.

    Raises:
        UndetectableTransformationsError: The threshold does not exceed the noise floor.
    """
    threshold = threshold_factor * stats.threshold
    floor = max(noise_floor, MIN_RELATIVE_THRESHOLD * stats.mu)
    if threshold <= floor:
        raise UndetectableTransformationsError(
            f"threshold {threshold:.4g} is not above the noise floor {floor:.4g}"
        )
    e = _energies(samples)
    hit = np.abs(np.diff(e)) > threshold
    if straddle_mean:
        hit &= (e[:-1] - stats.mu) * (e[1:] - stats.mu) < 0
    return np.flatnonzero(hit) + 1


def transformation_events(
    samples: np.ndarray,
    indices: np.ndarray,
    self_next_bit_at: Callable[[int], int],
) -> list[TransformationEvent]:
    """Build event records for detected ``indices``."""
    s = np.asarray(samples, dtype=np.complex128)
    events = []
    for n in np.asarray(indices, dtype=int):
        x1, x2 = s[n - 1], s[n]
        events.append(
            TransformationEvent(
                index=int(n),
                x1_mag=float(abs(x1)),
                x2_mag=float(abs(x2)),
                angle=float(np.mod(np.angle(x2 * np.conj(x1)), TWO_PI)),
                self_next_bit=int(self_next_bit_at(int(n))),
            )
        )
    return events


def geometric_amplitudes(x1_mag: float, x2_mag: float, angle: float) -> tuple[float, float]:
    """Return (P, Q) = sqrt(1/4 (X1^2 + X2^2) +/- 1/2 X1 X2 sin(angle)).

    For an event where the decoder's next bit is 1, P is its own amplitude.

    Raises:
        InvalidArgumentError: A magnitude is not positive.
        DegenerateEventError: Both radicands are zero.
    """
    if not (x1_mag > 0 and x2_mag > 0):
        raise InvalidArgumentError(f"magnitudes must be positive, got {x1_mag}, {x2_mag}")
    base = 0.25 * (x1_mag**2 + x2_mag**2)
    cross = 0.5 * x1_mag * x2_mag * np.sin(angle)
    p_sq = max(base + cross, 0.0)
    q_sq = max(base - cross, 0.0)
    if p_sq == 0 and q_sq == 0:
        raise DegenerateEventError(f"event X1={x1_mag}, X2={x2_mag}, angle={angle} is degenerate")
    return float(np.sqrt(p_sq)), float(np.sqrt(q_sq))


def assign_amplitudes(
    pair: tuple[float, float],
    angle: float,
    self_next_bit: int,
    tie_epsilon: float = DEFAULT_TIE_EPSILON,
) -> tuple[float, float]:
    """Decide which amplitude of ``pair`` is the decoder's own.

    Next bit 1: own amplitude is the larger one iff angle is in (0, pi).
    Next bit 0: own amplitude is the larger one iff angle is in (pi, 2pi).

    Returns:
        (a_self, b_other)

    Raises:
        AmbiguousEventError: ``angle`` is within ``tie_epsilon`` of 0 or pi.
    """
    if not 0 <= angle < TWO_PI:
        raise InvalidArgumentError(f"angle must be in [0, 2pi), got {angle}")
    if min(angle, abs(angle - np.pi), TWO_PI - angle) < tie_epsilon:
        raise AmbiguousEventError(f"angle {angle:.6f} is within {tie_epsilon} of 0 or pi")
    larger, smaller = max(pair), min(pair)
    upper_half = angle < np.pi
    self_is_larger = upper_half if self_next_bit == 1 else not upper_half
    return (larger, smaller) if self_is_larger else (smaller, larger)


def _reject_outliers(values: np.ndarray) -> np.ndarray:
    """Mask of rows whose columns all lie within OUTLIER_MADS MADs of the median."""
    med = np.median(values, axis=0)
    dev = np.abs(values - med)
    mad = np.median(dev, axis=0)
    keep = np.ones(len(values), dtype=bool)
    for col in range(values.shape[1]):
        if mad[col] > 0:
            keep &= dev[:, col] <= OUTLIER_MADS * mad[col]
    return keep


def estimate_geometric(
    samples: np.ndarray,
    stats: EnergyStats,
    self_next_bit_at: Callable[[int], int],
    *,
    threshold_factor: float = DEFAULT_THRESHOLD_FACTOR,
    noise_floor: float = 0.0,
    straddle_mean: bool = False,
    tie_epsilon: float = DEFAULT_TIE_EPSILON,
    outlier_rejection: bool = False,
) -> AmplitudeEstimate:
    """Average the per-event amplitudes over every usable transformation event.

    Args:
        samples: Overlap samples.
        stats: ``energy_stats`` of the same samples.
        self_next_bit_at: Maps an event index n (position of X2 in
            ``samples``) to the decoder's own bit for the n-1 -> n step.

    Raises:
        UndetectableTransformationsError: From ``detect_transformations``.
        EstimationFailedError: No usable event remains.
    """
    indices = detect_transformations(
        samples, stats, threshold_factor, noise_floor=noise_floor, straddle_mean=straddle_mean
    )
    pairs = []
    discarded = 0
    for event in transformation_events(samples, indices, self_next_bit_at):
        try:
            pq = geometric_amplitudes(event.x1_mag, event.x2_mag, event.angle)
            pairs.append(assign_amplitudes(pq, event.angle, event.self_next_bit, tie_epsilon))
        except (DegenerateEventError, AmbiguousEventError):
            discarded += 1
    if not pairs:
        raise EstimationFailedError(
            f"no usable transformation events ({len(indices)} detected, {discarded} discarded)"
        )

    values = np.asarray(pairs)
    if outlier_rejection and len(values) > 2:
        values = values[_reject_outliers(values)]
    a_self, b_other = values.mean(axis=0)
    if not (a_self > 0 and b_other > 0):
        raise EstimationFailedError(f"events average to a zero amplitude ({a_self}, {b_other})")
    logger.debug(
        f"geometric estimate from {len(values)} events ({discarded} discarded): "
        f"a_self={a_self:.4f}, b_other={b_other:.4f}"
    )
    return AmplitudeEstimate(
        a_self=float(a_self),
        b_other=float(b_other),
        method=EstimationMethod.GEOMETRIC,
        n_events=len(values),
        diagnostics=tuple((float(a), float(b)) for a, b in values),
    )


#####################################
# Direct estimate
#####################################


def estimate_direct(samples: np.ndarray) -> float:
    """RMS amplitude of interference-free samples.

    Under noise of variance v this converges to sqrt(A^2 + v), not A.
    """
    return float(np.sqrt(mean_energy(samples)))


__all__ = [
    "AmplitudeEstimate",
    "EnergyStats",
    "EstimationMethod",
    "TransformationEvent",
    "assign_amplitudes",
    "detect_transformations",
    "energy_stats",
    "estimate_direct",
    "estimate_geometric",
    "geometric_amplitudes",
    "legacy_joint_estimate",
    "legacy_sigma",
    "mean_energy",
    "sigma_identity",
    "sigma_statistic",
    "transformation_events",
]
