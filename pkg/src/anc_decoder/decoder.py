"""Noncoherent ANC receiver: recover the peer's bits from an interfered frame.

Module Information:
    - Filename: decoder.py
    - Module: decoder
    - Location: src/anc_decoder/

Key Concepts:
    - The decoder knows its own packet and where it sits in the frame
    - Amplitudes come from one of three strategies, with the direct method
      as the fallback when the chosen one fails
    - Inside the overlap, phases are resolved sample by sample and the
      peer's phase steps are read off the selected pair
    - Outside the overlap the peer's samples are demodulated as plain MSK
    - The peer's pilots are stripped and its payload descrambled

Pipeline (one frame):
    1. Energy statistics over the overlap.
    2. Amplitude estimate (direct / legacy / geometric).
    3. Phase pairs per overlap sample, then pair selection per step.
    4. Peer bits from the sign of each phase step.
    5. Descramble the peer payload.
"""

#####################################
# Imports At the Top
#####################################

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .amplitude import (
    DEFAULT_THRESHOLD_FACTOR,
    DEFAULT_TIE_EPSILON,
    AmplitudeEstimate,
    EnergyStats,
    EstimationMethod,
    energy_stats,
    estimate_direct,
    estimate_geometric,
    legacy_joint_estimate,
)
from .channel import InterferedFrame, Span
from .errors import (
    ConfigError,
    DecodeFailedError,
    EstimationFailedError,
    InconsistentStatisticsError,
    InvalidArgumentError,
    UndetectableTransformationsError,
)
from .modem import HALF_PI, Packet, make_pilot, msk_demodulate, scramble
from .phase_solver import (
    DEFAULT_CLAMP_TOLERANCE,
    PhaseTrack,
    possible_phase_pairs_array,
    select_pairs_array,
    wrap_angle,
)
from .utils_logger import logger

#####################################
# Constants
#####################################

DEFAULT_NOISE_FLOOR_SIGMAS: float = 3.0


#####################################
# Domain Types
#####################################


class Strategy(Enum):
    """Amplitude estimator the decoder tries first."""

    DIRECT = "direct"
    LEGACY = "legacy"
    GEOMETRIC = "geometric"


class DecodeFlag(Enum):
    """Conditions recorded on a ``DecodeResult``."""

    FALLBACK_USED = "fallback_used"
    FIRST_BIT_UNRELIABLE = "first_bit_unreliable"
    INCONSISTENT_STATISTICS = "inconsistent_statistics"
    INCONSISTENT_AMPLITUDES = "inconsistent_amplitudes"


@dataclass(frozen=True, eq=False)
class DecoderConfig:
    """Receiver settings.

    Attributes:
        strategy: Amplitude estimator to try first.
        clamp_tolerance: Largest |D| - 1 clamped instead of flagged.
        tie_epsilon: Events this close (rad) to 0 or pi are discarded.
        threshold_factor: Multiplier on the sigma - mu detection threshold.
        pilot: The peer's known pilot sequence.
        peer_scrambler_seed: Seed the peer scrambled its payload with.
        allow_fallback: Fall back to the direct method when the strategy fails.
        straddle_mean: Events must cross mu (see ``detect_transformations``).
        noise_floor_sigmas: Noise floor in standard deviations of the
            energy jitter seen on interference-free samples.
        outlier_rejection: Drop events more than 3 MADs from the median.
    """

    strategy: Strategy = Strategy.GEOMETRIC
    clamp_tolerance: float = DEFAULT_CLAMP_TOLERANCE
    tie_epsilon: float = DEFAULT_TIE_EPSILON
    threshold_factor: float = DEFAULT_THRESHOLD_FACTOR
    pilot: np.ndarray = field(default_factory=make_pilot)
    peer_scrambler_seed: int = 0
    allow_fallback: bool = True
    straddle_mean: bool = True
    noise_floor_sigmas: float = DEFAULT_NOISE_FLOOR_SIGMAS
    outlier_rejection: bool = False

    def validate(self) -> "DecoderConfig":
        """Raise ``ConfigError`` on a bad setting; return self otherwise."""
        for name in ("clamp_tolerance", "tie_epsilon", "threshold_factor"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.noise_floor_sigmas < 0:
            raise ConfigError(f"noise_floor_sigmas must be >= 0, got {self.noise_floor_sigmas}")
        if len(self.pilot) < 1:
            raise ConfigError("pilot must contain at least one bit")
        return self


@dataclass(frozen=True, eq=False)
class DecodeResult:
    """Everything one decode produced.

    Attributes:
        other_bits: The peer's descrambled payload.
        other_frame_bits: The peer's raw frame bits (pilot, scrambled payload, pilot).
        amplitude_estimate: Amplitudes used for the phase solver.
        per_bit_err: Selection error of each overlap step.
        flags: Conditions met while decoding.
        unreliable_bit: Index into ``other_frame_bits`` of the first step
            that depends on the overlap's absolute phase.
        pilot_mismatches: Decoded pilot bits that differ from the known pilot.
    """

    other_bits: np.ndarray
    other_frame_bits: np.ndarray
    amplitude_estimate: AmplitudeEstimate
    per_bit_err: np.ndarray
    flags: frozenset[DecodeFlag]
    unreliable_bit: int
    pilot_mismatches: int


#####################################
# Amplitudes
#####################################


def _clean_samples(frame: InterferedFrame, span: Span) -> np.ndarray:
    """Samples of ``span`` that lie outside the overlap."""
    start, end = span
    head = frame.samples[start : min(end, frame.overlap_start)]
    tail = frame.samples[max(start, frame.overlap_end) : end]
    return np.concatenate([head, tail])


def _direct_estimate(frame: InterferedFrame, own_span: Span, other_span: Span) -> AmplitudeEstimate:
    own_clean = _clean_samples(frame, own_span)
    other_clean = _clean_samples(frame, other_span)
    if own_clean.size == 0 or other_clean.size == 0:
        raise EstimationFailedError(
            f"direct method needs interference-free samples of both parties "
            f"(own={own_clean.size}, other={other_clean.size})"
        )
    return AmplitudeEstimate(
        a_self=estimate_direct(own_clean),
        b_other=estimate_direct(other_clean),
        method=EstimationMethod.DIRECT,
    )


def _noise_floor(frame: InterferedFrame, spans: tuple[Span, Span], sigmas: float) -> float:
    """Energy-jump noise floor from interference-free samples (0 when none)."""
    jumps = [
        np.diff(np.abs(clean) ** 2)
        for clean in (_clean_samples(frame, span) for span in spans)
        if clean.size >= 2
    ]
    if not jumps:
        return 0.0
    return float(sigmas * np.std(np.concatenate(jumps)))


def _estimate_amplitudes(
    frame: InterferedFrame,
    stats: EnergyStats,
    own_bits: np.ndarray,
    own_offset: int,
    own_span: Span,
    other_span: Span,
    cfg: DecoderConfig,
    flags: set[DecodeFlag],
) -> AmplitudeEstimate | tuple[float, float]:
    """Run the configured strategy; a bare tuple is an unassigned legacy pair."""
    try:
        if cfg.strategy is Strategy.DIRECT:
            return _direct_estimate(frame, own_span, other_span)
        if cfg.strategy is Strategy.LEGACY:
            return legacy_joint_estimate(stats.mu, stats.sigma)

        def self_next_bit_at(index: int) -> int:
            return int(own_bits[frame.overlap_start + index - 1 - own_offset])

        return estimate_geometric(
            frame.overlap,
            stats,
            self_next_bit_at,
            threshold_factor=cfg.threshold_factor,
            noise_floor=_noise_floor(frame, (own_span, other_span), cfg.noise_floor_sigmas),
            straddle_mean=cfg.straddle_mean,
            tie_epsilon=cfg.tie_epsilon,
            outlier_rejection=cfg.outlier_rejection,
        )
    except (
        EstimationFailedError,
        UndetectableTransformationsError,
        InconsistentStatisticsError,
    ) as exc:
        if isinstance(exc, InconsistentStatisticsError):
            flags.add(DecodeFlag.INCONSISTENT_STATISTICS)
        if not cfg.allow_fallback or cfg.strategy is Strategy.DIRECT:
            raise DecodeFailedError(f"{cfg.strategy.value} estimation failed: {exc}") from exc
        logger.warning(f"{cfg.strategy.value} estimation failed ({exc}); using direct method")
        flags.add(DecodeFlag.FALLBACK_USED)
        try:
            return _direct_estimate(frame, own_span, other_span)
        except EstimationFailedError as direct_exc:
            raise DecodeFailedError(f"fallback failed: {direct_exc}") from direct_exc


#####################################
# Phase resolution
#####################################


def _resolve_overlap(
    overlap: np.ndarray, a_self: float, b_other: float, known: np.ndarray, clamp_tolerance: float
) -> tuple[PhaseTrack, int]:
    theta, phi, _, inconsistent = possible_phase_pairs_array(
        overlap, a_self, b_other, clamp_tolerance
    )
    return select_pairs_array(theta, phi, known), int(inconsistent.sum())


def _other_frame_bits(
    frame: InterferedFrame, other_span: Span, track: PhaseTrack
) -> tuple[np.ndarray, int]:
    """Stitch clean head, boundary steps, overlap steps and clean tail."""
    start, end = other_span
    ov_start, ov_end = frame.overlap_start, frame.overlap_end
    y = frame.samples
    parts = []
    if start < ov_start:
        parts.append(msk_demodulate(y[start:ov_start]) if ov_start - start >= 2 else [])
        entry = wrap_angle(track.first_phi - np.angle(y[ov_start - 1]))
        parts.append([int(entry > 0)])
        unreliable = ov_start - start - 1
    else:
        unreliable = 0
    parts.append((track.delta_phi > 0).astype(np.uint8))
    if end > ov_end:
        exit_step = wrap_angle(np.angle(y[ov_end]) - track.last_phi)
        parts.append([int(exit_step > 0)])
        if end - ov_end >= 2:
            parts.append(msk_demodulate(y[ov_end:end]))
    return np.concatenate([np.asarray(p, dtype=np.uint8) for p in parts]), unreliable


#####################################
# Decoding
#####################################


def decode_packet(
    frame: InterferedFrame, own: Packet, own_offset: int, cfg: DecoderConfig
) -> DecodeResult:
    """Recover the peer's payload from ``frame``.

    Args:
        frame: Received frame, overlap boundaries known.
        own: The decoder's own packet.
        own_offset: Sample index where ``own`` starts in ``frame``.
        cfg: Receiver settings; ``cfg.pilot`` and ``cfg.peer_scrambler_seed``
            describe the peer.

    Raises:
        DecodeFailedError: Estimation failed and no fallback was possible,
            or the overlap is shorter than two samples.
    """
    cfg.validate()
    own_bits = own.frame_bits()
    own_span = (own_offset, own_offset + own.n_samples)
    if own_span[1] > len(frame):
        raise InvalidArgumentError(f"own packet {own_span} does not fit in {len(frame)} samples")
    other_span = frame.other_span(own_span)
    ov_start, ov_end = frame.overlap_start, frame.overlap_end
    if ov_end - ov_start < 2:
        raise DecodeFailedError(f"overlap of {ov_end - ov_start} sample(s) is too short")

    flags: set[DecodeFlag] = {DecodeFlag.FIRST_BIT_UNRELIABLE}
    stats = energy_stats(frame.overlap)
    estimate = _estimate_amplitudes(
        frame, stats, own_bits, own_offset, own_span, other_span, cfg, flags
    )

    own_steps = own_bits[ov_start - own_offset : ov_end - 1 - own_offset]
    known = np.where(own_steps == 1, HALF_PI, -HALF_PI)

    if isinstance(estimate, tuple):
        # Legacy roots carry no owner: keep the assignment whose phases fit best.
        larger, smaller = estimate
        tries = []
        for a_self, b_other in ((larger, smaller), (smaller, larger)):
            track, n_bad = _resolve_overlap(frame.overlap, a_self, b_other, known, cfg.clamp_tolerance)
            tries.append((float(track.err.sum()), a_self, b_other, track, n_bad))
        _, a_self, b_other, track, n_bad = min(tries, key=lambda t: t[0])
        estimate = AmplitudeEstimate(a_self=a_self, b_other=b_other, method=EstimationMethod.LEGACY)
    else:
        track, n_bad = _resolve_overlap(
            frame.overlap, estimate.a_self, estimate.b_other, known, cfg.clamp_tolerance
        )
    if n_bad:
        flags.add(DecodeFlag.INCONSISTENT_AMPLITUDES)
        logger.debug(f"{n_bad} overlap samples exceeded the D clamp tolerance")

    other_frame_bits, unreliable = _other_frame_bits(frame, other_span, track)
    n_pilot = len(cfg.pilot)
    pilot = np.asarray(cfg.pilot, dtype=np.uint8)
    if other_frame_bits.size < 2 * n_pilot:
        raise DecodeFailedError(
            f"peer frame of {other_frame_bits.size} bits is shorter than its two pilots"
        )
    pilot_mismatches = int(
        np.count_nonzero(other_frame_bits[:n_pilot] != pilot)
        + np.count_nonzero(other_frame_bits[-n_pilot:] != pilot)
    )
    payload = scramble(other_frame_bits[n_pilot:-n_pilot], cfg.peer_scrambler_seed)

    logger.debug(
        f"decoded {payload.size} peer bits with {estimate.method.value} amplitudes "
        f"({estimate.a_self:.4f}, {estimate.b_other:.4f}), pilot mismatches={pilot_mismatches}"
    )
    return DecodeResult(
        other_bits=payload,
        other_frame_bits=other_frame_bits,
        amplitude_estimate=estimate,
        per_bit_err=track.err,
        flags=frozenset(flags),
        unreliable_bit=unreliable,
        pilot_mismatches=pilot_mismatches,
    )


__all__ = [
    "DecodeFlag",
    "DecodeResult",
    "DecoderConfig",
    "Strategy",
    "decode_packet",
]
