"""MSK bit/baseband mapping and pseudo-random scrambling.

Module Information:
    - Filename: modem.py
    - Module: modem
    - Location: src/anc_decoder/

Key Concepts:
    - One complex sample per bit (symbol-rate model)
    - Bit 1 advances the phase by +pi/2, bit 0 by -pi/2
    - Demodulation looks only at the phase of s[n+1] * conj(s[n]), so any
      common gain and rotation from the channel cancels
    - Payloads are XORed with a maximal-length LFSR sequence so the cross
      term of the overlap energy averages to zero
"""

#####################################
# Imports At the Top
#####################################

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateSampleError, InvalidArgumentError

#####################################
# Constants
#####################################

LFSR_DEGREE: int = 16
LFSR_PERIOD: int = (1 << LFSR_DEGREE) - 1  # 65535
DEFAULT_PILOT_BITS: int = 64
DEFAULT_PILOT_SEED: int = 0x5A5
FIRST_PILOT_BIT: int = 1
DEGENERATE_EPSILON: float = 1e-12
HALF_PI: float = np.pi / 2


#####################################
# Scrambler
#####################################


@lru_cache(maxsize=1)
def _m_sequence() -> np.ndarray:
    """One full period of the x^16 + x^14 + x^13 + x^11 + 1 m-sequence.

    s(0)=1, s(1..15)=0, s(i+16) = s(i+14) ^ s(i+13) ^ s(i+11) ^ s(i).
    """
    s = [1] + [0] * (LFSR_DEGREE - 1)
    for i in range(LFSR_PERIOD - LFSR_DEGREE):
        s.append(s[i + 14] ^ s[i + 13] ^ s[i + 11] ^ s[i])
    seq = np.array(s, dtype=np.uint8)
    seq.setflags(write=False)
    return seq


def pn_sequence(seed: int, length: int) -> np.ndarray:
    """Return ``length`` PN bits starting at phase ``seed`` of the m-sequence.

    Args:
        seed: Any integer; reduced modulo the LFSR period.
        length: Number of bits to return.

    Returns:
        np.ndarray: uint8 array of 0/1 values.
    """
    if length < 0:
        raise InvalidArgumentError(f"PN length must be >= 0, got {length}")
    m = _m_sequence()
    idx = (int(seed) % LFSR_PERIOD + np.arange(length, dtype=np.int64)) % LFSR_PERIOD
    return m[idx]


def scramble(bits: np.ndarray, seed: int) -> np.ndarray:
    """XOR ``bits`` with the PN sequence for ``seed``; applying it twice is the identity."""
    b = np.asarray(bits, dtype=np.uint8)
    return b ^ pn_sequence(seed, b.size)


def make_pilot(length: int = DEFAULT_PILOT_BITS, seed: int = DEFAULT_PILOT_SEED) -> np.ndarray:
    """Known pilot pattern whose first bit is always ``FIRST_PILOT_BIT``."""
    if length < 1:
        raise InvalidArgumentError(f"pilot length must be >= 1, got {length}")
    pilot = pn_sequence(seed, length).copy()
    pilot[0] = FIRST_PILOT_BIT
    return pilot


#####################################
# Packet
#####################################


@dataclass(frozen=True, eq=False)
class Packet:
    """What a sender knows about its own transmission.

    Attributes:
        payload: Unscrambled payload bits.
        pilot: Known pilot placed at both ends of the frame.
        scrambler_seed: Seed passed to ``scramble`` for the payload.
        amplitude: Transmit amplitude (A_s or B_s), must be positive.
        initial_phase: Phase of the first sample, radians.
    """

    payload: np.ndarray
    pilot: np.ndarray = field(default_factory=make_pilot)
    scrambler_seed: int = 0
    amplitude: float = 1.0
    initial_phase: float = 0.0

    def __post_init__(self) -> None:
        if not self.amplitude > 0:
            raise InvalidArgumentError(f"amplitude must be > 0, got {self.amplitude}")
        if len(self.pilot) < 1 or int(self.pilot[0]) != FIRST_PILOT_BIT:
            raise InvalidArgumentError(
                f"pilot must be non-empty and start with bit {FIRST_PILOT_BIT}"
            )

    def frame_bits(self) -> np.ndarray:
        """Return pilot ∥ scrambled payload ∥ pilot."""
        pilot = np.asarray(self.pilot, dtype=np.uint8)
        return np.concatenate([pilot, scramble(self.payload, self.scrambler_seed), pilot])

    @property
    def n_samples(self) -> int:
        """Number of baseband samples the modulated frame occupies."""
        return 2 * len(self.pilot) + len(self.payload) + 1


#####################################
# Modulation
#####################################


def modulate_bits(bits: np.ndarray, amplitude: float = 1.0, initial_phase: float = 0.0) -> np.ndarray:
    """Map raw bits to ``len(bits) + 1`` constant-modulus samples."""
    if not amplitude > 0:
        raise InvalidArgumentError(f"amplitude must be > 0, got {amplitude}")
    b = np.asarray(bits, dtype=np.int8)
    steps = np.where(b == 1, HALF_PI, -HALF_PI)
    phase = initial_phase + np.concatenate([[0.0], np.cumsum(steps)])
    return amplitude * np.exp(1j * phase)


def msk_modulate(packet: Packet) -> np.ndarray:
    """Modulate the packet's full frame (pilot, scrambled payload, pilot)."""
    return modulate_bits(packet.frame_bits(), packet.amplitude, packet.initial_phase)


def msk_demodulate(samples: np.ndarray, epsilon: float = DEGENERATE_EPSILON) -> np.ndarray:
    """Decide bit[n] = 1 when arg(s[n+1] / s[n]) > 0.

    Raises:
        InvalidArgumentError: Fewer than two samples.
        DegenerateSampleError: A sample magnitude is below ``epsilon``.
    """
    s = np.asarray(samples, dtype=np.complex128)
    if s.size < 2:
        raise InvalidArgumentError(f"need at least 2 samples to demodulate, got {s.size}")
    small = np.flatnonzero(np.abs(s) < epsilon)
    if small.size:
        raise DegenerateSampleError(f"sample {int(small[0])} has magnitude below {epsilon}")
    return (np.angle(s[1:] * np.conj(s[:-1])) > 0).astype(np.uint8)


__all__ = [
    "DEFAULT_PILOT_BITS",
    "DEGENERATE_EPSILON",
    "FIRST_PILOT_BIT",
    "LFSR_PERIOD",
    "Packet",
    "make_pilot",
    "modulate_bits",
    "msk_demodulate",
    "msk_modulate",
    "pn_sequence",
    "scramble",
]
