"""Per-sample phase pairs of a two-signal mixture and their selection.

Module Information:
    - Filename: phase_solver.py
    - Module: phase_solver
    - Location: src/anc_decoder/

Key Concepts:
    - Given y = A e^{i theta} + B e^{i phi} and both amplitudes, (theta, phi)
      is one of exactly two pairs, mirror images about the direction of y
    - The decoder knows its own phase step, so of the four step candidates
      between consecutive samples it keeps the one closest to that step
    - Array functions do the work; the scalar operations wrap them
"""

#####################################
# Imports At the Top
#####################################

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InconsistentAmplitudesError, InvalidArgumentError

#####################################
# Constants
#####################################

DEFAULT_CLAMP_TOLERANCE: float = 0.25
# Branch-error gap (rad) above which a step pins the branch at its samples.
BRANCH_MARGIN: float = np.pi / 8

# (x, y) candidate order: branch index at n+1, branch index at n. First wins ties.
CANDIDATES: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))


#####################################
# Domain Types
#####################################


class Branch(Enum):
    """Sign in front of the square root for theta."""

    PLUS = 0
    MINUS = 1


@dataclass(frozen=True)
class PhasePairSolution:
    """One (theta, phi) solution for a single sample."""

    theta: float
    phi: float
    branch: Branch
    d_value: float


@dataclass(frozen=True)
class PairSelection:
    """Chosen solutions at n+1 (``chosen_next``) and n (``chosen``).

    ``err_values`` are the four wrapped errors in ``CANDIDATES`` order.
    """

    chosen: PhasePairSolution
    chosen_next: PhasePairSolution
    delta_theta: float
    delta_phi: float
    err_values: tuple[float, float, float, float]

    @property
    def err(self) -> float:
        """Smallest of the four candidate errors."""
        return min(self.err_values)


@dataclass(frozen=True, eq=False)
class PhaseTrack:
    """Result of ``select_pairs_array`` over a run of samples.

    Attributes:
        delta_phi: Wrapped phi step per transition, length N - 1.
        err: Error of the chosen candidate per transition, length N - 1.
        next_branch: Branch index picked at n+1 for each transition.
        prev_branch: Branch index picked at n for each transition.
        first_phi: phi at the first sample, on the branch its nearest
            decisive step picks.
        last_phi: Same for the last sample.
    """

    delta_phi: np.ndarray
    err: np.ndarray
    next_branch: np.ndarray
    prev_branch: np.ndarray
    first_phi: float
    last_phi: float


#####################################
# Array Operations
#####################################


def wrap_angle(x: np.ndarray | float) -> np.ndarray | float:
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


def possible_phase_pairs_array(
    y: np.ndarray,
    a: float,
    b: float,
    clamp_tolerance: float = DEFAULT_CLAMP_TOLERANCE,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Both (theta, phi) solutions for every sample of ``y``.

    Returns:
        theta: shape (2, N); row 0 is the plus branch, row 1 the minus branch.
        phi: shape (2, N); phi in row k pairs with theta in row k.
        d: the raw (unclamped) D per sample.
        inconsistent: boolean mask where |D| > 1 + clamp_tolerance.
    """
    if not (a > 0 and b > 0):
        raise InvalidArgumentError(f"amplitudes must be positive, got A={a}, B={b}")
    y = np.asarray(y, dtype=np.complex128)
    d = (np.abs(y) ** 2 - a * a - b * b) / (2 * a * b)
    inconsistent = np.abs(d) > 1 + clamp_tolerance
    dc = np.clip(d, -1.0, 1.0)
    root = np.sqrt(1.0 - dc * dc)

    theta = np.empty((2, y.size))
    phi = np.empty((2, y.size))
    theta[0] = np.angle(y * (a + b * dc + 1j * b * root))
    theta[1] = np.angle(y * (a + b * dc - 1j * b * root))
    phi[0] = np.angle(y * (b + a * dc - 1j * a * root))
    phi[1] = np.angle(y * (b + a * dc + 1j * a * root))
    return theta, phi, d, inconsistent


def select_pairs_array(
    theta: np.ndarray, phi: np.ndarray, known_delta_theta: np.ndarray
) -> PhaseTrack:
    """Pick, for each transition n -> n+1, the candidate closest to the known step.

    Args:
        theta: (2, N) from ``possible_phase_pairs_array``.
        phi: (2, N) from ``possible_phase_pairs_array``.
        known_delta_theta: (N - 1,) the decoder's own phase steps.
    """
    known = np.asarray(known_delta_theta, dtype=float)
    if theta.shape[1] != known.size + 1:
        raise InvalidArgumentError(
            f"{theta.shape[1]} samples need {theta.shape[1] - 1} known steps, got {known.size}"
        )
    errs = np.empty((len(CANDIDATES), known.size))
    for k, (x, yb) in enumerate(CANDIDATES):
        errs[k] = np.abs(wrap_angle(theta[x, 1:] - theta[yb, :-1] - known))
    choice = np.argmin(errs, axis=0)
    cand = np.asarray(CANDIDATES)
    next_branch = cand[choice, 0]
    prev_branch = cand[choice, 1]
    cols = np.arange(known.size)
    phi_next = phi[next_branch, cols + 1]
    phi_prev = phi[prev_branch, cols]
    if not known.size:
        first_branch = last_branch = 0
    else:
        first_branch = _edge_branch(errs[[0, 2]].min(axis=0), errs[[1, 3]].min(axis=0), first=True)
        last_branch = _edge_branch(errs[[0, 1]].min(axis=0), errs[[2, 3]].min(axis=0), first=False)
        if first_branch is None:
            first_branch = int(prev_branch[0])
        if last_branch is None:
            last_branch = int(next_branch[-1])
    return PhaseTrack(
        delta_phi=wrap_angle(phi_next - phi_prev),
        err=errs[choice, cols],
        next_branch=next_branch,
        prev_branch=prev_branch,
        first_phi=float(phi[first_branch, 0]),
        last_phi=float(phi[last_branch, -1]),
    )


def _edge_branch(best_plus: np.ndarray, best_minus: np.ndarray, *, first: bool) -> int | None:
    """Branch at the first (or last) sample, taken from the nearest decisive step.

    When both parties step the same way, both branches fit equally well and
    keep their index, so the edge sample inherits the branch of the closest
    step whose best errors differ by more than ``BRANCH_MARGIN``.
    """
    decisive = np.flatnonzero(np.abs(best_plus - best_minus) > BRANCH_MARGIN)
    if not decisive.size:
        return None
    t = decisive[0] if first else decisive[-1]
    return 0 if best_plus[t] <= best_minus[t] else 1


#####################################
# Scalar Operations
#####################################


def possible_phase_pairs(
    y: complex,
    a: float,
    b: float,
    clamp_tolerance: float = DEFAULT_CLAMP_TOLERANCE,
) -> tuple[PhasePairSolution, PhasePairSolution]:
    """Return the plus- and minus-branch solutions for one sample.

    Raises:
        InconsistentAmplitudesError: |D| exceeds 1 + ``clamp_tolerance``.
    """
    theta, phi, d, inconsistent = possible_phase_pairs_array(
        np.array([y]), a, b, clamp_tolerance
    )
    if inconsistent[0]:
        raise InconsistentAmplitudesError(
            f"D={d[0]:.4f} is outside [-1, 1] by more than {clamp_tolerance} for A={a}, B={b}"
        )
    return tuple(
        PhasePairSolution(
            theta=float(theta[k, 0]), phi=float(phi[k, 0]), branch=Branch(k), d_value=float(d[0])
        )
        for k in (0, 1)
    )


def select_pair(
    pairs_n: tuple[PhasePairSolution, PhasePairSolution],
    pairs_n1: tuple[PhasePairSolution, PhasePairSolution],
    known_delta_theta: float,
) -> PairSelection:
    """Choose the (n+1, n) solution pair whose theta step matches ``known_delta_theta``."""
    theta = np.array([[pairs_n[k].theta, pairs_n1[k].theta] for k in (0, 1)])
    phi = np.array([[pairs_n[k].phi, pairs_n1[k].phi] for k in (0, 1)])
    known = np.array([known_delta_theta])
    errs = [
        float(np.abs(wrap_angle(theta[x, 1] - theta[yb, 0] - known_delta_theta)))
        for x, yb in CANDIDATES
    ]
    track = select_pairs_array(theta, phi, known)
    x, yb = int(track.next_branch[0]), int(track.prev_branch[0])
    return PairSelection(
        chosen=pairs_n[yb],
        chosen_next=pairs_n1[x],
        delta_theta=float(wrap_angle(pairs_n1[x].theta - pairs_n[yb].theta)),
        delta_phi=float(track.delta_phi[0]),
        err_values=tuple(errs),
    )


__all__ = [
    "CANDIDATES",
    "DEFAULT_CLAMP_TOLERANCE",
    "Branch",
    "PairSelection",
    "PhasePairSolution",
    "PhaseTrack",
    "possible_phase_pairs",
    "possible_phase_pairs_array",
    "select_pair",
    "select_pairs_array",
    "wrap_angle",
]
