"""Test phase-pair resolution and selection.

Module Information:
    - Filename: test_phase_solver.py
    - Module: test_phase_solver
    - Location: tests/
"""

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
import pytest

from anc_decoder.errors import InconsistentAmplitudesError, InvalidArgumentError
from anc_decoder.modem import modulate_bits
from anc_decoder.phase_solver import (
    Branch,
    PhasePairSolution,
    possible_phase_pairs,
    possible_phase_pairs_array,
    select_pair,
    select_pairs_array,
    wrap_angle,
)


def _angle_close(x, y, tol):
    return abs(float(wrap_angle(x - y))) <= tol


def test_collinear_constructive_sample():
    """y = 2 with A = B = 1 forces theta = phi = 0."""
    plus, minus = possible_phase_pairs(2 + 0j, 1.0, 1.0)
    for sol in (plus, minus):
        assert sol.d_value == pytest.approx(1.0)
        assert _angle_close(sol.theta, 0.0, 1e-12)
        assert _angle_close(sol.phi, 0.0, 1e-12)


def test_perpendicular_example():
    """y = 0.5 + 1i with A = 1, B = 0.5 gives (pi/2, 0) on the plus branch."""
    y = 0.5 + 1j
    plus, minus = possible_phase_pairs(y, 1.0, 0.5)
    assert plus.branch is Branch.PLUS and minus.branch is Branch.MINUS
    assert plus.d_value == pytest.approx(0.0, abs=1e-12)
    assert _angle_close(plus.theta, np.pi / 2, 1e-12)
    assert _angle_close(plus.phi, 0.0, 1e-12)
    rebuilt = np.exp(1j * minus.theta) + 0.5 * np.exp(1j * minus.phi)
    assert abs(rebuilt - y) < 1e-12


def test_random_forward_oracle():
    """One of the two pairs matches the true phases for 10^4 random samples."""
    rng = np.random.default_rng(11)
    n = 10_000
    a = rng.uniform(0.2, 1.0, n)
    b = rng.uniform(1.2, 2.0, n)
    theta = rng.uniform(-np.pi, np.pi, n)
    phi = rng.uniform(-np.pi, np.pi, n)
    y = a * np.exp(1j * theta) + b * np.exp(1j * phi)
    for k in range(n):
        sols = possible_phase_pairs(y[k], a[k], b[k])
        assert any(
            _angle_close(s.theta, theta[k], 1e-9) and _angle_close(s.phi, phi[k], 1e-9)
            for s in sols
        )


def test_both_pairs_reconstruct_the_sample():
    rng = np.random.default_rng(12)
    for _ in range(500):
        a, b = rng.uniform(0.1, 2.0, 2)
        y = a * np.exp(1j * rng.uniform(0, 2 * np.pi)) + b * np.exp(1j * rng.uniform(0, 2 * np.pi))
        for s in possible_phase_pairs(y, a, b):
            rebuilt = a * np.exp(1j * s.theta) + b * np.exp(1j * s.phi)
            assert abs(rebuilt - y) <= 1e-6 * abs(y)


def test_swapping_amplitudes_swaps_roles():
    """Swapping A and B maps each branch's (theta, phi) to the other branch's (phi, theta)."""
    y = 0.3 - 1.1j
    plus, minus = possible_phase_pairs(y, 1.0, 0.4)
    s_plus, s_minus = possible_phase_pairs(y, 0.4, 1.0)
    assert _angle_close(s_plus.theta, minus.phi, 1e-12)
    assert _angle_close(s_plus.phi, minus.theta, 1e-12)
    assert _angle_close(s_minus.theta, plus.phi, 1e-12)
    assert _angle_close(s_minus.phi, plus.theta, 1e-12)


def test_inconsistent_amplitudes_raise():
    with pytest.raises(InconsistentAmplitudesError):
        possible_phase_pairs(5 + 0j, 1.0, 0.5)
    # Slightly past |D| = 1 is clamped instead.
    plus, _ = possible_phase_pairs(1.52 + 0j, 1.0, 0.5)
    assert plus.d_value > 1


def test_non_positive_amplitude_raises():
    with pytest.raises(InvalidArgumentError):
        possible_phase_pairs(1 + 0j, 0.0, 1.0)


def test_wrap_angle_range():
    x = np.array([-3 * np.pi, -np.pi, 0.0, np.pi, 3 * np.pi, 7.0])
    w = wrap_angle(x)
    assert np.all(w > -np.pi) and np.all(w <= np.pi)
    assert_allclose(np.cos(w), np.cos(x), atol=1e-12)
    assert float(wrap_angle(-np.pi)) == pytest.approx(np.pi)


def test_tie_break_picks_first_candidate():
    """When every candidate fits equally, the lowest index wins."""
    sol = PhasePairSolution(theta=0.0, phi=0.0, branch=Branch.PLUS, d_value=1.0)
    sol_m = PhasePairSolution(theta=0.0, phi=0.0, branch=Branch.MINUS, d_value=1.0)
    nxt = PhasePairSolution(theta=np.pi / 2, phi=0.0, branch=Branch.PLUS, d_value=1.0)
    nxt_m = PhasePairSolution(theta=np.pi / 2, phi=0.0, branch=Branch.MINUS, d_value=1.0)
    sel = select_pair((sol, sol_m), (nxt, nxt_m), np.pi / 2)
    assert sel.chosen.branch is Branch.PLUS
    assert sel.chosen_next.branch is Branch.PLUS
    assert sel.err == pytest.approx(0.0)


def test_selected_error_is_minimum_and_wrap_invariant():
    rng = np.random.default_rng(13)
    for _ in range(200):
        y0, y1 = rng.normal(size=2) + 1j * rng.normal(size=2)
        a, b = 1.0, 0.6
        pairs0 = possible_phase_pairs(y0, a, b, clamp_tolerance=100.0)
        pairs1 = possible_phase_pairs(y1, a, b, clamp_tolerance=100.0)
        step = np.pi / 2 if rng.random() < 0.5 else -np.pi / 2
        sel = select_pair(pairs0, pairs1, step)
        assert sel.err <= min(sel.err_values) + 1e-15
        shifted = select_pair(pairs0, pairs1, step + 2 * np.pi)
        assert_allclose(shifted.err_values, sel.err_values, atol=1e-9)


def test_noiseless_selection_recovers_other_bits():
    """Selecting by the own phase step reproduces the peer's bits exactly."""
    rng = np.random.default_rng(14)
    own = rng.integers(0, 2, 400, dtype=np.uint8)
    other = rng.integers(0, 2, 400, dtype=np.uint8)
    y = modulate_bits(own, 1.0, 0.4) + modulate_bits(other, 0.5, 2.5)
    theta, phi, _, bad = possible_phase_pairs_array(y, 1.0, 0.5)
    assert not bad.any()
    track = select_pairs_array(theta, phi, np.where(own == 1, np.pi / 2, -np.pi / 2))
    assert_array_equal((track.delta_phi > 0).astype(np.uint8), other)
    assert_allclose(track.err, 0.0, atol=1e-9)
    true_phi = np.angle(modulate_bits(other, 0.5, 2.5))
    assert _angle_close(track.first_phi, true_phi[0], 1e-9)
    assert _angle_close(track.last_phi, true_phi[-1], 1e-9)


def test_edge_branch_survives_equal_steps():
    """Trailing steps where both parties agree keep the branch from the last decisive step."""
    own = np.array([1, 0, 1, 1, 1, 1, 1, 1], dtype=np.uint8)
    other = np.array([0, 1, 0, 1, 1, 1, 1, 1], dtype=np.uint8)
    y = modulate_bits(own, 1.0, 0.0) + modulate_bits(other, 0.5, 2.1)
    theta, phi, _, _ = possible_phase_pairs_array(y, 1.0, 0.5)
    track = select_pairs_array(theta, phi, np.where(own == 1, np.pi / 2, -np.pi / 2))
    assert _angle_close(track.last_phi, np.angle(modulate_bits(other, 0.5, 2.1))[-1], 1e-9)


def test_select_pairs_array_length_mismatch():
    theta, phi, _, _ = possible_phase_pairs_array(np.ones(4, dtype=complex), 1.0, 0.5, 10.0)
    with pytest.raises(InvalidArgumentError):
        select_pairs_array(theta, phi, np.zeros(2))
