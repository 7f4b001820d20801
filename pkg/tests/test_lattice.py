import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discrete_canonical.lattice import (
    DiscreteState,
    EdgeState,
    LatticeWindow,
    OperatorMatrix,
    PreconditionError,
    a_p_element,
    a_q_element,
    a_q_from_integral,
    build_p_matrix,
    build_q_matrix,
    commutator_block_residual,
    commutator_residual,
    edge_coefficient,
    log_fit,
    p_squared_growth,
    project_physical,
)
from discrete_canonical.numerics import DomainError

TWO_PI = 2 * math.pi
small = st.integers(min_value=-30, max_value=30)


def test_window_addressing():
    w = LatticeWindow(-1, 2, 3, 4)
    assert w.size == 8
    assert w.index(-1, 3) == 0 and w.index(-1, 4) == 1 and w.index(0, 3) == 2
    Q, P = w.coords()
    assert list(zip(Q[:3], P[:3])) == [(-1, 3), (-1, 4), (0, 3)]
    with pytest.raises(DomainError):
        LatticeWindow(2, 1, 0, 0)
    with pytest.raises(DomainError):
        w.index(5, 3)


def test_a_q_printed_examples():
    # with the 1/(2 pi) factor removed the elements are the bare fractions
    assert a_q_element(0, 0, 0, 0) == 0
    assert abs(TWO_PI * a_q_element(0, 0, 0, 1) - 1j) < 1e-15
    assert a_q_element(0, 0, 1, 0) == 0
    assert a_q_element(0, 0, 0, 1, printed=True) == 1j


def test_a_p_printed_examples():
    assert abs(TWO_PI * a_p_element(0, 0, 1, 0) + 1j) < 1e-15
    assert a_p_element(0, 0, 0, 1) == 0
    assert abs(TWO_PI * a_p_element(0, 0, 1, 1) - 0.5j) < 1e-15
    assert a_p_element(0, 0, 1, 1, printed=True) == 0.5j


@given(small, small, small, small, small, small)
def test_translation_covariance(q1, p1, q2, p2, sq, sp):
    assert a_q_element(q1, p1, q2, p2) == a_q_element(q1 + sq, p1 + sp, q2 + sq, p2 + sp)
    assert a_p_element(q1, p1, q2, p2) == a_p_element(q1 + sq, p1 + sp, q2 + sq, p2 + sp)


@given(small, small, small, small)
def test_elementwise_hermiticity(q1, p1, q2, p2):
    assert a_q_element(q1, p1, q2, p2) == np.conj(a_q_element(q2, p2, q1, p1))
    assert a_p_element(q1, p1, q2, p2) == np.conj(a_p_element(q2, p2, q1, p1))


@pytest.mark.parametrize("dq, dp", [(0, 1), (3, 2), (-2, 5), (4, -1)])
def test_integral_route_matches_closed_form(dq, dp):
    assert abs(a_q_from_integral(0, 0, dq, dp, k_max=40) - a_q_element(0, 0, dq, dp)) < 1e-8


def test_integral_route_zero_for_p_zero():
    assert a_q_from_integral(0, 0, 3, 0) == 0


def test_single_site_window():
    w = LatticeWindow.centered(0)
    assert build_q_matrix(w).entries.tolist() == [[0]]
    assert build_p_matrix(w).entries.tolist() == [[0]]


def test_matrix_diagonals_and_hermiticity():
    w = LatticeWindow.centered(1)
    q = build_q_matrix(w)
    p = build_p_matrix(w)
    Q, P = w.coords()
    assert np.array_equal(np.diag(q.entries).real, Q)
    assert np.array_equal(np.diag(p.entries).real, P)
    for m in (q, p):
        assert np.max(np.abs(m.entries - m.entries.conj().T)) < 1e-12
    assert q.element(0, 0, 0, 1) == a_q_element(0, 0, 0, 1)


def test_memory_budget_guard():
    with pytest.raises(MemoryError, match="bytes"):
        build_q_matrix(LatticeWindow.centered(10), memory_budget=1000)


def test_hermitian_claim_checked():
    w = LatticeWindow.centered(0)
    with pytest.raises(DomainError):
        OperatorMatrix(LatticeWindow(0, 1, 0, 0), np.array([[0, 1], [2, 0]], dtype=complex), hermitian=True)


def test_commutator_central_elements():
    w = LatticeWindow.square(21)
    rep = commutator_residual(w)
    comm = rep.residual.entries + 1j / TWO_PI * (np.eye(w.size) - np.outer(w.checkerboard(), w.checkerboard()))
    i00, i10 = w.index(0, 0), w.index(1, 0)
    # in printed units: 0 on the diagonal and i at (0,0) -> (1,0)
    assert abs(TWO_PI * comm[i00, i00]) < 0.05
    assert abs(TWO_PI * comm[i00, i10] - 1j) < 0.05


def test_commutator_converges_on_fixed_block():
    res = [commutator_block_residual(LatticeWindow.square(s), 2) for s in (21, 31, 41)]
    assert res[0] > res[1] > res[2]
    assert res[2] < 0.01


def test_commutator_edge_orthogonal_sector():
    # physical states near the centre see [q, p] = i/(2 pi)
    errs = []
    for side in (15, 25, 35):
        w = LatticeWindow.square(side)
        phi_state = DiscreteState.from_sites(w, {(0, 0): 1, (0, 1): 1})
        psi_state = DiscreteState.from_sites(w, {(1, 0): 1, (0, 0): 1, (-1, 1): 0.5, (1, 1): -0.5})
        assert abs(edge_coefficient(phi_state)) < 1e-15 and abs(edge_coefficient(psi_state)) < 1e-15
        q = build_q_matrix(w).entries
        p = build_p_matrix(w).entries
        lhs = np.vdot(phi_state.amplitudes, (q @ p - p @ q) @ psi_state.amplitudes)
        errs.append(abs(lhs - 1j / TWO_PI * phi_state.overlap(psi_state)))
    assert errs[0] > errs[1] > errs[2]


def test_edge_coefficient_examples():
    w = LatticeWindow.centered(2)
    assert edge_coefficient(DiscreteState.basis(w, 0, 0)) == 1
    pair = DiscreteState.from_sites(w, {(0, 0): 2**-0.5, (1, 0): 2**-0.5})
    assert abs(edge_coefficient(pair)) < 1e-15
    edge = EdgeState(w)
    assert edge_coefficient(edge) == w.size
    assert edge.norm**2 == pytest.approx(w.size)


def test_project_physical():
    w = LatticeWindow(0, 2, -1, 1)
    pair = DiscreteState.from_sites(w, {(0, 0): 1, (1, 0): 1})
    assert np.allclose(project_physical(pair).amplitudes, pair.amplitudes, atol=1e-15)
    assert np.max(np.abs(project_physical(EdgeState(w)).amplitudes)) < 1e-15
    out = project_physical(DiscreteState.basis(w, 0, 0))
    N = w.size
    c = w.checkerboard()
    expected = -c / N
    expected[w.index(0, 0)] = 1 - 1 / N
    assert np.allclose(out.amplitudes, expected, atol=1e-15)
    assert abs(edge_coefficient(out)) < 1e-12


def test_p_squared_grows_logarithmically():
    s = DiscreteState.basis(LatticeWindow.centered(2), 0, 0)
    pts = p_squared_growth(s, (10, 20, 40, 80))
    vals = [v for _, v in pts]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    slope, _, r2 = log_fit(pts)
    assert slope > 0 and r2 > 0.99
    # the divergence is carried by |a(psi)|**2 sum Q**2 / (4 pi**2 (P**2+Q**2)**2) ~ ln(L) / (4 pi)
    assert abs(slope - 1 / (4 * math.pi)) < 0.01


def test_p_squared_converges_for_physical_state():
    w = LatticeWindow.centered(2)
    pair = DiscreteState.from_sites(w, {(0, 0): 2**-0.5, (1, 0): 2**-0.5})
    pts = dict(p_squared_growth(pair, (40, 80)))
    assert abs(pts[80] / pts[40] - 1) < 0.01


def test_p_squared_zero_state_and_rim_guard():
    w = LatticeWindow.centered(3)
    zero = DiscreteState(w, np.zeros(w.size))
    assert p_squared_growth(zero, (5, 10)) == [(5, 0.0), (10, 0.0)]
    with pytest.raises(PreconditionError):
        p_squared_growth(DiscreteState.basis(w, 3, 0), (3, 10))


def test_p_squared_matches_dense_matrix():
    w = LatticeWindow.centered(6)
    s = DiscreteState.from_sites(w, {(0, 0): 0.6, (1, -1): 0.8j})
    p = build_p_matrix(w).entries
    dense = np.vdot(s.amplitudes, p @ p @ s.amplitudes).real
    assert p_squared_growth(s, (6,))[0][1] == pytest.approx(dense, rel=1e-12)
