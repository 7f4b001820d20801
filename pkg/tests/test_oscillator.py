import math

import numpy as np
import pytest

from discrete_canonical.lattice import DiscreteState, LatticeWindow, PreconditionError
from discrete_canonical.numerics import DomainError, RealLineGrid, eexp
from discrete_canonical.phase_field import phi
from discrete_canonical.oscillator import (
    OscillatorConfig,
    TorusGrid,
    annihilation_residual,
    evolve_fractional,
    ground_state_torus,
    ground_state_values,
    hamiltonian_matrix,
    lattice_ground_fidelity,
    oscillator_levels,
    physical_spectrum,
    quarter_evolution,
    spectrum,
    synthesize,
)

ROOT4 = 2**0.25
THETA_00 = 1.0864348112133082


def test_torus_grid_avoids_corners():
    g = TorusGrid(8, 8)
    assert np.all(np.abs(g.eta1) < 0.5)
    with pytest.raises(DomainError):
        TorusGrid(4, 16)


def test_ground_state_at_origin():
    oracle = ROOT4 * sum(math.exp(-math.pi * n * n) for n in range(-6, 7))
    assert abs(ground_state_values(0.0, 0.0) - oracle) < 1e-14
    assert abs(ground_state_values(0.0, 0.0) - ROOT4 * THETA_00) < 1e-14


def test_ground_state_real_and_symmetric():
    g = ground_state_torus(TorusGrid(32, 32)).values
    assert np.max(np.abs(g.imag)) < 1e-14
    assert np.all(g.real > 0)
    assert np.allclose(np.abs(g), np.abs(g[::-1, :]), atol=1e-14)
    assert np.allclose(np.abs(g), np.abs(g[:, ::-1]), atol=1e-14)


def test_ground_state_strictly_periodic():
    t = np.linspace(-0.45, 0.45, 19)
    assert np.max(np.abs(ground_state_values(0.5, t) - ground_state_values(-0.5, t))) < 1e-8
    assert np.max(np.abs(ground_state_values(t, 0.5) - ground_state_values(t, -0.5))) < 1e-8


def test_holomorphic_factor_coefficients():
    # psi0 E^{-i phi} E^{eta2^2/2} = sum_X a_X E^{i X (eta1 + i eta2)}, a_X = 2^{1/4} E^{-X^2/2}
    n = 64
    e1 = -0.5 + (np.arange(n) + 0.5) / n
    eta2 = 0.23
    f = ground_state_values(e1, eta2) * eexp(-phi(e1, eta2)) * np.exp(np.pi * eta2**2)
    for X in range(-3, 4):
        coeff = np.mean(f * eexp(-X * e1)) * np.exp(2 * np.pi * X * eta2)
        assert abs(coeff - ROOT4 * math.exp(-math.pi * X * X)) < 1e-12


def test_annihilation_residual_converges():
    r = [annihilation_residual(TorusGrid(n, n)) for n in (32, 64, 128)]
    assert r[0] / r[1] >= 3.5 and r[1] / r[2] >= 3.5
    assert r[2] < 1e-4


def test_annihilation_residual_scale_invariant():
    g = TorusGrid(64, 64)
    base = ground_state_torus(g).values
    assert annihilation_residual(g, 3.7j * base) == pytest.approx(annihilation_residual(g, base), rel=1e-12)


def test_annihilation_negative_control():
    out = []
    for n in (64, 128):
        g = TorusGrid(n, n)
        e1, _ = g.mesh()
        out.append(annihilation_residual(g, ground_state_torus(g).values * eexp(e1)))
    assert min(out) > 0.5
    assert out[0] / out[1] < 1.5


def test_project_edge_hamiltonian():
    cfg = OscillatorConfig(LatticeWindow.square(15))
    H = hamiltonian_matrix(cfg).matrix
    assert np.max(np.abs(H.entries - H.entries.conj().T)) < 1e-10
    vals = physical_spectrum(H)[:6]
    assert abs(vals[0] - 0.5) < 0.05
    assert np.max(np.abs(np.diff(vals[:4]) - 1)) < 0.05
    phases = 4 * vals[:4]
    assert np.max(np.abs(phases - np.round(phases))) < 0.05 * 4


def test_ladder_improves_with_window():
    target = np.array([0.5, 1.5, 2.5])
    devs = [np.max(np.abs(spectrum(OscillatorConfig(LatticeWindow.square(s)), 3) - target)) for s in (11, 15, 21)]
    assert devs[0] >= devs[1] >= devs[2]


def test_lattice_ground_state_is_gaussian():
    assert lattice_ground_fidelity(LatticeWindow.square(15)) >= 0.99


def test_subtract_checkerboard_mode():
    res = hamiltonian_matrix(OscillatorConfig(LatticeWindow.square(5), "subtract_checkerboard"))
    assert res.checkerboard_similarity > 0.99
    assert res.log_slope > 0
    assert res.regularization == "subtract_checkerboard"
    assert np.max(np.abs(res.matrix.entries - res.matrix.entries.conj().T)) < 1e-10


def test_config_validation():
    with pytest.raises(DomainError):
        OscillatorConfig(LatticeWindow.square(3), "other")


RES = RealLineGrid.symmetric(14, 1 / 64)


def test_quarter_evolution_maps_basis_state():
    w = LatticeWindow.centered(3)
    out = quarter_evolution(DiscreteState.basis(w, 2, 1), RES)
    assert out.dominant()[0] == (1, -2)
    assert abs(out.amplitude(1, -2)) >= 0.999
    rest = np.delete(out.amplitudes, w.index(1, -2))
    assert np.max(np.abs(rest)) <= 1e-3


def test_quarter_evolution_fixed_point_and_period_four():
    w = LatticeWindow.centered(3)
    start = DiscreteState.basis(w, 0, 0)
    assert quarter_evolution(start, RES).dominant()[0] == (0, 0)
    s = DiscreteState.basis(w, 2, 1)
    x = s
    for _ in range(4):
        x = quarter_evolution(x, RES)
    assert abs(x.overlap(s)) >= 0.996


def test_quarter_evolution_reports_phase():
    out = quarter_evolution(DiscreteState.basis(LatticeWindow.centered(3), 1, 2), RES)
    assert "dominant_phase" in out.meta
    assert abs(out.meta["dominant_phase"]) < 1e-6


def test_quarter_evolution_margin_guard():
    w = LatticeWindow.centered(5)
    with pytest.raises(PreconditionError):
        quarter_evolution(DiscreteState.basis(w, 5, 0), RealLineGrid.symmetric(12, 1 / 64))


def test_dvr_levels():
    assert np.allclose(oscillator_levels(RealLineGrid.symmetric(8, 1 / 32), 6), np.arange(6) + 0.5, atol=1e-9)


SMOOTH = RealLineGrid.symmetric(8, 1 / 32)


def _shifted_gaussian(q, a=1.0, b=0.5):
    return np.exp(-np.pi * (q - a) ** 2) * eexp(b * q)


def test_evolve_identity_and_parity():
    q = SMOOTH.values
    f = _shifted_gaussian(q)
    assert np.array_equal(evolve_fractional(f, 0.0, SMOOTH).values, f)
    half = evolve_fractional(f, 0.5, SMOOTH).values
    assert np.max(np.abs(half - np.exp(-1j * np.pi / 2) * f[::-1])) < 1e-8


def test_evolve_quarter_is_fourier_transform():
    q = SMOOTH.values
    a, b = 1.0, 0.5
    # Fourier transform of the shifted, boosted Gaussian
    ft = np.exp(-np.pi * (q - b) ** 2) * eexp(-(q - b) * a)
    out = evolve_fractional(_shifted_gaussian(q, a, b), 0.25, SMOOTH).values
    assert np.max(np.abs(out - np.exp(-1j * np.pi / 4) * ft)) < 1e-8


def test_evolve_rejects_long_times():
    with pytest.raises(DomainError):
        evolve_fractional(np.zeros(SMOOTH.size), 1.5, SMOOTH)


def test_evolve_quarter_matches_quarter_map_roughly():
    w = LatticeWindow.centered(3)
    grid = RealLineGrid.symmetric(12, 1 / 64)
    s = DiscreteState.basis(w, 2, 1)
    evolved = evolve_fractional(s, 0.25, grid).values
    mapped = np.exp(-1j * np.pi / 4) * synthesize(quarter_evolution(s, RealLineGrid.symmetric(13, 1 / 64)), grid)
    inner = np.abs(grid.values) <= 6
    assert np.max(np.abs(evolved - mapped)[inner]) < 0.05


@pytest.mark.xfail(strict=True, reason="template tails beyond the grid carry L1 weight ~1/(pi L); see ledger")
def test_evolve_quarter_matches_quarter_map_to_1e4():
    w = LatticeWindow.centered(3)
    grid = RealLineGrid.symmetric(12, 1 / 64)
    s = DiscreteState.basis(w, 2, 1)
    evolved = evolve_fractional(s, 0.25, grid).values
    mapped = np.exp(-1j * np.pi / 4) * synthesize(quarter_evolution(s, RealLineGrid.symmetric(13, 1 / 64)), grid)
    assert np.max(np.abs(evolved - mapped)) < 1e-4
