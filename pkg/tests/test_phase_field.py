import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from discrete_canonical.numerics import eexp
from discrete_canonical.phase_field import (
    SigmaSplit,
    VortexError,
    interpolator_u,
    nearest_vortex,
    phase_sample,
    phi,
    theta_product,
    theta_sum,
    trial_interpolator,
    winding_number,
    winding_number_square,
)

unit = st.floats(min_value=-0.4999, max_value=0.4999, allow_nan=False)
THETA_00 = 1.0864348112133082


def off_corner(a, b):
    return nearest_vortex(a, b)[2] > 1e-3


def test_theta_sum_at_origin():
    oracle = 1 + 2 * sum(math.exp(-math.pi * n * n) for n in range(1, 6))
    assert abs(theta_sum(0, 0, 5) - oracle) < 1e-15
    assert abs(theta_sum(0, 0) - THETA_00) < 1e-15
    assert np.angle(theta_sum(0, 0, 3)) == 0


def test_theta_vanishes_at_corner():
    assert abs(theta_sum(0.5, 0.5)) < 1e-10
    assert abs(theta_product(0.5, 0.5, 3)) < 1e-10


def test_theta_product_single_factor():
    e = math.exp
    oracle = (1 - e(-2 * math.pi)) * (1 + e(-math.pi)) ** 2 * (1 + e(-3 * math.pi)) ** 2
    assert abs(theta_product(0, 0, 1) - oracle) < 1e-15


def test_theta_representations_agree():
    rng = np.random.default_rng(3)
    eta, x = rng.uniform(-0.5, 0.5, (2, 50))
    ratio = theta_product(eta, x) / theta_sum(eta, x)
    assert np.max(np.abs(ratio - 1)) < 1e-12


def test_theta_product_reduces_large_x():
    assert abs(theta_product(0.2, 2.3) / theta_sum(0.2, 2.3) - 1) < 1e-12


def test_theta_sum_range_guard():
    with pytest.raises(OverflowError):
        theta_sum(0.0, 7.5, 6)


def test_phi_examples():
    assert phi(0.3, 0.0) == 0.0
    assert abs(phi(0.25, 0.25) - 1 / 32) < 1e-15


def test_phi_matches_theta_phase():
    s = phase_sample(0.2, -0.35)
    assert abs(s.r * eexp(s.phi) - theta_sum(0.2, -0.35)) < 1e-10


def test_phi_vortex_error_names_corner():
    with pytest.raises(VortexError, match=r"\(0.5, 0.5\)"):
        phi(0.5, 0.5)
    with pytest.raises(VortexError):
        phi(-0.5 + 1e-10, 1.5)


@given(unit, unit)
def test_phi_antisymmetric(eta, xi):
    assume(off_corner(eta, xi))
    assert abs(phi(eta, xi) + phi(-eta, xi)) < 1e-10
    assert abs(phi(eta, xi) + phi(eta, -xi)) < 1e-10


@given(unit, unit)
def test_phi_sum_rule(eta, xi):
    assume(off_corner(eta, xi))
    assert abs(phi(eta, xi) + phi(xi, eta) - eta * xi) < 1e-10


@given(unit, unit)
def test_phi_quasi_periods(eta, xi):
    assume(off_corner(eta, xi))
    assert abs(phi(eta + 1, xi) - phi(eta, xi)) < 1e-10
    assert abs(phi(eta, xi + 1) - phi(eta, xi) - eta) < 1e-10


def test_quasi_periods_hold_mod_integers_beyond_square():
    # the two shift rules commute only modulo integers: shifting eta by one
    # after a shift in xi adds exactly 1 to the branch
    eta, xi = 0.2, 0.1
    assert abs(phi(eta + 1, xi + 1) - (phi(eta, xi + 1) + 1)) < 1e-12


@given(unit, unit)
def test_u_forms_agree_and_unimodular(a, b):
    assume(off_corner(a, b))
    split = SigmaSplit.from_sigma(0.3)
    u1 = interpolator_u(a, b, split, "sigma_bar")
    u2 = interpolator_u(a, b, split, "sigma")
    assert abs(u1 - u2) < 1e-10
    assert abs(abs(u1) - 1) < 1e-14


def test_u_at_origin():
    assert interpolator_u(0.0, 0.0) == 1


def test_u_winding_around_corner():
    assert abs(winding_number(interpolator_u, (0.5, 0.5)) - 1) < 1e-9
    # the theta function itself winds the other way in (eta, x) order
    assert abs(winding_number_square(theta_sum, (0.5, 0.5)) + 1) < 1e-9
    assert abs(winding_number(interpolator_u, (0.0, 0.0))) < 1e-12


@pytest.mark.parametrize("corner", [(0.5, 0.5), (-0.5, 0.5), (0.5, -0.5), (1.5, 0.5)])
def test_theta_vortices_are_unit(corner):
    assert abs(abs(winding_number_square(theta_sum, corner, 0.2)) - 1) < 1e-9


def test_sigma_split_validation():
    with pytest.raises(ValueError):
        SigmaSplit(0.6, 0.6)
    assert SigmaSplit.from_sigma(0.25).sigma_bar == 0.75


def test_trial_interpolator_corner_zero():
    for s in (0.0, 0.5, 1.0):
        assert abs(trial_interpolator(0.5, 0.5, SigmaSplit.from_sigma(s))) < 1e-15


@pytest.mark.parametrize("sigma", [1.0, 0.5, 0.2])
def test_trial_interpolator_boundary_ratio(sigma):
    split = SigmaSplit.from_sigma(sigma)
    for eta2 in np.linspace(-0.45, 0.45, 7):
        ratio = trial_interpolator(0.5, eta2, split) / trial_interpolator(-0.5, eta2, split)
        assert abs(ratio - eexp(-split.sigma_bar * eta2)) < 1e-12


def test_trial_interpolator_winds_once():
    w = winding_number(lambda a, b: trial_interpolator(a, b), (0.5, 0.5), 0.1)
    assert abs(abs(w) - 1) < 1e-9
    assert abs(w + 1) < 1e-9
