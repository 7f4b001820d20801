"""Acceptance criteria shared by the test-suite and the ``acceptance`` subcommand."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import lattice, legacy, oscillator, phase_field, template
from .numerics import RealLineGrid, fourier_integral

SEED = 20240917


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.title}: {self.detail} ({self.seconds:.1f}s)"


def _square_points(rng, n, margin=1e-3):
    pts = rng.uniform(-0.5, 0.5, size=(2, n))
    _, _, dist = phase_field.nearest_vortex(pts[0], pts[1])
    keep = dist > margin
    return pts[0][keep], pts[1][keep]


def c01_phase_identities():
    eta, xi = _square_points(np.random.default_rng(SEED), 200)
    f = phase_field.phi
    sum_rule = np.max(np.abs(f(eta, xi) + f(xi, eta) - xi * eta))
    period_eta = np.max(np.abs(f(eta + 1, xi) - f(eta, xi)))
    period_xi = np.max(np.abs(f(eta, xi + 1) - f(eta, xi) - eta))
    worst = max(sum_rule, period_eta, period_xi)
    return worst < 1e-10, (f"sum rule {sum_rule:.1e}, eta period {period_eta:.1e}, "
                           f"xi quasi-period {period_xi:.1e} (< 1e-10)")


def c02_representations():
    eta, x = _square_points(np.random.default_rng(SEED + 1), 100)
    s = phase_field.theta_sum(eta, x)
    p = phase_field.theta_product(eta, x)
    rel = np.max(np.abs(p - s) / np.abs(s))
    zs = abs(phase_field.theta_sum(0.5, 0.5))
    zp = abs(phase_field.theta_product(0.5, 0.5))
    ok = rel < 1e-12 and zs < 1e-10 and zp < 1e-10
    return ok, f"max relative difference {rel:.1e} (< 1e-12); |theta| at corner {zs:.1e}, {zp:.1e} (< 1e-10)"


def c03_unitarity():
    worst = max(template.unitarity_residual(x, M, 50) for x in (0.0, 0.1, 0.25, 0.5) for M in range(6))
    return worst < 1e-4, f"max residual {worst:.1e} (< 1e-4)"


def c04_self_fourier():
    table = template.build_template_table(RealLineGrid.symmetric(20, 1 / 256))
    p = np.arange(-40, 41) / 8
    ft = np.array([fourier_integral(table, v).value for v in p])
    err = np.max(np.abs(ft - template.psi(p)))
    return err < 1e-4, f"max |FT(psi) - psi| over |p| <= 5: {err:.1e} (< 1e-4)"


def c05_peak_areas():
    parts = []
    ok = True
    for X in range(5, 11):
        target = template.lobe_area(X)
        rel = abs(template.peak_area(X) / target - 1)
        tol = 0.05 - 0.006 * (X - 5)
        ok &= rel < tol
        parts.append(f"X={X}: {100 * rel:.2f}% (< {100 * tol:.1f}%)")
    return ok, ", ".join(parts)


def c06_cross_route():
    worst = max(
        abs(lattice.a_q_from_integral(0, 0, dq, dp) - lattice.a_q_element(0, 0, dq, dp))
        for dq in range(-5, 6) for dp in range(-5, 6))
    return worst < 1e-8, f"max difference {worst:.1e} (< 1e-8)"


def c07_commutator():
    sides = (21, 31, 41)
    res = [lattice.commutator_residual(lattice.LatticeWindow.square(s)).central_max_printed for s in sides]
    monotone = all(b < a for a, b in zip(res, res[1:]))
    ok = res[-1] < 0.05 and monotone
    listing = ", ".join(f"{s}: {r:.3f}" for s, r in zip(sides, res))
    return ok, f"central-quarter max residual {listing} (need < 0.05 at 41 and decreasing)"


def c08_divergence():
    w = lattice.LatticeWindow.centered(3)
    single = lattice.DiscreteState.basis(w, 0, 0)
    pts = lattice.p_squared_growth(single, (10, 20, 40, 80))
    slope, _, r2 = lattice.log_fit(pts)
    pair = lattice.DiscreteState.from_sites(w, {(0, 0): 2**-0.5, (1, 0): 2**-0.5})
    conv = dict(lattice.p_squared_growth(pair, (40, 80)))
    change = abs(conv[80] / conv[40] - 1)
    ok = slope > 0 and r2 > 0.99 and change < 0.01
    return ok, f"slope {slope:.4f}, R^2 {r2:.5f} (> 0.99); physical state change {100 * change:.3f}% (< 1%)"


def c09_spectrum():
    target = np.array([0.5, 1.5, 2.5])
    dev = {}
    for side in (15, 21):
        cfg = oscillator.OscillatorConfig(lattice.LatticeWindow.square(side))
        dev[side] = float(np.max(np.abs(oscillator.spectrum(cfg, 3) - target)))
    ok = dev[15] < 0.05 and dev[21] <= dev[15]
    return ok, f"max deviation from n+1/2: 15x15 {dev[15]:.4f} (< 0.05), 21x21 {dev[21]:.4f}"


def c10_determinism():
    window = lattice.LatticeWindow.centered(5)
    grid = RealLineGrid.symmetric(16, 1 / 64)
    worst_prob, worst_return, wrong = 1.0, 1.0, []
    for A in range(-3, 4):
        for B in range(-3, 4):
            start = lattice.DiscreteState.basis(window, A, B)
            state = oscillator.quarter_evolution(start, grid)
            site, amp = state.dominant()
            if site != (B, -A):
                wrong.append((A, B))
            worst_prob = min(worst_prob, abs(amp) ** 2)
            for _ in range(3):
                state = oscillator.quarter_evolution(state, grid)
            worst_return = min(worst_return, abs(state.overlap(start)))
    ok = not wrong and worst_prob >= 0.998 and worst_return >= 0.996
    return ok, (f"misplaced {len(wrong)}; min dominant probability {worst_prob:.5f} (>= 0.998); "
                f"min four-step overlap {worst_return:.5f} (>= 0.996)")


def c11_ground_state():
    r64 = oscillator.annihilation_residual(oscillator.TorusGrid(64, 64))
    r128 = oscillator.annihilation_residual(oscillator.TorusGrid(128, 128))
    ratio = r64 / r128
    fid = oscillator.lattice_ground_fidelity(lattice.LatticeWindow.square(15))
    ok = ratio >= 3.5 and fid >= 0.99
    return ok, f"residual 64: {r64:.2e}, 128: {r128:.2e}, ratio {ratio:.1f} (>= 3.5); fidelity {fid:.5f} (>= 0.99)"


def c12_legacy_algebra():
    Q1 = np.arange(-20, 21)[:, None]
    Q2 = np.arange(-20, 21)[None, :]
    d = Q2 - Q1
    sel = np.abs(d) <= 20
    comm = legacy.eta_q_commutator_element(Q1, Q2)
    formula = 1j / (2 * np.pi) * ((d == 0) - np.where(d % 2 == 0, 1.0, -1.0))
    product = d * legacy.eta_q_matrix_element(Q1, Q2)
    e1 = np.max(np.abs(comm - formula)[sel])
    e2 = np.max(np.abs(comm - product)[sel])
    # the product route rounds once in the division by dQ
    ok = e1 == 0.0 and e2 <= 4 * np.finfo(float).eps
    return ok, f"formula difference {e1:.1e} (exact), (Q2-Q1) eta_Q difference {e2:.1e}"


CRITERIA = [
    (1, "phase identities", c01_phase_identities),
    (2, "theta sum and product", c02_representations),
    (3, "template unitarity", c03_unitarity),
    (4, "self-Fourier template", c04_self_fourier),
    (5, "peak asymptotics", c05_peak_areas),
    (6, "a_Q closed form vs integral", c06_cross_route),
    (7, "commutator structure", c07_commutator),
    (8, "p^2 divergence", c08_divergence),
    (9, "oscillator spectrum", c09_spectrum),
    (10, "quarter-period determinism", c10_determinism),
    (11, "ground state checks", c11_ground_state),
    (12, "eta_Q algebra", c12_legacy_algebra),
]


def run_criterion(number: int) -> CriterionResult:
    for num, title, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            passed, detail = fn()
            return CriterionResult(num, title, bool(passed), detail, time.perf_counter() - t0)
    raise KeyError(number)


def run_all(numbers=None):
    for num, _, _ in CRITERIA:
        if numbers is None or num in numbers:
            yield run_criterion(num)
