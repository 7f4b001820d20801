"""The template wavefunction psi(q) = <0,0|q> and its lattice family.

psi(x) = integral over eta in (-1/2, 1/2] of eexp(phi(eta, x)).  Because phi
is odd in eta the integral is real, and writing x = X + xi gives

    psi(X + xi) = 2 * integral_0^{1/2} cos(2 pi (phi(eta, xi) + X eta)) d eta.

For fixed xi the values psi(X + xi) are therefore the Fourier coefficients of
eta -> eexp(phi(eta, xi)); unitarity and the inversion identity are Parseval
and Fourier inversion for that function.

Far from the origin psi(q) is a train of narrow lobes of alternating sign
centred on the half-integers.  Around c = X + 1/2 (X >= 0, k = 2 pi c) a lobe
is accurately described by

    (-1)**X * 2 * (|a| K1(k |a|) - a K0(k |a|)),   a = q - c,

whose area is (-1)**X / (2 pi c**2).  This model supplies the truncation
tails of the lattice sums and of the Fourier integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import CubicSpline

from .numerics import (
    TWO_PI,
    DomainError,
    EvaluationError,
    RealLineGrid,
    UnitIntervalGrid,
    eexp,
    gauss_panels,
    integrate_unit,
)
from .phase_field import phi, phi_unchecked

PANEL_NODES = 32
CHECK_NODES = 20
MAX_ERROR = 1e-6


@lru_cache(maxsize=4096)
def _graded_rule(d: float, n: int, coarse: int):
    """Nodes on [0, 1/2] graded geometrically towards eta = 1/2.

    ``d`` is the distance of the corner vortex from the integration line;
    panels shrink until they are finer than ``d / 8``.
    """
    w = 0.5 / coarse
    edges = list(np.linspace(0.0, 0.5 - w, coarse))
    while w > max(d, 1e-15) / 8:
        w /= 2
        edges.append(0.5 - w)
    edges.append(0.5)
    x, wt = gauss_panels(edges, n)
    x.setflags(write=False)
    wt.setflags(write=False)
    return x, wt


def _coarse_panels(xmax):
    return max(8, int(math.ceil(abs(xmax) / 8)))


def _psi_block(xi: float, X: np.ndarray, n: int = PANEL_NODES):
    """psi(X + xi) for an array of integers X, one quadrature per xi."""
    d = round(0.5 - abs(xi), 15)
    eta, w = _graded_rule(d, n, _coarse_panels(np.max(np.abs(X), initial=0)))
    base = phi_unchecked(eta, xi)
    return 2.0 * np.cos(TWO_PI * (base[None, :] + np.multiply.outer(X, eta))) @ w


def _psi_pair(xi, X):
    fine = _psi_block(xi, X, PANEL_NODES)
    check = _psi_block(xi, X, CHECK_NODES)
    return fine, np.abs(fine - check)


def _split(q):
    X = np.round(q)
    return X, q - X


def psi_with_error(x):
    """psi at ``x`` and a quadrature error estimate (two node counts)."""
    x = abs(float(x))
    if not math.isfinite(x):
        raise DomainError(f"psi needs a finite argument, got {x!r}")
    X, xi = _split(x)
    val, err = _psi_pair(xi, np.array([X]))
    val, err = float(val[0]), float(err[0])
    if err > MAX_ERROR:
        # retry with twice the coarse panel density
        eta, w = _graded_rule(round(0.5 - abs(xi), 15), 2 * PANEL_NODES, 2 * _coarse_panels(X))
        retry = 2.0 * np.dot(w, np.cos(TWO_PI * (phi_unchecked(eta, xi) + X * eta)))
        err = abs(retry - val)
        val = float(retry)
        if err > MAX_ERROR:
            raise EvaluationError(f"psi quadrature did not converge at x={x!r} (error {err:.2e})")
    return val, err


def psi(x):
    """Template wavefunction psi(x) (real, even, psi(0) close to 0.95)."""
    if np.ndim(x) == 0:
        return psi_with_error(x)[0]
    x = np.abs(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x)):
        raise DomainError("psi needs finite arguments")
    out = np.empty_like(x)
    X, xi = _split(x)
    keys = np.round(xi, 12)
    for key in np.unique(keys):
        sel = keys == key
        out[sel] = _psi_block(float(xi[sel][0]), X[sel])
    return out


def psi_complex_integral(x, grid: UnitIntervalGrid | None = None):
    """Direct integral of eexp(phi(eta, x)) over the whole unit interval.

    Returns the complex quadrature result; its imaginary part should vanish.
    Used as an independent check of :func:`psi`.
    """
    return integrate_unit(lambda eta: eexp(phi_unchecked(eta, x)), grid)


def lobe_model(q):
    """Asymptotic lobe shape of psi near the half-integers (even in q)."""
    q = np.abs(np.asarray(q, dtype=float))
    X = np.floor(q)
    a = q - X - 0.5
    k = TWO_PI * (X + 0.5)
    ka = k * np.abs(a)
    with np.errstate(invalid="ignore", divide="ignore"):
        body = np.abs(a) * special.k1(ka) - a * special.k0(ka)
    body = np.where(a == 0.0, 1.0 / k, body)
    out = np.where(X % 2 == 0, 2.0, -2.0) * body
    return out if out.ndim else float(out)


def lobe_fourier(X, p):
    """Fourier transform of the lobe model pair centred at +-(X + 1/2).

    ``integral (lobe(q) on both sides) * eexp(-p q) dq`` summed over the
    lobes at ``c`` and ``-c``; the model decays fast enough inside a unit
    cell that its transform over the whole line is used.
    """
    X = np.asarray(X, dtype=float)
    c = X + 0.5
    k = TWO_PI * c
    w = TWO_PI * p
    one = np.where(X % 2 == 0, 1.0, -1.0) * TWO_PI * np.exp(-1j * w * c) * (k + 1j * w) / (k * k + w * w) ** 1.5
    return 2.0 * one.real


def lobe_area(X):
    """Signed area of the asymptotic lobe at X + 1/2."""
    return (-1.0) ** X / (TWO_PI * (X + 0.5) ** 2)


TAIL_TERMS = 200_000


def _tail_fourier(L: float, p: float) -> complex:
    # full model lobes in cells [X, X+1] with X >= L (L an integer)
    X = np.arange(int(L), int(L) + TAIL_TERMS, dtype=float)
    return complex(lobe_fourier(X, p).sum())


@dataclass(frozen=True)
class TemplateTable:
    """psi sampled on a symmetric uniform grid, with cubic interpolation."""

    grid: RealLineGrid
    values: np.ndarray
    quadrature_meta: dict = field(default_factory=dict)
    has_tail_model: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise DomainError("values do not match the grid")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_spline", CubicSpline(self.grid.values, values))

    def __call__(self, q):
        """Interpolated psi; points beyond the grid are evaluated directly."""
        q = np.asarray(q, dtype=float)
        inside = (q >= self.grid.x_min) & (q <= self.grid.x_max)
        out = np.where(inside, self._spline(np.clip(q, self.grid.x_min, self.grid.x_max)), 0.0)
        if not np.all(inside):
            out = np.where(inside, out, psi(np.where(inside, 0.0, q)))
        return out if out.ndim else float(out)

    @property
    def half_width(self) -> float:
        return self.grid.x_max

    def tail_fourier(self, p: float) -> complex:
        """Transform of psi restricted to |q| beyond the table."""
        if not self.has_tail_model:
            raise DomainError("this table carries no tail model")
        L = self.grid.x_max
        Lc = math.ceil(L - 1e-12)
        tail = _tail_fourier(Lc, p)
        if Lc > L:
            # partial cell between the table edge and the next integer
            x, w = gauss_panels(np.linspace(L, Lc, 9), PANEL_NODES)
            tail += 2.0 * np.dot(w * psi(x), np.cos(TWO_PI * p * x))
        return tail

    def unit_sum_residual(self, tail: bool = True) -> float:
        """max over residues xi of |sum_K psi(xi + K)**2 - 1|.

        The sum uses the table entries; with ``tail=True`` the terms beyond
        the table are added from the lobe model.
        """
        m = int(round(1.0 / self.grid.step))
        if abs(1.0 / self.grid.step - m) > 1e-9:
            raise DomainError("unit sums need a step that divides 1")
        q = self.grid.values
        v = self.values
        n = np.arange(1, TAIL_TERMS + 1)
        worst = 0.0
        for r in range(m):
            total = np.dot(v[r::m], v[r::m])
            if tail:
                for edge, sign in ((q[r::m][-1], 1.0), (q[r::m][0], -1.0)):
                    terms = lobe_model(edge + sign * n) ** 2
                    total += terms.sum() + terms[-1] * n[-1]
            worst = max(worst, abs(total - 1.0))
        return float(worst)


def build_template_table(grid: RealLineGrid) -> TemplateTable:
    """Tabulate psi on a symmetric grid.

    The nodes are grouped by fractional part so that one eta quadrature per
    residue serves every integer shift.
    """
    if not grid.is_symmetric:
        raise DomainError("template tables need a grid symmetric about 0")
    q = grid.values
    half = q[q >= -1e-12]
    X, xi = _split(np.abs(half))
    keys = np.round(xi, 12)
    vals = np.empty_like(half)
    errs = np.empty_like(half)
    for key in np.unique(keys):
        sel = keys == key
        try:
            vals[sel], errs[sel] = _psi_pair(float(xi[sel][0]), X[sel])
        except FloatingPointError as exc:
            raise EvaluationError(f"psi failed near q={half[sel][0]!r}") from exc
    bad = errs > MAX_ERROR
    if np.any(bad):
        raise EvaluationError(f"psi quadrature error {errs[bad][0]:.2e} at q={half[bad][0]!r}")
    n_neg = q.size - half.size
    values = np.concatenate([vals[1 : n_neg + 1][::-1], vals])
    meta = {
        "panel_nodes": PANEL_NODES,
        "check_nodes": CHECK_NODES,
        "max_error_estimate": float(errs.max()),
        "tail_model": "half-integer lobe asymptotics",
        "tail_mass_estimate": float(1.0 / (2 * np.pi**2 * max(grid.x_max, 0.5))),
    }
    return TemplateTable(grid, values, meta, has_tail_model=True)


def template_overlap_q(Q: int, P: int, q, table: TemplateTable | None = None):
    """<Q,P|q> = psi(q - Q) * eexp(-P q)."""
    q = np.asarray(q, dtype=float)
    f = table if table is not None else psi
    out = f(q - Q) * eexp(-P * q)
    return out if np.ndim(out) else complex(out)


def unitarity_residual(x: float, M: int, K_range: int, *, tail: bool = True) -> float:
    """|sum_K psi(x + K) psi(x + K + M) - delta_{M,0}|.

    The sum runs over ``|K| <= K_range`` with exact psi values; with
    ``tail=True`` the remaining terms are added from the lobe model.
    """
    if K_range < 0:
        raise DomainError("K_range must be non-negative")
    K = np.arange(-K_range, K_range + 1)
    body = np.dot(psi(x + K), psi(x + K + M))
    total = body
    if tail:
        total += _unitarity_tail(x, M, K_range)
    return float(abs(total - (1.0 if M == 0 else 0.0)))


def _unitarity_tail(x, M, K_range):
    K = np.arange(K_range + 1, K_range + 1 + TAIL_TERMS, dtype=float)
    total = 0.0
    for sign in (1.0, -1.0):
        y = x + sign * K
        terms = lobe_model(y) * lobe_model(y + M)
        # the remaining terms fall off like 1/K**2 (at worst)
        total += terms.sum() + terms[-1] * K[-1]
    return total


def peak_area(X: int, sign_resolved: bool = True) -> float:
    """Area of the lobe of psi around X + 1/2, between its zero crossings."""
    if X < 1:
        raise DomainError("peak_area needs X >= 1")
    c = X + 0.5

    def crossing(lo, hi):
        flo, fhi = psi(lo), psi(hi)
        if flo * fhi > 0:
            raise EvaluationError(f"no sign change of psi bracketed in [{lo}, {hi}]")
        return optimize.brentq(psi, lo, hi, xtol=1e-10)

    left = crossing(c - 0.75, c - 0.25)
    right = crossing(c + 0.25, c + 0.75)
    area = 0.0
    for a, b in ((left, c), (c, right)):
        val, _ = integrate.quad(psi, a, b, epsabs=1e-12, epsrel=1e-10, limit=200)
        area += val
    return area if sign_resolved else abs(area)


def reconstruct_phase_factor(eta, xi, K_range: int = 50):
    """sum_X psi(X + xi) eexp(-X eta), which inverts to eexp(phi(eta, xi))."""
    X = np.arange(-K_range, K_range + 1)
    coeffs = psi(X + xi)
    return complex(np.dot(coeffs, eexp(-X * eta)))
