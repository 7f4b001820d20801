"""Theta-function phase field on the torus and the interpolating factor U.

The function studied here is the theta sum

    theta(eta, x) = sum_K E**(-K**2/2 + K*(x + i*eta)),   E = e**(2*pi),

written as ``r(eta, x) * eexp(phi(eta, x))`` with ``r >= 0`` and the phase
``phi`` in turns.  Its zeros sit at the half-integer corners
``(K1 + 1/2, K2 + 1/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import TWO_PI, DomainError, eexp

N_MAX = 6
K_MAX = 8
VORTEX_RADIUS = 1e-9


class VortexError(DomainError):
    """Evaluation requested at (or within the exclusion radius of) a zero."""

    def __init__(self, eta, x, corner):
        self.corner = corner
        super().__init__(
            f"phase undefined at (eta={eta!r}, x={x!r}): "
            f"within {VORTEX_RADIUS:g} of the vortex at {corner}"
        )


@dataclass(frozen=True)
class PhaseSample:
    """Modulus and smooth-branch phase (in turns) of the theta sum."""

    eta: float
    x: float
    r: float
    phi: float


@dataclass(frozen=True)
class SigmaSplit:
    """Weights ``sigma + sigma_bar = 1`` distributing the boundary twist."""

    sigma: float = 1.0
    sigma_bar: float = 0.0

    def __post_init__(self):
        if abs(self.sigma + self.sigma_bar - 1.0) > 4 * np.finfo(float).eps:
            raise DomainError(f"sigma + sigma_bar must be 1, got {self.sigma} + {self.sigma_bar}")

    @classmethod
    def from_sigma(cls, sigma: float) -> "SigmaSplit":
        return cls(float(sigma), 1.0 - float(sigma))


def theta_sum(eta, x, n_max: int = N_MAX):
    """Direct summation of the theta series over ``|K| <= n_max``."""
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    eta = np.asarray(eta, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > n_max):
        raise OverflowError(f"|x| exceeds n_max={n_max}; shift x by an integer first")
    K = np.arange(-n_max, n_max + 1).reshape((-1,) + (1,) * np.broadcast(eta, x).ndim)
    terms = np.exp(TWO_PI * (-0.5 * K**2 + K * x)) * np.exp(1j * TWO_PI * K * eta)
    out = terms.sum(axis=0)
    return out if out.ndim else complex(out)


def _product_factors(eta, xi, k_max):
    # the two families of factors of the product formula, for |xi| <= 1/2
    z = xi + 1j * eta
    K = np.arange(k_max + 1).reshape((-1,) + (1,) * np.ndim(z))
    plus = 1.0 + np.exp(TWO_PI * (z - K - 0.5))
    minus = 1.0 + np.exp(TWO_PI * (-z - K - 0.5))
    return plus, minus


def _reduce(x):
    X = np.round(x)
    return X, x - X


def theta_product(eta, x, k_max: int = K_MAX):
    """Product representation of the theta sum.

    Arguments with ``|x| > 1/2`` are reduced to ``xi = x - X`` and the
    quasi-period ``theta(eta, xi + X) = E**(X**2/2 + X*xi + i*X*eta) theta(eta, xi)``
    restores the value.
    """
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    eta = np.asarray(eta, dtype=float)
    X, xi = _reduce(np.asarray(x, dtype=float))
    plus, minus = _product_factors(eta, xi, k_max)
    K = np.arange(1, k_max + 1)
    const = np.prod(1.0 - np.exp(-TWO_PI * K))
    out = const * np.prod(plus, axis=0) * np.prod(minus, axis=0)
    out = out * np.exp(TWO_PI * (0.5 * X**2 + X * xi)) * np.exp(1j * TWO_PI * X * eta)
    return out if out.ndim else complex(out)


def nearest_vortex(eta, x):
    """Nearest corner ``(K1 + 1/2, K2 + 1/2)`` and the distance to it."""
    ce = np.floor(eta) + 0.5
    cx = np.floor(x) + 0.5
    return ce, cx, np.hypot(eta - ce, x - cx)


def _check_vortex(eta, x):
    ce, cx, dist = nearest_vortex(eta, x)
    bad = dist <= VORTEX_RADIUS
    if np.any(bad):
        i = np.flatnonzero(np.ravel(bad))[0]
        pick = lambda a: float(np.ravel(np.broadcast_to(a, bad.shape))[i])
        raise VortexError(pick(eta), pick(x), (pick(ce), pick(cx)))


def phi_unchecked(eta, x, k_max: int = K_MAX):
    """Smooth-branch phase without the vortex guard (for quadrature nodes)."""
    X, xi = _reduce(np.asarray(x, dtype=float))
    eta = np.asarray(eta, dtype=float)
    plus, minus = _product_factors(eta, xi, k_max)
    # every factor is 1 + w with |w| <= 1, so principal arguments add up to
    # a branch that is continuous away from the corners
    total = (np.angle(plus) + np.angle(minus)).sum(axis=0) / TWO_PI
    return total + X * eta


def phi(eta, x, k_max: int = K_MAX):
    """Phase of the theta sum in turns: ``theta = r * eexp(phi)``.

    Obeys ``phi(eta + 1, xi) = phi(eta, xi)`` and
    ``phi(eta, xi + 1) = phi(eta, xi) + eta`` on the fundamental square,
    is odd in each argument, and satisfies ``phi(a, b) + phi(b, a) = a*b``.
    """
    eta = np.asarray(eta, dtype=float)
    x = np.asarray(x, dtype=float)
    if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(x))):
        raise DomainError("phi needs finite arguments")
    _check_vortex(eta, x)
    out = phi_unchecked(eta, x, k_max)
    return out if np.ndim(out) else float(out)


def phase_sample(eta: float, x: float) -> PhaseSample:
    value = theta_product(eta, x)
    return PhaseSample(float(eta), float(x), float(abs(value)), phi(eta, x))


def interpolator_u(eta1, eta2, split: SigmaSplit = SigmaSplit(), form: str = "sigma_bar"):
    """Unimodular factor ``U = E**(i sigma_bar eta1 eta2 - i phi(eta1, eta2))``.

    ``form="sigma"`` evaluates the equivalent expression
    ``E**(-i sigma eta1 eta2 + i phi(eta2, eta1))`` obtained from the sum rule.
    """
    eta1 = np.asarray(eta1, dtype=float)
    eta2 = np.asarray(eta2, dtype=float)
    if form == "sigma_bar":
        turns = split.sigma_bar * eta1 * eta2 - phi(eta1, eta2)
    elif form == "sigma":
        turns = -split.sigma * eta1 * eta2 + phi(eta2, eta1)
    else:
        raise DomainError(f"unknown form {form!r}")
    return eexp(turns)


def trial_interpolator(eta1, eta2, split: SigmaSplit = SigmaSplit()):
    """Elementary interpolating function built from two cosines.

    ``f = E**(-i sigma_bar eta1 eta2) cos(pi eta2) + E**(i sigma eta1 eta2) cos(pi eta1)``;
    it vanishes at the corners and winds once around each of them.
    """
    eta1 = np.asarray(eta1, dtype=float)
    eta2 = np.asarray(eta2, dtype=float)
    out = (
        np.exp(-1j * TWO_PI * split.sigma_bar * eta1 * eta2) * np.cos(np.pi * eta2)
        + np.exp(1j * TWO_PI * split.sigma * eta1 * eta2) * np.cos(np.pi * eta1)
    )
    return out if out.ndim else complex(out)


def winding_number(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    center: tuple[float, float],
    radius: float = 0.05,
    n: int = 2048,
) -> float:
    """Net phase change of ``f`` (in turns) counter-clockwise around a circle."""
    t = np.linspace(0.0, TWO_PI, n + 1)
    a = center[0] + radius * np.cos(t)
    b = center[1] + radius * np.sin(t)
    values = np.asarray(f(a, b), dtype=complex)
    steps = np.angle(values[1:] / values[:-1])
    return float(steps.sum() / TWO_PI)


def winding_number_square(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    center: tuple[float, float],
    half_side: float = 0.1,
    n_side: int = 512,
) -> float:
    """Phase winding of ``f`` around a square loop, counter-clockwise."""
    s = np.linspace(-half_side, half_side, n_side, endpoint=False)
    h = half_side
    a = np.concatenate([s, np.full(n_side, h), -s, np.full(n_side, -h), [-h]])
    b = np.concatenate([np.full(n_side, -h), s, np.full(n_side, h), -s, [-h]])
    values = np.asarray(f(center[0] + a, center[1] + b), dtype=complex)
    return float(np.angle(values[1:] / values[:-1]).sum() / TWO_PI)


def phase_grid(n_eta: int, n_x: int):
    """Samples (eta, xi, r, phi) on a cell-centred grid of the unit square."""
    if n_eta < 1 or n_x < 1:
        raise DomainError("grid counts must be positive")
    eta = -0.5 + (np.arange(n_eta) + 0.5) / n_eta
    xi = -0.5 + (np.arange(n_x) + 0.5) / n_x
    E, X = np.meshgrid(eta, xi, indexing="ij")
    r = np.abs(theta_product(E, X))
    return E.ravel(), X.ravel(), r.ravel(), np.ravel(phi(E, X))
