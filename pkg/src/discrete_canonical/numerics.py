"""Quadrature, grids and the E-exponential convention.

All phases in this package are measured in turns ("E-units"): a phase value
``a`` stands for the complex number ``exp(2*pi*i*a)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

TWO_PI = 2.0 * np.pi

#: E = e^{2 pi}, so that E**(i a) == exp(2 pi i a).
E_BASE = math.exp(TWO_PI)


class DomainError(ValueError):
    """Input outside the domain where an operation is defined."""


class EvaluationError(ArithmeticError):
    """An integrand or series produced a non-finite value."""


def eexp(x):
    """Return ``exp(2*pi*i*x)``, i.e. ``E**(i*x)``.

    Integer arguments are reduced exactly so that ``eexp(Z) == 1`` for every
    integer ``Z`` and ``eexp(x + 1) == eexp(x)`` holds to rounding.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"eexp needs finite input, got {x!r}")
    frac = arr - np.round(arr)
    out = np.exp(1j * TWO_PI * frac)
    # exact values on the quarter turns keep eexp(Z) == 1+0j bit-exactly
    out = np.where(frac == 0.0, 1.0 + 0.0j, out)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class UnitIntervalGrid:
    """Quadrature rule on the unit interval (-1/2, 1/2]."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if self.kind not in ("gauss_legendre", "uniform_trapezoid"):
            raise DomainError(f"unknown grid kind {self.kind!r}")
        if nodes.shape != weights.shape or nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("need at least two nodes with matching weights")
        if np.any(nodes <= -0.5) or np.any(nodes > 0.5):
            raise DomainError("nodes must lie in (-1/2, 1/2]")
        if abs(weights.sum() - 1.0) > 1e-14:
            raise DomainError(f"weights sum to {weights.sum()!r}, not 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def gauss_legendre(cls, n: int = 256) -> "UnitIntervalGrid":
        x, w = _leggauss(n)
        return cls(0.5 * x, 0.5 * w, "gauss_legendre")

    @classmethod
    def uniform_trapezoid(cls, n: int) -> "UnitIntervalGrid":
        # periodic trapezoid rule: nodes -1/2 + k/n, k = 1..n
        nodes = -0.5 + np.arange(1, n + 1) / n
        return cls(nodes, np.full(n, 1.0 / n), "uniform_trapezoid")

    def __len__(self):
        return self.nodes.size

    def refined(self) -> "UnitIntervalGrid":
        """Same rule with twice the node count."""
        if self.kind == "gauss_legendre":
            return UnitIntervalGrid.gauss_legendre(2 * len(self))
        return UnitIntervalGrid.uniform_trapezoid(2 * len(self))


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_panels(edges, n: int = 32):
    """Composite Gauss-Legendre nodes and weights over consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    x, w = _leggauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (half * x + 0.5 * (a + b)).ravel(), (half * w).ravel()


@dataclass(frozen=True)
class RealLineGrid:
    """Uniform grid ``x_min + i*step`` covering ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    step: float

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise DomainError(f"step must be positive, got {self.step!r}")
        if not self.x_min < self.x_max:
            raise DomainError(f"empty grid [{self.x_min}, {self.x_max}]")
        cells = (self.x_max - self.x_min) / self.step
        if abs(cells - round(cells)) > 1e-9:
            raise DomainError("grid span is not an integer number of steps")

    @classmethod
    def symmetric(cls, half_width: float, step: float) -> "RealLineGrid":
        return cls(-float(half_width), float(half_width), float(step))

    @property
    def size(self) -> int:
        return int(round((self.x_max - self.x_min) / self.step)) + 1

    @property
    def values(self) -> np.ndarray:
        return self.x_min + self.step * np.arange(self.size)

    @property
    def is_symmetric(self) -> bool:
        return abs(self.x_min + self.x_max) <= 1e-12 * max(1.0, self.x_max)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.size, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w


@dataclass
class QuadratureResult:
    value: complex
    error: float
    evaluations: int = 0


def _evaluate(f, nodes):
    vals = np.asarray(f(nodes), dtype=complex)
    if vals.shape != nodes.shape:
        vals = np.broadcast_to(vals, nodes.shape)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise EvaluationError(f"integrand is not finite at eta={nodes[bad][0]!r}")
    return vals


def _rule_on(grid, a, b):
    # map a rule on (-1/2, 1/2] onto [a, b]
    return a + (grid.nodes + 0.5) * (b - a), grid.weights * (b - a)


def integrate_unit(
    f: Callable[[np.ndarray], np.ndarray],
    grid: UnitIntervalGrid | None = None,
    *,
    tol: float = 1e-10,
    max_depth: int = 12,
) -> QuadratureResult:
    """Integrate a vectorised integrand over (-1/2, 1/2].

    The error estimate is the difference between the rule on the whole
    interval and the same rule on the two halves.  When it exceeds ``tol``
    the interval is bisected adaptively down to ``max_depth`` levels.
    """
    if grid is None:
        grid = UnitIntervalGrid.gauss_legendre(256)
    count = 0

    def panel(a, b):
        nonlocal count
        x, w = _rule_on(grid, a, b)
        count += x.size
        return np.dot(w, _evaluate(f, x))

    def recurse(a, b, whole, depth, budget):
        m = 0.5 * (a + b)
        left, right = panel(a, m), panel(m, b)
        err = abs(left + right - whole)
        if err <= budget or depth >= max_depth:
            return left + right, err
        lv, le = recurse(a, m, left, depth + 1, 0.5 * budget)
        rv, re = recurse(m, b, right, depth + 1, 0.5 * budget)
        return lv + rv, le + re

    whole = panel(-0.5, 0.5)
    value, err = recurse(-0.5, 0.5, whole, 1, tol)
    return QuadratureResult(complex(value), float(err), count)


@dataclass
class FourierResult:
    value: complex
    tail: complex = 0.0
    insufficient_support: bool = False
    notes: list = field(default_factory=list)


def fourier_integral(table, p: float, *, support_tol: float = 1e-6) -> FourierResult:
    """Return ``integral dq table(q) * exp(-2 pi i p q)``.

    ``table`` needs ``grid`` (a :class:`RealLineGrid`) and ``values``.  The
    body is the trapezoid rule over the table grid.  If the table declares
    ``has_tail_model`` its ``tail_fourier(p)`` (the transform of the
    function beyond the grid) is added; otherwise a table whose end values
    are not negligible is flagged as having insufficient support.
    """
    q = table.grid.values
    vals = np.asarray(table.values)
    body = complex(np.dot(table.grid.trapezoid_weights() * vals, np.exp(-1j * TWO_PI * p * q)))
    result = FourierResult(body)
    tail_fn = getattr(table, "tail_fourier", None) if getattr(table, "has_tail_model", False) else None
    if tail_fn is not None:
        result.tail = complex(tail_fn(p))
        result.value = body + result.tail
    elif max(abs(vals[0]), abs(vals[-1])) > support_tol:
        result.insufficient_support = True
        result.notes.append("table does not decay to zero at its ends")
        warnings.warn("fourier_integral: table support looks truncated", RuntimeWarning, stacklevel=2)
    return result
