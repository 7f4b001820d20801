"""Precursor maps between the integer lattice and the real line.

These are the first, simpler attempts at the (Q,P) <-> (q,p) map: one
coordinate is treated as a Kronecker delta and the other picks up a sinc
kernel.  They are kept for comparison with the theta construction and for
the algebra of the fractional-part operator eta_Q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import TWO_PI, DomainError, eexp, gauss_panels
from .phase_field import SigmaSplit


@dataclass(frozen=True)
class LegacyScheme:
    kind: str
    split: SigmaSplit = SigmaSplit()

    def __post_init__(self):
        if self.kind not in ("naive", "symmetric", "general"):
            raise DomainError(f"unknown legacy scheme {self.kind!r}")
        if self.kind == "naive" and self.split != SigmaSplit(1.0, 0.0):
            raise DomainError("the naive scheme has sigma = 1")
        if self.kind == "symmetric" and self.split != SigmaSplit(0.5, 0.5):
            raise DomainError("the symmetric scheme has sigma = 1/2")

    @classmethod
    def naive(cls):
        return cls("naive", SigmaSplit(1.0, 0.0))

    @classmethod
    def symmetric(cls):
        return cls("symmetric", SigmaSplit(0.5, 0.5))


def _sinc_term(N, s):
    """(2 sin(pi s) / 2 pi) (-1)**N / (N + s), with the s = 0 limit delta_N."""
    N = np.asarray(N)
    s = np.asarray(s, dtype=float)
    sign = np.where(N % 2 == 0, 1.0, -1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.sin(np.pi * s) / np.pi * sign / (N + s)
    out = np.where(s == 0.0, (N == 0).astype(float), val)
    return out if out.ndim else float(out)


def sinc_kernel(N, kappa):
    """integral over eta of eexp((N + kappa) eta), in closed form."""
    return _sinc_term(N, kappa)


def naive_overlap_mom(Q1, P1, K, kappa):
    """<Q1,P1|K+kappa> in the scheme where Q is sharp."""
    out = _sinc_term(np.asarray(K) - P1, kappa) * eexp(np.multiply(kappa, Q1))
    return out if np.ndim(out) else complex(out)


def sigma_overlap_mom(Q1, P1, K, kappa, split: SigmaSplit):
    """<Q1,P1|K+kappa> with the twist shared according to ``split``."""
    out = _sinc_term(np.asarray(K) - P1, np.multiply(split.sigma, kappa)) * eexp(np.multiply(kappa, Q1))
    return out if np.ndim(out) else complex(out)


def sigma_overlap_pos(Q1, P1, Q, xi, split: SigmaSplit):
    """<Q1,P1|Q+xi> with the twist shared according to ``split``."""
    out = _sinc_term(np.asarray(Q) - Q1, np.multiply(split.sigma_bar, xi)) * eexp(-np.multiply(xi, P1))
    return out if np.ndim(out) else complex(out)


def kernel_completeness(Q1: int = 0, P1: int = 0, K_range: int = 200, nodes: int = 64) -> float:
    """sum_K integral dkappa |<Q1,P1|K+kappa>|**2 over |K - P1| <= K_range."""
    kappa, w = gauss_panels(np.linspace(-0.5, 0.5, 9), nodes)
    K = np.arange(P1 - K_range, P1 + K_range + 1)[:, None]
    vals = np.abs(naive_overlap_mom(Q1, P1, K, kappa[None, :])) ** 2
    return float((vals @ w).sum())


def legacy_state_q(q, scheme: LegacyScheme):
    """Real-line wavefunction <q|0,0> of a legacy scheme.

    For the naive scheme the state is the indicator of the unit cell
    (-1/2, 1/2]; in the sigma schemes it is the conjugate of
    :func:`sigma_overlap_pos` with ``Q1 = P1 = 0``.
    """
    q = np.asarray(q, dtype=float)
    Q = np.round(q)
    xi = q - Q
    if scheme.kind == "naive":
        out = ((q > -0.5) & (q <= 0.5)).astype(float)
    else:
        out = np.real(sigma_overlap_pos(0, 0, Q, xi, scheme.split))
    return out if out.ndim else float(out)


def legacy_state_p(p, scheme: LegacyScheme):
    """Momentum wavefunction <p|0,0> of a legacy scheme."""
    p = np.asarray(p, dtype=float)
    K = np.round(p)
    kappa = p - K
    out = np.real(np.conj(sigma_overlap_mom(0, 0, K, kappa, scheme.split)))
    return out if out.ndim else float(out)


def legacy_fourier(p, scheme: LegacyScheme, nodes: int = 64):
    """Fourier transform integral dq <q|0,0> eexp(-p q) of a sigma scheme.

    The sum over the integer part of q is done with the lattice identity
    sum_n e^{i n t} / (n + a) = pi e^{i (pi - t) a} / sin(pi a), 0 < t < 2 pi,
    and the remaining integral over the fractional part by Gauss-Legendre.
    """
    if scheme.kind == "naive":
        raise DomainError("the naive q-space state has no lattice sum form")
    sb = scheme.split.sigma_bar
    xi, w = gauss_panels(np.linspace(-0.5, 0.5, 5), nodes)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    m = np.round(p)
    # the (-1)**Q sign shifts t by pi: t = pi - 2 pi p + 2 pi m lies in (0, 2 pi)
    turns = (p[:, None] - m[:, None]) * sb * xi[None, :] - p[:, None] * xi[None, :]
    out = (np.exp(1j * TWO_PI * turns) @ w).real
    return out if out.size > 1 else float(out[0])


def eta_q_matrix_element(Q1, Q2):
    """<Q1|eta_Q|Q2> = (i / 2 pi)(delta - 1)(-1)**(Q2-Q1) / (Q2 - Q1); 0 on the diagonal."""
    d = np.asarray(Q2) - np.asarray(Q1)
    sign = np.where(d % 2 == 0, 1.0, -1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -1j / TWO_PI * sign / d
    out = np.where(d == 0, 0j, val)
    return out if out.ndim else complex(out)


def eta_q_commutator_element(Q1, Q2):
    """<Q1|[eta_Q, Q]|Q2> = (i / 2 pi)(delta - (-1)**(Q2-Q1))."""
    d = np.asarray(Q2) - np.asarray(Q1)
    sign = np.where(d % 2 == 0, 1.0, -1.0)
    out = np.asarray(1j / TWO_PI * ((d == 0).astype(float) - sign))
    return out if out.ndim else complex(out)
