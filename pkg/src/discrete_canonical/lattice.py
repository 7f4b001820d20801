"""Operators q and p as matrices on the integer (Q,P) lattice.

In the lattice basis ``q = Q + a_Q`` and ``p = P + a_P`` where the vector
potential has the closed form (with ``Q = Q2 - Q1``, ``P = P2 - P1``)

    <Q1,P1|a_Q|Q2,P2> = (-1)**(P+Q+1) i P / (2 pi (P**2 + Q**2)),
    <Q1,P1|a_P|Q2,P2> = (-1)**(P+Q)   i Q / (2 pi (P**2 + Q**2)).

The factor 1/(2 pi) belongs to units where [q, p] = i/(2 pi) and
H = pi (q**2 + p**2) has spectrum n + 1/2.  Pass ``printed=True`` to get
the elements without it.

The checkerboard vector (-1)**(Q+P) is the edge state.  The commutator of
the lattice matrices is (i / 2 pi)(delta - (-1)**(dQ+dP)), i.e. canonical
on the subspace orthogonal to the edge state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import TWO_PI, DomainError, UnitIntervalGrid, integrate_unit

VECTOR_POTENTIAL_SCALE = 1.0 / TWO_PI
MEMORY_BUDGET = 2 * 1024**3


class PreconditionError(DomainError):
    """Inputs violate a documented precondition."""


@dataclass(frozen=True)
class LatticeWindow:
    """Rectangle q_min..q_max by p_min..p_max, addressed row-major (Q outer)."""

    q_min: int
    q_max: int
    p_min: int
    p_max: int

    def __post_init__(self):
        for name in ("q_min", "q_max", "p_min", "p_max"):
            if int(getattr(self, name)) != getattr(self, name):
                raise DomainError(f"{name} must be an integer")
        if self.q_min > self.q_max or self.p_min > self.p_max:
            raise DomainError(f"empty window {self}")

    @classmethod
    def centered(cls, half: int) -> "LatticeWindow":
        if half < 0:
            raise DomainError("half-size must be non-negative")
        return cls(-half, half, -half, half)

    @classmethod
    def square(cls, side: int) -> "LatticeWindow":
        """Odd side length centred on the origin (side 15 -> -7..7)."""
        if side < 1 or side % 2 == 0:
            raise DomainError("side must be a positive odd integer")
        return cls.centered(side // 2)

    @property
    def n_q(self) -> int:
        return self.q_max - self.q_min + 1

    @property
    def n_p(self) -> int:
        return self.p_max - self.p_min + 1

    @property
    def size(self) -> int:
        return self.n_q * self.n_p

    def index(self, Q, P):
        if not self.contains(Q, P):
            raise DomainError(f"({Q}, {P}) lies outside {self}")
        return (np.asarray(Q) - self.q_min) * self.n_p + (np.asarray(P) - self.p_min)

    def contains(self, Q, P) -> bool:
        return bool(np.all((self.q_min <= np.asarray(Q)) & (np.asarray(Q) <= self.q_max)
                           & (self.p_min <= np.asarray(P)) & (np.asarray(P) <= self.p_max)))

    def coords(self):
        """Arrays (Q, P) of every site in index order."""
        Q, P = np.meshgrid(np.arange(self.q_min, self.q_max + 1),
                           np.arange(self.p_min, self.p_max + 1), indexing="ij")
        return Q.ravel(), P.ravel()

    def checkerboard(self) -> np.ndarray:
        Q, P = self.coords()
        return np.where((Q + P) % 2 == 0, 1.0, -1.0)

    def central_mask(self, fraction: float = 0.5) -> np.ndarray:
        """Sites whose distance from the centre is at most ``fraction`` of the half-size."""
        Q, P = self.coords()
        cq = 0.5 * (self.q_min + self.q_max)
        cp = 0.5 * (self.p_min + self.p_max)
        hq = fraction * 0.5 * (self.q_max - self.q_min)
        hp = fraction * 0.5 * (self.p_max - self.p_min)
        return (np.abs(Q - cq) <= hq + 1e-9) & (np.abs(P - cp) <= hp + 1e-9)


@dataclass(frozen=True)
class OperatorMatrix:
    window: LatticeWindow
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        n = self.window.size
        if self.entries.shape != (n, n):
            raise DomainError(f"entries have shape {self.entries.shape}, window needs {(n, n)}")
        if self.hermitian:
            dev = np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0)
            if dev > 1e-10 * max(1.0, np.max(np.abs(self.entries), initial=0.0)):
                raise DomainError(f"matrix claimed hermitian but deviates by {dev:.3e}")

    def element(self, Q1, P1, Q2, P2) -> complex:
        w = self.window
        return complex(self.entries[w.index(Q1, P1), w.index(Q2, P2)])

    def apply(self, state: "DiscreteState") -> "DiscreteState":
        if state.window != self.window:
            raise DomainError("state and operator live on different windows")
        return DiscreteState(self.window, self.entries @ state.amplitudes)


@dataclass(frozen=True)
class DiscreteState:
    window: LatticeWindow
    amplitudes: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.window.size,):
            raise DomainError("amplitude vector does not match the window")
        if not np.all(np.isfinite(amp)):
            raise DomainError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def basis(cls, window: LatticeWindow, Q: int, P: int) -> "DiscreteState":
        amp = np.zeros(window.size, dtype=complex)
        amp[window.index(Q, P)] = 1.0
        return cls(window, amp)

    @classmethod
    def from_sites(cls, window: LatticeWindow, sites: dict) -> "DiscreteState":
        amp = np.zeros(window.size, dtype=complex)
        for (Q, P), a in sites.items():
            amp[window.index(Q, P)] += a
        return cls(window, amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, Q: int, P: int) -> complex:
        return complex(self.amplitudes[self.window.index(Q, P)])

    def overlap(self, other: "DiscreteState") -> complex:
        if other.window != self.window:
            raise DomainError("states live on different windows")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def dominant(self):
        """Site with the largest amplitude magnitude, and that amplitude."""
        i = int(np.argmax(np.abs(self.amplitudes)))
        Q, P = self.window.coords()
        return (int(Q[i]), int(P[i])), complex(self.amplitudes[i])

    def support(self, tol: float = 0.0):
        Q, P = self.window.coords()
        nz = np.abs(self.amplitudes) > tol
        return Q[nz], P[nz], self.amplitudes[nz]


class EdgeState(DiscreteState):
    """Unnormalised checkerboard state (-1)**(Q+P) on a window."""

    def __init__(self, window: LatticeWindow):
        super().__init__(window, window.checkerboard().astype(complex))


def _differences(Q1, P1, Q2, P2):
    dQ = np.asarray(Q2) - np.asarray(Q1)
    dP = np.asarray(P2) - np.asarray(P1)
    den = dQ * dQ + dP * dP
    sign = np.where((dQ + dP) % 2 == 0, 1.0, -1.0)
    return dQ, dP, np.where(den == 0, 1, den), sign, den == 0


def _scale(printed):
    return 1.0 if printed else VECTOR_POTENTIAL_SCALE


def a_q_element(Q1, P1, Q2, P2, printed: bool = False):
    """<Q1,P1|a_Q|Q2,P2>; zero when both differences vanish."""
    dQ, dP, den, sign, zero = _differences(Q1, P1, Q2, P2)
    out = np.where(zero, 0j, -sign * 1j * dP / den * _scale(printed))
    return out if out.ndim else complex(out)


def a_p_element(Q1, P1, Q2, P2, printed: bool = False):
    """<Q1,P1|a_P|Q2,P2>; zero when both differences vanish."""
    dQ, dP, den, sign, zero = _differences(Q1, P1, Q2, P2)
    out = np.where(zero, 0j, sign * 1j * dQ / den * _scale(printed))
    return out if out.ndim else complex(out)


def a_q_kernel(eta_q, P: int, k_max: int):
    """sum over |K| <= k_max of (1/2) sgn(P) (-1)**(P-1) i E**(-|P (eta_Q + K + 1/2)|)."""
    if P == 0:
        return np.zeros_like(np.asarray(eta_q, dtype=float), dtype=complex)
    K = np.arange(-k_max, k_max + 1)[:, None]
    decay = np.exp(-TWO_PI * np.abs(P * (np.asarray(eta_q)[None, :] + K + 0.5))).sum(axis=0)
    return 0.5 * np.sign(P) * (-1.0) ** (P - 1) * 1j * decay


def a_q_from_integral(Q1, P1, Q2, P2, k_max: int = 40, grid: UnitIntervalGrid | None = None) -> complex:
    """a_Q element from the (eta_Q, P) frame kernel, integrated against eexp(Q eta_Q).

    Independent of the closed form; the result carries the 1/(2 pi) of
    the eta-space operators.
    """
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    dQ, dP = Q2 - Q1, P2 - P1
    if dP == 0:
        return 0j
    res = integrate_unit(lambda e: a_q_kernel(e, dP, k_max) * np.exp(1j * TWO_PI * dQ * e), grid, tol=1e-13)
    return res.value


def _budget(window, memory_budget):
    need = 16 * window.size**2
    if need > memory_budget:
        raise MemoryError(f"window {window} needs {need} bytes per matrix, budget is {memory_budget}")


def _a_matrix(window, which, printed=False):
    Q, P = window.coords()
    args = (Q[:, None], P[:, None], Q[None, :], P[None, :])
    return a_q_element(*args, printed=printed) if which == "q" else a_p_element(*args, printed=printed)


def build_q_matrix(window: LatticeWindow, memory_budget: int = MEMORY_BUDGET) -> OperatorMatrix:
    _budget(window, memory_budget)
    Q, _ = window.coords()
    m = _a_matrix(window, "q")
    m[np.diag_indices_from(m)] += Q
    return OperatorMatrix(window, m, hermitian=True)


def build_p_matrix(window: LatticeWindow, memory_budget: int = MEMORY_BUDGET) -> OperatorMatrix:
    _budget(window, memory_budget)
    _, P = window.coords()
    m = _a_matrix(window, "p")
    m[np.diag_indices_from(m)] += P
    return OperatorMatrix(window, m, hermitian=True)


def commutator_target(window: LatticeWindow) -> np.ndarray:
    """(i / 2 pi)(delta - c c^T) with c the checkerboard vector."""
    c = window.checkerboard()
    return 1j * VECTOR_POTENTIAL_SCALE * (np.eye(window.size) - np.outer(c, c))


@dataclass
class CommutatorReport:
    window: LatticeWindow
    residual: OperatorMatrix
    central_max: float
    central_max_printed: float
    region_fraction: float


def commutator_residual(window: LatticeWindow, region_fraction: float = 0.5) -> CommutatorReport:
    """[q, p] minus its infinite-lattice value, with the worst central entry.

    ``region_fraction=0.5`` keeps sites within half the half-size of the
    centre (the central quarter of the area).  ``central_max_printed`` is
    the same number in units where the target reads i (delta - ...).
    """
    q = build_q_matrix(window).entries
    p = build_p_matrix(window).entries
    resid = q @ p - p @ q - commutator_target(window)
    mask = window.central_mask(region_fraction)
    worst = float(np.max(np.abs(resid[np.ix_(mask, mask)])))
    return CommutatorReport(window, OperatorMatrix(window, resid), worst, worst * TWO_PI, region_fraction)


def commutator_block_residual(window: LatticeWindow, radius: int = 2) -> float:
    """Worst residual (printed units) over the fixed block |Q|, |P| <= radius."""
    q = build_q_matrix(window).entries
    p = build_p_matrix(window).entries
    Q, P = window.coords()
    sel = np.flatnonzero((np.abs(Q) <= radius) & (np.abs(P) <= radius))
    block = q[sel] @ p[:, sel] - p[sel] @ q[:, sel] - commutator_target(window)[np.ix_(sel, sel)]
    return float(np.max(np.abs(block)) * TWO_PI)


def edge_coefficient(state: DiscreteState) -> complex:
    """a(psi) = sum over the window of (-1)**(Q+P) <Q,P|psi>."""
    return complex(np.dot(state.window.checkerboard(), state.amplitudes))


def project_physical(state: DiscreteState) -> DiscreteState:
    """Remove the edge-state component: (1 - |e><e| / N) psi."""
    c = state.window.checkerboard()
    amp = state.amplitudes - c * (np.dot(c, state.amplitudes) / state.window.size)
    return DiscreteState(state.window, amp)


def edge_projector(window: LatticeWindow) -> np.ndarray:
    c = window.checkerboard()
    return np.eye(window.size) - np.outer(c, c) / window.size


def p_squared_growth(state: DiscreteState, cutoffs) -> list:
    """<psi|p**2|psi> with p truncated to the centred window of each cutoff.

    Only the columns of p that meet the support of ``state`` are formed, so
    large windows stay cheap: <p**2> = || p_W psi ||**2.
    """
    Qs, Ps, amp = state.support()
    out = []
    for L in cutoffs:
        L = int(L)
        if Qs.size and (np.max(np.abs(Qs)) >= L or np.max(np.abs(Ps)) >= L):
            raise PreconditionError(f"state support touches the rim of the cutoff window {L}")
        W = LatticeWindow.centered(L)
        Q, P = W.coords()
        if not Qs.size:
            out.append((L, 0.0))
            continue
        cols = a_p_element(Q[:, None], P[:, None], Qs[None, :], Ps[None, :])
        vec = cols @ amp
        vec[W.index(Qs, Ps)] += Ps * amp
        out.append((L, float(np.vdot(vec, vec).real)))
    return out


def log_fit(points):
    """Least-squares line of expectation against ln(cutoff): (slope, intercept, r_squared)."""
    x = np.log([c for c, _ in points])
    y = np.array([v for _, v in points])
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
