"""Harmonic oscillator H = pi (p**2 + q**2) in the torus, lattice and line pictures.

On the torus the ground state is 2**(1/4) E**(i phi(eta1, eta2) - eta2**2/2)
times the theta sum at (eta1, -eta2), which is real and positive.  On the
lattice the Hamiltonian is built from the q and p matrices (with the edge
state projected out) or from template integrals.  Over a quarter period the
evolution maps |A,B> to |B,-A>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .lattice import (
    DiscreteState,
    LatticeWindow,
    OperatorMatrix,
    PreconditionError,
    build_p_matrix,
    build_q_matrix,
    edge_projector,
)
from .numerics import TWO_PI, DomainError, RealLineGrid, eexp
from .phase_field import phi, theta_sum
from .template import TemplateTable, build_template_table

GROUND_NORM = 2.0**0.25
DEFAULT_RESOLUTION = RealLineGrid.symmetric(12, 1 / 64)
SUPPORT_MARGIN = 10


@dataclass(frozen=True)
class TorusGrid:
    """Cell-centred grid on the torus; nodes never hit the corner vortex."""

    n1: int
    n2: int
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.n1 < 8 or self.n2 < 8:
            raise DomainError("torus grids need at least 8 nodes per direction")
        if self.values is not None and np.shape(self.values) != (self.n1, self.n2):
            raise DomainError("values do not match the grid")

    @property
    def eta1(self) -> np.ndarray:
        return -0.5 + (np.arange(self.n1) + 0.5) / self.n1

    @property
    def eta2(self) -> np.ndarray:
        return -0.5 + (np.arange(self.n2) + 0.5) / self.n2

    def mesh(self):
        return np.meshgrid(self.eta1, self.eta2, indexing="ij")

    def with_values(self, values) -> "TorusGrid":
        return TorusGrid(self.n1, self.n2, np.asarray(values, dtype=complex))


def ground_state_values(eta1, eta2):
    """Torus ground state at arbitrary points off the corners."""
    eta1 = np.asarray(eta1, dtype=float)
    eta2 = np.asarray(eta2, dtype=float)
    series = theta_sum(eta1, -eta2)
    return GROUND_NORM * eexp(phi(eta1, eta2)) * np.exp(-np.pi * eta2**2) * series


def ground_state_torus(grid: TorusGrid) -> TorusGrid:
    """Oscillator ground state on the torus frame where it is strictly periodic."""
    return grid.with_values(ground_state_values(*grid.mesh()))


def _d4(f, h, axis):
    # fourth-order central difference on an array padded by two ghost layers
    sl = lambda a, b: tuple(slice(a, f.shape[k] - b if b else None) if k == axis else slice(2, -2)
                            for k in range(2))
    return (-f[sl(4, 0)] + 8 * f[sl(3, 1)] - 8 * f[sl(1, 3)] + f[sl(0, 4)]) / (12 * h)


def _pad_phase(ph, e1):
    # phi is periodic in eta1 and gains eta1 per unit step in eta2
    padded = np.pad(ph, 2, mode="wrap")
    e1p = np.pad(e1, ((2, 2), (0, 0)), mode="wrap")[:, :1]
    padded[:, -2:] += e1p
    padded[:, :2] -= e1p
    return padded


def annihilation_apply(grid: TorusGrid) -> np.ndarray:
    """Apply a = sqrt(pi)(-(d1 + i d2)/(2 pi) - i eta2 + i (d1 + i d2) phi) to grid values.

    Values are taken as periodic on the torus; phi uses its twisted
    continuation across the eta2 boundary.
    """
    if grid.values is None:
        raise DomainError("grid carries no values")
    e1, e2 = grid.mesh()
    h1, h2 = 1.0 / grid.n1, 1.0 / grid.n2
    f = np.pad(grid.values, 2, mode="wrap")
    ph = _pad_phase(phi(e1, e2), e1)
    dbar_f = _d4(f, h1, 0) + 1j * _d4(f, h2, 1)
    dbar_phi = _d4(ph, h1, 0) + 1j * _d4(ph, h2, 1)
    return np.sqrt(np.pi) * (-dbar_f / TWO_PI - 1j * e2 * grid.values + 1j * dbar_phi * grid.values)


def corner_distance(grid: TorusGrid) -> np.ndarray:
    e1, e2 = grid.mesh()
    return np.hypot(0.5 - np.abs(e1), 0.5 - np.abs(e2))


def annihilation_residual(grid: TorusGrid, values=None, exclusion: float = 0.1) -> float:
    """max |a psi| / max |psi| over cells farther than ``exclusion`` from the corners.

    Uses the ground state when no values are given.
    """
    if values is not None:
        grid = grid.with_values(values)
    elif grid.values is None:
        grid = ground_state_torus(grid)
    keep = corner_distance(grid) > exclusion
    res = np.abs(annihilation_apply(grid))[keep]
    return float(res.max() / np.abs(grid.values)[keep].max())


@dataclass(frozen=True)
class OscillatorConfig:
    window: LatticeWindow
    regularization: str = "project_edge"
    quadrature: RealLineGrid = RealLineGrid.symmetric(40, 1 / 128)
    reference_cutoffs: tuple = (20.0, 40.0)

    def __post_init__(self):
        if self.regularization not in ("project_edge", "subtract_checkerboard"):
            raise DomainError(f"unknown regularization {self.regularization!r}")
        lo, hi = self.reference_cutoffs
        if not 0 < lo < hi <= self.quadrature.x_max:
            raise DomainError("reference cutoffs must increase and fit the quadrature grid")


@dataclass
class HamiltonianResult:
    matrix: OperatorMatrix
    regularization: str
    log_slope: float | None = None
    checkerboard_similarity: float | None = None


def _template_moments(values, grid, a_range, d_range, cutoff):
    """G[a, b, d] = integral over |x| <= cutoff of x**2 psi(x-a) psi(x-b) E**(i d x)."""
    x = grid.values
    w = grid.trapezoid_weights() * (np.abs(x) <= cutoff + 1e-12)
    w = np.where(np.abs(np.abs(x) - cutoff) < 1e-9, 0.5 * grid.step, w)
    shifted = np.array([values(x - a) for a in a_range])
    phase = np.exp(1j * TWO_PI * np.outer(x, d_range))
    n = len(a_range)
    G = np.empty((n, n, len(d_range)), dtype=complex)
    for i in range(n):
        prod = shifted[i] * shifted * (w * x * x)
        G[i] = prod @ phase
    return G


def template_hamiltonian(window: LatticeWindow, table: TemplateTable, grid: RealLineGrid, cutoff: float):
    """pi(q**2 + p**2) from template integrals truncated at |q|, |p| <= cutoff."""
    qs = np.arange(window.q_min, window.q_max + 1)
    ps = np.arange(window.p_min, window.p_max + 1)
    span = max(window.n_q, window.n_p) - 1
    d_range = np.arange(-span, span + 1)
    Gq = _template_moments(table, grid, qs, d_range, cutoff)
    Gp = Gq if np.array_equal(qs, ps) else _template_moments(table, grid, ps, d_range, cutoff)
    Q, P = window.coords()
    iq = Q - window.q_min
    ip = P - window.p_min
    dP = P[None, :] - P[:, None]
    dQ = Q[None, :] - Q[:, None]
    q2 = Gq[iq[:, None], iq[None, :], dP + span]
    p2 = Gp[ip[:, None], ip[None, :], -dQ + span]
    return np.pi * (q2 + p2)


def hamiltonian_matrix(config: OscillatorConfig, table: TemplateTable | None = None) -> HamiltonianResult:
    """Lattice Hamiltonian H = pi(q**2 + p**2) under a regularization mode.

    ``project_edge`` squares the edge-projected lattice matrices of q and p.
    ``subtract_checkerboard`` uses template integrals at two cutoffs, fits
    the logarithmic growth along the checkerboard matrix and removes it at
    the larger cutoff.
    """
    w = config.window
    if config.regularization == "project_edge":
        Pi = edge_projector(w)
        q = Pi @ build_q_matrix(w).entries @ Pi
        p = Pi @ build_p_matrix(w).entries @ Pi
        H = np.pi * (q @ q + p @ p)
        H = 0.5 * (H + H.conj().T)
        return HamiltonianResult(OperatorMatrix(w, H, hermitian=True), config.regularization)
    grid = config.quadrature
    if table is None:
        reach = grid.x_max + max(abs(w.q_min), abs(w.q_max), abs(w.p_min), abs(w.p_max)) + 1
        table = build_template_table(RealLineGrid.symmetric(np.ceil(reach), grid.step))
    lo, hi = config.reference_cutoffs
    H_lo = template_hamiltonian(w, table, grid, lo)
    H_hi = template_hamiltonian(w, table, grid, hi)
    c = w.checkerboard()
    C = np.outer(c, c)
    growth = H_hi - H_lo
    along = np.vdot(C, growth).real / np.vdot(C, C).real
    similarity = abs(np.vdot(C, growth)) / (np.linalg.norm(C) * np.linalg.norm(growth))
    slope = along / np.log(hi / lo)
    H = H_hi - slope * np.log(hi) * C
    H = 0.5 * (H + H.conj().T)
    return HamiltonianResult(OperatorMatrix(w, H, hermitian=True), config.regularization, float(slope), float(similarity))


def physical_spectrum(H: OperatorMatrix) -> np.ndarray:
    """Eigenvalues of H on the subspace orthogonal to the edge state."""
    basis = _physical_basis(H.window)
    return np.linalg.eigvalsh(basis.conj().T @ H.entries @ basis)


def physical_eigh(H: OperatorMatrix):
    """Eigenpairs on the physical subspace, vectors expressed on the window."""
    basis = _physical_basis(H.window)
    vals, vecs = np.linalg.eigh(basis.conj().T @ H.entries @ basis)
    return vals, basis @ vecs


def _physical_basis(window):
    # orthonormal complement of the checkerboard vector
    c = window.checkerboard() / np.sqrt(window.size)
    full = np.linalg.qr(np.column_stack([c, np.eye(window.size)]))[0]
    return full[:, 1:]


def spectrum(config: OscillatorConfig, k: int | None = None) -> np.ndarray:
    vals = physical_spectrum(hamiltonian_matrix(config).matrix)
    return vals if k is None else vals[:k]


# continuum side -----------------------------------------------------------


@dataclass
class ContinuumSample:
    grid: RealLineGrid
    values: np.ndarray
    t: float = 0.0
    meta: dict = field(default_factory=dict)


@lru_cache(maxsize=8)
def _table_for(half_width, step):
    return build_template_table(RealLineGrid.symmetric(half_width, step))


def _table_covering(grid: RealLineGrid, window: LatticeWindow) -> TemplateTable:
    reach = max(abs(grid.x_min), abs(grid.x_max)) + max(
        abs(window.q_min), abs(window.q_max), abs(window.p_min), abs(window.p_max)) + 1
    return _table_for(float(np.ceil(reach)), grid.step)


def synthesize(state: DiscreteState, grid: RealLineGrid = DEFAULT_RESOLUTION,
               table: TemplateTable | None = None, representation: str = "q") -> np.ndarray:
    """Continuum wavefunction of a lattice state on ``grid``.

    ``<q|Q,P> = psi(q - Q) E**(i P q)`` and ``<p|Q,P> = E**(-i Q p) psi(p - P)``.
    """
    table = table or _table_covering(grid, state.window)
    x = grid.values
    Qs, Ps, amp = state.support()
    out = np.zeros(x.size, dtype=complex)
    for Q, P, a in zip(Qs, Ps, amp):
        if representation == "q":
            out += a * table(x - Q) * np.exp(1j * TWO_PI * P * x)
        else:
            out += a * table(x - P) * np.exp(-1j * TWO_PI * Q * x)
    return out


def project_from_momentum(g: np.ndarray, grid: RealLineGrid, window: LatticeWindow,
                          table: TemplateTable | None = None) -> DiscreteState:
    """Lattice amplitudes <Q,P|g> of a momentum-space wavefunction g(p)."""
    table = table or _table_covering(grid, window)
    p = grid.values
    gw = g * grid.trapezoid_weights()
    Qr = np.arange(window.q_min, window.q_max + 1)
    Pr = np.arange(window.p_min, window.p_max + 1)
    templ = np.array([table(p - P) for P in Pr])
    phases = np.exp(1j * TWO_PI * np.outer(Qr, p))
    amp = phases @ (templ * gw).T
    return DiscreteState(window, amp.ravel())


def project_from_position(f: np.ndarray, grid: RealLineGrid, window: LatticeWindow,
                          table: TemplateTable | None = None) -> DiscreteState:
    """Lattice amplitudes <Q,P|f> of a position-space wavefunction f(q)."""
    table = table or _table_covering(grid, window)
    q = grid.values
    fw = f * grid.trapezoid_weights()
    Qr = np.arange(window.q_min, window.q_max + 1)
    Pr = np.arange(window.p_min, window.p_max + 1)
    templ = np.array([table(q - Q) for Q in Qr])
    phases = np.exp(-1j * TWO_PI * np.outer(Pr, q))
    amp = (templ * fw) @ phases.T
    return DiscreteState(window, amp.ravel())


def _check_margin(state, grid):
    Qs, Ps, amp = state.support(tol=1e-12 * max(np.abs(state.amplitudes).max(initial=0.0), 1e-300))
    if not Qs.size:
        return
    reach = max(np.abs(Qs).max(), np.abs(Ps).max())
    inner = min(-grid.x_min, grid.x_max)
    if reach + SUPPORT_MARGIN > inner + 1e-9:
        raise PreconditionError(
            f"resolution half-width {inner} leaves less than {SUPPORT_MARGIN} beyond the support (reach {reach})")


def quarter_evolution(state: DiscreteState, resolution: RealLineGrid = DEFAULT_RESOLUTION,
                      table: TemplateTable | None = None) -> DiscreteState:
    """Quarter-period map of a lattice state through the continuum.

    Synthesises f(q), sets g(p) = f(-p) and projects g back on the lattice.
    The returned state's ``meta`` holds the continuum intermediate and the
    phase of the dominant amplitude, which is left as computed.
    """
    _check_margin(state, resolution)
    table = table or _table_covering(resolution, state.window)
    f = synthesize(state, resolution, table)
    g = f[::-1] if resolution.is_symmetric else None
    if g is None:
        raise DomainError("quarter evolution needs a symmetric resolution grid")
    out = project_from_momentum(g, resolution, state.window, table)
    (site, amp) = out.dominant()
    out.meta.update(continuum_p=g, grid=resolution, dominant=site,
                    dominant_phase=float(np.angle(amp) / TWO_PI))
    return out


@lru_cache(maxsize=4)
def _oscillator_eigh(grid: RealLineGrid):
    # sinc discrete-variable representation of H = -(1/4 pi) d2/dq2 + pi q**2
    h = grid.step
    n = grid.size
    d = np.subtract.outer(np.arange(n), np.arange(n))
    with np.errstate(divide="ignore"):
        kin = np.where(d == 0, np.pi**2 / 3, 2.0 * np.where(d % 2 == 0, 1.0, -1.0) / np.where(d == 0, 1, d) ** 2)
    H = kin / (h * h * 4 * np.pi) + np.pi * np.diag(grid.values**2)
    return np.linalg.eigh(H)


def oscillator_levels(grid: RealLineGrid = DEFAULT_RESOLUTION, k: int = 10) -> np.ndarray:
    return _oscillator_eigh(grid)[0][:k].copy()


def evolve_fractional(state, t: float, resolution: RealLineGrid = DEFAULT_RESOLUTION,
                      table: TemplateTable | None = None) -> ContinuumSample:
    """Evolve for time t (in periods) under H = pi(p**2 + q**2).

    ``state`` is a :class:`DiscreteState` (synthesised on ``resolution``) or
    an array of position-space samples on ``resolution``.  Each oscillator
    eigenmode picks up e^{-2 pi i E_n t}; at t = 1/4 this is a Fourier
    transform up to e^{-i pi / 4}.
    """
    if abs(t) > 1:
        raise DomainError("evolve_fractional needs |t| <= 1")
    if isinstance(state, DiscreteState):
        f = synthesize(state, resolution, table)
    else:
        f = np.asarray(state, dtype=complex)
        if f.shape != (resolution.size,):
            raise DomainError("samples do not match the resolution grid")
    if t == 0:
        return ContinuumSample(resolution, f.copy(), 0.0)
    E, V = _oscillator_eigh(resolution)
    coeff = V.T @ f
    values = V @ (np.exp(-1j * TWO_PI * E * t) * coeff)
    return ContinuumSample(resolution, values, float(t), {"levels_used": int(E.size)})


def fidelity(f: np.ndarray, g: np.ndarray, grid: RealLineGrid) -> float:
    w = grid.trapezoid_weights()
    num = abs(np.sum(w * np.conj(f) * g)) ** 2
    return float(num / (np.sum(w * abs(f) ** 2) * np.sum(w * abs(g) ** 2)))


def ground_state_q(q):
    return GROUND_NORM * np.exp(-np.pi * np.asarray(q, dtype=float) ** 2)


def lattice_ground_fidelity(window: LatticeWindow, grid: RealLineGrid = DEFAULT_RESOLUTION) -> float:
    """Fidelity of the lowest physical eigenvector, synthesised in q, with the Gaussian."""
    H = hamiltonian_matrix(OscillatorConfig(window)).matrix
    _, vecs = physical_eigh(H)
    state = DiscreteState(window, vecs[:, 0])
    return fidelity(synthesize(state, grid), ground_state_q(grid.values), grid)
