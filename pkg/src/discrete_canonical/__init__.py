"""Exact maps between the integer (Q,P) lattice basis and the continuum (q,p) bases."""

from .numerics import (
    DomainError,
    EvaluationError,
    RealLineGrid,
    UnitIntervalGrid,
    eexp,
    fourier_integral,
    integrate_unit,
)
from .phase_field import (
    PhaseSample,
    SigmaSplit,
    VortexError,
    interpolator_u,
    phi,
    theta_product,
    theta_sum,
    trial_interpolator,
)
from .template import (
    TemplateTable,
    build_template_table,
    peak_area,
    psi,
    template_overlap_q,
    unitarity_residual,
)
from .lattice import (
    DiscreteState,
    EdgeState,
    LatticeWindow,
    OperatorMatrix,
    a_p_element,
    a_q_element,
    a_q_from_integral,
    build_p_matrix,
    build_q_matrix,
    commutator_residual,
    edge_coefficient,
    p_squared_growth,
    project_physical,
)
from .oscillator import (
    OscillatorConfig,
    TorusGrid,
    annihilation_residual,
    evolve_fractional,
    ground_state_torus,
    hamiltonian_matrix,
    quarter_evolution,
)

__version__ = "0.1.0"
