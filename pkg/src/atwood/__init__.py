"""Exact and numerical analysis of singular expansions of the swinging
Atwood's machine."""

__version__ = "0.1.0"

from .exactnum import (
    CoefficientPoly,
    GaussianRational,
    PuiseuxSeries,
    gr_arith,
    series_eval,
    series_mul,
)
from .kowalevski import (
    LeadingBalance,
    ObstructionError,
    PuiseuxSolution,
    admissible_pairs,
    covector_test,
    expand,
    kowalevski_matrix,
    leading_balance,
    resonance_structure,
)
from .model import (
    CartesianState,
    MachineParams,
    PhasePoint,
    energy,
    eom_residual,
    integrate_complex,
    lambda_of,
    reduced_hamiltonian,
    second_invariant_sq,
)
