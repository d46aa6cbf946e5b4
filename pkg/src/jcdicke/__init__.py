"""Ground states, phase diagrams and exact diagonalization for the extended
JC-Dicke model of a two-component condensate in an optical cavity."""

from .exceptions import (
    ConfigError,
    CutoffError,
    DetuningTooSmall,
    DimensionCap,
    DomainError,
    InvalidEpsilon,
    JCDickeError,
    NonConverged,
    NonPositiveOmegaA,
    ParameterError,
    PathError,
)
from .meanfield import (
    MeanFieldProblem,
    MeanFieldSolution,
    SolverOptions,
    energy,
    energy_gradient_wrt_Omega,
    solve_ground_state,
    solve_model,
    stationarity_residual,
    total_energy_per_atom,
)
from .params import (
    CompositeCoupling,
    ModelParams,
    RawPhysicalParams,
    compute_w,
    derive_effective_coupling,
    derive_model_params,
)
from .phases import (
    JumpReport,
    ParameterPath,
    PhaseLabel,
    PhasePoint,
    classify,
    detect_jump,
    diagnose,
    scan_transition,
)
from .exact_diag import EDBasis, EDResult, build_hamiltonian, convergence_study, ground_state
from .sweep import Axis, SweepRecord, SweepSpec, run_grid, run_point, run_sweep
from .validate import run_validate
from .estimators import ExactGroundState, MeanFieldGroundState, PhaseClassifier

__version__ = "0.1.0"
