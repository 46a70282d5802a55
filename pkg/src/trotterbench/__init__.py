"""Fermionic-Hamiltonian compiler, Trotter planner and resource estimator."""

from .errors import (
    BranchCutError,
    DegenerateFitError,
    ParseError,
    ResourceCapError,
    ValidationError,
)
from .hamiltonian import (
    FermionHamiltonian,
    FermionTerm,
    TermKind,
    classify_term,
    full_term_census,
    load_integrals,
    make_term,
    neighbor_counts,
    parse_integrals,
    save_integrals,
    serialize_integrals,
    term_norm_bound,
)
from .synth import SynthConfig, generate_molecule, sample_coefficient
from .compiler import (
    Circuit,
    CircuitMetrics,
    Gate,
    GateKind,
    compile_term,
    count_scaling_study,
    metrics_for_step,
)
from .planner import (
    Bucket,
    CoalescePlan,
    TrotterPlan,
    coalesce_error_bound,
    pair_bound,
    plan_coalesced,
    plan_step,
    ts_error_bound,
    ts_error_bound_inductive,
)
from .dense import (
    DenseOperator,
    EnergyEstimate,
    ErrorCurve,
    FockBasis,
    assemble_dense,
    error_curve,
    exact_exponential,
    exact_ground_energy,
    ground_energy_from_unitary,
    ground_state,
    required_steps,
    trotter_unitary,
)
from .estimator import (
    Extrapolation,
    ScalingModel,
    WATER_ANCHOR,
    extrapolate,
    fit_step_scaling,
    phase_estimation_time,
    table_report,
)

__version__ = "0.1.0"
