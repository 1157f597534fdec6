"""Gate-level simulation of a quantum computer running the sawtooth-map
algorithm under static hardware imperfections, and the spectral-statistics
toolkit used to locate the induced transition to quantum chaos."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    ContractError,
    MissingArtifactError,
    NumericError,
    RangeError,
    ResourceError,
    SawsimError,
    StatisticalError,
)
from .qcore import (
    ControlledPhase,
    Gate,
    Hadamard,
    PairPhase,
    StateVector,
    apply_gate,
    gate_matrix,
    qft,
)
from .sawtooth import (
    ClassicalState,
    GateSequence,
    MapParams,
    classical_step,
    compile_iteration,
    diffusive_fraction,
    ideal_kick_phases,
    ideal_rotation_phases,
    make_params,
    oracle_floquet,
)
from .imperfections import (
    DisorderRealization,
    ImperfectionParams,
    InterGatePropagator,
    build_static_hamiltonian,
    make_propagator,
    run_perturbed_iteration,
    sample_disorder,
)
from .floquet import (
    FloquetSpectrum,
    build_floquet,
    diagonalize,
    parity_blocks,
    quasi_energy_clusters,
)
from .spectral import (
    CrossoverCurve,
    SpacingSample,
    eps_chi,
    eta,
    eta_tilde,
    fit_scaling,
    sample_surmise,
    spacings,
    surmise,
    surmise_cdf,
)
from .eigenstates import HusimiGrid, entropy, entropy_border, husimi, overlaps
from .harness import (
    BorderStudy,
    ExperimentConfig,
    RunRecord,
    config_hash,
    emit_outputs,
    log_grid,
    realization_budget,
    run_border_study,
    run_level_flow,
    run_sweep,
)
