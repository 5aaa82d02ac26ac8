"""Path-spin Mach-Zehnder simulator: subensemble spin statistics and hidden-variable analysis."""

from .errors import (
    BasisError,
    CapacityError,
    DecompositionError,
    ParameterError,
    PathSpinError,
    SolverError,
    StateError,
    UndefinedStatisticError,
)
from .interferometer import (
    CONTEXT_A1,
    CONTEXT_A2,
    HALF,
    BeamSplitterParams,
    Channel,
    SourceParams,
    bs2_unitary,
    prepare_state,
    run_pipeline,
)
from .observables import PathObservable, SpinAxis, commutator_norm, path_observable, sigma_theta
from .qstate import Basis, JointState, Op2, PathVec, Spinor, apply_path, apply_spin, pauli_decompose, tensor
from .statistics import (
    OutcomeTable,
    SampleConfig,
    SubensembleStats,
    conditional_fluctuation,
    contextuality_gap,
    estimate,
    joint_probs,
    sample,
    subensemble_mean_analytic,
    whole_ensemble_mean,
)

__version__ = "0.1.0"
