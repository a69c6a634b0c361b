"""qfalab: density matrices, superoperators, enhanced QFAs and the entropy
arguments that bound their size."""

from .automata import (
    Dfa,
    QfaSpec,
    RunResult,
    dfa_for_ln,
    is_r_restricted,
    lift_dfa,
    ln_member,
    prefix_qfa_for_ln,
    recognizes,
    run_qfa,
)
from .channels import (
    BinaryObservable,
    Measure,
    ProjectiveMeasurement,
    Superoperator,
    Unitary,
    apply_superoperator,
    discrimination_success,
    helstrom_observable,
)
from .decode import (
    Ensemble,
    EnsembleItem,
    build_joint,
    decode_report,
    geometric_example,
    map_decoder,
    projection_sum_check,
)
from .density import (
    DensityMatrix,
    binary_entropy,
    eigendecompose,
    jacobi_eigh,
    random_density,
    random_unitary,
    shannon_entropy,
    validate_density,
    von_neumann_entropy,
)
from .entropy_lab import (
    average_state_trajectory,
    check_entropy_growth,
    fact_suite,
    holevo_chi,
    lemma_mix_check,
    lemma_mix_sweep,
)
from .errors import *  # noqa: F401,F403
from .joint import JointDistribution, fano_floor, mutual_information
from .rac import (
    RacVerification,
    RandomAccessCode,
    rac_bound_check,
    seesaw_optimize,
    suffix_mixture_entropy,
    verify_rac,
)

__version__ = "0.1.0"
