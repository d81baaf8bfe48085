"""Schmidt-number and entanglement-fidelity certification from symmetric product projections."""

from .errors import (
    DimensionError,
    IncompleteDataError,
    NoKernelError,
    NotASicError,
    NoThresholdError,
    OperatorTooLargeError,
    UnsupportedDimensionError,
    ValidationError,
)
from .measurements import (
    EamFrame,
    MubFamily,
    construct_measurement,
    eam_dephasing_tuned,
    eam_fourier_drop_row,
    fourier_basis,
    mub_full_prime,
    mub_pair,
    sic_from_fiducial,
    validate_eam,
    validate_mub,
    welch_bound,
)
from .noise import (
    NoiseSpec,
    accuracy_delta,
    dephased_state,
    isotropic_state,
    threshold_scan,
    unfaithful_state,
    v_crit_eam_dephase,
    v_crit_eam_iso,
    v_crit_mub_iso,
    v_crit_worst,
    v_opt_dephase,
    v_opt_iso,
    worst_case_state,
)
from .shots import CountRecord, EstimateReport, certify_from_counts, estimate_witness, sample_projections
from .states import (
    conjugate_local,
    fidelity_ascent,
    fidelity_overlap,
    max_entangled_state,
    schmidt_decompose,
)
from .witness import (
    FamilyDescriptor,
    WitnessReport,
    build_eam_witness_operator,
    build_mub_witness_operator,
    certify,
    eam_schmidt_bound,
    eam_witness_value,
    maximal_set_identity_check,
    mub_schmidt_bound,
    mub_witness_value,
    verify_witness_spectrum,
)

__version__ = "0.1.0"
