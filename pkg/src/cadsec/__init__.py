"""Secret-key distillability of Pauli channels under advantage distillation."""

from .cad import CadStatistics, SimReport, cad_error, cad_statistics_d, eve_relabel, simulate_cad
from .entropy import binary_entropy
from .errors import ValidationError
from .eve import (
    EveEnsembleD,
    EveEnsembleQubit,
    gu_eigenvalues,
    helstrom_error,
    qubit_ensemble,
    qudit_ensemble,
    srm_success,
    srm_success_error_class,
)
from .keyrate import (
    KeyRateReport,
    coherent_bob_rate,
    holevo_post_cad_d,
    minimal_block_size,
    minimal_block_size_d,
    preproc_condition,
    preproc_params,
    preproc_spectrum,
    rate_asymptotic_qubit,
    rate_post_cad_qubit,
    rate_preprocessed,
)
from .security import (
    AttackReport,
    SecurityVerdict,
    attack_oneway_check,
    closed_form_bound,
    critical_rate,
    qubit_security,
    qudit_security,
    srm_attack_success_symmetric,
    tightness_check,
)
from .states import (
    BellDiagonalState,
    BellPermutation,
    GeneralizedPauliChannel,
    bb84_attack_state,
    canonicalize,
    cloning_report,
    fidelity_disturbances,
    is_entangled,
    make_bell_diagonal,
    protocol_channel_d,
    qber,
    sixstate_attack_state,
)

__version__ = "0.1.0"
