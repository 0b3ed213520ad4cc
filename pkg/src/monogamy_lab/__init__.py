"""Entanglement monogamy and cavity-reservoir entanglement dynamics."""
from ._accel import USE_NUMBA
from .errors import CapacityError, DegenerateInputError, LabelError, NumericError
from .model import (
    DampingAmplitudes,
    InitialPairState,
    damping_amplitudes,
    evolved_three_pair_state,
    evolved_two_pair_state,
    single_pair_map,
    w_state,
)
from .measures import (
    PairwiseConcurrences,
    closed_form_pairwise,
    pure_bipartition_tangle,
    qubit_block_tangles,
    residual_two_qubit,
    three_tangle_pure,
    wootters_concurrence_sq,
)
from .roof import PureTangle, RoofConfig, RoofEstimate, estimate_roof, roof_three_tangle
from .tensor import (
    PureState,
    QubitRegister,
    hermitian_eigenvalues,
    kron,
    partial_trace,
    psd_sqrt,
    rank_estimate,
)

__version__ = "0.1.0"
