"""Measurement-based quantum computation on symmetry-protected 1D matrix
product states: buffering renormalization, gate fidelity, and string order.
"""

from .exceptions import (
    AmbiguousSymmetryError,
    ConfigError,
    DegenerateSpectrumError,
    FactorizationError,
    NotASymmetryError,
    NullOutcomeError,
    ResourceLimitError,
    SptmqcError,
    StalledFlowError,
)
from .mps_core import (
    INF,
    CanonicalData,
    MPSTensor,
    TransferChannel,
    amplitude,
    brute_force_string_expectation,
    build_mps,
    canonicalize,
    transfer_channel,
)
from .symmetry import (
    FactorizedTensor,
    PhaseLabel,
    SymmetryAction,
    classify_d2_phase,
    extract_virtual_symmetry,
    factorize_protected_junk,
    make_factorized,
    spin1_rotation,
    verify_s4_invariance,
)
from .toymodel import (
    ToyModelParams,
    aklt,
    aklt_factorized,
    critical_theta,
    toy_junk_ops,
    toy_tensor,
)
from .renorm import (
    JordanSpectrum,
    RenormResult,
    buffer,
    fixed_point,
    junk_spectrum,
    xi_tilde,
)
from .mqc import (
    USING_COMPILED_KERNEL,
    FidelityReport,
    MeasurementOutcome,
    ProtocolStats,
    ProtocolTrace,
    attempt_success_probability,
    gate_fidelity,
    measurement_operator,
    overhead_estimate,
    postselect_probability,
    protocol_statistics,
    rotation_outcome,
    simulate_protocol,
)
from .orderparam import (
    StringOrderResult,
    ConsistencyReport,
    fidelity_order_consistency,
    string_order_bare,
    string_order_renormalized,
)

__version__ = "0.1.0"
