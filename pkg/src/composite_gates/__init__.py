"""Design and verification of composite pulse sequences for robust single-qubit rotations."""

from .fidelity import (
    FidelityProfile,
    HighFidelityRange,
    NoRangeError,
    frobenius_fidelity,
    frobenius_infidelity,
    high_fidelity_range,
    profile,
    trace_fidelity,
    x3_infidelity,
    x5_infidelity,
)
from .series import (
    EpsSeries,
    OrderReport,
    SlopeEstimate,
    Su2Series,
    compensation_order,
    compose_series,
    order_slope_estimate,
    pulse_series,
)
from .su2 import (
    CompositeSequence,
    DomainError,
    Family,
    Pulse,
    Su2Matrix,
    compose,
    phase_gate,
    pulse_propagator,
    sequence,
    sequence_from_pi,
    target_rotation,
    total_area,
)

__version__ = "0.1.0"
