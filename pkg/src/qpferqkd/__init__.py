"""QKD with a 2-qubit phase-flip error-rejection code: rate maps, thresholds, oracle, Monte Carlo."""
from .maps import (
    MapResult,
    PecBounds,
    bitflip_rejection_map,
    converges,
    min_r_for_phase,
    pec_bounds,
    phaseflip_rejection_map,
    qpfer_decode_map,
)
from .rates import (
    ChannelFamily,
    FamilyKind,
    PauliRates,
    ProtocolVariant,
    detected_rates,
    make_channel,
    worst_case_4state,
)
from .solver import Schedule, ThresholdReport, find_schedule, pipeline_rates, threshold

__version__ = "0.1.0"
