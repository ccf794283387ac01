"""Multi-pair massive-MIMO decode-and-forward relay simulator.

Monte-Carlo sum rates and their deterministic equivalents for rate-splitting
and conventional transmission, in full- and half-duplex operation.
"""

from .channel import (
    ChannelSet,
    EstimationResult,
    draw_channels,
    dump_fixture,
    estimation_variance,
    load_fixture,
    mmse_estimate,
)
from .config import (
    LargeScaleProfile,
    SystemConfig,
    draw_topology,
    pathloss_beta,
    uniform_profile,
)
from .deteq import (
    DeterministicEquivalents,
    FirstHopDE,
    FixedPointSolution,
    SecondHopDE,
    de_first_hop,
    de_lambda_bar,
    de_Q,
    de_report,
    de_second_hop,
    de_sum_rate,
    de_ybar,
    estimate_variances,
    q_weights_de,
    si_trace_density,
    solve_derivative,
    solve_fixed_point,
)
from .montecarlo import (
    LongTermState,
    RateReport,
    draw_rates,
    end_to_end,
    long_term_state,
    mc_rate_draws,
    mc_sum_rate,
    prelog,
    rates_from_sinrs,
    sinr_first_hop,
    sinr_second_hop_common,
    sinr_second_hop_private,
)
from .transceiver import (
    TransceiverSet,
    alpha_from_q,
    build_transceivers,
    common_precoder,
    lambda_normalization,
    mmse_decoder,
    power_split,
    rzf_precoder_unnormalized,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSet",
    "DeterministicEquivalents",
    "EstimationResult",
    "FirstHopDE",
    "FixedPointSolution",
    "LargeScaleProfile",
    "LongTermState",
    "RateReport",
    "SecondHopDE",
    "SystemConfig",
    "TransceiverSet",
    "alpha_from_q",
    "build_transceivers",
    "common_precoder",
    "de_Q",
    "de_first_hop",
    "de_lambda_bar",
    "de_report",
    "de_second_hop",
    "de_sum_rate",
    "de_ybar",
    "draw_channels",
    "draw_rates",
    "draw_topology",
    "dump_fixture",
    "end_to_end",
    "estimate_variances",
    "estimation_variance",
    "lambda_normalization",
    "load_fixture",
    "long_term_state",
    "mc_rate_draws",
    "mc_sum_rate",
    "mmse_decoder",
    "mmse_estimate",
    "pathloss_beta",
    "power_split",
    "prelog",
    "q_weights_de",
    "rates_from_sinrs",
    "rzf_precoder_unnormalized",
    "si_trace_density",
    "sinr_first_hop",
    "sinr_second_hop_common",
    "sinr_second_hop_private",
    "solve_derivative",
    "solve_fixed_point",
    "uniform_profile",
]
