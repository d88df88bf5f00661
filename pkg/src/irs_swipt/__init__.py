"""Joint transmit precoding and IRS reflect-phase optimization for SWIPT:
weighted sum harvested power maximization under per-user SINR constraints."""

from .channel import (
    ChannelRealization,
    ExperimentConfig,
    PhaseVector,
    effective_channel,
    harvested_power,
    pathloss_linear,
    sample_channels,
    sinr,
)
from .sdp import SdpProblem, SdpSolution, SdpStatus, check_kkt, solve
from .swipt import PrecoderSet, solve_p1, verify_prop1
from .wpt import WptIterate, solve_p2

__all__ = [
    "ChannelRealization",
    "ExperimentConfig",
    "PhaseVector",
    "PrecoderSet",
    "SdpProblem",
    "SdpSolution",
    "SdpStatus",
    "WptIterate",
    "check_kkt",
    "effective_channel",
    "harvested_power",
    "pathloss_linear",
    "sample_channels",
    "sinr",
    "solve",
    "solve_p1",
    "solve_p2",
    "verify_prop1",
]
