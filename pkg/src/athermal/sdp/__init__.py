"""Semidefinite programming: a generic dense interface and the programs used by the library."""

from .core import Affine, Block, Builder, SDPProblem, SDPSolution, block_matrix, dump, solve
from .programs import (
    channel_hypothesis_testing_dual_sdp,
    channel_hypothesis_testing_sdp,
    diamond_norm,
    diamond_norm_choi,
    gibbs_preserving_channel_sdp,
    hypothesis_testing_dual_sdp,
    hypothesis_testing_sdp,
    max_free_energy_dual_sdp,
    max_free_energy_sdp,
    smoothed_channel_max_div,
    smoothed_channel_max_div_sdp,
    smoothed_max_state_sdp,
)

__all__ = [
    "Affine",
    "Block",
    "Builder",
    "SDPProblem",
    "SDPSolution",
    "block_matrix",
    "channel_hypothesis_testing_dual_sdp",
    "channel_hypothesis_testing_sdp",
    "diamond_norm",
    "diamond_norm_choi",
    "dump",
    "gibbs_preserving_channel_sdp",
    "hypothesis_testing_dual_sdp",
    "hypothesis_testing_sdp",
    "max_free_energy_dual_sdp",
    "max_free_energy_sdp",
    "smoothed_channel_max_div",
    "smoothed_channel_max_div_sdp",
    "smoothed_max_state_sdp",
    "solve",
]
