"""Channel thermodynamics: divergences over pure inputs, free energies, distillation, work and checks."""

from .operational import (
    DistillReport,
    WorkReport,
    conversion_distance,
    golden_dimension,
    max_extractable_work,
    one_shot_cost,
    one_shot_distill,
    work_extraction,
)
from .optimizer import DivergenceResult, OptimizerConfig, maximize, minimize
from .quantities import (
    FreeEnergyReport,
    channel_divergence,
    channel_energy,
    channel_entropy,
    channel_max_divergence,
    channel_mutual_information,
    choi_free_energy,
    free_energy,
    output_free_energy,
    private_randomness,
    thermal_entropy,
)
from .verify import CheckResult, VerifyReport, verify_suite

__all__ = [
    "CheckResult",
    "DistillReport",
    "DivergenceResult",
    "FreeEnergyReport",
    "OptimizerConfig",
    "VerifyReport",
    "WorkReport",
    "channel_divergence",
    "channel_energy",
    "channel_entropy",
    "channel_max_divergence",
    "channel_mutual_information",
    "choi_free_energy",
    "conversion_distance",
    "free_energy",
    "golden_dimension",
    "max_extractable_work",
    "maximize",
    "minimize",
    "one_shot_cost",
    "one_shot_distill",
    "output_free_energy",
    "private_randomness",
    "thermal_entropy",
    "verify_suite",
    "work_extraction",
]
