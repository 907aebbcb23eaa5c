"""Free energy, thermal entropy and extractable work of one channel across temperatures.

Prints a small table; the last column checks S^beta + beta F = ln Z.
"""

import numpy as np

from athermal.channels import random_channel
from athermal.chanthermo import OptimizerConfig, free_energy, max_extractable_work, thermal_entropy
from athermal.quantum import thermal_context

n = random_channel(2, 2, 2, seed=11)
h = np.diag([0.0, 1.0])
cfg = OptimizerConfig(restarts=8)

print(f"{'beta':>6} {'F':>12} {'F_T':>12} {'W_max':>12} {'S^beta':>12} {'dual gap':>10}")
for beta in np.linspace(0.25, 3.0, 8):
    ctx = thermal_context(h, beta)
    fe = free_energy(n, ctx, cfg=cfg)
    w = max_extractable_work(n, ctx, cfg).value
    s = thermal_entropy(n, ctx, cfg).value
    gap = s + beta * fe.resource - ctx.log_partition
    print(f"{beta:6.3f} {fe.resource:12.8f} {fe.thermal:12.8f} {w:12.8f} {s:12.8f} {gap:10.1e}")
