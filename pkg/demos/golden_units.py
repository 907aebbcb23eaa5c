"""Golden units and unitary channels.

The identity channel on m levels is the reference resource: its max free
energy at a flat Hamiltonian is 2 ln m / beta.  Unitaries on a gapped qubit all
share one closed-form max-divergence, computed twice below (eigenvalues and SDP).
"""

import numpy as np

from athermal.channels import haar_unitary, identity_channel, uniform_mixing, unitary_channel
from athermal.chanthermo import channel_max_divergence, free_energy
from athermal.quantum import thermal_context
from athermal.sdp import diamond_norm, max_free_energy_sdp
from athermal.statediv import DivergenceKind

for m in (2, 3, 4):
    ctx = thermal_context(np.zeros((m, m)), 1.0)
    f_max = free_energy(identity_channel(m), ctx, DivergenceKind.max()).resource
    f_rel = free_energy(identity_channel(m), ctx).resource
    dist = 0.5 * diamond_norm(identity_channel(m), uniform_mixing(m))
    print(f"id_{m}: F_max = {f_max:.9f}  F = {f_rel:.9f}  2 ln m = {2 * np.log(m):.9f}  "
          f"distance to R^pi = {dist:.9f} (1 - 1/m^2 = {1 - 1 / m**2:.9f})")

ctx = thermal_context(np.diag([0.0, np.log(2)]), 1.0)
print("\nHaar unitaries on H = diag(0, ln 2), beta = 1; ln 4.5 =", f"{np.log(4.5):.10f}")
for seed in range(5):
    u = unitary_channel(haar_unitary(2, seed))
    eig = channel_max_divergence(u, ctx)
    sol = max_free_energy_sdp(u, ctx)
    print(f"  seed {seed}: eigen {eig:.10f}  sdp {np.log(sol.primal_value):.10f}  gap {sol.duality_gap:.1e}")
