"""A qubit swept linearly through resonance with an empty cavity.

The qubit starts in |up> with no photons. Around t = 100 the levels
|0, up> and |1, down> anticross; the qubit flips and leaves one photon
behind. We compare the variational trajectory with brute-force propagation
and with the closed-form Landau-Zener probability.

    python demos/vacuum_transition.py
"""

import numpy as np

from lzsm import IntegratorConfig, LinearDrive, ModelParams, ed_evolve, init_vacuum, integrate
from lzsm import lz_asymptote, plateau_average, records_to_arrays
from lzsm.spectrum import adiabatic_levels, find_avoided_crossings, find_crossing

v, gamma = 0.01, 0.12
params = ModelParams.single_mode(LinearDrive(v), gamma)

# Where is the avoided crossing, and how wide is it?
spec = adiabatic_levels(params, np.linspace(50, 150, 2001), n_trunc=20)
hit = find_crossing(find_avoided_crossings(spec, max_levels=6), (0, "up"), (1, "down"))[0]
print(f"|0,up>/|1,down> gap {hit.gap:.4f} at t = {hit.t_star:.2f}")

# Variational run with six branches.
arr = records_to_arrays(integrate(init_vacuum(6, seed=0), params, IntegratorConfig(-300, 300)))

# Same thing in a truncated Fock basis.
psi0 = np.zeros(2 * 31, dtype=complex)
psi0[0] = 1.0
ed = ed_evolve(params, psi0, -300, 300, record_stride=10)

plateau = plateau_average(arr["t"], arr["p_lz"], (150, 300))
print(f"final plateau  variational {plateau.mean:.4f}  exact {ed.p_lz[-1]:.4f}")
print(f"closed form 1 - exp(-pi g^2 / 2v) = {lz_asymptote(gamma, v):.4f}")
print(f"photon left behind: P(1, down) = {arr['p_down'][-1, 1]:.4f}")

for t in (-100, 0, 90, 100, 110, 200, 300):
    k = int(np.argmin(np.abs(arr["t"] - t)))
    print(f"  t = {arr['t'][k]:6.1f}   P_LZ = {arr['p_lz'][k]:.4f}")
