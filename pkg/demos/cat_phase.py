"""How the relative phase of a cat state steers the transition.

The cavity starts in N(|alpha> + e^{i theta} |-alpha>) with |alpha|^2 = 1.
Sweeping theta from the even (0) through Yurke-Stoler (pi/2) to the odd (pi)
cat changes the photon statistics, and with them the transition probability
on both plateaus. The rotating-wave closed form covers only the first
transition. Takes about half a minute.

    python demos/cat_phase.py
"""

import math

from lzsm import CatSpec, IntegratorConfig, LinearDrive, ModelParams, init_cat, integrate
from lzsm import plateau_average, plateau_windows, records_to_arrays, rwa_final_probability
from lzsm.observables import mandel_q

v, gamma = 0.01, 0.05
params = ModelParams.single_mode(LinearDrive(v), gamma)
w1, w2 = plateau_windows(1 / v, 300)

print(" theta    Q      plateau1  plateau2  rotating-wave")
for name, theta in (("0", 0.0), ("pi/2", math.pi / 2), ("pi", math.pi)):
    state = init_cat(CatSpec(1.0, theta), 8, seed=0)
    arr = records_to_arrays(integrate(state, params, IntegratorConfig(-300, 300)))
    p1 = plateau_average(arr["t"], arr["p_lz"], w1).mean
    p2 = plateau_average(arr["t"], arr["p_lz"], w2).mean
    q = mandel_q(init_cat(CatSpec(1.0, theta), 2))
    rwa = rwa_final_probability(1.0, theta, gamma, v)
    print(f" {name:5s} {q:+.3f}   {p1:.4f}    {p2:.4f}    {rwa:.4f}")
