"""
Searching for mu
================

mu is the largest value of R1(X, JX, X, JX) over unit vectors X and unit
complex structures J = aI + bJ + cK. It can only be 0 or kappa. We find it
by gradient ascent on S^2 x S^7 and look at the maximizer.
"""

import numpy as np

from qkcurv.models import grassmannian_model, hp_model
from qkcurv.mu_solver import MuOptions, estimate_mu, maximizer_conditions

for model in (hp_model(2), grassmannian_model(2)):
    dec = model.decomposition()
    rep = estimate_mu(dec, model.Q, MuOptions(restarts=32, seed=0))
    print(f"{model.name}: mu = {rep.mu_hat:.12f} ({rep.dichotomy_verdict}), grid oracle {rep.grid_oracle_value:.12f}")

# at the maximizer the adapted frame eigenvalues are bounded by mu / 2 and
# the key inequality is sharp on this model
cond = maximizer_conditions(dec, model.Q, rep)
print("frame eigenvalues:", np.round(cond.eigenvalues, 12))
print(f"(2m - 2) kappa mu = {cond.key_lhs:.6f} <= {cond.key_rhs:.6f}")

# the spread of restart values shows how many starts reach the top
trace = np.array(rep.trace)
print(f"{np.sum(trace > rep.mu_hat - 1e-9)} of {len(trace)} restarts reach mu")
