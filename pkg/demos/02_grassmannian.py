"""
A model with nonzero R1
=======================

The complex Grassmannian of 2-planes in C^{m+2} is quaternionic-Kaehler,
and its curvature is not a multiple of R0. We build it from Lie brackets,
split off the R0 part and check the identities the remainder R1 obeys.
"""

import numpy as np

from qkcurv.curvature import hk_residual, ricci
from qkcurv.identities import four_trace_batch, q_quadratic, ts_defect_batch
from qkcurv.models import grassmannian_model

model = grassmannian_model(2)
dec = model.decomposition()
print(f"kappa = {dec.kappa:.12f}, max |R1| = {np.abs(dec.r1).max():.3f}")

# R1 is invariant under the whole Sp(1) action and has zero Ricci tensor
print("hyper-Kaehler residual:", hk_residual(dec.r1, model.Q))
print("max |ricci(R1)|:", np.abs(ricci(dec.r1)).max())

rng = np.random.default_rng(0)
Y, V, W = rng.standard_normal((3, 500, 8))
print("four-trace sum, worst of 500:", np.abs(four_trace_batch(dec.r1, model.Q, Y, V, W)).max())

# curvature is parallel on a symmetric space, so R1 is an eigentensor of Q
# and the two quadratic expressions T_V and S_V agree
print("max |Q(R1) - 8 kappa R1|:", np.abs(q_quadratic(dec.r1) - 8 * dec.kappa * dec.r1).max())
args = rng.standard_normal((5, 500, 8))
print("max |T_V - S_V|:", ts_defect_batch(model.R, dec.r1, *args).max())
