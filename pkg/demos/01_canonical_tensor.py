"""
The canonical curvature tensor R0
=================================

Quaternionic projective space has the simplest curvature of any
quaternionic-Kaehler manifold. At a point it is the tensor R0, built only
from the metric and the three complex structures I, J, K.
"""

import numpy as np

from qkcurv.curvature import build_r0, evaluate, ricci
from qkcurv.identities import q_quadratic
from qkcurv.qstruct import sample_q_orthogonal_pair, standard_structure

# R^8 viewed as two quaternionic coordinates, with I, J, K acting by left
# multiplication on each block of four
Q = standard_structure(2)
print("I J K + Id vanishes:", np.abs(Q.I @ Q.J @ Q.K + np.eye(8)).max() == 0)

R0 = build_r0(Q)

# sectional curvature is 1 on quaternionic lines and 1/4 across them
X, Y = sample_q_orthogonal_pair(Q, seed=1)
print("R0(X, IX, X, IX) =", evaluate(R0, X, Q.I @ X, X, Q.I @ X))
print("R0(X, Y, X, Y)   =", evaluate(R0, X, Y, X, Y))

# the Ricci tensor is (m + 2) times the metric
print("diag of ricci(R0):", np.diag(ricci(R0)))

# and R0 is an eigentensor of the quadratic reaction term
print("max |Q(R0) - 8 R0| =", np.abs(q_quadratic(R0) - 8 * R0).max())
