"""Curvature algebra of quaternionic-Kaehler manifolds at a point."""

from .curvature import (
    DecompositionError,
    NotEinsteinError,
    ProjectionError,
    QKDecomposition,
    build_r0,
    decompose,
    project_hk,
    random_r1,
    ricci,
)
from .identities import IdentityReport, basis_sums, four_trace, key_inequality_check, q_quadratic, ts_defect
from .models import ModelSpace, grassmannian_model, hp_model, make_model, model_suite
from .mu_solver import MuOptions, MuReport, estimate_mu, grad_f, maximizer_conditions, phi
from .qstruct import QuaternionicStructure, adapted_frame, rotate_frame, standard_structure

__version__ = "0.1.0"
