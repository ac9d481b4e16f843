"""Pointwise quadratic identities for the curvature R = R1 + kappa * R0.

All sums over an orthonormal basis use the standard basis of R^{4m}.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .curvature import build_r0, evaluate
from .qstruct import AdaptedFrame, QuaternionicStructure, adapted_frame


@dataclass
class IdentityReport:
    name: str
    max_residual: float
    samples: int
    inputs_hash: str
    tol: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.tol is None or self.max_residual <= self.tol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "max_residual": self.max_residual,
            "samples": self.samples,
            "inputs_hash": self.inputs_hash,
            "tol": self.tol,
            "passed": self.passed,
            "details": self.details,
        }


def inputs_hash(name: str, seed) -> str:
    return hashlib.sha256(f"{name}:{seed}".encode()).hexdigest()[:16]


def four_trace(R1: np.ndarray, Q: QuaternionicStructure, Y, V, W) -> float:
    """R1(Y,V,W,V) + R1(Y,IV,W,IV) + R1(Y,JV,W,JV) + R1(Y,KV,W,KV)."""
    total = evaluate(R1, Y, V, W, V)
    for A in Q.ops:
        AV = A @ V
        total += evaluate(R1, Y, AV, W, AV)
    return total


def four_trace_batch(R1: np.ndarray, Q: QuaternionicStructure, Y, V, W) -> np.ndarray:
    """Vectorized four_trace over rows of Y, V, W."""
    total = np.zeros(Y.shape[0])
    for A in (np.eye(Q.n),) + Q.ops:
        AV = V @ A.T
        total += np.einsum("abcd,pa,pb,pc,pd->p", R1, Y, AV, W, AV, optimize=True)
    return total


def _slot3(T, a, b, c):
    """The vector T(a, b, c, .)."""
    return ((T.transpose(3, 0, 1, 2) @ c) @ b) @ a


def _slot1(T, b, c, d):
    """The vector T(., b, c, d)."""
    return ((T @ d) @ c) @ b


def t_form(A: np.ndarray, B: np.ndarray, V, X, Y, Z, W) -> float:
    """The five-sum T expression with A in the first factor and B in the second."""
    return float(
        _slot3(A, X, Y, V) @ _slot3(B, Z, W, V)
        + _slot3(A, X, V, Z) @ _slot3(B, Y, V, W)
        - _slot3(A, X, V, W) @ _slot3(B, Y, V, Z)
        - _slot3(A, Y, V, Z) @ _slot3(B, X, V, W)
        + _slot3(A, Y, V, W) @ _slot3(B, X, V, Z)
    )


def s_form(A: np.ndarray, B: np.ndarray, V, X, Y, Z, W) -> float:
    """sum_l A(X,V,e_l,V) B(e_l,Y,Z,W) + A(Y,V,e_l,V) B(X,e_l,Z,W)."""
    # A(X, V, e_l, V) = -A(X, V, V, e_l) and B(X, e_l, Z, W) = -B(e_l, X, Z, W)
    return float(-_slot3(A, X, V, V) @ _slot1(B, Y, Z, W) + _slot3(A, Y, V, V) @ _slot1(B, X, Z, W))


def t_tensor(R0: np.ndarray, R1: np.ndarray, kappa: float, V, X, Y, Z, W):
    """(T^(0)_V, T^(1)_V, T_V) evaluated at (X, Y, Z, W)."""
    t0 = t_form(R0, R1, V, X, Y, Z, W)
    t1 = t_form(R1, R1, V, X, Y, Z, W)
    return t0, t1, t1 + kappa * t0


def s_tensor(R0: np.ndarray, R1: np.ndarray, kappa: float, V, X, Y, Z, W):
    """(S^(0)_V, S^(1)_V, S_V) evaluated at (X, Y, Z, W)."""
    s0 = s_form(R0, R1, V, X, Y, Z, W)
    s1 = s_form(R1, R1, V, X, Y, Z, W)
    return s0, s1, s1 + kappa * s0


def q_quadratic(T: np.ndarray) -> np.ndarray:
    """Quadratic reaction term Q(T) of the curvature Laplacian identity.

    Q(T)(X,Y,Z,W) = sum T(X,Y,e_p,e_q) T(Z,W,e_p,e_q)
                    + 2 sum T(X,e_p,Z,e_q) T(Y,e_p,W,e_q)
                    - 2 sum T(X,e_p,W,e_q) T(Y,e_p,Z,e_q)
    """
    n = T.shape[0]
    flat = T.reshape(n * n, n * n)
    first = (flat @ flat.T).reshape(n, n, n, n)
    # M[(x,z), (p,q)] = T(x,p,z,q)
    M = T.transpose(0, 2, 1, 3).reshape(n * n, n * n)
    G = (M @ M.T).reshape(n, n, n, n)  # G[x,z,y,w] = sum T(x,p,z,q) T(y,p,w,q)
    second = G.transpose(0, 2, 1, 3)
    third = G.transpose(0, 2, 3, 1)
    return first + 2.0 * second - 2.0 * third


def ts_defect(R: np.ndarray, R1: np.ndarray, V, X, Y, Z, W) -> float:
    """|T_V - S_V| at (X, Y, Z, W), with the full curvature R = kappa*R0 + R1 in the first factor."""
    return abs(t_form(R, R1, V, X, Y, Z, W) - s_form(R, R1, V, X, Y, Z, W))


def ts_defect_batch(R: np.ndarray, R1: np.ndarray, V, X, Y, Z, W) -> np.ndarray:
    """Vectorized ts_defect over rows of the argument arrays."""

    def s3(T, a, b, c):
        return np.einsum("abcd,pa,pb,pc->pd", T, a, b, c, optimize=True)

    def s1(T, b, c, d):
        return np.einsum("abcd,pb,pc,pd->pa", T, b, c, d, optimize=True)

    def dot(u, v):
        return np.einsum("pd,pd->p", u, v)

    t = (
        dot(s3(R, X, Y, V), s3(R1, Z, W, V))
        + dot(s3(R, X, V, Z), s3(R1, Y, V, W))
        - dot(s3(R, X, V, W), s3(R1, Y, V, Z))
        - dot(s3(R, Y, V, Z), s3(R1, X, V, W))
        + dot(s3(R, Y, V, W), s3(R1, X, V, Z))
    )
    s = -dot(s3(R, X, V, V), s1(R1, Y, Z, W)) + dot(s3(R, Y, V, V), s1(R1, X, Z, W))
    return np.abs(t - s)


@dataclass(frozen=True)
class BasisSums:
    """Frame sums of T^(1), S^(1), T^(0), S^(0) at (X, JX, X, JX).

    ``t1``, ``s1``, ``t0``, ``s0`` sum over w_a, J w_a for a = 3..2m. The
    ``*_full`` entries sum over the whole frame and the ``*_head`` entries
    over a = 1, 2 only.
    """

    t1: float
    s1: float
    t0: float
    s0: float
    t0_full: float
    t0_head: float
    s0_full: float
    s0_head: float
    r1_xjx: float


def basis_sums(R1: np.ndarray, Q: QuaternionicStructure, kappa: float, X, frame: AdaptedFrame | None = None) -> BasisSums:
    """Frame sums entering the bound on mu; Q.J is the structure used in (X, JX, X, JX)."""
    if frame is None:
        frame = adapted_frame(Q, X, R1)
    R0 = build_r0(Q)
    JX = Q.J @ X
    args = (X, JX, X, JX)
    vecs = frame.basis()
    t0 = np.array([t_form(R0, R1, v, *args) for v in vecs])
    s0 = np.array([s_form(R0, R1, v, *args) for v in vecs])
    tail = vecs[4:]
    t1 = sum(t_form(R1, R1, v, *args) for v in tail)
    s1 = sum(s_form(R1, R1, v, *args) for v in tail)
    return BasisSums(
        t1=float(t1),
        s1=float(s1),
        t0=float(t0[4:].sum()),
        s0=float(s0[4:].sum()),
        t0_full=float(t0.sum()),
        t0_head=float(t0[:4].sum()),
        s0_full=float(s0.sum()),
        s0_head=float(s0[:4].sum()),
        r1_xjx=evaluate(R1, *args),
    )


def key_inequality_check(R1: np.ndarray, Q: QuaternionicStructure, kappa: float, X, frame: AdaptedFrame | None = None):
    """(lhs, rhs) = ((2m-2) kappa R1(X,JX,X,JX), 4 sum_a R1(X,JX,w_a,Jw_a)^2)."""
    if frame is None:
        frame = adapted_frame(Q, X, R1)
    f = evaluate(R1, X, Q.J @ X, X, Q.J @ X)
    lhs = (2 * Q.m - 2) * kappa * f
    rhs = 4.0 * float(np.sum(frame.eigenvalues**2))
    return lhs, rhs
