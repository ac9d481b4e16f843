"""Algebraic curvature tensors on R^{4m} with the standard metric.

Tensors are plain ``(n, n, n, n)`` float arrays. Sign convention:
T(X, Y, X, Y) is the unnormalized sectional curvature, so the round
sphere and R0 have positive Ricci curvature with
``Ric(Y, W) = sum_l T(e_l, Y, e_l, W)``.
"""

from dataclasses import dataclass

import numpy as np

from .qstruct import QuaternionicStructure


class DecompositionError(ValueError):
    """Input curvature cannot be written as R1 + kappa * R0."""


class NotEinsteinError(DecompositionError):
    def __init__(self, anisotropy: float):
        self.anisotropy = anisotropy
        super().__init__(f"Ricci tensor is not a multiple of the metric (anisotropy {anisotropy:.3e})")


class ProjectionError(RuntimeError):
    def __init__(self, iterations: int, residuals: dict):
        self.iterations = iterations
        self.residuals = residuals
        super().__init__(f"projection did not converge in {iterations} iterations; last residuals {residuals}")


@dataclass(frozen=True)
class QKDecomposition:
    kappa: float
    r1: np.ndarray

    def reconstruct(self, r0: np.ndarray) -> np.ndarray:
        return self.kappa * r0 + self.r1

    def scaled(self, c: float) -> "QKDecomposition":
        return QKDecomposition(c * self.kappa, c * self.r1)


def evaluate(T: np.ndarray, X, Y, Z, W) -> float:
    """T(X, Y, Z, W) for vectors X, Y, Z, W."""
    return float(((T @ W) @ Z) @ Y @ X)


def build_r0(Q: QuaternionicStructure) -> np.ndarray:
    n = Q.n
    g = np.eye(n)
    four_r0 = np.einsum("xz,yw->xyzw", g, g) - np.einsum("xw,yz->xyzw", g, g)
    for A in Q.ops:
        # B[x, y] = g(A e_x, e_y)
        B = A.T
        four_r0 += (
            2.0 * np.einsum("xy,zw->xyzw", B, B)
            + np.einsum("xz,yw->xyzw", B, B)
            - np.einsum("xw,yz->xyzw", B, B)
        )
    return four_r0 / 4.0


def symmetry_residual(T: np.ndarray) -> float:
    a = np.abs(T + T.transpose(1, 0, 2, 3)).max()
    b = np.abs(T + T.transpose(0, 1, 3, 2)).max()
    c = np.abs(T - T.transpose(2, 3, 0, 1)).max()
    return float(max(a, b, c))


def bianchi_sum(T: np.ndarray) -> np.ndarray:
    # entry [x,y,z,w] = T(x,y,z,w) + T(y,z,x,w) + T(z,x,y,w)
    return T + np.einsum("yzxw->xyzw", T) + np.einsum("zxyw->xyzw", T)


def bianchi_residual(T: np.ndarray) -> float:
    return float(np.abs(bianchi_sum(T)).max())


def act_last_pair(T: np.ndarray, A: np.ndarray) -> np.ndarray:
    """The tensor (X, Y, Z, W) -> T(X, Y, AZ, AW)."""
    return np.einsum("xyab,az,bw->xyzw", T, A, A, optimize=True)


def hk_residual(T: np.ndarray, Q: QuaternionicStructure) -> float:
    return float(max(np.abs(T - act_last_pair(T, A)).max() for A in Q.ops))


def ricci(T: np.ndarray) -> np.ndarray:
    return np.einsum("lylw->yw", T)


def scalar_curv(T: np.ndarray) -> float:
    return float(np.trace(ricci(T)))


def decompose(R: np.ndarray, Q: QuaternionicStructure, *, einstein_tol: float = 1e-8, check_tol: float = 1e-10) -> QKDecomposition:
    """Split R = R1 + kappa * R0 with kappa read off the scalar curvature."""
    n = Q.n
    scale = max(1.0, float(np.abs(R).max()))
    ric = ricci(R)
    scal = float(np.trace(ric))
    anisotropy = float(np.abs(ric - (scal / n) * np.eye(n)).max())
    if anisotropy > einstein_tol * scale:
        raise NotEinsteinError(anisotropy)
    kappa = scal / (n * (Q.m + 2))
    if kappa <= 0:
        raise DecompositionError(f"scalar curvature must be positive (kappa = {kappa:.3e})")
    r0 = build_r0(Q)
    r1 = R - kappa * r0

    res = {
        "ricci_r1": float(np.abs(ricci(r1)).max()),
        "hk_r1": hk_residual(r1, Q),
        "roundtrip": float(np.abs(kappa * r0 + r1 - R).max()),
    }
    bad = {k: v for k, v in res.items() if v > check_tol * scale}
    if bad:
        raise DecompositionError(f"decomposition invariants violated: {bad}")
    return QKDecomposition(kappa, r1)


def _sym_project(T: np.ndarray) -> np.ndarray:
    # average over the order-8 group generated by the two antisymmetries and pair exchange
    S = T - T.transpose(1, 0, 2, 3)
    S = S - S.transpose(0, 1, 3, 2)
    S = S + S.transpose(2, 3, 0, 1)
    return S / 8.0


def _alt4(T: np.ndarray) -> np.ndarray:
    """Total antisymmetrization over all four slots."""
    from itertools import permutations

    out = np.zeros_like(T)
    for perm in permutations(range(4)):
        sign = np.linalg.det(np.eye(4)[list(perm)])
        out += sign * T.transpose(perm)
    return out / 24.0


def _q8_average(T: np.ndarray, Q: QuaternionicStructure) -> np.ndarray:
    out = T.copy()
    for A in Q.ops:
        out += act_last_pair(T, A)
    return out / 4.0


def project_hk(T: np.ndarray, Q: QuaternionicStructure, tol: float = 1e-12, *, max_iter: int = 10_000) -> np.ndarray:
    """Project a rank-4 array onto the hyper-Kaehler algebraic curvature tensors.

    Cyclic alternating orthogonal projections onto (a) tensors with the
    antisymmetries and pair symmetry, (b) tensors with vanishing total
    antisymmetrization (first Bianchi, given (a)), and (c) tensors fixed
    by T -> T(., ., A., A.) for A in {I, J, K}. Stops once successive
    iterates move by less than ``tol`` in max norm.
    """
    cur = np.asarray(T, dtype=float)
    for it in range(max_iter):
        nxt = _sym_project(cur)
        nxt = nxt - _alt4(nxt)
        nxt = _q8_average(nxt, Q)
        step = float(np.abs(nxt - cur).max())
        cur = nxt
        if step < tol:
            # the last step was the Q8 average; finish in the symmetric subspace
            out = _sym_project(cur)
            return out - _alt4(out)
    raise ProjectionError(
        max_iter,
        {
            "symmetry": symmetry_residual(cur),
            "bianchi": bianchi_residual(cur),
            "hk": hk_residual(cur, Q),
        },
    )


def random_r1(Q: QuaternionicStructure, seed: int, scale: float = 1.0, *, tol: float = 1e-12) -> np.ndarray:
    """Seeded random tensor with all the symmetries of R1, max entry ``scale``."""
    n = Q.n
    if scale == 0:
        return np.zeros((n, n, n, n))
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n, n, n))
    T = project_hk(G, Q, tol)
    return T * (scale / np.abs(T).max())
