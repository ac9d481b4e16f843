"""Quaternionic-Kaehler symmetric spaces at a point.

``hp_model`` is quaternionic projective space (R1 = 0). ``grassmannian_model``
builds Gr_2(C^{m+2}) = SU(m+2)/S(U(2) x U(m)) from Lie brackets:
the tangent space is p = {[[0, -Z^*], [Z, 0]] : Z in C^{m x 2}} with
<A, B> = -Re tr(AB) / 2, and R(X, Y, Z, W) = <[[X, Y], Z], W>.
"""

from dataclasses import dataclass

import numpy as np

from .curvature import (
    QKDecomposition,
    bianchi_residual,
    build_r0,
    decompose,
    evaluate,
    hk_residual,
    ricci,
    symmetry_residual,
)
from .qstruct import QuaternionicStructure, sample_q_orthogonal_pairs, standard_structure, structure_residual


class ModelConstructionError(RuntimeError):
    def __init__(self, what: str, residual: float):
        self.what = what
        self.residual = residual
        super().__init__(f"model construction failed: {what} residual {residual:.3e}")


@dataclass(frozen=True)
class ModelSpace:
    name: str
    m: int
    R: np.ndarray
    Q: QuaternionicStructure
    kappa: float

    @property
    def n(self) -> int:
        return 4 * self.m

    def decomposition(self) -> QKDecomposition:
        return decompose(self.R, self.Q)


def _check_model(model: ModelSpace, *, samples: int = 256, seed: int = 0) -> ModelSpace:
    R, Q, kappa = model.R, model.Q, model.kappa
    checks = {
        "structure": (structure_residual(Q), 1e-10),
        "symmetry": (symmetry_residual(R), 1e-11),
        "bianchi": (bianchi_residual(R), 1e-11),
        "einstein": (float(np.abs(ricci(R) - (model.m + 2) * kappa * np.eye(model.n)).max()), 1e-10),
    }
    for what, (res, tol) in checks.items():
        if res > tol:
            raise ModelConstructionError(what, res)
    dec = decompose(R, Q)
    if hk_residual(dec.r1, Q) > 1e-10:
        raise ModelConstructionError("hk", hk_residual(dec.r1, Q))
    X, Y = sample_q_orthogonal_pairs(Q, samples, np.random.default_rng(seed))
    JY = Y @ Q.J.T
    sec = np.einsum("abcd,pa,pb,pc,pd->p", R, X, Y, X, Y, optimize=True)
    sec += np.einsum("abcd,pa,pb,pc,pd->p", R, X, JY, X, JY, optimize=True)
    if sec.min() < -1e-10:
        raise ModelConstructionError("sectional hypothesis", float(-sec.min()))
    return model


def hp_model(m: int, kappa: float = 1.0) -> ModelSpace:
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    Q = standard_structure(m)
    return _check_model(ModelSpace("hp", Q.m, kappa * build_r0(Q), Q, float(kappa)))


def _tangent_basis(m: int) -> np.ndarray:
    """Orthonormal basis of p for <A, B> = -Re tr(AB) / 2, shape (4m, m+2, m+2).

    Ordering: for each row r of Z, the quaternion-like block
    (E_r0, i E_r0, E_r1, i E_r1) where E_rs has a single 1 in Z[r, s].
    """
    N = m + 2
    basis = []
    for r in range(m):
        for s in range(2):
            for phase in (1.0, 1j):
                A = np.zeros((N, N), complex)
                A[2 + r, s] = phase
                A[s, 2 + r] = -np.conj(phase)
                basis.append(A)
    return np.array(basis)


def _inner(A, B) -> np.ndarray:
    return -0.5 * np.einsum("...ij,...ji->...", A, B).real


def _bracket(A, B):
    return A @ B - B @ A


def _coords(basis: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Coordinates of elements of p in the orthonormal basis; A has shape (..., N, N)."""
    return -0.5 * np.einsum("kij,...ji->...k", basis, A).real


def _isotropy_action(basis: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Matrix of ad(xi) restricted to p, in the orthonormal basis."""
    images = _bracket(xi[None], basis)
    return _coords(basis, images).T


def grassmannian_model(m: int) -> ModelSpace:
    if int(m) != m or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m!r}")
    m = int(m)
    N = m + 2
    E = _tangent_basis(m)
    n = 4 * m
    gram = _inner(E[:, None], E[None, :])
    if np.abs(gram - np.eye(n)).max() > 1e-12:
        raise ModelConstructionError("tangent basis", float(np.abs(gram - np.eye(n)).max()))

    C = _bracket(E[:, None], E[None, :])  # [E_a, E_b] in k
    CC = np.einsum("abij,cjk->abcik", C, E) - np.einsum("cij,abjk->abcik", E, C)
    R = _coords(E, CC)  # R[a,b,c,d] = <[[E_a,E_b],E_c],E_d>
    if np.trace(ricci(R)) < 0:
        R = -R

    # su(2) factor of the isotropy algebra acting on p; -i*sigma_k satisfy xi_1 xi_2 = xi_3
    sigma = [
        np.array([[0, 1], [1, 0]], complex),
        np.array([[0, -1j], [1j, 0]]),
        np.array([[1, 0], [0, -1]], complex),
    ]
    ops = []
    for s in sigma:
        xi = np.zeros((N, N), complex)
        xi[:2, :2] = -1j * s
        A = _isotropy_action(E, xi)
        sq = -np.trace(A @ A) / n
        if sq <= 0:
            raise ModelConstructionError("isotropy scaling", float(sq))
        ops.append(A / np.sqrt(sq))
    Q = QuaternionicStructure(m, *ops)
    res = structure_residual(Q)
    if res > 1e-10:
        raise ModelConstructionError("quaternionic structure", res)

    # rescale the metric so that kappa = 1
    kappa = float(np.trace(ricci(R))) / (n * (m + 2))
    R = R / kappa
    return _check_model(ModelSpace("gr2c", m, R, Q, 1.0))


def isotropy_rotation(m: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal map of p induced by exp of a random element of s(u(2) + u(m))."""
    from scipy.linalg import expm

    N = m + 2
    H = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    xi = np.zeros((N, N), complex)
    xi[:2, :2] = (H[:2, :2] - H[:2, :2].conj().T) / 2
    xi[2:, 2:] = (H[2:, 2:] - H[2:, 2:].conj().T) / 2
    xi -= np.trace(xi) / N * np.eye(N)
    g = expm(xi)
    E = _tangent_basis(m)
    images = g[None] @ E @ g.conj().T[None]
    return _coords(E, images).T


def make_model(name: str, m: int, kappa: float = 1.0) -> ModelSpace:
    if name == "hp":
        return hp_model(m, kappa)
    if name == "gr2c":
        model = grassmannian_model(m)
        if kappa != 1.0:
            if kappa <= 0:
                raise ValueError("kappa must be positive")
            model = ModelSpace(model.name, model.m, kappa * model.R, model.Q, float(kappa))
        return model
    raise ValueError(f"unknown model {name!r}; expected 'hp' or 'gr2c'")


def sectional_pair_sum(R: np.ndarray, X, Y, J) -> float:
    """R(X,Y,X,Y) + R(X,JY,X,JY)."""
    JY = J @ Y
    return evaluate(R, X, Y, X, Y) + evaluate(R, X, JY, X, JY)


def model_suite(model: ModelSpace, tol: float, seed: int, **kwargs) -> list:
    """Run every identity and inequality check against ``model``; see suite.model_suite."""
    from .suite import model_suite as run

    return run(model, tol, seed, **kwargs)
