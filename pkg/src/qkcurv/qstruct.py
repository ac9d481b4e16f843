"""Quaternionic linear algebra on R^{4m}.

The metric is the standard inner product; R^{4m} is identified with H^m
using (1, i, j, k) blocks, and I, J, K act by left multiplication.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuaternionicStructure:
    m: int
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray

    @property
    def n(self) -> int:
        return 4 * self.m

    @property
    def ops(self) -> tuple:
        return (self.I, self.J, self.K)

    def combine(self, coeffs) -> np.ndarray:
        """Return a*I + b*J + c*K."""
        a, b, c = coeffs
        return a * self.I + b * self.J + c * self.K


@dataclass(frozen=True)
class AdaptedFrame:
    """Orthonormal basis {w_1, J w_1, ..., w_2m, J w_2m} with w_1 = X, w_2 = IX.

    ``w`` has shape (2m, 4m); ``eigenvalues`` holds R1(X,JX,w_a,Jw_a)
    for a = 3..2m (zero-based rows 2..2m-1 of ``w``).
    """

    w: np.ndarray
    Jw: np.ndarray
    eigenvalues: np.ndarray

    def basis(self) -> np.ndarray:
        """All 4m frame vectors as rows, interleaved w_a, J w_a."""
        out = np.empty((2 * self.w.shape[0], self.w.shape[1]))
        out[0::2] = self.w
        out[1::2] = self.Jw
        return out


# left multiplication by i, j, k on a single quaternion (basis 1, i, j, k)
_LEFT_I = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float)
_LEFT_J = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], float)
_LEFT_K = np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], float)


def standard_structure(m: int) -> QuaternionicStructure:
    if int(m) != m or m < 2:
        raise ValueError(f"quaternionic dimension m must be an integer >= 2, got {m!r}")
    m = int(m)
    eye = np.eye(m)
    return QuaternionicStructure(m, np.kron(eye, _LEFT_I), np.kron(eye, _LEFT_J), np.kron(eye, _LEFT_K))


def structure_residual(Q: QuaternionicStructure) -> float:
    n = Q.I.shape[0]
    eye = np.eye(n)
    terms = [Q.I @ Q.I + eye, Q.J @ Q.J + eye, Q.K @ Q.K + eye, Q.I @ Q.J @ Q.K + eye]
    terms += [A.T @ A - eye for A in Q.ops]
    return float(max(np.abs(t).max() for t in terms))


def rotate_frame(Q: QuaternionicStructure, a: float, b: float, c: float) -> QuaternionicStructure:
    """Structure triple (I', J', K') with J' = aI + bJ + cK.

    The input direction is normalized. I' and K' come from a fixed
    cross-product completion so the result is a deterministic function of
    (a, b, c).
    """
    u = np.array([a, b, c], dtype=float)
    norm = np.linalg.norm(u)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("rotation direction (a, b, c) must be a nonzero finite vector")
    u = u / norm
    v = np.cross(u, [0.0, 0.0, 1.0])
    vn = np.linalg.norm(v)
    if vn > 1e-6:
        v = v / vn
    else:
        v = np.array([1.0, 0.0, 0.0])
        v = v - (v @ u) * u
        v /= np.linalg.norm(v)
    # (v, u, w) must be right-handed so that I'J' = K'
    w = np.cross(v, u)
    return QuaternionicStructure(Q.m, Q.combine(v), Q.combine(u), Q.combine(w))


def _quaternionic_span(Q: QuaternionicStructure, X: np.ndarray) -> np.ndarray:
    return np.stack([X, Q.I @ X, Q.J @ X, Q.K @ X])


def sample_q_orthogonal_pair(Q: QuaternionicStructure, seed: int, *, max_draws: int = 100):
    """Random unit X and unit Y orthogonal to X, IX, JX, KX.

    Deterministic for a fixed seed. A degenerate draw is retried on the
    next child stream of the seed.
    """
    if Q.m < 2:
        raise ValueError("a quaternionically orthogonal pair needs m >= 2")
    ss = np.random.SeedSequence(seed)
    for child in ss.spawn(max_draws):
        rng = np.random.default_rng(child)
        X = rng.standard_normal(Q.n)
        X /= np.linalg.norm(X)
        Y = rng.standard_normal(Q.n)
        span = _quaternionic_span(Q, X)
        Y = Y - span.T @ (span @ Y)
        Y = Y - span.T @ (span @ Y)
        ny = np.linalg.norm(Y)
        if ny > 1e-8:
            return X, Y / ny
    raise RuntimeError("could not draw a quaternionically orthogonal pair")


def sample_q_orthogonal_pairs(Q: QuaternionicStructure, count: int, rng: np.random.Generator):
    """Vectorized variant: arrays X, Y of shape (count, 4m)."""
    X = rng.standard_normal((count, Q.n))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    Y = rng.standard_normal((count, Q.n))
    span = np.stack([X] + [X @ A.T for A in Q.ops], axis=1)  # (count, 4, n)
    for _ in range(2):
        Y = Y - np.einsum("pk,pkn->pn", np.einsum("pkn,pn->pk", span, Y), span)
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    return X, Y


def _j_adapted_basis(J: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Orthonormal h_1..h_r with {h_k, J h_k} an orthonormal basis of range(P).

    P is the orthogonal projector onto a J-invariant subspace.
    """
    n = P.shape[0]
    dim = int(round(np.trace(P)))
    found = []
    for e in np.eye(n):
        if 2 * len(found) >= dim:
            break
        h = P @ e
        for _ in range(2):
            for f in found:
                h = h - (f @ h) * f - ((J @ f) @ h) * (J @ f)
        nh = np.linalg.norm(h)
        if nh > 1e-8:
            found.append(h / nh)
    return np.array(found).reshape(-1, n)


def adapted_frame(Q: QuaternionicStructure, X: np.ndarray, R1: np.ndarray, *, hk_tol: float = 1e-8) -> AdaptedFrame:
    """Frame diagonalizing the 2-form R1(X, JX, ., .) on the complement of the quaternionic line of X.

    On that complement H the symmetric operator S with <S Z, W> =
    R1(X, JX, Z, JW) commutes with J, so it is Hermitian for the complex
    structure J; its complex eigenvectors give w_3, ..., w_2m with
    R1(X, JX, w_a, J w_a) equal to the eigenvalues (sorted descending).
    """
    from .curvature import hk_residual

    X = np.asarray(X, dtype=float)
    scale = max(1.0, float(np.abs(R1).max()))
    res = hk_residual(R1, Q)
    if res > hk_tol * scale:
        raise ValueError(f"R1 is not hyper-Kaehler symmetric for this structure (residual {res:.3e})")
    if abs(np.linalg.norm(X) - 1.0) > 1e-10:
        raise ValueError("X must be a unit vector")

    I, J = Q.I, Q.J
    n = Q.n
    JX = J @ X
    omega = np.einsum("abcd,a,b->cd", R1, X, JX)
    S = omega @ J
    S = 0.5 * (S + S.T)

    span = _quaternionic_span(Q, X)
    P = np.eye(n) - span.T @ span
    H = _j_adapted_basis(J, P)
    JH = H @ J.T
    # complex coordinates: z = <h, v> + i <Jh, v>
    Hc = H + 1j * JH
    herm = 0.5 * (Hc @ S @ Hc.conj().T)
    herm = 0.5 * (herm + herm.conj().T)
    lam, vecs = np.linalg.eigh(herm)
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    vecs = vecs[:, order]
    # v = sum Re(z_k) h_k + Im(z_k) J h_k, with J acting as multiplication by i
    W = vecs.real.T @ H + vecs.imag.T @ JH

    w = np.vstack([X, I @ X, W])
    return AdaptedFrame(w=w, Jw=w @ J.T, eigenvalues=lam)


def frame_residuals(frame: AdaptedFrame, R1: np.ndarray, X: np.ndarray, J: np.ndarray) -> dict:
    """Gram residual and off-diagonal residual of R1(X, JX, w_a, .) on a >= 3."""
    B = frame.basis()
    gram = np.abs(B @ B.T - np.eye(B.shape[0])).max()
    omega = np.einsum("abcd,a,b->cd", R1, X, J @ X)
    W = frame.w[2:]
    JW = frame.Jw[2:]
    ww = W @ omega @ W.T
    wjw = W @ omega @ JW.T
    off = np.abs(ww - np.diag(np.diag(ww))).max(initial=0.0)
    off = max(off, np.abs(wjw - np.diag(np.diag(wjw))).max(initial=0.0))
    diag = np.abs(np.diag(wjw) - frame.eigenvalues).max(initial=0.0)
    return {"gram": float(gram), "offdiag": float(off), "diag": float(diag)}
