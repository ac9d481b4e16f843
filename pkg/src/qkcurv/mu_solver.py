"""Search for mu = sup R1(X, JX, X, JX) over unit X and unit J = aI + bJ + cK.

The search space is S^2 x S^{4m-1}. The ascent is a projected gradient
method with Armijo backtracking and retraction by normalization. An
independent oracle (product grid followed by a derivative-free-gradient
scipy polish) bounds the result from below.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .curvature import QKDecomposition, evaluate
from .identities import IdentityReport, inputs_hash, key_inequality_check
from .qstruct import QuaternionicStructure, adapted_frame, rotate_frame, sample_q_orthogonal_pairs


@dataclass
class MuOptions:
    restarts: int = 64
    grid_sphere: int = 64
    grid_density: int = 512
    tol: float = 1e-10
    max_iter: int = 5000
    seed: int = 0
    oracle_polish: int = 4
    workers: int = 1


@dataclass
class MuReport:
    mu_hat: float
    argmax_u: np.ndarray
    argmax_x: np.ndarray
    restarts: int
    grid_raw_value: float
    grid_oracle_value: float
    first_order_residual: float
    dichotomy_verdict: str
    kappa: float
    trace: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "mu_hat": self.mu_hat,
            "kappa": self.kappa,
            "dichotomy_verdict": self.dichotomy_verdict,
            "argmax": {"abc": self.argmax_u.tolist(), "X": self.argmax_x.tolist()},
            "restarts": self.restarts,
            "grid_raw_value": self.grid_raw_value,
            "grid_oracle_value": self.grid_oracle_value,
            "first_order_residual": self.first_order_residual,
            "trace": self.trace,
        }


class NotCriticalError(ValueError):
    pass


def _unit(v):
    return v / np.linalg.norm(v)


def _f(R1, ops, u, X) -> float:
    JX = sum(c * (A @ X) for c, A in zip(u, ops))
    return evaluate(R1, X, JX, X, JX)


def _f_and_euclid_grad(R1, ops, u, X):
    A_u = sum(c * A for c, A in zip(u, ops))
    Y = A_u @ X
    v = ((R1.transpose(3, 0, 1, 2) @ X) @ Y) @ X  # R1(X, Y, X, .)
    f = float(v @ Y)
    gX = 2.0 * (((R1 @ Y) @ X) @ Y) + 2.0 * (A_u.T @ v)
    gu = np.array([2.0 * (v @ (A @ X)) for A in ops])
    return f, gu, gX


def phi(dec: QKDecomposition, Q: QuaternionicStructure, a: float, b: float, c: float, X) -> float:
    """kappa - R1(X, J'X, X, J'X) with J' = aI + bJ + cK."""
    return dec.kappa - _f(dec.r1, Q.ops, (a, b, c), np.asarray(X, dtype=float))


def grad_f(dec: QKDecomposition, Q: QuaternionicStructure, a: float, b: float, c: float, X):
    """Riemannian gradient of f = R1(X, J'X, X, J'X) on S^2 x S^{4m-1}."""
    u = np.array([a, b, c], dtype=float)
    X = np.asarray(X, dtype=float)
    _, gu, gX = _f_and_euclid_grad(dec.r1, Q.ops, u, X)
    return gu - (gu @ u) * u, gX - (gX @ X) * X


def _ascend(R1, ops, u, X, *, tol, max_iter, scale):
    """Projected gradient ascent; returns (f, u, X, gradient norm, iterations).

    Steps are chosen by Armijo backtracking while the predicted increase of
    f is above rounding level. Below it, f carries no information, so the
    last Armijo step is reused and a move is accepted when it reduces the
    gradient norm.
    """

    def tangent(u, X, gu, gX):
        gu = gu - (gu @ u) * u
        gX = gX - (gX @ X) * X
        return gu, gX, float(np.sqrt(gu @ gu + gX @ gX))

    def trial(s):
        u2 = _unit(u + s * gu)
        X2 = _unit(X + s * gX)
        f2, gu2, gX2 = _f_and_euclid_grad(R1, ops, u2, X2)
        return (u2, X2, f2) + tangent(u2, X2, gu2, gX2)

    u, X = _unit(u), _unit(X)
    f, gu, gX = _f_and_euclid_grad(R1, ops, u, X)
    gu, gX, gnorm = tangent(u, X, gu, gX)
    step = 1.0 / scale
    good_step = step
    noise = 64 * np.finfo(float).eps * scale
    for it in range(max_iter):
        if gnorm < tol * scale:
            return f, u, X, gnorm, it
        if 0.5 * good_step * gnorm**2 > noise:
            while True:
                cand = trial(step)
                if cand[2] >= f + 0.5 * step * gnorm**2:
                    good_step = step
                    break
                step *= 0.5
                if step * scale < 1e-14:
                    return f, u, X, gnorm, it
            u, X, f, gu, gX, gnorm = cand
            step *= 2.0
        else:
            s = good_step
            while True:
                cand = trial(s)
                if cand[5] < gnorm and cand[2] >= f - noise:
                    break
                s *= 0.5
                if s * scale < 1e-14:
                    return f, u, X, gnorm, it
            u, X, f, gu, gX, gnorm = cand
    return f, u, X, gnorm, max_iter


def fibonacci_sphere(k: int) -> np.ndarray:
    i = np.arange(k) + 0.5
    z = 1.0 - 2.0 * i / k
    r = np.sqrt(1.0 - z * z)
    theta = np.pi * (1.0 + np.sqrt(5.0)) * i
    return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=1)


def grid_values(R1, ops, U, Xs) -> np.ndarray:
    """f on the product grid, shape (len(U), len(Xs))."""
    out = np.empty((len(U), len(Xs)))
    # R1(X, ., X, .) per grid vector
    M = np.einsum("abcd,pa,pc->pbd", R1, Xs, Xs, optimize=True)
    AX = np.stack([Xs @ A.T for A in ops], axis=1)  # (P, 3, n)
    G = np.einsum("pkb,pbd,pld->pkl", AX, M, AX, optimize=True)  # (P, 3, 3)
    for i, u in enumerate(U):
        out[i] = np.einsum("k,pkl,l->p", u, G, u)
    return out


def _polish(R1, ops, u0, X0):
    """Independent local refinement: BFGS with finite-difference gradients on the homogeneous extension."""
    k = len(u0)

    def neg(z):
        u, X = z[:k], z[k:]
        return -_f(R1, ops, _unit(u), _unit(X))

    res = minimize(neg, np.concatenate([u0, X0]), method="BFGS", options={"gtol": 1e-9, "maxiter": 2000})
    return -float(res.fun)


def estimate_mu(dec: QKDecomposition, Q: QuaternionicStructure, opts: MuOptions | None = None) -> MuReport:
    opts = opts or MuOptions()
    R1 = dec.r1
    ops = Q.ops
    kappa = dec.kappa
    scale = float(np.abs(R1).max())

    if scale == 0.0:
        u = np.array([0.0, 1.0, 0.0])
        X = np.eye(Q.n)[0]
        return MuReport(0.0, u, X, opts.restarts, 0.0, 0.0, 0.0, _verdict(0.0, kappa), kappa, [0.0] * opts.restarts)

    # coarse oracle
    U = fibonacci_sphere(opts.grid_sphere)
    grid_rng = np.random.default_rng([opts.seed, 0x6D75])
    Xs = grid_rng.standard_normal((opts.grid_density, Q.n))
    Xs /= np.linalg.norm(Xs, axis=1, keepdims=True)
    vals = grid_values(R1, ops, U, Xs)
    order = np.argsort(-vals, axis=None, kind="stable")
    grid_raw = float(vals.flat[order[0]])
    tops = [np.unravel_index(idx, vals.shape) for idx in order]

    polished = [_polish(R1, ops, U[i], Xs[j]) for i, j in tops[: opts.oracle_polish]]
    oracle = max([grid_raw] + polished)

    # starts: the best grid points first, then seeded random draws
    n_grid = min(opts.restarts // 2, len(tops))
    starts = []
    for r in range(opts.restarts):
        if r < n_grid:
            i, j = tops[r]
            starts.append((U[i], Xs[j]))
        else:
            rng = np.random.default_rng(opts.seed + r)
            starts.append((_unit(rng.standard_normal(3)), _unit(rng.standard_normal(Q.n))))

    def run(start):
        return _ascend(R1, ops, *start, tol=opts.tol, max_iter=opts.max_iter, scale=scale)

    if opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as ex:
            results = list(ex.map(run, starts))
    else:
        results = [run(s) for s in starts]

    # values within rounding of the top are ties (the maximizer set is a
    # manifold); the earliest restart wins so the choice is stable
    top = max(res[0] for res in results)
    noise = 64 * np.finfo(float).eps * scale
    best = next(r for r, res in enumerate(results) if res[0] >= top - noise)
    f, u, X, gnorm, _ = results[best]
    return MuReport(
        mu_hat=float(f),
        argmax_u=u,
        argmax_x=X,
        restarts=opts.restarts,
        grid_raw_value=grid_raw,
        grid_oracle_value=float(oracle),
        first_order_residual=float(gnorm),
        dichotomy_verdict=_verdict(f, kappa),
        kappa=kappa,
        trace=[float(res[0]) for res in results],
    )


def _verdict(mu_hat: float, kappa: float, rel: float = 1e-6) -> str:
    if mu_hat < rel * kappa:
        return "zero"
    if abs(mu_hat - kappa) < rel * kappa:
        return "kappa"
    return "neither"


@dataclass
class MaximizerConditions:
    first_variation: float
    bound_mu: float
    bound_kappa: float
    key_lhs: float
    key_rhs: float
    frame_offdiag: float
    eigenvalues: np.ndarray

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["eigenvalues"] = self.eigenvalues.tolist()
        return d


def maximizer_conditions(dec: QKDecomposition, Q: QuaternionicStructure, report: MuReport, tol: float = 1e-6) -> MaximizerConditions:
    """First- and second-order conditions at the reported maximizer.

    ``first_variation`` is the largest |R1(X,JX,X,w_b)|, |R1(X,JX,X,Jw_b)|
    (b >= 2) and |R1(X,JX,IX,w_b)|, |R1(X,JX,IX,Jw_b)| (b >= 3), relative to
    the max entry of R1. ``bound_mu`` and ``bound_kappa`` are the largest
    2|lambda_a| - mu and 2|lambda_a| - kappa; both should be <= 0.
    """
    if report.first_order_residual >= tol:
        raise NotCriticalError(f"reported point is not critical (gradient norm {report.first_order_residual:.3e})")
    R1 = dec.r1
    X = report.argmax_x
    Qr = rotate_frame(Q, *report.argmax_u)
    J, I = Qr.J, Qr.I
    frame = adapted_frame(Qr, X, R1)
    JX, IX = J @ X, I @ X
    omega = np.einsum("abcd,a,b->cd", R1, X, JX)
    fv = max(
        np.abs(frame.w[1:] @ omega @ X).max(initial=0.0),
        np.abs(frame.Jw[1:] @ omega @ X).max(initial=0.0),
        np.abs(frame.w[2:] @ omega @ IX).max(initial=0.0),
        np.abs(frame.Jw[2:] @ omega @ IX).max(initial=0.0),
    )
    scale = max(float(np.abs(R1).max()), np.finfo(float).tiny)
    mu = report.mu_hat
    lam = frame.eigenvalues
    lhs, rhs = key_inequality_check(R1, Qr, dec.kappa, X, frame)
    W = frame.w[2:]
    ww = W @ omega @ W.T
    wjw = W @ omega @ frame.Jw[2:].T
    off = max(np.abs(ww - np.diag(np.diag(ww))).max(initial=0.0), np.abs(wjw - np.diag(np.diag(wjw))).max(initial=0.0))
    return MaximizerConditions(
        first_variation=float(fv) / scale if np.abs(R1).max() > 0 else 0.0,
        bound_mu=float((2 * np.abs(lam) - mu).max(initial=-mu)),
        bound_kappa=float((2 * np.abs(lam) - dec.kappa).max(initial=-dec.kappa)),
        key_lhs=float(lhs),
        key_rhs=float(rhs),
        frame_offdiag=float(off),
        eigenvalues=lam,
    )


def inequality_sweep(model, samples: int, seed: int, *, chunk: int = 1000) -> IdentityReport:
    """Minima of 2 R1(X,JX,Y,JY) + kappa and R(X,Y,X,Y) + R(X,JY,X,JY) over random admissible data.

    Each sample draws a unit structure J = aI + bJ + cK and a quaternionically
    orthogonal unit pair (X, Y). The reported residual is how far the
    smaller minimum falls below zero.
    """
    name = "inequality_sweep"
    if samples == 0:
        return IdentityReport(name, 0.0, 0, inputs_hash(name, seed), details={"min_curvature_inequality": None, "min_sectional_hypothesis": None})
    dec = model.decomposition()
    R, R1, Q, kappa = model.R, dec.r1, model.Q, dec.kappa
    rng = np.random.default_rng(seed)
    lo_a = np.inf
    lo_b = np.inf
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        U = rng.standard_normal((k, 3))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        X, Y = sample_q_orthogonal_pairs(Q, k, rng)
        JX = sum(U[:, [i]] * (X @ A.T) for i, A in enumerate(Q.ops))
        JY = sum(U[:, [i]] * (Y @ A.T) for i, A in enumerate(Q.ops))
        a = 2.0 * np.einsum("abcd,pa,pb,pc,pd->p", R1, X, JX, Y, JY, optimize=True) + kappa
        b = np.einsum("abcd,pa,pb,pc,pd->p", R, X, Y, X, Y, optimize=True)
        b += np.einsum("abcd,pa,pb,pc,pd->p", R, X, JY, X, JY, optimize=True)
        lo_a = min(lo_a, float(a.min()))
        lo_b = min(lo_b, float(b.min()))
        done += k
    return IdentityReport(
        name,
        max(0.0, -lo_a, -lo_b),
        samples,
        inputs_hash(name, seed),
        details={"min_curvature_inequality": lo_a, "min_sectional_hypothesis": lo_b},
    )
