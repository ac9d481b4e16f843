"""Batteries of identity checks returning IdentityReport lists.

Residuals are normalized by tensor size (max entry) and sampled vectors are
unit vectors, so one tolerance works across curvature scales:

* linear identities in R1 divide by ||R1||, quadratic ones by ||R1||^2
  or ||R||^2;
* inequalities report how far the relevant minimum falls below zero.
"""

import numpy as np

from .curvature import (
    bianchi_residual,
    build_r0,
    decompose,
    hk_residual,
    ricci,
    symmetry_residual,
)
from .identities import IdentityReport, basis_sums, four_trace_batch, inputs_hash, q_quadratic, ts_defect_batch
from .mu_solver import MuOptions, estimate_mu, grad_f, inequality_sweep, maximizer_conditions
from .qstruct import QuaternionicStructure, adapted_frame, rotate_frame

GRADIENT_CHECK_TOL = 1e-6


def _norm(T) -> float:
    v = float(np.abs(T).max()) if T.size else 0.0
    return v if v > 0 else 1.0


def _unit_rows(A):
    return A / np.linalg.norm(A, axis=-1, keepdims=True)


def _report(name, residual, samples, seed, tol, **details):
    return IdentityReport(name, float(residual), int(samples), inputs_hash(name, seed), tol, details)


def tensor_suite(r1: np.ndarray, Q: QuaternionicStructure, tol: float, seed: int, *, samples: int = 1000, kappa: float = 1.0) -> list:
    """Checks that hold for every tensor with the symmetries of R1."""
    rng = np.random.default_rng(seed)
    s = _norm(r1)
    n = Q.n
    reports = [
        _report("symmetry", symmetry_residual(r1) / s, 1, seed, tol),
        _report("bianchi", bianchi_residual(r1) / s, 1, seed, tol),
        _report("hk_symmetry", hk_residual(r1, Q) / s, 1, seed, tol),
        _report("ricci_r1_zero", np.abs(ricci(r1)).max() / s, 1, seed, tol),
    ]
    Y, V, W = _unit_rows(rng.standard_normal((3, samples, n)))
    reports.append(_report("four_trace", np.abs(four_trace_batch(r1, Q, Y, V, W)).max() / s, samples, seed, tol))

    hk = hk_residual(r1, Q) / s
    if hk > 1e-8:
        # the adapted frame only exists for hyper-Kaehler symmetric tensors
        reports.append(_report("basis_sums", hk, 0, seed, tol, skipped="tensor is not hyper-Kaehler symmetric"))
        return reports

    worst = {"s1": 0.0, "t0": 0.0, "s0": 0.0, "t0_head": 0.0, "s0_full": 0.0, "s0_head": 0.0}
    count = 8
    for _ in range(count):
        X = rng.standard_normal(n)
        X /= np.linalg.norm(X)
        u = rng.standard_normal(3)
        Qr = rotate_frame(Q, *u)
        b = basis_sums(r1, Qr, kappa, X, adapted_frame(Qr, X, r1))
        m = Q.m
        worst["s1"] = max(worst["s1"], abs(b.s1) / s**2)
        worst["t0"] = max(worst["t0"], abs(b.t0) / (s * (m + 2)))
        worst["t0_head"] = max(worst["t0_head"], abs(b.t0_head) / (s * (m + 2)))
        worst["s0"] = max(worst["s0"], abs(b.s0 - (2 * m - 2) * b.r1_xjx) / s)
        worst["s0_full"] = max(worst["s0_full"], abs(b.s0_full - (2 * m + 4) * b.r1_xjx) / s)
        worst["s0_head"] = max(worst["s0_head"], abs(b.s0_head - 6 * b.r1_xjx) / s)
    reports.append(_report("basis_sums", max(worst.values()), count, seed, tol, **worst))
    return reports


def model_suite(model, tol: float, seed: int, *, samples: int = 1000, sweep_samples: int = 10_000, restarts: int = 64) -> list:
    """Every identity and inequality check against a symmetric-space model."""
    R, Q = model.R, model.Q
    n, m = model.n, model.m
    rng = np.random.default_rng([seed, 1])
    sR = _norm(R)
    reports = [
        _report("model_symmetry", symmetry_residual(R) / sR, 1, seed, tol),
        _report("model_bianchi", bianchi_residual(R) / sR, 1, seed, tol),
        _report("einstein", np.abs(ricci(R) - (m + 2) * model.kappa * np.eye(n)).max() / sR, 1, seed, tol),
    ]
    dec = decompose(R, Q)
    r0 = build_r0(Q)
    kappa, r1 = dec.kappa, dec.r1
    reports.append(_report("decomposition_roundtrip", np.abs(dec.reconstruct(r0) - R).max() / sR, 1, seed, tol, kappa=kappa))
    reports.append(_report("r0_ricci", np.abs(ricci(r0) - (m + 2) * np.eye(n)).max(), 1, seed, tol))
    reports.append(_report("q_r0", np.abs(q_quadratic(r0) - (2 * m + 4) * r0).max(), 1, seed, tol))
    reports.append(_report("q_r1_parallel", np.abs(q_quadratic(r1) - (2 * m + 4) * kappa * r1).max() / sR**2, 1, seed, tol))
    reports += tensor_suite(r1, Q, tol, seed, samples=samples, kappa=kappa)

    V, X, Y, Z, W = _unit_rows(rng.standard_normal((5, samples, n)))
    reports.append(_report("ts_defect", ts_defect_batch(R, r1, V, X, Y, Z, W).max() / sR**2, samples, seed, tol))

    sweep = inequality_sweep(model, sweep_samples, seed)
    sweep.tol = tol
    reports.append(sweep)

    mu = estimate_mu(dec, Q, MuOptions(restarts=restarts, seed=seed))
    reports.append(
        _report(
            "mu_dichotomy",
            min(abs(mu.mu_hat), abs(mu.mu_hat - kappa)) / kappa,
            mu.restarts,
            seed,
            tol,
            mu_hat=mu.mu_hat,
            verdict=mu.dichotomy_verdict,
            grid_oracle_value=mu.grid_oracle_value,
        )
    )
    reports.append(
        _report("mu_oracle_consistency", max(0.0, mu.grid_oracle_value - mu.mu_hat), mu.restarts, seed, tol)
    )
    cond = maximizer_conditions(dec, Q, mu, tol=1e-6)
    reports.append(_report("maximizer_first_variation", cond.first_variation, 1, seed, tol))
    reports.append(
        _report(
            "maximizer_frame_bounds",
            max(0.0, cond.bound_mu, cond.bound_kappa) / kappa,
            1,
            seed,
            tol,
            bound_mu=cond.bound_mu,
            bound_kappa=cond.bound_kappa,
        )
    )
    reports.append(
        _report("key_inequality", max(0.0, cond.key_lhs - cond.key_rhs) / kappa**2, 1, seed, tol, lhs=cond.key_lhs, rhs=cond.key_rhs)
    )
    Qr = rotate_frame(Q, *mu.argmax_u)
    b = basis_sums(r1, Qr, kappa, mu.argmax_x)
    reports.append(
        _report("basis_sums_at_maximizer", abs(b.s0 - (2 * m - 2) * mu.mu_hat) / _norm(r1), 1, seed, tol, s0=b.s0, s1=b.s1, t0=b.t0)
    )
    reports.append(gradient_check(dec, Q, 20, seed))
    return reports


def gradient_check(dec, Q: QuaternionicStructure, points: int, seed: int, *, h: float = 1e-5) -> IdentityReport:
    """Relative error of grad_f against central differences along tangent curves.

    Uses a fixed threshold since it compares against an O(h^2) approximation.
    """
    rng = np.random.default_rng([seed, 2])
    worst = 0.0
    ops = Q.ops
    for _ in range(points):
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        X = rng.standard_normal(Q.n)
        X /= np.linalg.norm(X)
        gu, gX = grad_f(dec, Q, *u, X)
        gnorm = np.sqrt(gu @ gu + gX @ gX)
        if gnorm < 1e-8:
            continue
        fd = np.empty(3 + Q.n)
        for k, (du, dX) in enumerate(_tangent_directions(u, X)):
            plus = _f_curve(dec.r1, ops, u, X, du, dX, h)
            minus = _f_curve(dec.r1, ops, u, X, du, dX, -h)
            fd[k] = (plus - minus) / (2 * h)
        exact = np.concatenate([gu, gX])
        worst = max(worst, float(np.linalg.norm(fd - exact) / np.linalg.norm(exact)))
    return IdentityReport("gradient_check", worst, points, inputs_hash("gradient_check", seed), GRADIENT_CHECK_TOL)


def _tangent_directions(u, X):
    """Ambient coordinate directions projected to the tangent spaces (yields tangent projections of gradients)."""
    k = len(u)
    for i in range(k):
        e = np.zeros(k)
        e[i] = 1.0
        yield e - (e @ u) * u, np.zeros_like(X)
    for i in range(len(X)):
        e = np.zeros(len(X))
        e[i] = 1.0
        yield np.zeros(k), e - (e @ X) * X


def _f_curve(R1, ops, u, X, du, dX, t):
    from .mu_solver import _f

    u2 = u + t * du
    X2 = X + t * dX
    return _f(R1, ops, u2 / np.linalg.norm(u2), X2 / np.linalg.norm(X2))
