"""Acceptance criteria, one test per criterion.

Each check returns (passed, detail). Results are printed as one line per
criterion at the end of the pytest run, and also when this file is run as
a script: ``python3 tests/test_acceptance.py``.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from qkcurv.curvature import build_r0, evaluate, random_r1, ricci
from qkcurv.identities import basis_sums, four_trace_batch, q_quadratic, ts_defect_batch
from qkcurv.models import grassmannian_model, hp_model
from qkcurv.mu_solver import MuOptions, estimate_mu, grad_f, inequality_sweep, maximizer_conditions
from qkcurv.qstruct import adapted_frame, rotate_frame, sample_q_orthogonal_pair, standard_structure
from qkcurv.suite import _f_curve, _tangent_directions, gradient_check

RESULTS = {}

_MODELS = {}


def model(name, m):
    key = (name, m)
    if key not in _MODELS:
        _MODELS[key] = hp_model(m) if name == "hp" else grassmannian_model(m)
    return _MODELS[key]


def unit_rows(A):
    return A / np.linalg.norm(A, axis=-1, keepdims=True)


def record(number, title, passed, detail):
    RESULTS[number] = (title, bool(passed), detail)
    return passed


def r0_calibration():
    start = time.perf_counter()
    worst = 0.0
    for m in (2, 3):
        Q = standard_structure(m)
        R0 = build_r0(Q)
        for seed in range(100):
            X, Y = sample_q_orthogonal_pair(Q, seed)
            JY = Q.J @ Y
            worst = max(worst, abs(evaluate(R0, X, Y, X, Y) - 0.25), abs(evaluate(R0, X, JY, X, JY) - 0.25))
        worst = max(worst, float(np.abs(ricci(R0) - (m + 2) * np.eye(Q.n)).max()))
        worst = max(worst, float(np.abs(q_quadratic(R0) - (2 * m + 4) * R0).max()))
    elapsed = time.perf_counter() - start
    return worst < 1e-10 and elapsed < 5, f"max residual {worst:.2e}, {elapsed:.2f} s"


_PROJECTED = {}


def projected_tensors():
    """The seeded random admissible tensors used by criteria 2 and 3."""
    if not _PROJECTED:
        for m, count in ((2, 100), (3, 20)):
            Q = standard_structure(m)
            _PROJECTED[m] = (Q, [random_r1(Q, seed) for seed in range(count)])
    return _PROJECTED


def four_trace_criterion():
    start = time.perf_counter()
    worst = 0.0
    for m, (Q, tensors) in projected_tensors().items():
        for seed, r1 in enumerate(tensors):
            rng = np.random.default_rng([m, seed])
            Y, V, W = unit_rows(rng.standard_normal((3, 1000, Q.n)))
            worst = max(worst, float(np.abs(four_trace_batch(r1, Q, Y, V, W)).max() / np.abs(r1).max()))
    elapsed = time.perf_counter() - start
    return worst < 1e-10 and elapsed < 60, f"max |sum| / ||R1|| = {worst:.2e}, 120 tensors, {elapsed:.1f} s"


def ricci_flatness():
    worst = 0.0
    count = 0
    for Q, tensors in projected_tensors().values():
        for r1 in tensors:
            worst = max(worst, float(np.abs(ricci(r1)).max()))
            count += 1
    return worst < 1e-10, f"max ricci entry {worst:.2e} over {count} projections"


def basis_sum_criterion():
    start = time.perf_counter()
    worst = 0.0
    cases = []
    for m in (2, 3):
        Q = standard_structure(m)
        cases += [(Q, random_r1(Q, 100 + s)) for s in range(5)]
    gr = model("gr2c", 2)
    cases.append((gr.Q, gr.decomposition().r1))
    rng = np.random.default_rng(4)
    for Q, r1 in cases:
        s = np.abs(r1).max()
        for _ in range(4):
            Qr = rotate_frame(Q, *rng.standard_normal(3))
            X = unit_rows(rng.standard_normal(Q.n))
            b = basis_sums(r1, Qr, 1.0, X, adapted_frame(Qr, X, r1))
            worst = max(worst, abs(b.s1) / s**2, abs(b.t0) / s, abs(b.s0 - (2 * Q.m - 2) * b.r1_xjx) / s)
    elapsed = time.perf_counter() - start
    return worst < 1e-9 and elapsed < 30, f"max relative residual {worst:.2e}, {elapsed:.1f} s"


def symmetric_space_consistency():
    start = time.perf_counter()
    worst = 0.0
    for m in (2, 3):
        gr = model("gr2c", m)
        dec = gr.decomposition()
        norm2 = np.abs(gr.R).max() ** 2
        rng = np.random.default_rng(m)
        args = unit_rows(rng.standard_normal((5, 1000, gr.n)))
        worst = max(worst, float(ts_defect_batch(gr.R, dec.r1, *args).max() / norm2))
        worst = max(worst, float(np.abs(q_quadratic(dec.r1) - (2 * m + 4) * dec.kappa * dec.r1).max() / norm2))
    elapsed = time.perf_counter() - start
    return worst < 1e-9 and elapsed < 300, f"max residual / ||R||^2 = {worst:.2e}, {elapsed:.1f} s"


_MU = {}


def mu_report(name, m):
    if (name, m) not in _MU:
        mdl = model(name, m)
        dec = mdl.decomposition()
        _MU[(name, m)] = (dec, estimate_mu(dec, mdl.Q, MuOptions(restarts=64, seed=0)))
    return _MU[(name, m)]


def mu_dichotomy():
    start = time.perf_counter()
    ok = True
    parts = []
    for name, m, expected in (("hp", 2, "zero"), ("hp", 3, "zero"), ("gr2c", 2, "kappa"), ("gr2c", 3, "kappa")):
        dec, rep = mu_report(name, m)
        target = 0.0 if expected == "zero" else dec.kappa
        err = abs(rep.mu_hat - target)
        gap = abs(rep.grid_oracle_value - rep.mu_hat)
        ok &= rep.dichotomy_verdict == expected and err < 1e-6 * dec.kappa and gap < 1e-3 and rep.restarts == 64
        parts.append(f"{name}{m}: {rep.dichotomy_verdict} err {err:.1e} oracle gap {gap:.1e}")
    elapsed = time.perf_counter() - start
    return ok and elapsed < 600, "; ".join(parts) + f"; {elapsed:.1f} s"


def maximizer_criterion():
    gr = model("gr2c", 2)
    dec, rep = mu_report("gr2c", 2)
    cond = maximizer_conditions(dec, gr.Q, rep)
    bound = float((2 * np.abs(cond.eigenvalues)).max() - min(rep.mu_hat, dec.kappa))
    ok = cond.first_variation < 1e-6 and bound <= 1e-6 and cond.key_lhs <= cond.key_rhs
    return ok, f"first variation {cond.first_variation:.1e}, frame bound slack {bound:.1e}, key {cond.key_lhs:.6f} <= {cond.key_rhs:.6f}"


def inequality_criterion():
    lows = []
    for name in ("hp", "gr2c"):
        for m in (2, 3):
            rep = inequality_sweep(model(name, m), 10_000, 2024)
            lows.append(min(rep.details["min_curvature_inequality"], rep.details["min_sectional_hypothesis"]))
    return min(lows) >= -1e-9, f"smallest minimum {min(lows):.3e}"


def gradient_criterion():
    worst = 0.0
    for m in (2, 3):
        gr = model("gr2c", m)
        worst = max(worst, gradient_check(gr.decomposition(), gr.Q, 100, 9).max_residual)
    # on the quaternionic projective model R1 = 0, so both gradients must vanish exactly
    hp = model("hp", 2)
    dec = hp.decomposition()
    rng = np.random.default_rng(9)
    hp_worst = 0.0
    for _ in range(100):
        u = unit_rows(rng.standard_normal(3))
        X = unit_rows(rng.standard_normal(8))
        gu, gX = grad_f(dec, hp.Q, *u, X)
        fd = [(_f_curve(dec.r1, hp.Q.ops, u, X, du, dX, 1e-5) - _f_curve(dec.r1, hp.Q.ops, u, X, du, dX, -1e-5)) / 2e-5 for du, dX in _tangent_directions(u, X)]
        hp_worst = max(hp_worst, float(np.abs(np.concatenate([gu, gX])).max()), float(np.abs(fd).max()))
    return worst < 1e-6 and hp_worst == 0.0, f"gr2c relative error {worst:.2e}; hp gradients {hp_worst:.1e}"


def _cli(*argv, cwd):
    proc = subprocess.run([sys.executable, "-m", "qkcurv.cli", *map(str, argv)], capture_output=True, cwd=cwd)
    return proc.returncode, proc.stdout


def determinism_criterion(tmp):
    commands = [
        ("model", "hp", 2, "-o", "hp.json"),
        ("model", "gr2c", 2, "-o", "gr.json"),
        ("gen", "--m", 2, "--seed", 7, "-o", "r1.json"),
        ("verify", "--model", "gr2c", 2, "--seed", 42, "--json"),
        ("verify", "r1.json", "--seed", 3, "--json"),
        ("mu", "--model", "gr2c", 2, "--seed", 7, "--json"),
        ("mu", "--model", "hp", 2, "--seed", 7, "--json"),
    ]
    mismatched = []
    for cmd in commands:
        outputs = []
        for _ in range(2):
            code, out = _cli(*cmd, cwd=tmp)
            if "-o" in cmd:
                out = (tmp / cmd[-1]).read_bytes()
            if code != 0:
                mismatched.append(" ".join(map(str, cmd)) + f" (exit {code})")
            else:
                json.loads(out)
            outputs.append(out)
        if outputs[0] != outputs[1]:
            mismatched.append(" ".join(map(str, cmd)))
    return not mismatched, f"{len(commands)} commands" + (f", mismatched: {mismatched}" if mismatched else ", all byte-identical")


CRITERIA = {
    1: ("R0 calibration", r0_calibration),
    2: ("four-trace identity", four_trace_criterion),
    3: ("ricci-flatness of projected R1", ricci_flatness),
    4: ("basis-sum identities", basis_sum_criterion),
    5: ("symmetric-space consistency", symmetric_space_consistency),
    6: ("mu dichotomy", mu_dichotomy),
    7: ("maximizer conditions", maximizer_criterion),
    8: ("inequality sweeps", inequality_criterion),
    9: ("gradient correctness", gradient_criterion),
    10: ("CLI determinism", determinism_criterion),
}


def _run(number, *args):
    title, check = CRITERIA[number]
    passed, detail = check(*args)
    record(number, title, passed, detail)
    assert passed, detail


def test_criterion_01_r0_calibration():
    _run(1)


def test_criterion_02_four_trace():
    _run(2)


def test_criterion_03_ricci_flatness():
    _run(3)


def test_criterion_04_basis_sums():
    _run(4)


def test_criterion_05_symmetric_space():
    _run(5)


@pytest.mark.slow
def test_criterion_06_mu_dichotomy():
    _run(6)


@pytest.mark.slow
def test_criterion_07_maximizer_conditions():
    _run(7)


def test_criterion_08_inequality_sweeps():
    _run(8)


def test_criterion_09_gradients():
    _run(9)


@pytest.mark.slow
def test_criterion_10_determinism(tmp_path):
    _run(10, tmp_path)


def format_line(number):
    title, passed, detail = RESULTS[number]
    return f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    for number, (title, check) in CRITERIA.items():
        args = (Path(tempfile.mkdtemp()),) if number == 10 else ()
        record(number, title, *check(*args))
        print(format_line(number), flush=True)
    sys.exit(0 if all(p for _, p, _ in RESULTS.values()) else 1)
