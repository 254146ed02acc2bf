"""Exit criteria, one test per criterion, each at its pinned tolerance.

Every test appends a one-line verdict to ``RESULTS``; ``conftest.py`` prints
them in the terminal summary.
"""

import itertools
import subprocess
import sys
import time

import numpy as np
import pytest

from kdquasi import classical as cl
from kdquasi.condexp import (
    LEFT,
    RIGHT,
    InnerProductKind,
    cond_exp_closed,
    hermiticity_violation,
    in_D_B,
    iterated_expectation_residual,
    joint_recovery_residual,
    minimize_oracle,
    pull_through_residual,
    regularize,
    trace_distance,
)
from kdquasi.errors import SingularGram
from kdquasi.frames import (
    alpha_kd_frame,
    dual_frame,
    kd_frame,
    perturb_born_compatible,
    random_pair,
)
from kdquasi.operators import (
    PAULI_X,
    ginibre,
    pure_state,
    random_density,
    random_observable,
    random_unit_disk,
    spectral_decompose,
)
from kdquasi.quasiprob import distribution, marginals, overlap, symbol
from kdquasi.verify import pull_through_max

from conftest import KET_PLUS

RESULTS: list[str] = []

FAMILY_DIM = 3
MIX_ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9)
PERTURBATIONS = ((1e-3, 0), (3e-3, 1), (1e-2, 2), (2e-2, 3), (3e-2, 4))


def record(number, ok, detail):
    RESULTS.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def born_frame_families(pair):
    left, right = kd_frame(pair, "left"), kd_frame(pair, "right")
    fams = {"kd-left": left, "kd-right": right}
    for a in MIX_ALPHAS:
        fams[f"alpha={a}"] = alpha_kd_frame(pair, a)
    for mag, seed in PERTURBATIONS:
        base = left if seed % 2 == 0 else right
        fams[f"perturbed({mag:g},{seed})"] = dual_frame(perturb_born_compatible(base, mag, seed))
    return fams


def test_c01_classical_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    pred_err = joint_err = 0.0
    for t in range(200):
        P, X, Y = cl.random_instance(rng, int(rng.integers(2, 9)), complex_x=bool(t % 2))
        ce, bp = cl.cond_exp(P, X, Y), cl.best_predictor(P, X, Y)
        pred_err = max(pred_err, max(abs(ce[p] - bp[p]) for p in P.points))
        for x, y in itertools.product(cl.value_range(P, X), cl.value_range(P, Y)):
            direct = sum(w for p, w in zip(P.points, P.weights) if X[p] == x and Y[p] == y)
            joint_err = max(joint_err, abs(cl.joint_from_cond(P, X, Y, x, y) - direct))
    elapsed = time.perf_counter() - start
    ok = pred_err < 1e-11 and joint_err < 1e-13 and elapsed < 5
    record(1, ok, f"predictor {pred_err:.1e} (<1e-11), joint {joint_err:.1e} (<1e-13), {elapsed:.2f}s (<5s)")
    assert ok


def test_c02_quantum_minimizer():
    start = time.perf_counter()
    worst = {}
    for kind in (LEFT, RIGHT, InnerProductKind.mixed(0.5)):
        rng = np.random.default_rng(7)
        err = 0.0
        for _ in range(100):
            d = int(rng.integers(2, 7))
            X, B = ginibre(d, rng), random_observable(d, rng)
            rho = random_density(d, int(rng.integers(1 << 30)))
            a = cond_exp_closed(X, B, rho, kind).coeffs
            b = minimize_oracle(X, B, rho, kind).coeffs
            err = max(err, float(np.max(np.abs(a - b))))
        worst[str(kind)] = err
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) < 1e-9 and elapsed < 30
    record(2, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" (<1e-9), {elapsed:.2f}s (<30s)")
    assert ok


def test_c03_kd_dual_closed_form():
    worst = 0.0
    for d in range(2, 7):
        for i in range(20):
            pair = random_pair(d, 1000 * d + i)
            for side in ("left", "right"):
                closed = kd_frame(pair, side)
                solved = dual_frame(closed)
                worst = max(worst, float(np.max(np.linalg.norm(solved.dual - closed.dual, axis=(2, 3)))))
    ok = worst < 1e-10
    record(3, ok, f"max Frobenius deviation {worst:.1e} (<1e-10) over 100 pairs, d=2..6")
    assert ok


def test_c04_overlap_and_marginals():
    pair = random_pair(FAMILY_DIM, 4)
    d = pair.dim
    worst_overlap = worst_marginal = 0.0
    for name, F in born_frame_families(pair).items():
        rng = np.random.default_rng(hash(name) % (1 << 32))
        for _ in range(50):
            X = ginibre(d, rng)
            rho = random_density(d, int(rng.integers(1 << 30))).matrix
            Q = distribution(F, rho)
            worst_overlap = max(worst_overlap, abs(overlap(symbol(F, X), Q) - np.trace(rho @ np.conj(X).T)))
            over_a, over_b = marginals(Q)
            worst_marginal = max(
                worst_marginal,
                float(np.max(np.abs(over_a - pair.B.diagonal_weights(rho)))),
                float(np.max(np.abs(over_b - pair.A.diagonal_weights(rho)))),
            )
    ok = worst_overlap < 1e-10 and worst_marginal < 1e-10
    record(4, ok, f"overlap {worst_overlap:.1e}, marginals {worst_marginal:.1e} (<1e-10), 12 frames x 50")
    assert ok


def test_c05_iterated_expectation_and_joint_recovery():
    pair = random_pair(FAMILY_DIM, 5)
    d = pair.dim
    worst_iter = worst_joint = 0.0
    for idx, F in enumerate(born_frame_families(pair).values()):
        rng = np.random.default_rng(500 + idx)
        for _ in range(50):
            rho = random_density(d, int(rng.integers(1 << 30)))
            worst_iter = max(worst_iter, iterated_expectation_residual(F, ginibre(d, rng), rho))
            worst_joint = max(worst_joint, joint_recovery_residual(F, rho))
    ok = worst_iter < 1e-9 and worst_joint < 1e-9
    record(5, ok, f"iterated {worst_iter:.1e}, joint recovery {worst_joint:.1e} (<1e-9), 12 frames x 50")
    assert ok


ALPHA_GRID = tuple(round(0.1 * k, 1) for k in range(11))
_C6_START = {}


@pytest.mark.parametrize("d", [2, 3, 4])
def test_c06_kd_uniqueness_scan(d):
    _C6_START.setdefault("t", time.perf_counter())
    pair = random_pair(d, 60 + d)
    failures = []
    worst_hold, weakest_violation = 0.0, np.inf
    for alpha in ALPHA_GRID:
        try:
            F = alpha_kd_frame(pair, alpha)
        except SingularGram as exc:
            failures.append(f"alpha={alpha}: mixture is not a frame ({exc})")
            continue
        left = pull_through_max(F, "left", 50, 600 + d)
        right = pull_through_max(F, "right", 50, 600 + d)
        for side, res, holds in (("left", left, alpha == 1.0), ("right", right, alpha == 0.0)):
            if holds:
                worst_hold = max(worst_hold, res)
                if not res < 1e-10:
                    failures.append(f"alpha={alpha} {side} residual {res:.1e} >= 1e-10")
            else:
                weakest_violation = min(weakest_violation, res)
                if not res > 1e-5:
                    failures.append(f"alpha={alpha} {side} residual {res:.1e} <= 1e-5")
    elapsed = time.perf_counter() - _C6_START["t"]
    ok = not failures and elapsed < 120
    detail = (f"d={d}: endpoints {worst_hold:.1e} (<1e-10), weakest interior {weakest_violation:.1e} (>1e-5), "
              f"cumulative {elapsed:.1f}s (<120s)")
    if failures:
        detail += "; " + "; ".join(failures)
    record(6, ok, detail)
    assert ok, detail


def test_c07_alpha_kind_violates_both_pull_throughs():
    B = spectral_decompose(PAULI_X)
    found = {}
    for alpha in (0.25, 0.5, 0.75):
        kind = InnerProductKind.mixed(alpha)
        rng = np.random.default_rng(70)
        hit_left = hit_right = None
        for trial in range(200):
            rho = random_density(2, int(rng.integers(1 << 30)))
            X = ginibre(2, rng)
            f = random_unit_disk(2, rng)
            E_of = lambda M: cond_exp_closed(M, B, rho, kind)
            if hit_left is None and pull_through_residual(E_of, X, f, B, "left") > 1e-6:
                hit_left = trial
            if hit_right is None and pull_through_residual(E_of, X, f, B, "right") > 1e-6:
                hit_right = trial
            if hit_left is not None and hit_right is not None:
                break
        found[alpha] = (hit_left, hit_right)
    ok = all(l is not None and r is not None for l, r in found.values())
    record(7, ok, "first violating trial (left, right): "
           + ", ".join(f"alpha={a}: {v}" for a, v in found.items()) + " within 200")
    assert ok


def test_c08_regularization():
    B = spectral_decompose(PAULI_X)
    rho = pure_state(KET_PLUS)
    worst, inside = 0.0, True
    for eps in (1e-6, 1e-3, 1e-1):
        out = regularize(rho, B, eps)
        worst = max(worst, abs(trace_distance(out, rho) - 2 * eps / (1 + eps)))
        inside = inside and in_D_B(out, B, tol=1e-12)
    ok = worst < 1e-12 and inside
    record(8, ok, f"trace-distance error {worst:.1e} (<1e-12), all in D_B at 1e-12: {inside}")
    assert ok


def test_c09_non_self_adjoint_witness():
    B = spectral_decompose(PAULI_X)
    rng = np.random.default_rng(90)
    witness = None
    for trial in range(200):
        G = ginibre(2, rng)
        H = (G + np.conj(G).T) / 2
        rho = random_density(2, int(rng.integers(1 << 30)))
        if not in_D_B(rho, B):
            continue
        gap = hermiticity_violation(cond_exp_closed(H, B, rho, LEFT))
        if gap > 1e-6:
            witness = (trial, gap)
            break
    ok = witness is not None
    record(9, ok, f"witness at trial {witness[0]} with ||E - E^dagger||_F = {witness[1]:.3f}" if ok
           else "no witness in 200 trials")
    assert ok


def test_c10_cli_reproducible(tmp_path):
    outputs, codes = [], []
    for run in range(2):
        path = tmp_path / f"report{run}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "kdquasi", "verify", "--suite", "all", "-d", "2",
             "--trials", "50", "--seed", "0", "--out", str(path)],
            capture_output=True, text=True,
        )
        codes.append(proc.returncode)
        outputs.append(path.read_bytes())
    ok = codes == [0, 0] and outputs[0] == outputs[1]
    record(10, ok, f"exit codes {codes}, byte-identical reports: {outputs[0] == outputs[1]}")
    assert ok
