"""Quantum conditional expectations onto the algebra generated by one observable.

Every conditional expectation here lands in :class:`DiagonalInBasis`, whose
``coeffs`` are aligned with the ascending eigenvalues of the conditioning
observable. Comparisons between routes are made on these coefficient vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, MissingDual, NotInDB
from .frames import OperatorFrame, require_born_compatible
from .operators import (
    DensityMatrix,
    Observable,
    _frozen,
    as_matrix,
    dagger,
    expectation,
    make_density,
    trace_norm,
)
from .quasiprob import distribution, symbol

TOL_DB = 1e-12


@dataclass(frozen=True)
class InnerProductKind:
    """Which state-weighted sesquilinear form to use.

    ``alpha`` is the weight on the left form: 1 for left, 0 for right.
    """

    tag: str
    alpha: float

    def __post_init__(self):
        if self.tag not in ("left", "right", "alpha"):
            raise ValueError(f"unknown kind {self.tag!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @classmethod
    def mixed(cls, alpha: float) -> "InnerProductKind":
        return cls("alpha", float(alpha))

    def __str__(self) -> str:
        return self.tag if self.tag != "alpha" else f"alpha({self.alpha:g})"


LEFT = InnerProductKind("left", 1.0)
RIGHT = InnerProductKind("right", 0.0)


def parse_kind(text: str, alpha: float | None = None) -> InnerProductKind:
    if text == "left":
        return LEFT
    if text == "right":
        return RIGHT
    if text == "alpha":
        if alpha is None:
            raise ValueError("kind 'alpha' needs a value for alpha")
        return InnerProductKind.mixed(alpha)
    raise ValueError(f"unknown kind {text!r}")


@dataclass(frozen=True)
class DiagonalInBasis:
    """The operator sum_y f(y) P_y for the conditioning observable ``basis``."""

    basis: Observable
    coeffs: np.ndarray

    @cached_property
    def matrix(self) -> np.ndarray:
        return _frozen(self.basis.function(self.coeffs))

    def coeff_map(self) -> dict:
        return {float(lam): complex(c) for lam, c in zip(self.basis.eigenvalues, self.coeffs)}


def _rho(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho, "rho")


def _check_dims(B: Observable, *mats: np.ndarray) -> None:
    for M in mats:
        if M.shape != (B.dim, B.dim):
            raise DimensionMismatch(f"operator of shape {M.shape} against dim {B.dim}")


def in_D_B(rho, B: Observable, tol: float = TOL_DB) -> bool:
    rho_m = _rho(rho)
    _check_dims(B, rho_m)
    return bool(np.min(B.diagonal_weights(rho_m)) > tol)


def _weights_or_raise(rho_m: np.ndarray, B: Observable, tol: float) -> np.ndarray:
    w = B.diagonal_weights(rho_m)
    k = int(np.argmin(w))
    if w[k] <= tol:
        raise NotInDB(
            f"<phi_y, rho phi_y> = {w[k]:.3e} for y = {B.eigenvalues[k]:.12g}; "
            "regularize the state first"
        )
    return w


def sesquilinear(kind: InnerProductKind, rho, X, Xp) -> complex:
    """Left: Tr(rho X^dagger X'); right: Tr(rho X' X^dagger); alpha mixes the two."""
    rho_m = _rho(rho)
    X = as_matrix(X, "X")
    Xp = as_matrix(Xp, "X'")
    if not (rho_m.shape == X.shape == Xp.shape):
        raise DimensionMismatch("rho, X and X' must share a dimension")
    left = expectation(rho_m, dagger(X) @ Xp)
    right = expectation(rho_m, Xp @ dagger(X))
    return kind.alpha * left + (1 - kind.alpha) * right


def weak_values(X, B: Observable, rho, side: str = "left", tol: float = TOL_DB) -> np.ndarray:
    """<phi_y, X rho phi_y>/w_y (left) or <phi_y, rho X phi_y>/w_y (right)."""
    rho_m = _rho(rho)
    X = as_matrix(X, "X")
    _check_dims(B, rho_m, X)
    w = _weights_or_raise(rho_m, B, tol)
    V = B.eigenvectors
    M = X @ rho_m if side == "left" else rho_m @ X
    return np.einsum("ik,ij,jk->k", np.conj(V), M, V) / w


def cond_exp_closed(X, B: Observable, rho, kind: InnerProductKind = LEFT,
                    tol: float = TOL_DB) -> DiagonalInBasis:
    if kind.alpha == 1.0:
        f = weak_values(X, B, rho, "left", tol)
    elif kind.alpha == 0.0:
        f = weak_values(X, B, rho, "right", tol)
    else:
        f = (kind.alpha * weak_values(X, B, rho, "left", tol)
             + (1 - kind.alpha) * weak_values(X, B, rho, "right", tol))
    return DiagonalInBasis(B, _frozen(f))


def objective(kind: InnerProductKind, rho, X, B: Observable, coeffs) -> float:
    """<X - f(B), X - f(B)>_kind, real up to rounding."""
    R = as_matrix(X, "X") - B.function(coeffs)
    return float(np.real(sesquilinear(kind, rho, R, R)))


def minimize_oracle(X, B: Observable, rho, kind: InnerProductKind = LEFT,
                    tol: float = TOL_DB) -> DiagonalInBasis:
    """Least-squares projection of X onto functions of B under the chosen form.

    Builds the normal equations G c = h with G[j, k] = <P_j, P_k>_kind and
    h[j] = <P_j, X>_kind by evaluating the form itself, then solves them.
    """
    rho_m = _rho(rho)
    X = as_matrix(X, "X")
    _check_dims(B, rho_m, X)
    _weights_or_raise(rho_m, B, tol)
    P = B.projectors
    d = B.dim
    G = np.array([[sesquilinear(kind, rho_m, P[j], P[k]) for k in range(d)] for j in range(d)])
    h = np.array([sesquilinear(kind, rho_m, P[j], X) for j in range(d)])
    return DiagonalInBasis(B, _frozen(np.linalg.solve(G, h)))


def q_cond_exp(frame: OperatorFrame, X, rho, tol: float = TOL_DB,
               check: bool = True) -> DiagonalInBasis:
    """Conditional expectation given B built from a frame's quasiprobability.

    g(b) = sum_a conj(symbol_{a,b}(X^dagger)) Q_{a,b}(rho) / <phi_b, rho phi_b>.
    """
    if frame.dual is None:
        raise MissingDual("Q-conditional expectation needs the dual frame")
    rho_m = _rho(rho)
    X = as_matrix(X, "X")
    B = frame.pair.B
    _check_dims(B, rho_m, X)
    if check:
        require_born_compatible(frame)
    w = _weights_or_raise(rho_m, B, tol)
    Q = distribution(frame, rho_m, check=False).values
    sym = symbol(frame, dagger(X)).values
    g = np.sum(np.conj(sym) * Q, axis=0) / w
    return DiagonalInBasis(B, _frozen(g))


def iterated_expectation_residual(frame: OperatorFrame, X, rho) -> float:
    E = q_cond_exp(frame, X, rho)
    return abs(expectation(_rho(rho), E.matrix) - expectation(_rho(rho), X))


def joint_recovery_residual(frame: OperatorFrame, rho) -> float:
    """max_{a,b} |Q_{a,b}(rho) - Tr(rho E^Q(S_{a,b}^dagger | B))|."""
    rho_m = _rho(rho)
    Q = distribution(frame, rho_m).values
    d = frame.dim
    worst = 0.0
    for ia in range(d):
        for ib in range(d):
            E = q_cond_exp(frame, dagger(frame.elements[ia, ib]), rho_m, check=False)
            worst = max(worst, abs(Q[ia, ib] - expectation(rho_m, E.matrix)))
    return worst


def regularize(rho, B: Observable, eps: float, tol: float = TOL_DB) -> DensityMatrix:
    """Mix in eps * P_y for every y the state misses, then renormalize."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    rho_m = _rho(rho)
    _check_dims(B, rho_m)
    missing = np.flatnonzero(B.diagonal_weights(rho_m) <= tol)
    if missing.size == 0:
        return rho if isinstance(rho, DensityMatrix) else make_density(rho_m)
    out = (rho_m + eps * B.projectors[missing].sum(axis=0)) / (1 + eps * missing.size)
    return make_density(out)


def regularization_bound(n_missing: int, eps: float) -> float:
    return 2 * eps * n_missing / (1 + eps * n_missing)


def trace_distance(rho1, rho2) -> float:
    """Trace norm of the difference (no factor 1/2)."""
    return trace_norm(_rho(rho1) - _rho(rho2))


def hermiticity_violation(E: DiagonalInBasis) -> float:
    M = E.matrix
    return float(np.linalg.norm(M - dagger(M)))


def pull_through_residual(E_of, X, f_coeffs, B: Observable, side: str) -> float:
    """Coefficient-wise max of E(f(B) X) - f E(X) (left) or E(X f(B)) - f E(X) (right).

    ``E_of`` maps an operator to its :class:`DiagonalInBasis`.
    """
    fB = B.function(f_coeffs)
    X = as_matrix(X, "X")
    moved = E_of(fB @ X) if side == "left" else E_of(X @ fB)
    base = E_of(X)
    return float(np.max(np.abs(moved.coeffs - np.asarray(f_coeffs) * base.coeffs)))

