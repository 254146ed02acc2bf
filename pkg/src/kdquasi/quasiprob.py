"""Quasiprobability distributions and operator symbols for a frame and its dual."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MissingDual, NormalizationError, PairMismatch
from .frames import ObservablePair, OperatorFrame, Side, require_born_compatible, same_pair
from .operators import TOL_NUM, DensityMatrix, _frozen, as_matrix

NORMALIZATION_HARD_TOL = 1e-8


@dataclass(frozen=True)
class QuasiDistribution:
    """Q[ia, ib] = Tr(rho S_{a,b}^dagger); complex even where real in theory."""

    pair: ObservablePair
    values: np.ndarray

    def as_dict(self) -> dict:
        lam_a, lam_b = self.pair.A.eigenvalues, self.pair.B.eigenvalues
        return {(float(lam_a[i]), float(lam_b[j])): complex(self.values[i, j])
                for i in range(len(lam_a)) for j in range(len(lam_b))}


@dataclass(frozen=True)
class OperatorSymbol:
    pair: ObservablePair
    values: np.ndarray


def _pairing(family: np.ndarray, M: np.ndarray) -> np.ndarray:
    # [ia, ib] -> Tr(F_{a,b}^dagger M)
    return np.einsum("abij,ij->ab", np.conj(family), M)


def distribution(
    frame: OperatorFrame, rho: DensityMatrix, check: bool = True, tol: float = TOL_NUM
) -> QuasiDistribution:
    rho_m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho, "rho")
    if rho_m.shape[0] != frame.dim:
        raise DimensionMismatch(f"state has dim {rho_m.shape[0]}, frame has dim {frame.dim}")
    if check:
        require_born_compatible(frame, tol)
    Q = _pairing(frame.elements, rho_m)
    deviation = abs(Q.sum() - 1)
    if deviation > NORMALIZATION_HARD_TOL:
        raise NormalizationError(f"quasiprobabilities sum to {Q.sum():.12g}")
    if deviation > tol:
        warnings.warn(f"quasiprobability normalization off by {deviation:.2e}", RuntimeWarning)
    return QuasiDistribution(frame.pair, _frozen(Q))


def symbol(frame: OperatorFrame, X) -> OperatorSymbol:
    if frame.dual is None:
        raise MissingDual("symbol needs a frame with its dual attached")
    X = as_matrix(X, "X")
    if X.shape[0] != frame.dim:
        raise DimensionMismatch(f"operator has dim {X.shape[0]}, frame has dim {frame.dim}")
    return OperatorSymbol(frame.pair, _frozen(_pairing(frame.dual, X)))


def overlap(sym: OperatorSymbol, dist: QuasiDistribution) -> complex:
    """sum_{a,b} conj(symbol) * Q, which reproduces Tr(rho X^dagger)."""
    if not same_pair(sym.pair, dist.pair):
        raise PairMismatch("symbol and distribution live on different pairs")
    return complex(np.sum(np.conj(sym.values) * dist.values))


def marginals(dist: QuasiDistribution) -> tuple[np.ndarray, np.ndarray]:
    """(sum over a, indexed by b; sum over b, indexed by a)."""
    return dist.values.sum(axis=0), dist.values.sum(axis=1)


def kd_distribution(pair: ObservablePair, rho: DensityMatrix, side: Side = "left") -> QuasiDistribution:
    """Closed forms <phi_b, phi_a><phi_a, rho phi_b> (left) and <phi_a, phi_b><phi_b, rho phi_a> (right)."""
    rho_m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho, "rho")
    VA, VB = pair.A.eigenvectors, pair.B.eigenvectors
    if side == "left":
        Q = np.conj(pair.overlaps) * (np.conj(VA).T @ rho_m @ VB)
    elif side == "right":
        Q = pair.overlaps * (np.conj(VB).T @ rho_m @ VA).T
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return QuasiDistribution(pair, _frozen(Q))
