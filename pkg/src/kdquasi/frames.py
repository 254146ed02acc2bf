"""Operator frames indexed by the joint spectrum of two observables.

A frame is stored as one complex array ``elements[ia, ib]`` of shape
``(d, d, d, d)``: the first two axes are the sort indices of the eigenvalues
of A and B, the last two the matrix itself. Flattening the first two axes
row-major gives the fixed (a, b) ordering used for every Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .errors import (
    DimensionMismatch,
    FrameDegenerated,
    NotBornCompatible,
    PairMismatch,
    SingularGram,
    VanishingOverlap,
)
from .operators import (
    PAULI_X,
    PAULI_Z,
    TOL_NUM,
    Observable,
    _frozen,
    dagger,
    ginibre,
    haar_unitary,
    observable_from_basis,
    random_spectrum,
    spectral_decompose,
)

Side = Literal["left", "right"]

TOL_OVERLAP = 1e-8
GRAM_COND_CAP = 1e12
SAMPLING_MIN_OVERLAP = 0.05


@dataclass(frozen=True)
class ObservablePair:
    A: Observable
    B: Observable
    overlaps: np.ndarray  # overlaps[ia, ib] = <phi_a, phi_b>

    @property
    def dim(self) -> int:
        return self.A.dim


def check_pair(A: Observable, B: Observable, tol_overlap: float = TOL_OVERLAP) -> ObservablePair:
    if A.dim != B.dim:
        raise DimensionMismatch(f"A has dim {A.dim}, B has dim {B.dim}")
    overlaps = np.conj(A.eigenvectors).T @ B.eigenvectors
    mags = np.abs(overlaps)
    ia, ib = np.unravel_index(int(np.argmin(mags)), mags.shape)
    if mags[ia, ib] <= tol_overlap:
        raise VanishingOverlap(int(ia), int(ib), float(mags[ia, ib]))
    return ObservablePair(A, B, _frozen(overlaps))


def qubit_zx_pair() -> ObservablePair:
    return check_pair(spectral_decompose(PAULI_Z), spectral_decompose(PAULI_X))


def random_pair(d: int, seed: int, min_overlap: float = SAMPLING_MIN_OVERLAP) -> ObservablePair:
    """Seeded pair whose B eigenbasis is a Haar-random rotation of A's.

    Draws are rejected until every overlap magnitude is at least ``min_overlap``.
    """
    rng = np.random.default_rng(seed)
    W = haar_unitary(d, rng)
    A = observable_from_basis(random_spectrum(d, rng), W)
    while True:
        U = haar_unitary(d, rng)
        B = observable_from_basis(random_spectrum(d, rng), U @ W)
        try:
            return check_pair(A, B, tol_overlap=min_overlap)
        except VanishingOverlap:
            continue


@dataclass(frozen=True)
class OperatorFrame:
    pair: ObservablePair
    elements: np.ndarray
    dual: np.ndarray | None = None
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        d = self.pair.dim
        if self.elements.shape != (d, d, d, d):
            raise DimensionMismatch(f"frame needs shape {(d, d, d, d)}, got {self.elements.shape}")
        if self.dual is not None and self.dual.shape != self.elements.shape:
            raise DimensionMismatch("dual has the wrong shape")

    @property
    def dim(self) -> int:
        return self.pair.dim

    def element(self, ia: int, ib: int) -> np.ndarray:
        return self.elements[ia, ib]


def make_frame(pair: ObservablePair, elements, dual=None) -> OperatorFrame:
    return OperatorFrame(
        pair,
        _frozen(np.asarray(elements, dtype=complex)),
        None if dual is None else _frozen(np.asarray(dual, dtype=complex)),
    )


def _synthesis(elements: np.ndarray) -> np.ndarray:
    """Columns are vec(S_k) in row-major (a, b) order."""
    d = elements.shape[0]
    return elements.reshape(d * d, d * d).T


def gram_matrix(elements: np.ndarray) -> np.ndarray:
    """G[j, k] = Tr(S_j^dagger S_k)."""
    V = _synthesis(elements)
    return np.conj(V).T @ V


def kd_frame(pair: ObservablePair, side: Side = "left") -> OperatorFrame:
    """Kirkwood-Dirac frame with its closed-form dual S / |<phi_a, phi_b>|^2."""
    PA, PB = pair.A.projectors, pair.B.projectors
    if side == "left":
        S = np.einsum("aij,bjk->abik", PA, PB)
    elif side == "right":
        S = np.einsum("bij,ajk->abik", PB, PA)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    weights = np.abs(pair.overlaps) ** 2
    T = S / weights[:, :, None, None]
    return make_frame(pair, S, T)


def dual_frame(frame: OperatorFrame, cond_cap: float = GRAM_COND_CAP) -> OperatorFrame:
    """Solve Tr(T_{a',b'} S_{a,b}^dagger) = delta for the dual family.

    With V the synthesis matrix and G = V^dagger V, the dual is T = V G^{-1}.
    """
    G = gram_matrix(frame.elements)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > cond_cap:
        raise SingularGram(f"Gram matrix condition number {cond:.3e} exceeds {cond_cap:.1e}")
    V = _synthesis(frame.elements)
    coeffs = np.linalg.solve(G, np.eye(G.shape[0], dtype=complex))
    d = frame.dim
    T = (V @ coeffs).T.reshape(d, d, d, d)
    return replace(frame, dual=_frozen(T))


def biorthogonality_residual(frame: OperatorFrame) -> float:
    """max |Tr(T_{a',b'} S_{a,b}^dagger) - delta|."""
    if frame.dual is None:
        raise ValueError("frame has no dual")
    M = np.conj(_synthesis(frame.elements)).T @ _synthesis(frame.dual)
    return float(np.max(np.abs(M - np.eye(M.shape[0]))))


def frame_bounds(frame: OperatorFrame) -> tuple[float, float]:
    """Extreme eigenvalues of the frame operator X -> sum_k S_k Tr(S_k^dagger X)."""
    V = _synthesis(frame.elements)
    ev = np.linalg.eigvalsh(V @ np.conj(V).T)
    return max(float(ev[0]), 0.0), float(ev[-1])


def born_defect(frame: OperatorFrame) -> float:
    """Largest Frobenius error in the two Born marginal identities."""
    Sdag = np.conj(np.swapaxes(frame.elements, -1, -2))
    over_a = Sdag.sum(axis=0) - frame.pair.B.projectors
    over_b = Sdag.sum(axis=1) - frame.pair.A.projectors
    return float(max(np.linalg.norm(over_a, axis=(1, 2)).max(),
                     np.linalg.norm(over_b, axis=(1, 2)).max()))


def is_born_compatible(frame: OperatorFrame, tol: float = TOL_NUM) -> bool:
    return born_defect(frame) <= tol


def require_born_compatible(frame: OperatorFrame, tol: float = TOL_NUM) -> None:
    defect = born_defect(frame)
    if defect > tol:
        raise NotBornCompatible(f"Born marginal defect {defect:.3e} exceeds {tol:.1e}")


def same_pair(p: ObservablePair, q: ObservablePair) -> bool:
    return p is q or (
        p.dim == q.dim
        and np.array_equal(p.A.matrix, q.A.matrix)
        and np.array_equal(p.B.matrix, q.B.matrix)
    )


def mix_frames(F1: OperatorFrame, F2: OperatorFrame, alpha: float) -> OperatorFrame:
    """Elementwise alpha * F1 + (1 - alpha) * F2 (no dual attached)."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if not same_pair(F1.pair, F2.pair):
        raise PairMismatch("frames are built on different observable pairs")
    return make_frame(F1.pair, alpha * F1.elements + (1 - alpha) * F2.elements)


def alpha_kd_frame(pair: ObservablePair, alpha: float, solve_dual: bool = True) -> OperatorFrame:
    F = mix_frames(kd_frame(pair, "left"), kd_frame(pair, "right"), alpha)
    return dual_frame(F) if solve_dual else F


def doubly_centered(shape_d: int, rng: np.random.Generator) -> np.ndarray:
    """Random operator family with every row and column sum over (a, b) equal to zero."""
    d = shape_d
    D = np.stack([np.stack([ginibre(d, rng) for _ in range(d)]) for _ in range(d)])
    return (D - D.mean(axis=0, keepdims=True) - D.mean(axis=1, keepdims=True)
            + D.mean(axis=(0, 1), keepdims=True))


def perturb_born_compatible(frame: OperatorFrame, magnitude: float, seed: int) -> OperatorFrame:
    """Add a seeded doubly-centered perturbation of total Frobenius norm ``magnitude``.

    The perturbation leaves both Born marginals untouched. A perturbation whose
    norm reaches sqrt(C1) of the input can cancel the smallest singular value of
    the synthesis operator, so that regime is refused outright.
    """
    if magnitude < 0:
        raise ValueError("magnitude must be nonnegative")
    if magnitude == 0:
        return frame
    require_born_compatible(frame)
    c1, _ = frame_bounds(frame)
    guard = np.sqrt(c1)
    if magnitude >= guard:
        raise FrameDegenerated(
            f"perturbation norm {magnitude:.3e} reaches the guard sqrt(C1) = {guard:.3e}"
        )
    rng = np.random.default_rng(seed)
    D = doubly_centered(frame.dim, rng)
    D *= magnitude / np.linalg.norm(D)
    out = make_frame(frame.pair, frame.elements + D)
    c1_out, c2_out = frame_bounds(out)
    if c1_out <= c2_out / GRAM_COND_CAP:
        raise FrameDegenerated(f"perturbed frame has C1 = {c1_out:.3e}")
    return out
