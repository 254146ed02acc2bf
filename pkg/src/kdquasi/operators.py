"""Dense operator arithmetic: spectral decomposition, density matrices, trace pairings.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)``. The two
validated wrappers, :class:`Observable` and :class:`DensityMatrix`, freeze
their arrays so they can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.stats import unitary_group

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NotHermitian,
    NotPositive,
    TraceNotOne,
)

TOL_HERM = 1e-10
TOL_NUM = 1e-10
TOL_PSD = 1e-10
TOL_DEGEN = 1e-8
MAX_DIM = 64

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce ``M`` to a finite square complex array or raise ``DimensionMismatch``."""
    arr = np.asarray(M, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    if arr.shape[0] > MAX_DIM:
        raise DimensionMismatch(f"{name} has dimension {arr.shape[0]} > {MAX_DIM}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(M).T


def hermiticity_defect(M: np.ndarray) -> float:
    return float(np.linalg.norm(M - dagger(M)))


@dataclass(frozen=True)
class Observable:
    """A Hermitian matrix with nondegenerate spectrum and its spectral data.

    ``eigenvalues`` are ascending; ``eigenvectors[:, k]`` is the unit vector
    for ``eigenvalues[k]`` and ``projectors[k]`` the matching rank-1 projector.
    Positions ``k`` double as integer labels so lookups never key on floats.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    projectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]

    def index_of(self, label: float, tol: float = TOL_DEGEN) -> int:
        """Sort index of the eigenvalue closest to ``label``."""
        k = int(np.argmin(np.abs(self.eigenvalues - label)))
        if abs(self.eigenvalues[k] - label) > tol:
            raise KeyError(f"{label!r} is not an eigenvalue")
        return k

    def function(self, coeffs: Sequence[complex] | Callable[[float], complex]) -> np.ndarray:
        """Materialize ``f(self)`` = sum_k f_k P_k from coefficients or a callable."""
        if callable(coeffs):
            coeffs = [coeffs(float(lam)) for lam in self.eigenvalues]
        c = np.asarray(coeffs, dtype=complex)
        if c.shape != (self.dim,):
            raise DimensionMismatch(f"need {self.dim} coefficients, got {c.shape}")
        return np.einsum("k,kij->ij", c, self.projectors)

    def diagonal_weights(self, rho: np.ndarray) -> np.ndarray:
        """Born probabilities <phi_k, rho phi_k> (real parts)."""
        V = self.eigenvectors
        return np.real(np.einsum("ik,ij,jk->k", np.conj(V), rho, V))


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude component of every column made real positive
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        j = int(np.argmax(np.abs(col)))
        out[:, k] = col * (np.conj(col[j]) / abs(col[j]))
    return out


def spectral_decompose(
    H, tol_degen: float = TOL_DEGEN, tol_herm: float = TOL_HERM
) -> Observable:
    H = as_matrix(H, "observable")
    defect = hermiticity_defect(H)
    if defect > tol_herm:
        raise NotHermitian(f"||H - H^dagger||_F = {defect:.3e} exceeds {tol_herm:.1e}")
    evals, evecs = np.linalg.eigh(H)
    if H.shape[0] > 1:
        gaps = np.diff(evals)
        k = int(np.argmin(gaps))
        if gaps[k] <= tol_degen:
            raise DegenerateSpectrum(
                f"eigenvalues {evals[k]:.6g} and {evals[k + 1]:.6g} are within {tol_degen:.1e}"
            )
    evecs = _fix_phase(evecs)
    projectors = np.einsum("ik,jk->kij", evecs, np.conj(evecs))
    return Observable(
        matrix=_frozen(H),
        eigenvalues=_frozen(evals),
        eigenvectors=_frozen(evecs),
        projectors=_frozen(projectors),
    )


def observable_from_basis(eigenvalues: Sequence[float], basis: np.ndarray) -> Observable:
    """Observable with the given spectrum whose eigenvectors are the columns of ``basis``."""
    lam = np.asarray(eigenvalues, dtype=float)
    U = np.asarray(basis, dtype=complex)
    H = U @ np.diag(lam) @ dagger(U)
    return spectral_decompose((H + dagger(H)) / 2)


def hs_inner(X, Y) -> complex:
    """Hilbert-Schmidt pairing Tr(X^dagger Y)."""
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    if X.shape != Y.shape:
        raise DimensionMismatch(f"shapes {X.shape} and {Y.shape} differ")
    return complex(np.vdot(X, Y))


def expectation(rho, X) -> complex:
    """Tr(rho X)."""
    rho = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return complex(np.einsum("ij,ji->", rho, np.asarray(X, dtype=complex)))


def trace_norm(M) -> float:
    M = np.asarray(M, dtype=complex)
    return float(np.sum(np.linalg.svd(M, compute_uv=False)))


def make_density(
    M, tol_herm: float = TOL_HERM, tol_psd: float = TOL_PSD, tol_num: float = TOL_NUM
) -> DensityMatrix:
    M = as_matrix(M, "density matrix")
    defect = hermiticity_defect(M)
    if defect > tol_herm:
        raise NotHermitian(f"density matrix not Hermitian: defect {defect:.3e}")
    lam_min = float(np.linalg.eigvalsh((M + dagger(M)) / 2)[0])
    if lam_min < -tol_psd:
        raise NotPositive(f"density matrix has eigenvalue {lam_min:.6g} < 0")
    tr = np.trace(M)
    if abs(tr - 1) > tol_num:
        raise TraceNotOne(f"density matrix has trace {tr.real:.12g}, expected 1")
    return DensityMatrix(_frozen(M))


def pure_state(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return make_density(np.outer(psi, np.conj(psi)))


def ginibre(d: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def random_density(d: int, seed: int) -> DensityMatrix:
    """Seeded full-rank state G G^dagger / Tr(G G^dagger) from a complex Ginibre draw."""
    if d < 2:
        raise ValueError("random_density needs d >= 2")
    rng = np.random.default_rng(seed)
    G = ginibre(d, rng)
    rho = G @ dagger(G)
    rho = (rho + dagger(rho)) / 2
    return make_density(rho / np.trace(rho).real)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.ones((1, 1), complex)


def random_spectrum(d: int, rng: np.random.Generator, min_gap: float = 0.1) -> np.ndarray:
    while True:
        lam = np.sort(rng.standard_normal(d))
        if d == 1 or np.min(np.diff(lam)) > min_gap:
            return lam


def random_observable(d: int, rng: np.random.Generator) -> Observable:
    return observable_from_basis(random_spectrum(d, rng), haar_unitary(d, rng))


def random_unit_disk(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` complex numbers uniform on the closed unit disk."""
    r = np.sqrt(rng.uniform(size=n))
    theta = rng.uniform(0, 2 * np.pi, size=n)
    return r * np.exp(1j * theta)
