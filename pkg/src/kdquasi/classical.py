"""Finite classical probability and conditional expectation.

A random variable is a ``dict`` from point labels to values. Level sets of
the conditioning variable are identified by exact equality, so draw its
values from small integer sets when generating instances.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .errors import LabelNotInRange, NotInDY

RandomVariable = Mapping[Hashable, complex]


@dataclass(frozen=True)
class FiniteProbSpace:
    points: tuple
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.points) != len(w):
            raise ValueError("points and weights differ in length")
        if len(set(self.points)) != len(self.points):
            raise ValueError("point labels must be distinct")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1) > 1e-12:
            raise ValueError(f"weights sum to {w.sum():.15g}, not 1")

    @classmethod
    def from_weights(cls, points: Sequence, weights: Sequence[float]) -> "FiniteProbSpace":
        return cls(tuple(points), tuple(float(w) for w in weights))

    @classmethod
    def uniform(cls, points: Sequence) -> "FiniteProbSpace":
        n = len(points)
        return cls(tuple(points), (1.0 / n,) * n)

    def prob(self, event: Callable[[Hashable], bool]) -> float:
        return float(sum(w for p, w in zip(self.points, self.weights) if event(p)))

    def expect(self, X: RandomVariable) -> complex:
        return sum(w * X[p] for p, w in zip(self.points, self.weights))


def value_range(P: FiniteProbSpace, X: RandomVariable) -> list:
    """Ran(X) in first-seen order over the points of P."""
    seen: dict = {}
    for p in P.points:
        seen.setdefault(X[p], None)
    return list(seen)


def _level_masses(P: FiniteProbSpace, Y: RandomVariable) -> dict:
    masses: dict = defaultdict(float)
    for p, w in zip(P.points, P.weights):
        masses[Y[p]] += w
    return masses


def in_D_Y(P: FiniteProbSpace, Y: RandomVariable) -> bool:
    return all(m > 0 for m in _level_masses(P, Y).values())


def _require_D_Y(P, Y):
    masses = _level_masses(P, Y)
    empty = [y for y, m in masses.items() if not m > 0]
    if empty:
        raise NotInDY(f"levels {empty} of Y have zero probability")
    return masses


def cond_exp(P: FiniteProbSpace, X: RandomVariable, Y: RandomVariable) -> dict:
    """E_P(X|Y) from the joint law: sum_x x P(X=x, Y=y) / P(Y=y) on each level set."""
    masses = _require_D_Y(P, Y)
    joint: dict = defaultdict(float)
    for p, w in zip(P.points, P.weights):
        joint[(X[p], Y[p])] += w
    by_level: dict = defaultdict(complex)
    for (x, y), w in joint.items():
        by_level[y] += x * w / masses[y]
    return {p: _tidy(by_level[Y[p]], X) for p in P.points}


def best_predictor(P: FiniteProbSpace, X: RandomVariable, Y: RandomVariable) -> dict:
    """Minimizer of E_P|X - f(Y)|^2 over f, via the diagonal normal equations.

    The Gram matrix of the indicators 1_y(Y) is diag(P(Y=y)) and the right-hand
    side is E_P(X 1_y(Y)), so each f(y) is one division.
    """
    _require_D_Y(P, Y)
    levels = value_range(P, Y)
    w = np.asarray(P.weights)
    xs = np.array([X[p] for p in P.points], dtype=complex)
    ind = np.array([[Y[p] == y for p in P.points] for y in levels], dtype=float)
    gram = ind @ (w[:, None] * ind.T)
    rhs = ind @ (w * xs)
    f = np.linalg.solve(gram, rhs)
    f_of = dict(zip(levels, f))
    return {p: _tidy(f_of[Y[p]], X) for p in P.points}


def _tidy(value: complex, X: RandomVariable):
    # real X gives real conditional expectations; keep the type
    if all(np.isrealobj(v) or np.imag(v) == 0 for v in X.values()):
        return float(np.real(value))
    return complex(value)


def joint_from_cond(
    P: FiniteProbSpace, X: RandomVariable, Y: RandomVariable, x, y
) -> float:
    """E_P[1_y(Y) E_P(1_x(X)|Y)], which recovers P(X=x, Y=y)."""
    _require_D_Y(P, Y)
    if x not in value_range(P, X):
        raise LabelNotInRange(f"{x!r} is not in Ran(X)")
    if y not in value_range(P, Y):
        raise LabelNotInRange(f"{y!r} is not in Ran(Y)")
    indicator_x = {p: 1.0 if X[p] == x else 0.0 for p in P.points}
    ce = cond_exp(P, indicator_x, Y)
    return float(np.real(P.expect({p: (Y[p] == y) * ce[p] for p in P.points})))


def joint_mass(P: FiniteProbSpace, X: RandomVariable, Y: RandomVariable, x, y) -> float:
    return P.prob(lambda p: X[p] == x and Y[p] == y)


def random_instance(rng: np.random.Generator, n: int, n_levels: int = 3, complex_x: bool = True):
    """Random (P, X, Y) on ``n`` points with P in D_Y and integer-valued Y."""
    points = tuple(range(n))
    while True:
        Y = {p: int(rng.integers(0, n_levels)) for p in points}
        w = rng.uniform(size=n) * (rng.uniform(size=n) > 0.25)
        if w.sum() == 0:
            continue
        P = FiniteProbSpace(points, tuple(w / w.sum()))
        if abs(sum(P.weights) - 1) <= 1e-12 and in_D_Y(P, Y):
            break
    # X takes few distinct values so the joint law has nontrivial atoms
    pool = rng.standard_normal(3) + (1j * rng.standard_normal(3) if complex_x else 0)
    X = {p: complex(pool[rng.integers(0, 3)]) if complex_x else float(pool[rng.integers(0, 3)])
         for p in points}
    return P, X, Y
