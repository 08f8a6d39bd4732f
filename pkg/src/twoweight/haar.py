"""Plain and weighted Haar functions on the dyadic tree.

``h_I^w`` is positive on the right half ``I+`` and negative on the left half
``I-``::

    h_I^w = sqrt(w(I-) / (w(I+) w(I))) 1_{I+} - sqrt(w(I+) / (w(I-) w(I))) 1_{I-}

so that it has ``w``-mean zero and unit ``L^2(w)`` norm.  With ``w = 1`` this is
``|I|^{-1/2} (1_{I+} - 1_{I-})``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import (
    DyadicIndex,
    DyadicTree,
    LeafInterval,
    RootInterval,
    StepFunction,
    StepWeight,
    level_integrals,
    weighted_average,
)


@dataclass(frozen=True)
class HaarVector:
    interval: DyadicIndex
    plus_value: float
    minus_value: float

    def values(self, tree: DyadicTree) -> np.ndarray:
        out = np.zeros(tree.n_leaves)
        left, right = tree.cells(self.interval.left()), tree.cells(self.interval.right())
        out[left] = self.minus_value
        out[right] = self.plus_value
        return out

    def as_function(self, tree: DyadicTree) -> StepFunction:
        return StepFunction(tree, self.values(tree))

    def at(self, I: DyadicIndex) -> float:
        """Value on a strict subinterval ``I`` (constant there)."""
        if not self.interval.contains(I) or I == self.interval:
            raise ValueError(f"{I} is not a strict subinterval of {self.interval}")
        half = I.position >> (I.level - self.interval.level - 1)
        return self.plus_value if half & 1 else self.minus_value


@dataclass(frozen=True)
class DecompositionCoefficients:
    alpha: float
    beta: float


def _require_nonleaf(tree: DyadicTree, I: DyadicIndex):
    tree.check(I)
    if I.level == tree.depth:
        raise LeafInterval(f"{I} is a leaf and has no Haar function")


def haar_vector(w: StepWeight, I: DyadicIndex) -> HaarVector:
    _require_nonleaf(w.tree, I)
    m, mm, mp = w.mass(I), w.mass(I.left()), w.mass(I.right())
    return HaarVector(I, float(np.sqrt(mm / (mp * m))), float(-np.sqrt(mp / (mm * m))))


def plain_haar_vector(tree: DyadicTree, I: DyadicIndex) -> HaarVector:
    _require_nonleaf(tree, I)
    s = I.length ** -0.5
    return HaarVector(I, s, -s)


def haar_coefficient(f: StepFunction, w: StepWeight, I: DyadicIndex) -> float:
    """``<f, h_I^w>_w``."""
    h = haar_vector(w, I)
    n = w.depth
    fw = f.values * w.values * 2.0 ** (-n)
    left, right = w.tree.cells(I.left()), w.tree.cells(I.right())
    return float(h.plus_value * fw[right].sum() + h.minus_value * fw[left].sum())


def weighted_delta(f: StepFunction, w: StepWeight, I: DyadicIndex) -> float:
    """``<f>^w_{I+} - <f>^w_{I-}``."""
    _require_nonleaf(w.tree, I)
    return weighted_average(f, w, I.right()) - weighted_average(f, w, I.left())


def parent_difference(f: StepFunction, w: StepWeight, I: DyadicIndex) -> float:
    """``<f>^w_I - <f>^w_{parent(I)}``."""
    w.tree.check(I)
    if I.level == 0:
        raise RootInterval("the root has no parent in the tree")
    return weighted_average(f, w, I) - weighted_average(f, w, I.parent())


def decompose(omega: StepWeight, nu: StepWeight, I: DyadicIndex) -> DecompositionCoefficients:
    """Coefficients with ``h_I^omega = alpha h_I^nu + beta 1_I``."""
    _require_nonleaf(omega.tree, I)
    ratio = nu / omega
    g_plus = weighted_average(ratio, omega, I.right())
    g_minus = weighted_average(ratio, omega, I.left())
    g = weighted_average(ratio, omega, I)
    m, mm, mp = omega.mass(I), omega.mass(I.left()), omega.mass(I.right())
    alpha = np.sqrt(g_plus * g_minus / g)
    beta = np.sqrt(mp * mm / m) / m * (g_plus - g_minus) / g
    return DecompositionCoefficients(float(alpha), float(beta))


# ---------------------------------------------------------------------------
# vectorised forms, one array per non-leaf level


def haar_profiles(w: StepWeight) -> list[tuple[np.ndarray, np.ndarray]]:
    """``(plus, minus)`` values of ``h_I^w`` for every non-leaf level."""
    out = []
    for j in range(w.depth):
        m = w.masses[j]
        mm, mp = w.masses[j + 1][0::2], w.masses[j + 1][1::2]
        out.append((np.sqrt(mm / (mp * m)), -np.sqrt(mp / (mm * m))))
    return out


def haar_coefficients(f, w: StepWeight) -> list[np.ndarray]:
    """``<f, h_I^w>_w`` for every non-leaf interval, by level."""
    fv = f.values if hasattr(f, "values") else np.asarray(f, dtype=float)
    integ = level_integrals(fv * w.values, w.depth)
    out = []
    for j, (plus, minus) in enumerate(haar_profiles(w)):
        out.append(plus * integ[j + 1][1::2] + minus * integ[j + 1][0::2])
    return out


def plain_haar_coefficients(f) -> list[np.ndarray]:
    """``<f, h_I>`` with the unweighted Haar system."""
    fv = f.values if hasattr(f, "values") else np.asarray(f, dtype=float)
    depth = int(np.log2(fv.size))
    integ = level_integrals(fv, depth)
    return [(integ[j + 1][1::2] - integ[j + 1][0::2]) * 2.0 ** (j / 2) for j in range(depth)]


def weighted_deltas(f, w: StepWeight) -> list[np.ndarray]:
    """``Delta_I^w f`` for every non-leaf interval, by level."""
    avg = w.all_weighted_averages(f)
    return [avg[j + 1][1::2] - avg[j + 1][0::2] for j in range(w.depth)]


def haar_matrix(w: StepWeight) -> np.ndarray:
    """Rows are ``h_I^w`` sampled on the leaves, in heap order."""
    tree = w.tree
    n = tree.depth
    H = np.zeros((tree.n_nonleaf, tree.n_leaves))
    row = 0
    for j, (plus, minus) in enumerate(haar_profiles(w)):
        half = 1 << (n - j - 1)
        for k in range(1 << j):
            start = 2 * k * half
            H[row, start:start + half] = minus[k]
            H[row, start + half:start + 2 * half] = plus[k]
            row += 1
    return H


def plain_haar_matrix(tree: DyadicTree) -> np.ndarray:
    return haar_matrix(StepWeight.constant(tree))


def haar_functionals(w: StepWeight) -> np.ndarray:
    """Matrix ``G`` with ``G @ f.values = <f, h_I^w>_w`` in heap order."""
    return haar_matrix(w) * (w.values * 2.0 ** (-w.depth))[None, :]
