"""Finite dyadic tree on [0, 1) and piecewise-constant functions on its leaves.

An interval ``[k 2^-j, (k+1) 2^-j)`` is a :class:`DyadicIndex` ``(j, k)``.  A
tree of depth ``N`` holds every interval with ``0 <= j <= N``; the ``2^N``
level-``N`` intervals are the leaf cells on which weights and functions are
constant.

Per-interval quantities are stored level by level: ``arr[j][k]`` belongs to
``(j, k)``.  Sequences living on non-leaf intervals only (Carleson sequences,
sign patterns, FKP coefficients) use a flat heap layout where ``(j, k)`` sits at
``2^j - 1 + k``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

DEFAULT_DEPTH = 8
HARD_MAX_DEPTH = 12


class DyadicError(ValueError):
    """Base class for errors raised by the dyadic machinery."""


class OutOfTree(DyadicError):
    pass


class LeafInterval(DyadicError):
    pass


class RootInterval(DyadicError):
    pass


class BadExponent(DyadicError):
    pass


class NonPositiveWeight(DyadicError):
    pass


def max_depth() -> int:
    """Depth cap; ``DYADIC_MAX_DEPTH`` may lower it but never raise it."""
    env = os.environ.get("DYADIC_MAX_DEPTH")
    if env is None:
        return HARD_MAX_DEPTH
    try:
        value = int(env)
    except ValueError:
        return HARD_MAX_DEPTH
    return max(1, min(HARD_MAX_DEPTH, value))


@dataclass(frozen=True, order=True)
class DyadicIndex:
    level: int
    position: int

    def __post_init__(self):
        if self.level < 0 or not 0 <= self.position < (1 << self.level):
            raise OutOfTree(f"no dyadic interval ({self.level}, {self.position})")

    @property
    def length(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def left_end(self) -> float:
        return self.position * self.length

    def parent(self) -> DyadicIndex:
        if self.level == 0:
            raise OutOfTree("the root has no parent inside [0, 1)")
        return DyadicIndex(self.level - 1, self.position >> 1)

    def sibling(self) -> DyadicIndex:
        if self.level == 0:
            raise OutOfTree("the root has no sibling inside [0, 1)")
        return DyadicIndex(self.level, self.position ^ 1)

    def left(self) -> DyadicIndex:
        return DyadicIndex(self.level + 1, 2 * self.position)

    def right(self) -> DyadicIndex:
        return DyadicIndex(self.level + 1, 2 * self.position + 1)

    def contains(self, other: DyadicIndex) -> bool:
        """True when ``other`` is a (not necessarily strict) dyadic subinterval."""
        if other.level < self.level:
            return False
        return other.position >> (other.level - self.level) == self.position

    def key(self) -> str:
        return f"{self.level},{self.position}"

    @classmethod
    def from_key(cls, key: str) -> DyadicIndex:
        j, k = key.split(",")
        return cls(int(j), int(k))

    def __str__(self):
        return f"({self.level},{self.position})"


ROOT = DyadicIndex(0, 0)


@dataclass(frozen=True)
class DyadicTree:
    depth: int = DEFAULT_DEPTH

    def __post_init__(self):
        if not isinstance(self.depth, (int, np.integer)) or self.depth < 1:
            raise DyadicError(f"tree depth must be an integer >= 1, got {self.depth!r}")
        if self.depth > max_depth():
            raise DyadicError(f"tree depth {self.depth} exceeds the cap {max_depth()}")

    @property
    def root(self) -> DyadicIndex:
        return ROOT

    @property
    def n_leaves(self) -> int:
        return 1 << self.depth

    @property
    def n_intervals(self) -> int:
        return (1 << (self.depth + 1)) - 1

    @property
    def n_nonleaf(self) -> int:
        return (1 << self.depth) - 1

    def __contains__(self, I: DyadicIndex) -> bool:
        return I.level <= self.depth

    def check(self, I: DyadicIndex) -> DyadicIndex:
        if I.level > self.depth:
            raise OutOfTree(f"{I} is below the leaves of a depth-{self.depth} tree")
        return I

    def is_leaf(self, I: DyadicIndex) -> bool:
        return self.check(I).level == self.depth

    def navigate(self, I: DyadicIndex, rel: str) -> DyadicIndex:
        """Parent, sibling, left or right child of ``I`` inside this tree."""
        self.check(I)
        if rel == "parent":
            return I.parent()
        if rel == "sibling":
            return I.sibling()
        if rel in ("left", "right"):
            if I.level == self.depth:
                raise OutOfTree(f"leaf {I} has no children")
            return I.left() if rel == "left" else I.right()
        raise ValueError(f"unknown relative {rel!r}")

    def intervals(self) -> Iterator[DyadicIndex]:
        for j in range(self.depth + 1):
            for k in range(1 << j):
                yield DyadicIndex(j, k)

    def nonleaf(self) -> Iterator[DyadicIndex]:
        for j in range(self.depth):
            for k in range(1 << j):
                yield DyadicIndex(j, k)

    def subintervals(self, J: DyadicIndex, include_leaves: bool = True) -> Iterator[DyadicIndex]:
        """Enumerate D(J) within the tree, coarse to fine."""
        self.check(J)
        last = self.depth if include_leaves else self.depth - 1
        for j in range(J.level, last + 1):
            shift = j - J.level
            for k in range(J.position << shift, (J.position + 1) << shift):
                yield DyadicIndex(j, k)

    def cells(self, I: DyadicIndex) -> slice:
        """Slice of leaf cells covered by ``I``."""
        self.check(I)
        span = 1 << (self.depth - I.level)
        return slice(I.position * span, (I.position + 1) * span)

    def heap_index(self, I: DyadicIndex) -> int:
        if I.level >= self.depth:
            raise LeafInterval(f"{I} is a leaf; heap sequences live on non-leaf intervals")
        return (1 << I.level) - 1 + I.position

    def heap_interval(self, n: int) -> DyadicIndex:
        j = (n + 1).bit_length() - 1
        return DyadicIndex(j, n + 1 - (1 << j))

    def split_heap(self, flat: np.ndarray) -> list[np.ndarray]:
        """Flat non-leaf sequence -> per-level arrays for levels ``0..N-1``."""
        return [flat[(1 << j) - 1:(1 << (j + 1)) - 1] for j in range(self.depth)]

    def join_heap(self, levels: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([np.asarray(a, dtype=float) for a in levels[: self.depth]])

    def to_leaves(self, level_values: np.ndarray, level: int) -> np.ndarray:
        """Broadcast one value per level-``level`` interval onto the leaf cells."""
        return np.repeat(level_values, 1 << (self.depth - level))


# ---------------------------------------------------------------------------
# level-wise kernels on raw arrays


def level_integrals(cell_values: np.ndarray, depth: int) -> list[np.ndarray]:
    """Integrals over every dyadic interval of a leaf-constant function.

    Built bottom-up by pairwise sums so that the value on a parent is exactly
    the sum of the values on its children.
    """
    out = [np.asarray(cell_values, dtype=float) * 2.0 ** (-depth)]
    for _ in range(depth):
        fine = out[-1]
        out.append(fine[0::2] + fine[1::2])
    out.reverse()
    return out


def subtree_sums(terms: Sequence[np.ndarray]) -> list[np.ndarray]:
    """``S_J = sum over I in D(J) of t_I`` for per-level terms ``t``.

    ``terms`` may stop above the leaves (e.g. only non-leaf levels); missing
    finer levels contribute zero.
    """
    sums = [np.array(t, dtype=float) for t in terms]
    for j in range(len(sums) - 2, -1, -1):
        child = sums[j + 1]
        sums[j] = sums[j] + child[0::2] + child[1::2]
    return sums


def children_of(level_values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split the next-finer level into (left/minus, right/plus) halves."""
    return level_values[0::2], level_values[1::2]


def parent_of(level_values: np.ndarray) -> np.ndarray:
    """Values of the parents aligned with a level of children."""
    return np.repeat(level_values, 2)


def lengths(depth: int) -> list[float]:
    return [2.0 ** (-j) for j in range(depth + 1)]


# ---------------------------------------------------------------------------
# step functions and step weights


class StepFunction:
    """Real-valued function, constant on each leaf cell of ``tree``."""

    __slots__ = ("tree", "values", "_integrals")

    def __init__(self, tree: DyadicTree, values):
        values = np.array(values, dtype=float)
        if values.shape != (tree.n_leaves,):
            raise DyadicError(f"expected {tree.n_leaves} leaf values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DyadicError("leaf values must be finite")
        values.setflags(write=False)
        self.tree = tree
        self.values = values
        self._integrals = None

    @classmethod
    def constant(cls, tree: DyadicTree, c: float = 1.0):
        return cls(tree, np.full(tree.n_leaves, float(c)))

    @classmethod
    def indicator(cls, tree: DyadicTree, I: DyadicIndex):
        v = np.zeros(tree.n_leaves)
        v[tree.cells(I)] = 1.0
        return StepFunction(tree, v)

    @property
    def depth(self) -> int:
        return self.tree.depth

    def integrals(self) -> list[np.ndarray]:
        if self._integrals is None:
            self._integrals = level_integrals(self.values, self.depth)
        return self._integrals

    def integral(self, I: DyadicIndex = ROOT) -> float:
        self.tree.check(I)
        return float(self.integrals()[I.level][I.position])

    def average(self, I: DyadicIndex = ROOT) -> float:
        return self.integral(I) / I.length

    def averages(self, level: int) -> np.ndarray:
        return self.integrals()[level] * 2.0 ** level

    def _coerce(self, other):
        if isinstance(other, (StepFunction, StepWeight)):
            if other.tree != self.tree:
                raise DyadicError("operands live on different trees")
            return other.values
        return other

    def __add__(self, other):
        return StepFunction(self.tree, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return StepFunction(self.tree, self.values - self._coerce(other))

    def __rsub__(self, other):
        return StepFunction(self.tree, self._coerce(other) - self.values)

    def __mul__(self, other):
        return StepFunction(self.tree, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return StepFunction(self.tree, self.values / self._coerce(other))

    def __neg__(self):
        return StepFunction(self.tree, -self.values)

    def __eq__(self, other):
        return isinstance(other, StepFunction) and other.tree == self.tree and np.array_equal(
            other.values, self.values
        )

    __hash__ = None

    def __repr__(self):
        return f"StepFunction(depth={self.depth}, values={self.values.tolist()})"

    def to_json(self) -> dict:
        return {"depth": self.depth, "leaves": self.values.tolist()}


class StepWeight:
    """Strictly positive leaf-constant density with cached interval masses."""

    __slots__ = ("tree", "values", "masses")

    def __init__(self, tree: DyadicTree, values):
        values = np.array(values, dtype=float)
        if values.shape != (tree.n_leaves,):
            raise DyadicError(f"expected {tree.n_leaves} leaf values, got shape {values.shape}")
        if not np.all(np.isfinite(values)) or not np.all(values > 0):
            raise NonPositiveWeight("weight leaf values must be finite and strictly positive")
        values.setflags(write=False)
        self.tree = tree
        self.values = values
        self.masses = tuple(level_integrals(values, tree.depth))
        for m in self.masses:
            m.setflags(write=False)

    @classmethod
    def constant(cls, tree: DyadicTree, c: float = 1.0):
        return cls(tree, np.full(tree.n_leaves, float(c)))

    @property
    def depth(self) -> int:
        return self.tree.depth

    def mass(self, I: DyadicIndex = ROOT) -> float:
        self.tree.check(I)
        return float(self.masses[I.level][I.position])

    def average(self, I: DyadicIndex = ROOT) -> float:
        return self.mass(I) / I.length

    def averages(self, level: int) -> np.ndarray:
        return self.masses[level] * 2.0 ** level

    def all_averages(self) -> list[np.ndarray]:
        return [self.averages(j) for j in range(self.depth + 1)]

    def weighted_averages(self, f, level: int) -> np.ndarray:
        """``<f>^w_I`` for every interval at ``level``."""
        fv = f.values if isinstance(f, (StepFunction, StepWeight)) else np.asarray(f, dtype=float)
        span = 1 << (self.depth - level)
        num = (fv * self.values).reshape(-1, span).sum(axis=1) * 2.0 ** (-self.depth)
        return num / self.masses[level]

    def all_weighted_averages(self, f) -> list[np.ndarray]:
        fv = f.values if isinstance(f, (StepFunction, StepWeight)) else np.asarray(f, dtype=float)
        num = level_integrals(fv * self.values, self.depth)
        return [n / m for n, m in zip(num, self.masses)]

    def as_function(self) -> StepFunction:
        return StepFunction(self.tree, self.values)

    # pointwise algebra; results stay weights whenever positivity is automatic

    def _other(self, other):
        if isinstance(other, StepWeight):
            if other.tree != self.tree:
                raise DyadicError("operands live on different trees")
            return other.values
        return other

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            return StepFunction(self.tree, self.values * other.values)
        return StepWeight(self.tree, self.values * self._other(other))

    def __rmul__(self, other):
        if isinstance(other, StepFunction):
            return StepFunction(self.tree, self.values * other.values)
        return StepWeight(self.tree, self.values * other)

    def __truediv__(self, other):
        if isinstance(other, StepFunction):
            return StepFunction(self.tree, self.values / other.values)
        return StepWeight(self.tree, self.values / self._other(other))

    def __rtruediv__(self, other):
        return StepWeight(self.tree, other / self.values)

    def __pow__(self, exponent: float):
        return StepWeight(self.tree, self.values ** float(exponent))

    def reciprocal(self) -> StepWeight:
        return StepWeight(self.tree, 1.0 / self.values)

    def __eq__(self, other):
        return isinstance(other, StepWeight) and other.tree == self.tree and np.array_equal(
            other.values, self.values
        )

    __hash__ = None

    def __repr__(self):
        return f"StepWeight(depth={self.depth}, values={self.values.tolist()})"

    def to_json(self) -> dict:
        return {"depth": self.depth, "leaves": self.values.tolist()}


def mass(w: StepWeight, I: DyadicIndex) -> float:
    return w.mass(I)


def average(w, I: DyadicIndex) -> float:
    return w.average(I)


def weighted_average(f: StepFunction, w: StepWeight, I: DyadicIndex) -> float:
    """``<f>^w_I = int_I f w / w(I)``."""
    w.tree.check(I)
    cells = w.tree.cells(I)
    fv = f.values if isinstance(f, (StepFunction, StepWeight)) else np.asarray(f, dtype=float)
    num = float(np.sum(fv[cells] * w.values[cells])) * 2.0 ** (-w.depth)
    return num / w.mass(I)


def refine(x, times: int = 1):
    """Split every leaf into two equal-valued leaves ``times`` times."""
    tree = DyadicTree(x.depth + times)
    values = np.repeat(x.values, 1 << times)
    return type(x)(tree, values)
