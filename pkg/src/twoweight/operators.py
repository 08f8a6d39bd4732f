"""Dyadic operators acting on step functions.

The weighted square function sums over intervals that have a parent in the
tree (levels ``1..N``); the root term is dropped because its parent lies
outside ``[0, 1)``.  Haar multipliers, paraproducts and the positive operator
sum over non-leaf intervals, the only ones carrying a Haar function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .characteristics import CarlesonSequence
from .dyadic import DyadicError, DyadicIndex, DyadicTree, StepFunction, StepWeight, level_integrals
from .haar import plain_haar_coefficients

ROOT_TRUNCATION = "root-truncated"


class NearSingular(DyadicError):
    pass


def _heap(b, tree: DyadicTree) -> np.ndarray:
    values = np.asarray(getattr(b, "values", b), dtype=float)
    if values.shape != (tree.n_nonleaf,):
        raise DyadicError(f"expected {tree.n_nonleaf} interval coefficients, got {values.shape}")
    return values


def _fv(f) -> np.ndarray:
    return f.values if hasattr(f, "values") else np.asarray(f, dtype=float)


@dataclass(frozen=True)
class SignPattern:
    tree: DyadicTree
    signs: np.ndarray

    def __post_init__(self):
        s = np.array(self.signs, dtype=float)
        if s.shape != (self.tree.n_nonleaf,) or not np.all(np.abs(s) == 1):
            raise DyadicError("a sign pattern needs one +1/-1 per non-leaf interval")
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)

    @classmethod
    def constant(cls, tree: DyadicTree, sign: int = 1):
        return cls(tree, np.full(tree.n_nonleaf, float(sign)))

    @classmethod
    def from_json(cls, tree: DyadicTree, spec) -> SignPattern:
        if isinstance(spec, str):
            if spec in ("all+", "+"):
                return cls.constant(tree, 1)
            if spec in ("all-", "-"):
                return cls.constant(tree, -1)
            raise DyadicError(f"unknown sign pattern {spec!r}")
        default = spec.get("default", 1)
        signs = np.full(tree.n_nonleaf, float(default))
        for key, value in spec.get("overrides", {}).items():
            signs[tree.heap_index(DyadicIndex.from_key(key))] = value
        return cls(tree, signs)

    def to_json(self) -> dict:
        default = 1 if np.sum(self.signs > 0) * 2 >= self.signs.size else -1
        overrides = {
            self.tree.heap_interval(n).key(): int(s)
            for n, s in enumerate(self.signs)
            if s != default
        }
        return {"default": default, "overrides": overrides}

    def __neg__(self):
        return SignPattern(self.tree, -self.signs)

    def __getitem__(self, I: DyadicIndex) -> int:
        return int(self.signs[self.tree.heap_index(I)])


@dataclass(frozen=True)
class HaarMultiplierSpec:
    weight: StepWeight
    exponent: float = 1.0
    signs: SignPattern = None

    def __post_init__(self):
        if self.signs is None:
            object.__setattr__(self, "signs", SignPattern.constant(self.weight.tree))


def square_function_values(w: StepWeight, f) -> np.ndarray:
    tree = w.tree
    avg = w.all_weighted_averages(_fv(f))
    total = np.zeros(tree.n_leaves)
    for j in range(1, tree.depth + 1):
        d = avg[j] - np.repeat(avg[j - 1], 2)
        total += tree.to_leaves(d ** 2, j)
    return np.sqrt(total)


def apply_square_function(w: StepWeight, f) -> StepFunction:
    return StepFunction(w.tree, square_function_values(w, f))


def apply_haar_multiplier(spec: HaarMultiplierSpec, f) -> StepFunction:
    """``sum_I sigma_I (w(x)/<w>_I)^t <f, h_I> h_I(x)`` with plain Haar functions."""
    w, t = spec.weight, float(spec.exponent)
    tree = w.tree
    n = tree.depth
    coef = plain_haar_coefficients(_fv(f))
    sigma = tree.split_heap(spec.signs.signs)
    avgs = w.all_averages()
    out = np.zeros(tree.n_leaves)
    for j in range(n):
        # h_I on leaves: +|I|^{-1/2} on the right half, minus on the left
        amp = sigma[j] * coef[j] * 2.0 ** (j / 2) * avgs[j] ** (-t)
        half = tree.to_leaves(np.stack([-amp, amp], axis=1).ravel(), j + 1)
        out += half
    return StepFunction(tree, out * w.values ** t)


def apply_paraproduct(b, f) -> StepFunction:
    """``pi_b f = sum_J <f>_J b_J h_J``."""
    fv = _fv(f)
    n = int(np.log2(fv.size))
    tree = DyadicTree(n)
    bl = tree.split_heap(_heap(b, tree))
    avgs = [m * 2.0 ** j for j, m in enumerate(level_integrals(fv, n))]
    out = np.zeros(tree.n_leaves)
    for j in range(n):
        amp = avgs[j] * bl[j] * 2.0 ** (j / 2)
        out += tree.to_leaves(np.stack([-amp, amp], axis=1).ravel(), j + 1)
    return StepFunction(tree, out)


def product_weight_values(b, tree: DyadicTree) -> np.ndarray:
    """Leafwise ``prod_J (1 + b_J h_J)`` over all non-leaf ``J``."""
    bl = tree.split_heap(_heap(b, tree))
    out = np.ones(tree.n_leaves)
    for j in range(tree.depth):
        s = bl[j] * 2.0 ** (j / 2)
        out *= tree.to_leaves(np.stack([1.0 - s, 1.0 + s], axis=1).ravel(), j + 1)
    return out


def check_resolvent_slack(b, tree: DyadicTree, margin: float = 1e-6):
    bl = tree.split_heap(_heap(b, tree))
    worst = max(float(np.max(np.abs(bl[j]) * 2.0 ** (j / 2))) for j in range(tree.depth))
    if worst >= 1.0 - margin:
        raise NearSingular(f"max |b_I|/sqrt|I| = {worst:.6g} is too close to 1")
    return worst


def apply_product_resolvent(b, f, check: bool = True) -> StepFunction:
    """``P_b f`` through the product formula.

    ``P_b f = sum_I w(x) / (<w>_I (1 + b_I h_I(x))) <f, h_I> h_I(x)`` where
    ``w = prod_J (1 + b_J h_J)``.  With ``check`` the result is confirmed to
    solve ``(Id - pi_b) g = f - <f>_root`` to 1e-8.
    """
    fv = _fv(f)
    n = int(np.log2(fv.size))
    tree = DyadicTree(n)
    bvals = _heap(b, tree)
    check_resolvent_slack(bvals, tree)
    bl = tree.split_heap(bvals)
    w = product_weight_values(bvals, tree)
    wavg = [m * 2.0 ** j for j, m in enumerate(level_integrals(w, n))]
    coef = plain_haar_coefficients(fv)
    out = np.zeros(tree.n_leaves)
    for j in range(n):
        s = bl[j] * 2.0 ** (j / 2)
        h = 2.0 ** (j / 2)
        # per half-interval: factor 1 / (<w>_I (1 + b_I h_I)) times <f,h_I> h_I
        minus = -coef[j] * h / (wavg[j] * (1.0 - s))
        plus = coef[j] * h / (wavg[j] * (1.0 + s))
        out += tree.to_leaves(np.stack([minus, plus], axis=1).ravel(), j + 1)
    g = StepFunction(tree, out * w)
    if check:
        residual = g.values - apply_paraproduct(bvals, g).values - (fv - fv.mean())
        scale = max(1.0, float(np.max(np.abs(fv))), float(np.max(np.abs(g.values))))
        if np.max(np.abs(residual)) > 1e-8 * scale:
            raise NearSingular("product formula failed the resolvent identity check")
    return g


def apply_positive_operator(w: StepWeight, lam: CarlesonSequence, f) -> StepFunction:
    """``P_{w,lambda} f(x) = sum_{I ni x} w(x) lambda_I <f>_I / |I|``."""
    tree = w.tree
    fv = _fv(f)
    avgs = [m * 2.0 ** j for j, m in enumerate(level_integrals(fv, tree.depth))]
    ll = tree.split_heap(_heap(lam, tree))
    out = np.zeros(tree.n_leaves)
    for j in range(tree.depth):
        out += tree.to_leaves(ll[j] * avgs[j] * 2.0 ** j, j)
    return StepFunction(tree, out * w.values)


def lambda_from_weights(u: StepWeight, v: StepWeight, w: StepWeight) -> CarlesonSequence:
    """``|Delta_I u^{-1}|/<u^{-1}>_I * |Delta_I(vw^2)|/<vw^2>_I * |I|/<w>_I``."""
    tree = w.tree
    n = tree.depth
    ui = [m * 2.0 ** j for j, m in enumerate(level_integrals(1.0 / u.values, n))]
    vw2 = [m * 2.0 ** j for j, m in enumerate(level_integrals(v.values * w.values ** 2, n))]
    wa = w.all_averages()
    levels = []
    for j in range(n):
        du = np.abs(ui[j + 1][1::2] - ui[j + 1][0::2]) / ui[j]
        dv = np.abs(vw2[j + 1][1::2] - vw2[j + 1][0::2]) / vw2[j]
        levels.append(du * dv * 2.0 ** (-j) / wa[j])
    return CarlesonSequence.from_levels(tree, levels)


# ---------------------------------------------------------------------------
# matrices in the leaf basis (column k = image of the k-th leaf indicator)


def operator_matrix(op, tree: DyadicTree) -> np.ndarray:
    n = tree.n_leaves
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        cols.append(_fv(op(StepFunction(tree, e))))
    return np.stack(cols, axis=1)


def haar_multiplier_pieces(w: StepWeight, t: float) -> np.ndarray:
    """``T_I`` matrices with ``T_{w,sigma} = sum_I sigma_I T_I``, heap order."""
    tree = w.tree
    n = tree.depth
    wt = w.values ** t
    cell = 2.0 ** (-n)
    pieces = np.zeros((tree.n_nonleaf, tree.n_leaves, tree.n_leaves))
    row = 0
    avgs = w.all_averages()
    for j in range(n):
        for k in range(1 << j):
            I = DyadicIndex(j, k)
            h = np.zeros(tree.n_leaves)
            h[tree.cells(I.left())] = -(2.0 ** (j / 2))
            h[tree.cells(I.right())] = 2.0 ** (j / 2)
            pieces[row] = np.outer(wt * h / avgs[j][k] ** t, h * cell)
            row += 1
    return pieces
