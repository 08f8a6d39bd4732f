"""Exact operator norms on the finite tree.

For an operator ``T`` between ``L^2(u)`` and ``L^2(v)`` on the ``2^N`` leaf
cells, ``||T||^2`` is the top eigenvalue of the pencil ``(A, B)`` with
``<Af, f> = ||Tf||^2_{L^2(v)}`` and ``B = diag(u 2^-N)``.  ``B`` is diagonal, so
the pencil is reduced to the symmetric matrix ``B^{-1/2} A B^{-1/2}``.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple

import numpy as np

from .characteristics import k_levels
from .dyadic import DyadicError, DyadicTree, StepFunction, StepWeight
from .haar import haar_functionals
from .operators import (
    HaarMultiplierSpec,
    SignPattern,
    apply_haar_multiplier,
    haar_multiplier_pieces,
    operator_matrix,
)

POWER_TOL = 1e-12
POWER_MAXITER = 100_000
EXHAUSTIVE_SIGN_LIMIT = 15


class EigenFailure(ArithmeticError):
    pass


class NonlinearOperator(DyadicError):
    pass


@dataclass
class NormResult:
    value: float
    method: str
    iterations: int
    depth: int

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class QuadraticFormPair:
    numerator: np.ndarray
    denominator: np.ndarray  # diagonal of B

    @property
    def dimension(self) -> int:
        return self.denominator.size

    def reduced(self) -> np.ndarray:
        s = 1.0 / np.sqrt(self.denominator)
        M = self.numerator * s[:, None] * s[None, :]
        return 0.5 * (M + M.T)

    def ratio(self, f: np.ndarray) -> float:
        return float(f @ self.numerator @ f) / float(f @ (self.denominator * f))


def square_function_form(u: StepWeight, v: StepWeight, w: StepWeight) -> QuadraticFormPair:
    """``A = sum_I K_I^{w,v} g_I g_I^T`` with ``g_I(f) = <f, h_I^w>_w``."""
    G = haar_functionals(w)
    K = w.tree.join_heap(k_levels(v, w))
    A = G.T @ (K[:, None] * G)
    return QuadraticFormPair(0.5 * (A + A.T), u.values * 2.0 ** (-u.depth))


def power_iteration(M: np.ndarray, tol: float = POWER_TOL, maxiter: int = POWER_MAXITER):
    """Top eigenvalue of a symmetric PSD matrix; returns ``(value, iterations)``."""
    n = M.shape[0]
    x = np.ones(n) + 0.5 * np.random.default_rng(12345).standard_normal(n)
    x /= np.linalg.norm(x)
    prev = None
    for it in range(1, maxiter + 1):
        y = M @ x
        rq = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, it
        if prev is not None and abs(rq - prev) <= tol * abs(rq):
            return rq, it
        prev = rq
        x = y / norm
    raise EigenFailure(f"power iteration did not converge in {maxiter} iterations")


def top_eigenvalue(M: np.ndarray, method: str = "eigh") -> tuple[float, int]:
    if method == "power":
        return power_iteration(M)
    if method != "eigh":
        raise ValueError(f"unknown eigen method {method!r}")
    try:
        vals = np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    if not np.all(np.isfinite(vals)):
        raise EigenFailure("non-finite eigenvalues")
    return max(float(vals[-1]), 0.0), 1


def square_function_norm_result(u, v, w, method: str = "eigh") -> NormResult:
    form = square_function_form(u, v, w)
    lam, iters = top_eigenvalue(form.reduced(), method)
    return NormResult(float(np.sqrt(max(lam, 0.0))), "eigen" if method == "eigh" else method, iters, w.depth)


def square_function_norm(u: StepWeight, v: StepWeight, w: StepWeight, method: str = "eigh") -> float:
    """``||S_w||_{L^2(u) -> L^2(v)}``."""
    return square_function_norm_result(u, v, w, method).value


def square_function_maximizer(u, v, w) -> np.ndarray:
    """Leaf values of a function attaining the norm."""
    form = square_function_form(u, v, w)
    _, vecs = np.linalg.eigh(form.reduced())
    return vecs[:, -1] / np.sqrt(form.denominator)


def conjugate(T: np.ndarray, u: StepWeight, v: StepWeight) -> np.ndarray:
    """``B_v^{1/2} T B_u^{-1/2}``: the operator in orthonormal coordinates."""
    cell = 2.0 ** (-u.depth)
    return np.sqrt(v.values * cell)[:, None] * T / np.sqrt(u.values * cell)[None, :]


def matrix_norm(T: np.ndarray, u: StepWeight, v: StepWeight) -> float:
    M = conjugate(T, u, v)
    lam, _ = top_eigenvalue(M.T @ M)
    return float(np.sqrt(lam))


def _linearity_probe(op, T: np.ndarray, tree: DyadicTree, tol: float = 1e-8):
    rng = np.random.default_rng(2024)
    f, g = rng.standard_normal(tree.n_leaves), rng.standard_normal(tree.n_leaves)
    a, b = 1.7, -0.6
    lhs = np.asarray(op(StepFunction(tree, a * f + b * g)).values)
    rhs = a * np.asarray(op(StepFunction(tree, f)).values) + b * np.asarray(op(StepFunction(tree, g)).values)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    if np.max(np.abs(lhs - rhs)) > tol * scale or np.max(np.abs(T @ f - op(StepFunction(tree, f)).values)) > tol * scale:
        raise NonlinearOperator("operator failed the linearity probe")


def linear_operator_norm(op: Callable, u: StepWeight, v: StepWeight, check: bool = True) -> float:
    """Largest singular value of ``op`` from ``L^2(u)`` into ``L^2(v)``."""
    T = operator_matrix(op, u.tree)
    if check:
        _linearity_probe(op, T, u.tree)
    return matrix_norm(T, u, v)


def haar_multiplier_norm(spec: HaarMultiplierSpec, u: StepWeight, v: StepWeight) -> float:
    return linear_operator_norm(lambda f: apply_haar_multiplier(spec, f), u, v, check=False)


class SigmaNorm(NamedTuple):
    value: float
    pattern: SignPattern
    mode: str
    patterns: int


def _batch_norms(pieces: np.ndarray, signs: np.ndarray) -> np.ndarray:
    M = np.einsum("pi,ijk->pjk", signs, pieces)
    return np.sqrt(np.clip(np.linalg.eigvalsh(np.transpose(M, (0, 2, 1)) @ M)[:, -1], 0.0, None))


def uniform_sigma_norm(
    w: StepWeight,
    t: float,
    u: StepWeight,
    v: StepWeight,
    budget: int = 1024,
    seed: int = 0,
    exhaustive_limit: int = EXHAUSTIVE_SIGN_LIMIT,
    chunk: int = 4096,
) -> SigmaNorm:
    """``sup_sigma ||T^t_{w,sigma}||_{L^2(u) -> L^2(v)}`` and a maximizing pattern.

    Exhaustive when the tree has at most ``exhaustive_limit`` non-leaf
    intervals.  ``sigma`` and ``-sigma`` give the same norm, so the root sign is
    fixed to ``+1`` and the other signs are enumerated.  Otherwise the maximum
    over ``budget`` seeded random patterns plus the two constant patterns is
    returned and flagged ``sampled`` (a lower bound).
    """
    tree = w.tree
    m = tree.n_nonleaf
    raw = haar_multiplier_pieces(w, t)
    cell = 2.0 ** (-tree.depth)
    pieces = np.sqrt(v.values * cell)[None, :, None] * raw / np.sqrt(u.values * cell)[None, None, :]
    best, best_signs, count = -1.0, None, 0
    if m <= exhaustive_limit:
        mode = "exhaustive"
        combos = itertools.product((1.0, -1.0), repeat=m - 1)
        while True:
            block = list(itertools.islice(combos, chunk))
            if not block:
                break
            signs = np.hstack([np.ones((len(block), 1)), np.array(block).reshape(len(block), m - 1)])
            norms = _batch_norms(pieces, signs)
            i = int(np.argmax(norms))
            count += len(block)
            if norms[i] > best:
                best, best_signs = float(norms[i]), signs[i].copy()
    else:
        mode = "sampled"
        rng = np.random.default_rng(seed)
        signs = np.vstack([np.ones(m), -np.ones(m), rng.choice([-1.0, 1.0], size=(budget, m))])
        for start in range(0, signs.shape[0], chunk):
            block = signs[start:start + chunk]
            norms = _batch_norms(pieces, block)
            i = int(np.argmax(norms))
            count += block.shape[0]
            if norms[i] > best:
                best, best_signs = float(norms[i]), block[i].copy()
    return SigmaNorm(best, SignPattern(tree, best_signs), mode, count)
