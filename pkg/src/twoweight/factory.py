"""Weight constructors: FKP products, power weights, seeded random doubling
weights, pointwise algebra, and the JSON weight-spec format."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dyadic import BadExponent, DyadicError, DyadicIndex, DyadicTree, StepWeight, level_integrals
from .operators import product_weight_values


class SlackViolation(DyadicError):
    pass


class SpecError(DyadicError):
    pass


def _scaled(values: np.ndarray, tree: DyadicTree) -> np.ndarray:
    """``|b_I| / sqrt|I|`` in heap order."""
    out = np.empty_like(values)
    for j, seg in enumerate(tree.split_heap(values)):
        out[(1 << j) - 1:(1 << (j + 1)) - 1] = np.abs(seg) * 2.0 ** (j / 2)
    return out


@dataclass(frozen=True)
class FkpCoefficients:
    """Signed ``b_I`` on the non-leaf intervals with ``|b_I|/sqrt|I| <= 1 - slack``."""

    tree: DyadicTree
    values: np.ndarray
    slack: float
    normalization: float = 1.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.tree.n_nonleaf,):
            raise SpecError(f"expected {self.tree.n_nonleaf} coefficients, got {vals.shape}")
        if not 0 < self.slack <= 1:
            raise SlackViolation(f"slack must lie in (0, 1], got {self.slack}")
        worst = float(np.max(_scaled(vals, self.tree))) if vals.size else 0.0
        if worst > 1.0 - self.slack + 1e-15:
            raise SlackViolation(f"|b_I|/sqrt|I| reaches {worst:.6g} > 1 - slack = {1 - self.slack:.6g}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_map(cls, tree: DyadicTree, mapping: Mapping[str, float], slack: float | None = None):
        vals = np.zeros(tree.n_nonleaf)
        for key, value in mapping.items():
            vals[tree.heap_index(DyadicIndex.from_key(key))] = float(value)
        if slack is None:
            slack = 1.0 - float(np.max(_scaled(vals, tree)))
        return cls(tree, vals, slack)

    def __getitem__(self, I: DyadicIndex) -> float:
        return float(self.values[self.tree.heap_index(I)])

    def scaled_max(self) -> float:
        return float(np.max(_scaled(self.values, self.tree)))


def fkp_product(b: FkpCoefficients, tree: DyadicTree | None = None) -> StepWeight:
    """Leafwise ``prod_J (1 + b_J h_J)``; a unit-mass weight."""
    tree = tree or b.tree
    if tree != b.tree:
        raise SpecError("coefficients belong to a different tree")
    return StepWeight(tree, product_weight_values(b.values, tree))


def extract_coefficients(w: StepWeight) -> FkpCoefficients:
    """``b_I = <w, h_I> / <w>_I`` after normalising ``w`` to unit mass."""
    tree = w.tree
    total = w.mass()
    vals = w.values / total
    integ = level_integrals(vals, tree.depth)
    levels = []
    for j in range(tree.depth):
        inner = (integ[j + 1][1::2] - integ[j + 1][0::2]) * 2.0 ** (j / 2)
        levels.append(inner / (integ[j] * 2.0 ** j))
    b = tree.join_heap(levels)
    worst = float(np.max(_scaled(b, tree)))
    return FkpCoefficients(tree, b, 1.0 - worst, normalization=total)


def power_weight(alpha: float, tree: DyadicTree) -> StepWeight:
    """Exact cell averages of ``x^alpha``."""
    if not alpha > -1:
        raise BadExponent(f"x^alpha is not integrable at 0 for alpha = {alpha}")
    k = np.arange(tree.n_leaves, dtype=float)
    a1 = alpha + 1.0
    vals = ((k + 1.0) ** a1 - k ** a1) * 2.0 ** (-tree.depth * alpha) / a1
    return StepWeight(tree, vals)


def _uniform(seed: int, stream: int, level: int, position: int) -> float:
    """Counter-based uniform in [0, 1) keyed by (seed, stream, level, position)."""
    bitgen = np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, stream], counter=[level, position, 0, 0])
    return float(np.random.Generator(bitgen).random())


def random_fkp_coefficients(seed: int, epsilon: float, tree: DyadicTree, stream: int = 0) -> FkpCoefficients:
    if not 0 < epsilon < 1:
        raise SpecError(f"epsilon must lie in (0, 1), got {epsilon}")
    vals = np.empty(tree.n_nonleaf)
    bound = 1.0 - epsilon
    for n in range(tree.n_nonleaf):
        I = tree.heap_interval(n)
        u = _uniform(seed, stream, I.level, I.position)
        vals[n] = (2.0 * u - 1.0) * bound * I.length ** 0.5
    return FkpCoefficients(tree, vals, epsilon)


def random_doubling_weight(seed: int, epsilon: float, tree: DyadicTree, stream: int = 0) -> StepWeight:
    """FKP product of i.i.d. uniform ``b_I`` in ``[-(1-eps) sqrt|I|, (1-eps) sqrt|I|]``."""
    return fkp_product(random_fkp_coefficients(seed, epsilon, tree, stream))


# ---------------------------------------------------------------------------
# pointwise weight algebra

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_TERM = re.compile(
    r"\s*(?P<op>[*/])?\s*(?:(?P<one>1)(?![\w.^])|(?P<name>[A-Za-z_]\w*)"
    r"(?:\s*\^\s*(?P<paren>\()?\s*(?P<num>" + _NUMBER + r")(?:\s*/\s*(?P<den>" + _NUMBER + r"))?"
    r"\s*(?(paren)\)))?)\s*"
)


def weight_algebra(expr: str, **weights: StepWeight) -> StepWeight:
    """Evaluate a product of powers such as ``"u^-1 * w^2"`` leafwise.

    Factors are ``name`` or ``name^exponent`` joined by ``*`` or ``/``;
    exponents may be fractions (``v^1/2``) or decimals.  ``1`` stands for the
    unit weight.
    """
    result = None
    tree = next(iter(weights.values())).tree if weights else None
    pos, first = 0, True
    while pos < len(expr):
        m = _TERM.match(expr, pos)
        if not m or m.end() == pos or (first and m.group("op")) or (not first and not m.group("op")):
            raise SpecError(f"cannot parse {expr!r} at position {pos}")
        pos, first = m.end(), False
        if m.group("one"):
            continue
        name = m.group("name")
        if name not in weights:
            raise SpecError(f"unknown weight {name!r}")
        power = float(m.group("num")) if m.group("num") else 1.0
        if m.group("den"):
            power /= float(m.group("den"))
        if m.group("op") == "/":
            power = -power
        factor = weights[name].values ** power
        result = factor if result is None else result * factor
    if tree is None:
        raise SpecError("no weights supplied")
    if result is None:
        result = np.ones(tree.n_leaves)
    return StepWeight(tree, result)


# ---------------------------------------------------------------------------
# JSON weight specs


def parse_weight_spec(spec, depth: int | None = None, seed: int | None = None) -> StepWeight:
    """Build a weight from a spec.

    Accepts ``"const1"``/``"constC"``, a JSON string, or a dict with
    ``type`` in ``leaves | fkp | power | random``; a bare
    ``{"depth": N, "leaves": [...]}`` is read as ``leaves``.  ``depth`` fills a
    missing depth; ``seed`` fills a missing random seed.
    """
    if isinstance(spec, str):
        text = spec.strip()
        m = re.fullmatch(r"const([0-9.eE+-]+)", text)
        if m:
            if depth is None:
                raise SpecError("constant weight needs a depth")
            return StepWeight.constant(DyadicTree(depth), float(m.group(1)))
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"malformed weight spec {spec!r}: {exc}") from exc
    if not isinstance(spec, dict):
        raise SpecError(f"weight spec must be an object, got {type(spec).__name__}")
    kind = spec.get("type", "leaves")
    d = spec.get("depth", depth)
    try:
        if kind == "leaves":
            leaves = spec["leaves"]
            if d is None:
                d = int(np.log2(len(leaves)))
            return StepWeight(DyadicTree(int(d)), leaves)
        if d is None:
            raise SpecError(f"{kind} weight needs a depth")
        tree = DyadicTree(int(d))
        if kind == "const":
            return StepWeight.constant(tree, float(spec.get("value", 1.0)))
        if kind == "fkp":
            b = FkpCoefficients.from_map(tree, spec.get("b", {}), spec.get("slack"))
            return fkp_product(b)
        if kind == "power":
            return power_weight(float(spec["alpha"]), tree)
        if kind == "random":
            s = spec.get("seed", seed)
            if s is None:
                raise SpecError("random weight needs a seed")
            return random_doubling_weight(int(s), float(spec.get("epsilon", 0.5)), tree, int(spec.get("stream", 0)))
    except KeyError as exc:
        raise SpecError(f"weight spec missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DyadicError):
            raise
        raise SpecError(f"malformed weight spec: {exc}") from exc
    raise SpecError(f"unknown weight type {kind!r}")


def weight_to_spec(w: StepWeight) -> dict:
    return {"type": "leaves", "depth": w.depth, "leaves": w.values.tolist()}
