"""Executable checks of the explicit-constant inequalities, with measured slack.

Every asserted claim is a finite statement over the tree, so a failure points at
the implementation.  Claims whose constants are unspecified are recorded as
monitored ratios and never gate anything.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .characteristics import (
    CarlesonSequence,
    a2w_of,
    ainf_and_rh1,
    ap_characteristic,
    beznosova,
    bracket_levels,
    doubling_constant,
    doubling_lemma_levels,
    fkp_sequence,
    joint_a2w,
    joint_a2w_nonroot,
    k_levels,
    modified_delta_levels,
    qr_levels,
    restricted_a2w,
    rhp_characteristic,
    theorem_constants,
    three_weight_forms,
)
from .dyadic import DyadicIndex, DyadicTree, StepWeight, subtree_sums
from .factory import power_weight, random_doubling_weight
from .haar import haar_coefficients, weighted_deltas
from .norms import (
    linear_operator_norm,
    square_function_norm,
    uniform_sigma_norm,
)
from .operators import apply_positive_operator, lambda_from_weights, square_function_values

EIGEN_REL = 1e-9
ARITH = 1e-12

# claimId -> (relative, absolute) tolerance
TOLERANCES: dict[str, tuple[float, float]] = {
    "thm4.1-upper": (EIGEN_REL, 0.0),
    "thm4.2-restricted": (EIGEN_REL, 0.0),
    "thm4.2-carleson": (EIGEN_REL, 0.0),
    "thm4.2-testing": (EIGEN_REL, 0.0),
    "thm4.2-lowerbound": (ARITH, 0.0),
    "cor4.3-joint": (EIGEN_REL, 0.0),
    "prop2.7-sawyer": (EIGEN_REL, 0.0),
    "lem5.6-18D3": (ARITH, 0.0),
    "br14-ln16": (ARITH, 0.0),
    "eq5.2-testing": (EIGEN_REL, 0.0),
    "prop3.1-forms": (0.0, ARITH),
    "qf-identity": (0.0, EIGEN_REL),
    "eq4.5-resummation": (0.0, ARITH),
    "bessel": (ARITH, 0.0),
    "lem6.4-resummation": (ARITH, 0.0),
    "lem6.5-resummation": (ARITH, 0.0),
}

MONITORED = (
    "thm6.1-ratio",
    "beznosova-ratio",
    "cor5.1-a2-ratio",
    "cor5.1-a2log-ratio",
    "cor5.4-rh2-ratio",
    "lem6.4-ratio",
    "lem6.5-ratio",
    "doubling",
)

CLAIM_IDS = tuple(TOLERANCES) + MONITORED

CSV_COLUMNS = ("claimId", "seed", "depth", "lhs", "rhs", "slack", "pass")


@dataclass
class Verdict:
    claimId: str
    lhs: float
    rhs: float
    passed: bool
    context: dict = field(default_factory=dict)
    seed: Optional[int] = None
    depth: Optional[int] = None
    asserted: bool = True

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def relative_slack(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return self.slack / scale if scale > 0 else 0.0

    def row(self) -> dict:
        return {
            "claimId": self.claimId,
            "seed": "" if self.seed is None else self.seed,
            "depth": "" if self.depth is None else self.depth,
            "lhs": repr(float(self.lhs)),
            "rhs": repr(float(self.rhs)),
            "slack": repr(float(self.slack)),
            "pass": "true" if self.passed else "false",
        }

    def to_json(self) -> dict:
        out = {
            "claimId": self.claimId,
            "seed": self.seed,
            "depth": self.depth,
            "lhs": _jnum(self.lhs),
            "rhs": _jnum(self.rhs),
            "slack": _jnum(self.slack),
            "pass": self.passed,
            "asserted": self.asserted,
            "context": self.context,
        }
        return out


def _jnum(x: float):
    x = float(x)
    return x if math.isfinite(x) else None


def judge(claim: str, lhs: float, rhs: float, overrides: Optional[dict] = None, **context) -> Verdict:
    """``pass`` iff ``lhs <= rhs + rel * max(|lhs|, |rhs|) + abs``."""
    rel, ab = TOLERANCES[claim]
    if overrides and claim in overrides:
        o = overrides[claim]
        rel, ab = float(o.get("rel", rel)), float(o.get("abs", ab))
    lhs, rhs = float(lhs), float(rhs)
    ok = lhs <= rhs + rel * max(abs(lhs), abs(rhs)) + ab
    return Verdict(claim, lhs, rhs, bool(ok), context)


def monitor(claim: str, value: float, **context) -> Verdict:
    return Verdict(claim, float(value), float("nan"), True, context, asserted=False)


def _worst_pair(lhs: np.ndarray, rhs: np.ndarray) -> tuple[float, float, int]:
    """Pair with the smallest relative slack."""
    lhs, rhs = np.asarray(lhs, float), np.asarray(rhs, float)
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
    i = int(np.argmin((rhs - lhs) / scale))
    return float(lhs[i]), float(rhs[i]), i


def _flat(levels) -> np.ndarray:
    return np.concatenate([np.asarray(l, float).ravel() for l in levels]) if levels else np.zeros(0)


# ---------------------------------------------------------------------------
# square-function sufficiency and necessity


def verify_sufficiency(u: StepWeight, v: StepWeight, w: StepWeight, norm: Optional[float] = None,
                       consts=None) -> Verdict:
    """``||S_w|| <= sqrt(C1) + 2 sqrt(C2)``."""
    norm = square_function_norm(u, v, w) if norm is None else norm
    c = consts or theorem_constants(u, v, w)
    rhs = math.sqrt(c.thm1C1) + 2.0 * math.sqrt(c.thm1C2)
    return judge("thm4.1-upper", norm, rhs, C1=c.thm1C1, C2=c.thm1C2)


def testing_ratios(u: StepWeight, v: StepWeight, w: StepWeight) -> tuple[np.ndarray, np.ndarray]:
    """For every ``J`` with a parent: ``||S_w f_J||_{L^2(v)} / ||f_J||_{L^2(u)}`` with
    ``f_J = u^{-1} w 1_J``, and the single-term lower bound for its square.

    Rows follow level order ``1..N``.
    """
    tree = w.tree
    cell = 2.0 ** (-tree.depth)
    g = w.values / u.values
    ratios, lower = [], []
    for j in range(1, tree.depth + 1):
        for k in range(1 << j):
            J = DyadicIndex(j, k)
            f = np.zeros(tree.n_leaves)
            sl = tree.cells(J)
            f[sl] = g[sl]
            s = square_function_values(w, f)
            num = float(np.sum(s ** 2 * v.values) * cell)
            m = float(np.sum(f ** 2 * u.values) * cell)
            ratios.append(math.sqrt(num / m))
            wj = w.masses[j][k]
            wp = w.masses[j - 1][k >> 1]
            ws = w.masses[j][k ^ 1]
            lower.append(m * (ws / (wj * wp)) ** 2 * v.masses[j][k])
    return np.array(ratios), np.array(lower)


def verify_necessity(u: StepWeight, v: StepWeight, w: StepWeight, norm: Optional[float] = None,
                     consts=None) -> list[Verdict]:
    """Lower bounds for ``||S_w||^2``: restricted class, Carleson constant,
    testing functions ``u^{-1} w 1_J``, and the doubling cross-check."""
    norm = square_function_norm(u, v, w) if norm is None else norm
    c = consts or theorem_constants(u, v, w)
    sq = norm ** 2
    uw, vw = u / w, v / w
    out = [
        judge("thm4.2-restricted", restricted_a2w(uw, vw, w), sq),
        judge("thm4.2-carleson", c.thm1C2, sq),
    ]
    ratios, lower = testing_ratios(u, v, w)
    i = int(np.argmax(ratios))
    out.append(judge("thm4.2-testing", ratios[i], norm, interval=_level_key(w.tree, i)))
    lhs, rhs, i = _worst_pair(lower, ratios ** 2)
    out.append(judge("thm4.2-lowerbound", lhs, rhs, interval=_level_key(w.tree, i)))
    d = doubling_constant(w)
    out.append(judge("cor4.3-joint", joint_a2w_nonroot(uw, vw, w), d ** 2 * sq, doubling=d))
    return out


def _level_key(tree: DyadicTree, i: int) -> str:
    """Key of the ``i``-th interval in level order starting at level 1."""
    j = 1
    while i >= (1 << j):
        i -= 1 << j
        j += 1
    return DyadicIndex(j, i).key()


# ---------------------------------------------------------------------------
# Sawyer


def sawyer_hypothesis(sigma: StepWeight, omega: StepWeight, lam: CarlesonSequence) -> float:
    """Smallest ``Q`` with ``(1/sigma(J)) sum |<omega>^sigma_I|^2 lam_I <= Q <omega>^sigma_J``."""
    avg = sigma.all_weighted_averages(omega.values)
    n = sigma.depth
    sums = subtree_sums([avg[j] ** 2 * l for j, l in enumerate(lam.levels())])
    return max(float(max(np.max(sums[j] / sigma.masses[j] / avg[j]) for j in range(n))), 0.0)


def sawyer_ratios(sigma: StepWeight, omega: StepWeight, lam: CarlesonSequence, f) -> np.ndarray:
    """``(1/sigma(J)) sum |<f omega^{1/2}>^sigma_I|^2 lam_I / <f^2>^sigma_J`` per non-leaf ``J``."""
    fv = f.values if hasattr(f, "values") else np.asarray(f, float)
    g = fv * np.sqrt(omega.values)
    avg = sigma.all_weighted_averages(g)
    sq = sigma.all_weighted_averages(fv ** 2)
    sums = subtree_sums([avg[j] ** 2 * l for j, l in enumerate(lam.levels())])
    return _flat([sums[j] / sigma.masses[j] / sq[j] for j in range(sigma.depth)])


def verify_sawyer(sigma: StepWeight, omega: StepWeight, lam: CarlesonSequence, fs: Iterable) -> Verdict:
    """Worst ratio over ``f`` and ``J`` against ``4Q``."""
    q = sawyer_hypothesis(sigma, omega, lam)
    worst = 0.0
    count = 0
    for f in fs:
        worst = max(worst, float(np.max(sawyer_ratios(sigma, omega, lam, f))))
        count += 1
    return judge("prop2.7-sawyer", worst, 4.0 * q, Q=q, functions=count)


def sufficiency_sawyer_data(u: StepWeight, v: StepWeight, w: StepWeight):
    """``(sigma, omega, lambda)`` used to bound the third sum: ``sigma = w``,
    ``omega = w u^{-1}`` and ``lambda_I = bracket_I |Delta^w_I(wu^{-1})|^2 / (<wu^{-1}>^w_I)^2``."""
    g = w.values / u.values
    delta = weighted_deltas(g, w)
    avg = w.all_weighted_averages(g)
    br = bracket_levels(v, w)
    lam = CarlesonSequence.from_levels(
        w.tree, [br[j] * delta[j] ** 2 / avg[j] ** 2 for j in range(w.depth)]
    )
    return w, StepWeight(w.tree, g), lam


# ---------------------------------------------------------------------------
# bounded-constant lemmas


def verify_bounded_constant_lemmas(u: StepWeight, w: StepWeight) -> list[Verdict]:
    """``18 D^3 [u^{-1}w]_{A_2(w)}`` lemma, the ``ln 16`` bound, and Beznosova's ratio."""
    lhs = float(max(np.max(l) for l in doubling_lemma_levels(u, w)))
    d = doubling_constant(w)
    a2 = a2w_of(StepWeight(w.tree, w.values / u.values), w)
    out = [judge("lem5.6-18D3", lhs, 18.0 * d ** 3 * a2, doubling=d, a2w=a2)]
    ainf, rh1 = ainf_and_rh1(w)
    out.append(judge("br14-ln16", rh1, math.log(16.0) * ainf))
    ui = u.reciprocal()
    rep = beznosova(fkp_sequence(ui), ui)
    out.append(monitor("beznosova-ratio", rep.ratio, plain=rep.plain_constant, weighted=rep.weighted_constant))
    return out


# ---------------------------------------------------------------------------
# arithmetic identities


def quadratic_form_discrepancy(v: StepWeight, w: StepWeight, f) -> tuple[float, float]:
    """``(||S_w f||^2_{L^2(v)}, sum_I K_I |<f, h^w_I>_w|^2)``."""
    fv = f.values if hasattr(f, "values") else np.asarray(f, float)
    s = square_function_values(w, fv)
    direct = float(np.sum(s ** 2 * v.values) * 2.0 ** (-w.depth))
    coef = haar_coefficients(fv, w)
    form = float(sum(np.sum(k * c ** 2) for k, c in zip(k_levels(v, w), coef)))
    return direct, form


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else 0.0


def verify_identities(u: StepWeight, v: StepWeight, w: StepWeight, rng: np.random.Generator) -> list[Verdict]:
    f = rng.standard_normal(w.tree.n_leaves)
    direct, form = quadratic_form_discrepancy(v, w, f)
    out = [judge("qf-identity", _rel(direct, form), 0.0, direct=direct, form=form)]
    # K_I w(I+) w(I-) / w(I) equals the mass bracket
    k, br = k_levels(v, w), bracket_levels(v, w)
    disc = 0.0
    for j in range(w.depth):
        wm, wp = w.masses[j + 1][0::2], w.masses[j + 1][1::2]
        lhs = k[j] * wm * wp / w.masses[j]
        disc = max(disc, float(np.max(np.abs(lhs - br[j]) / np.abs(br[j]).clip(1e-300))))
    out.append(judge("eq4.5-resummation", disc, 0.0))
    forms = three_weight_forms(u, v, w)
    spread = max(_rel(x, forms[0]) for x in forms[1:])
    out.append(judge("prop3.1-forms", spread, 0.0, forms=list(forms)))
    g = rng.standard_normal(w.tree.n_leaves)
    coef = haar_coefficients(g, w)
    energy = float(sum(np.sum(c ** 2) for c in coef))
    norm2 = float(np.sum(g ** 2 * w.values) * 2.0 ** (-w.depth))
    out.append(judge("bessel", energy, norm2))
    return out


def _swap_dual(u: StepWeight, v: StepWeight, w: StepWeight) -> tuple[StepWeight, StepWeight]:
    """``(u', v')`` with ``u'^{-1} = v w^2`` and ``v' w^2 = u^{-1}``."""
    return (v * w ** 2).reciprocal(), (u * w ** 2).reciprocal()


def resummation_verdict(claim: str, u: StepWeight, v: StepWeight, w: StepWeight) -> Verdict:
    """Each of the two modified-difference sums is at most 3 times the other plus ``Q_J``."""
    s1, s2 = (_flat(x) for x in modified_delta_levels(u, v, w))
    q = _flat(qr_levels(u, v, w)[0][: w.depth])
    l1, r1, i1 = _worst_pair(s1, 3.0 * (s2 + q))
    l2, r2, i2 = _worst_pair(s2, 3.0 * (s1 + q))
    if (r1 - l1) / max(abs(l1), abs(r1), 1e-300) <= (r2 - l2) / max(abs(l2), abs(r2), 1e-300):
        return judge(claim, l1, r1, direction="original<=3(prime+Q)")
    return judge(claim, l2, r2, direction="prime<=3(original+Q)")


# ---------------------------------------------------------------------------
# Haar multiplier report


@dataclass
class HaarMultiplierReport:
    sigma_norm: float
    sigma_mode: str
    sigma_patterns: int
    square_norm_primal: float
    square_norm_dual: float
    positive_norm: float
    c1: float
    c2: float
    c3: float
    c4: float
    bound: float
    ratio: float
    q_max: float
    r_max: float
    cond65: float
    cond66: float
    joint_uw_vw: float
    verdicts: list = field(default_factory=list)

    def to_json(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "verdicts"}
        d["verdicts"] = [v.to_json() for v in self.verdicts]
        return d


def verify_haar_multiplier_equivalence(u: StepWeight, v: StepWeight, w: StepWeight,
                                       budget: int = 1024, seed: int = 0) -> HaarMultiplierReport:
    """Both sides of the Haar-multiplier equivalence at ``t = 1``.

    Asserted: the three-weight identities and the two re-summation
    inequalities.  The ratio of the uniform norm to the sum of the four
    constants is monitored only.
    """
    sig = uniform_sigma_norm(w, 1.0, u, v, budget=budget, seed=seed)
    primal = square_function_norm(u * w ** 2, v * w ** 2, w)
    dual = square_function_norm(v.reciprocal(), u.reciprocal(), w)
    lam = lambda_from_weights(u, v, w)
    c4 = linear_operator_norm(lambda f: apply_positive_operator(w, lam, f), u, v, check=False)
    c = theorem_constants(u, v, w)
    bound = math.sqrt(c.thm61C1) + math.sqrt(c.thm61C2) + math.sqrt(c.thm61C3) + c4
    ratio = sig.value / bound if bound > 0 else 0.0
    joint = joint_a2w(u * w, v * w, w)
    forms = three_weight_forms(u, v, w)
    verdicts = [
        judge("prop3.1-forms", max(_rel(x, forms[0]) for x in forms[1:]), 0.0, forms=list(forms)),
        resummation_verdict("lem6.4-resummation", u, v, w),
        resummation_verdict("lem6.5-resummation", *_swap_dual(u, v, w), w),
        monitor("thm6.1-ratio", ratio, sigma_mode=sig.mode, bound=bound),
    ]
    denom_q = joint * c.cond65
    denom_r = joint * c.cond66
    verdicts.append(monitor("lem6.4-ratio", c.qMax / denom_q if denom_q > 0 else 0.0, qMax=c.qMax))
    verdicts.append(monitor("lem6.5-ratio", c.rMax / denom_r if denom_r > 0 else 0.0, rMax=c.rMax))
    return HaarMultiplierReport(
        sig.value, sig.mode, sig.patterns, primal, dual, c4,
        c.thm61C1, c.thm61C2, c.thm61C3, c4, bound, ratio,
        c.qMax, c.rMax, c.cond65, c.cond66, joint, verdicts,
    )


# ---------------------------------------------------------------------------
# corollaries


def ntv_testing(u: StepWeight, v: StepWeight, norm: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """``int_I |S(u^{-1} 1_I)|^2 v`` and ``||S||^2 int_I u^{-1}`` for every interval ``I``."""
    tree = u.tree
    one = StepWeight.constant(tree)
    norm = square_function_norm(u, v, one) if norm is None else norm
    cell = 2.0 ** (-tree.depth)
    ui = 1.0 / u.values
    lhs, rhs = [], []
    for I in tree.intervals():
        f = np.zeros(tree.n_leaves)
        sl = tree.cells(I)
        f[sl] = ui[sl]
        s = square_function_values(one, f)
        lhs.append(float(np.sum((s ** 2 * v.values)[sl]) * cell))
        rhs.append(norm ** 2 * float(np.sum(ui[sl]) * cell))
    return np.array(lhs), np.array(rhs)


def verify_corollaries(w: StepWeight, u: StepWeight, v: Optional[StepWeight] = None) -> list[Verdict]:
    v = u if v is None else v
    tree = w.tree
    one = StepWeight.constant(tree)
    lhs, rhs = ntv_testing(u, v)
    l, r, i = _worst_pair(lhs, rhs)
    out = [judge("eq5.2-testing", l, r, interval=list(tree.intervals())[i].key())]
    n_u = square_function_norm(u, u, one)
    a2 = ap_characteristic(u, 2.0)
    ainf, _ = ainf_and_rh1(u.reciprocal())
    logf = math.sqrt(max(math.log(ainf), 0.0))
    out.append(monitor("cor5.1-a2-ratio", n_u / a2, norm=n_u, a2=a2))
    out.append(monitor("cor5.1-a2log-ratio", n_u / (a2 * logf) if logf > 0 else 0.0, norm=n_u, a2=a2, ainf=ainf))
    n_w = square_function_norm(one, one, w)
    rh2 = rhp_characteristic(w, 2.0)
    out.append(monitor("cor5.4-rh2-ratio", n_w / rh2 ** 3, norm=n_w, rh2=rh2,
                       ratios=[n_w / rh2 ** k for k in (1, 2, 3)]))
    return out


# ---------------------------------------------------------------------------
# corpus and suite


@dataclass
class Case:
    name: str
    u: StepWeight
    v: StepWeight
    w: StepWeight
    seed: Optional[int] = None

    @property
    def depth(self) -> int:
        return self.w.depth


def random_triple(seed: int, depth: int = 5, epsilon: float = 0.5) -> Case:
    tree = DyadicTree(depth)
    u, v, w = (random_doubling_weight(seed, epsilon, tree, stream=s) for s in range(3))
    return Case(f"random-{seed}", u, v, w, seed)


POWER_ALPHAS = (-0.9, -0.5, 0.5, 1.0)


def power_cases(depth: int = 5) -> list[Case]:
    tree = DyadicTree(depth)
    one = StepWeight.constant(tree)
    out = []
    for a in POWER_ALPHAS:
        p = power_weight(a, tree)
        out += [
            Case(f"power{a}-PP1", p, p, one),
            Case(f"power{a}-11P", one, one, p),
            Case(f"power{a}-PPP", p, p, p),
            Case(f"power{a}-P1P", p, one, p),
        ]
    return out


def fixture_cases() -> list[Case]:
    t1, t2 = DyadicTree(1), DyadicTree(2)
    c1, c2 = StepWeight.constant(t1), StepWeight.constant(t2)
    w13 = StepWeight(t1, [1.0, 3.0])
    return [
        Case("fixture-ones-1", c1, c1, c1),
        Case("fixture-w13", c1, c1, w13),
        Case("fixture-u12-w13", StepWeight(t1, [1.0, 2.0]), c1, w13),
        Case("fixture-ones-2", c2, c2, c2),
        Case("fixture-w1324", c2, c2, StepWeight(t2, [1.0, 3.0, 2.0, 4.0])),
        Case("fixture-mixed-2", StepWeight(t2, [2.0, 1.0, 1.0, 3.0]), StepWeight(t2, [1.0, 1.0, 4.0, 1.0]),
             StepWeight(t2, [1.0, 3.0, 1.0, 1.0])),
    ]


def standard_corpus(depth: int = 5, seeds: Iterable[int] = range(1, 101), epsilon: float = 0.5) -> list[Case]:
    return [random_triple(s, depth, epsilon) for s in seeds] + power_cases(depth) + fixture_cases()


class _CaseCache:
    """Lazily computed per-case quantities shared by several claims."""

    def __init__(self, case: Case):
        self.case = case
        self._norm = None
        self._consts = None

    @property
    def norm(self) -> float:
        if self._norm is None:
            c = self.case
            self._norm = square_function_norm(c.u, c.v, c.w)
        return self._norm

    @property
    def consts(self):
        if self._consts is None:
            c = self.case
            self._consts = theorem_constants(c.u, c.v, c.w)
        return self._consts


def _case_rng(case: Case, salt: int) -> np.random.Generator:
    return np.random.default_rng([0 if case.seed is None else case.seed, salt])


def _claim(cache: _CaseCache, claim: str) -> Verdict:
    c = cache.case
    u, v, w = c.u, c.v, c.w
    if claim == "thm4.1-upper":
        return verify_sufficiency(u, v, w, cache.norm, cache.consts)
    if claim.startswith("thm4.2-") or claim == "cor4.3-joint":
        for verdict in verify_necessity(u, v, w, cache.norm, cache.consts):
            if verdict.claimId == claim:
                return verdict
    if claim == "prop2.7-sawyer":
        sigma, omega, lam = sufficiency_sawyer_data(u, v, w)
        rng = _case_rng(c, 7)
        fs = [rng.standard_normal(w.tree.n_leaves) for _ in range(20)]
        return verify_sawyer(sigma, omega, lam, fs)
    if claim in ("lem5.6-18D3", "br14-ln16", "beznosova-ratio"):
        return next(x for x in verify_bounded_constant_lemmas(u, w) if x.claimId == claim)
    if claim in ("qf-identity", "eq4.5-resummation", "prop3.1-forms", "bessel"):
        return next(x for x in verify_identities(u, v, w, _case_rng(c, 11)) if x.claimId == claim)
    if claim == "lem6.4-resummation":
        return resummation_verdict(claim, u, v, w)
    if claim == "lem6.5-resummation":
        return resummation_verdict(claim, *_swap_dual(u, v, w), w)
    if claim in ("thm6.1-ratio", "lem6.4-ratio", "lem6.5-ratio"):
        rep = verify_haar_multiplier_equivalence(u, v, w, seed=0 if c.seed is None else c.seed)
        return next(x for x in rep.verdicts if x.claimId == claim)
    if claim in ("eq5.2-testing", "cor5.1-a2-ratio", "cor5.1-a2log-ratio", "cor5.4-rh2-ratio"):
        return next(x for x in verify_corollaries(w, u, v) if x.claimId == claim)
    if claim == "doubling":
        return monitor("doubling", doubling_constant(w))
    raise KeyError(f"unknown claim {claim!r}")


def run_claims(case: Case, claims: Iterable[str], overrides: Optional[dict] = None) -> list[Verdict]:
    """One verdict per claim for ``case``; tolerance overrides are re-applied."""
    cache = _CaseCache(case)
    out = []
    for claim in claims:
        v = _claim(cache, claim)
        if overrides and v.asserted and claim in overrides:
            v = judge(claim, v.lhs, v.rhs, overrides, **v.context)
        v.seed, v.depth = case.seed, case.depth
        v.context = {"case": case.name, **v.context}
        out.append(v)
    return out


def sort_verdicts(verdicts: list[Verdict]) -> list[Verdict]:
    return sorted(verdicts, key=lambda x: (x.claimId, -1 if x.seed is None else x.seed, x.context.get("case", "")))


def verdicts_to_csv(verdicts: Iterable[Verdict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for v in verdicts:
        writer.writerow(v.row())
    return buf.getvalue()


def verdicts_to_json(verdicts: Iterable[Verdict]) -> str:
    return json.dumps([v.to_json() for v in verdicts], indent=2)


def slack_histogram(verdicts: Iterable[Verdict], bins: int = 20) -> list[dict]:
    """Histogram of relative slack per asserted claim."""
    by_claim: dict[str, list[float]] = {}
    for v in verdicts:
        if v.asserted:
            by_claim.setdefault(v.claimId, []).append(v.relative_slack)
    rows = []
    for claim in sorted(by_claim):
        counts, edges = np.histogram(np.array(by_claim[claim]), bins=bins, range=(-1.0, 1.0))
        for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
            rows.append({"claimId": claim, "binLow": float(lo), "binHigh": float(hi), "count": int(c)})
    return rows


def failures(verdicts: Iterable[Verdict]) -> list[Verdict]:
    return [v for v in verdicts if v.asserted and not v.passed]


def check_claims(claims: Iterable[str]) -> list[str]:
    claims = list(claims)
    unknown = [c for c in claims if c not in CLAIM_IDS]
    if unknown:
        raise KeyError(f"unknown claim ids: {', '.join(unknown)}")
    return claims


def random_sawyer_instance(seed: int, depth: int = 5, n_functions: int = 20):
    """Random ``(sigma, omega, lambda, fs)`` with ``lambda_I = U_I |I|``."""
    tree = DyadicTree(depth)
    sigma = random_doubling_weight(seed, 0.3, tree, stream=10)
    omega = random_doubling_weight(seed, 0.3, tree, stream=11)
    rng = np.random.default_rng([seed, 13])
    lam = CarlesonSequence.from_levels(tree, [rng.random(1 << j) * 2.0 ** (-j) for j in range(depth)])
    fs = [rng.standard_normal(tree.n_leaves) for _ in range(n_functions)]
    return sigma, omega, lam, fs
