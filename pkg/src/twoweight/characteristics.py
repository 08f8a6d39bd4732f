"""Weight-class characteristics, summation conditions and Carleson constants.

Every supremum over dyadic intervals is an exhaustive maximum over the
intervals of the tree.  Summation conditions are returned as *local ratios*
(left side divided by the right-side average factor) per interval ``J``; the
corresponding constant is the maximum of those ratios.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .dyadic import (
    BadExponent,
    DyadicIndex,
    DyadicTree,
    LeafInterval,
    StepWeight,
    level_integrals,
    subtree_sums,
)
from .haar import haar_coefficients, weighted_deltas

BUCKLEY_MODES = ("ap", "rhp", "rh1", "fkp", "chmpw")


def _check_p(p: float):
    if not p > 1:
        raise BadExponent(f"exponent must exceed 1, got {p}")


def _averages(values: np.ndarray, depth: int) -> list[np.ndarray]:
    return [m * 2.0 ** j for j, m in enumerate(level_integrals(values, depth))]


def _max_levels(levels) -> float:
    return float(max(np.max(a) for a in levels if a.size))


def _deltas(avgs: list[np.ndarray]) -> list[np.ndarray]:
    """Lebesgue ``Delta_I = <.>_{I+} - <.>_{I-}`` for every non-leaf level."""
    return [avgs[j + 1][1::2] - avgs[j + 1][0::2] for j in range(len(avgs) - 1)]


# ---------------------------------------------------------------------------
# one-weight characteristics


def ap_characteristic(w: StepWeight, p: float = 2.0) -> float:
    _check_p(p)
    dual = _averages(w.values ** (-1.0 / (p - 1.0)), w.depth)
    return _max_levels(a * d ** (p - 1.0) for a, d in zip(w.all_averages(), dual))


def rhp_characteristic(w: StepWeight, p: float = 2.0) -> float:
    _check_p(p)
    power = _averages(w.values ** p, w.depth)
    return _max_levels(q ** (1.0 / p) / a for q, a in zip(power, w.all_averages()))


def ainf_and_rh1(w: StepWeight) -> tuple[float, float]:
    logs = _averages(np.log(w.values), w.depth)
    wlogw = _averages(w.values * np.log(w.values), w.depth)
    avgs = w.all_averages()
    ainf = _max_levels(a * np.exp(-l) for a, l in zip(avgs, logs))
    rh1 = _max_levels(x / a - np.log(a) for x, a in zip(wlogw, avgs))
    return ainf, max(rh1, 0.0)


def doubling_constant(w: StepWeight) -> float:
    m = w.masses
    return _max_levels(np.repeat(m[j - 1], 2) / m[j] for j in range(1, w.depth + 1))


# ---------------------------------------------------------------------------
# joint and three-weight conditions


def joint_ap_w(u: StepWeight, v: StepWeight, w: StepWeight, p: float = 2.0) -> float:
    """``sup_I <v>^w_I (<u^{-1/(p-1)}>^w_I)^{p-1}``."""
    _check_p(p)
    vv = w.all_weighted_averages(v.values)
    uu = w.all_weighted_averages(u.values ** (-1.0 / (p - 1.0)))
    return _max_levels(a * b ** (p - 1.0) for a, b in zip(vv, uu))


def joint_a2w(u: StepWeight, v: StepWeight, w: StepWeight) -> float:
    return joint_ap_w(u, v, w, 2.0)


def joint_rhp_w(u: StepWeight, v: StepWeight, w: StepWeight, p: float = 2.0) -> float:
    """``sup_I (<v^p>^w_I)^{1/p} / <u>^w_I``."""
    _check_p(p)
    vv = w.all_weighted_averages(v.values ** p)
    uu = w.all_weighted_averages(u.values)
    return _max_levels(a ** (1.0 / p) / b for a, b in zip(vv, uu))


def three_weight_levels(u: StepWeight, v: StepWeight, w: StepWeight) -> list[np.ndarray]:
    """``<v w^2>_I <u^{-1}>_I / <w>_I^2`` per interval."""
    n = w.depth
    a = _averages(v.values * w.values ** 2, n)
    b = _averages(1.0 / u.values, n)
    return [x * y / z ** 2 for x, y, z in zip(a, b, w.all_averages())]


def three_weight_a2(u: StepWeight, v: StepWeight, w: StepWeight) -> float:
    return _max_levels(three_weight_levels(u, v, w))


def three_weight_forms(u: StepWeight, v: StepWeight, w: StepWeight) -> tuple[float, float, float, float]:
    """The four equivalent three-weight quantities, each by its own definition.

    (i) the Lebesgue-average form, (ii) ``[uw, vw]_{A_2(w)}``,
    (iii) ``[v^{-1}w^{-1}, u^{-1}w^{-1}]_{A_2(w)}``, and
    (iv) ``[uw, v^{1/2}u^{1/2}w]^2_{RH_2(u^{-1})}``.
    """
    first = three_weight_a2(u, v, w)
    second = joint_a2w(u * w, v * w, w)
    third = joint_a2w((v * w).reciprocal(), (u * w).reciprocal(), w)
    fourth = joint_rhp_w(u * w, (v ** 0.5) * (u ** 0.5) * w, u.reciprocal(), 2.0) ** 2
    return first, second, third, fourth


def restricted_levels(u: StepWeight, v: StepWeight, w: StepWeight) -> list[np.ndarray]:
    """Per-interval terms of the restricted class, levels ``1..N`` (index 0 empty)."""
    uu = w.all_weighted_averages(1.0 / u.values)
    vv = w.all_weighted_averages(v.values)
    out = [np.zeros(0)]
    for j in range(1, w.depth + 1):
        m = w.masses[j]
        sib = m.reshape(-1, 2)[:, ::-1].ravel()
        ratio = sib / np.repeat(w.masses[j - 1], 2)
        out.append(ratio ** 2 * uu[j] * vv[j])
    return out


def restricted_a2w(u: StepWeight, v: StepWeight, w: StepWeight) -> float:
    """``sup_J (w(J*)/w(parent J))^2 <u^{-1}>^w_J <v>^w_J`` over ``J`` with a parent."""
    return _max_levels(restricted_levels(u, v, w))


def joint_a2w_nonroot(u: StepWeight, v: StepWeight, w: StepWeight) -> float:
    """``[u, v]_{A_2(w)}`` restricted to intervals that have a parent in the tree."""
    uu = w.all_weighted_averages(1.0 / u.values)
    vv = w.all_weighted_averages(v.values)
    return _max_levels(a * b for a, b in list(zip(uu, vv))[1:])


# ---------------------------------------------------------------------------
# summation conditions


def buckley_levels(w: StepWeight, p: float, mode: str) -> list[np.ndarray]:
    """Local ratio of the chosen summation condition for every non-leaf ``J``."""
    if mode not in BUCKLEY_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {BUCKLEY_MODES}")
    if mode in ("ap", "rhp", "chmpw"):
        _check_p(p)
    n = w.depth
    avgs = w.all_averages()
    lens = [2.0 ** (-j) for j in range(n)]
    if mode == "chmpw":
        pw = _averages(w.values ** p, n)
        delta = _deltas(pw)
        terms = [lens[j] * delta[j] ** 2 / avgs[j] ** p for j in range(n)]
        norm = pw
    else:
        delta = _deltas(avgs)
        base = [lens[j] * (delta[j] / avgs[j]) ** 2 for j in range(n)]
        if mode == "ap":
            q = -1.0 / (p - 1.0)
            terms = [base[j] * avgs[j] ** q for j in range(n)]
            norm = [a ** q for a in avgs]
        elif mode == "rhp":
            terms = [base[j] * avgs[j] ** p for j in range(n)]
            norm = [a ** p for a in avgs]
        elif mode == "rh1":
            terms = [base[j] * avgs[j] for j in range(n)]
            norm = avgs
        else:
            terms = base
            norm = [np.ones_like(a) for a in avgs]
    sums = subtree_sums(terms)
    return [sums[j] / lens[j] / norm[j] for j in range(n)]


def buckley_sum(w: StepWeight, p: float, mode: str, J: DyadicIndex) -> float:
    w.tree.check(J)
    if J.level == w.depth:
        raise LeafInterval(f"{J} is a leaf; the summation is empty")
    return float(buckley_levels(w, p, mode)[J.level][J.position])


def buckley_constant(w: StepWeight, p: float, mode: str) -> float:
    return _max_levels(buckley_levels(w, p, mode))


# ---------------------------------------------------------------------------
# Carleson sequences


@dataclass(frozen=True)
class CarlesonSequence:
    """Non-negative numbers on the non-leaf intervals, heap order."""

    tree: DyadicTree
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.tree.n_nonleaf,):
            raise ValueError(f"expected {self.tree.n_nonleaf} values, got {vals.shape}")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("Carleson sequences must be finite and non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_levels(cls, tree: DyadicTree, levels):
        return cls(tree, tree.join_heap(levels))

    @classmethod
    def zeros(cls, tree: DyadicTree):
        return cls(tree, np.zeros(tree.n_nonleaf))

    def levels(self) -> list[np.ndarray]:
        return self.tree.split_heap(self.values)

    def __getitem__(self, I: DyadicIndex) -> float:
        return float(self.values[self.tree.heap_index(I)])


def carleson_levels(lam: CarlesonSequence, w: Optional[StepWeight] = None) -> list[np.ndarray]:
    n = lam.tree.depth
    lens = [2.0 ** (-j) for j in range(n)]
    if w is None:
        sums = subtree_sums(lam.levels())
        return [sums[j] / lens[j] for j in range(n)]
    avgs = w.all_averages()
    sums = subtree_sums([l * a for l, a in zip(lam.levels(), avgs)])
    return [sums[j] / lens[j] / avgs[j] for j in range(n)]


def carleson_constant(lam: CarlesonSequence, w: Optional[StepWeight] = None) -> float:
    """Packing constant; with ``w`` the ``w``-weighted form."""
    return max(_max_levels(carleson_levels(lam, w)), 0.0)


def fkp_sequence(w: StepWeight) -> CarlesonSequence:
    """``|I| |Delta_I w / <w>_I|^2``."""
    avgs = w.all_averages()
    delta = _deltas(avgs)
    return CarlesonSequence.from_levels(
        w.tree, [2.0 ** (-j) * (delta[j] / avgs[j]) ** 2 for j in range(w.depth)]
    )


@dataclass(frozen=True)
class BeznosovaReport:
    plain_constant: float
    weighted_constant: float
    ratio: float


def beznosova_transform(lam: CarlesonSequence, w: StepWeight) -> CarlesonSequence:
    """``nu_I = lam_I / (<w^{-1}>_I <w>_I)``."""
    inv = _averages(1.0 / w.values, w.depth)
    avgs = w.all_averages()
    return CarlesonSequence.from_levels(
        lam.tree, [l / (inv[j] * avgs[j]) for j, l in enumerate(lam.levels())]
    )


def beznosova(lam: CarlesonSequence, w: StepWeight) -> BeznosovaReport:
    plain = carleson_constant(lam)
    weighted = carleson_constant(beznosova_transform(lam, w), w)
    ratio = weighted / plain if plain > 0 else 0.0
    return BeznosovaReport(plain, weighted, ratio)


# ---------------------------------------------------------------------------
# theorem-condition constants


def bracket_levels(v: StepWeight, w: StepWeight) -> list[np.ndarray]:
    """``[w(I-)^2 v(I+) + w(I+)^2 v(I-)] / w(I)^2`` for non-leaf ``I``."""
    out = []
    for j in range(w.depth):
        wm, wp = w.masses[j + 1][0::2], w.masses[j + 1][1::2]
        vm, vp = v.masses[j + 1][0::2], v.masses[j + 1][1::2]
        out.append((wm ** 2 * vp + wp ** 2 * vm) / w.masses[j] ** 2)
    return out


def k_levels(v: StepWeight, w: StepWeight) -> list[np.ndarray]:
    """``K_I^{w,v}`` for non-leaf ``I``."""
    out = []
    for j in range(w.depth):
        wm, wp = w.masses[j + 1][0::2], w.masses[j + 1][1::2]
        vm, vp = v.masses[j + 1][0::2], v.masses[j + 1][1::2]
        out.append((wm * vp / wp + wp * vm / wm) / w.masses[j])
    return out


def sufficiency_c1_levels(u, v, w) -> list[np.ndarray]:
    a = w.all_weighted_averages(w.values / u.values)
    b = w.all_weighted_averages(v.values / w.values)
    return [x * y for x, y in zip(a, b)]


def sufficiency_c2_levels(u, v, w) -> list[np.ndarray]:
    """Local ratio of the Carleson condition with the mass bracket."""
    g = w.values / u.values
    delta = weighted_deltas(g, w)
    br = bracket_levels(v, w)
    sums = subtree_sums([d ** 2 * b for d, b in zip(delta, br)])
    avg = w.all_weighted_averages(g)
    return [sums[j] / w.masses[j] / avg[j] for j in range(w.depth)]


def haar_carleson_levels(u, v, w) -> list[np.ndarray]:
    """Lebesgue form of the Carleson condition for the Haar multiplier."""
    n = w.depth
    ui = _averages(1.0 / u.values, n)
    vw2 = _averages(v.values * w.values ** 2, n)
    wa = w.all_averages()
    d = _deltas(ui)
    sums = subtree_sums([2.0 ** (-j) * d[j] ** 2 * vw2[j] / wa[j] ** 2 for j in range(n)])
    return [sums[j] * 2.0 ** j / ui[j] for j in range(n)]


def haar_dual_carleson_levels(u, v, w) -> list[np.ndarray]:
    n = w.depth
    ui = _averages(1.0 / u.values, n)
    vw2 = _averages(v.values * w.values ** 2, n)
    wa = w.all_averages()
    d = _deltas(vw2)
    sums = subtree_sums([2.0 ** (-j) * d[j] ** 2 * ui[j] / wa[j] ** 2 for j in range(n)])
    return [sums[j] * 2.0 ** j / vw2[j] for j in range(n)]


def _strict_descendant_ratio(terms_child, norm, depth) -> list[np.ndarray]:
    """``(1/|J|) sum_{I in D(J), I != J} t_I / norm_J`` from child-level terms."""
    full = [np.zeros(1)] + list(terms_child)
    sums = subtree_sums(full)
    return [(sums[j] - full[j]) * 2.0 ** j / norm[j] for j in range(depth + 1)]


def qr_levels(u, v, w) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """``Q_J / <u^{-1}>_J`` and ``R_J / <v w^2>_J`` for every interval ``J``."""
    n = w.depth
    ui = _averages(1.0 / u.values, n)
    vw2 = _averages(v.values * w.values ** 2, n)
    wa = w.all_averages()
    q_terms, r_terms = [], []
    for j in range(1, n + 1):
        par = lambda a: np.repeat(a[j - 1], 2)
        damp = (1.0 - wa[j] / par(wa)) ** 2
        plen = 2.0 ** (-(j - 1))
        q_terms.append(plen * (ui[j] / wa[j]) ** 2 * damp * par(vw2))
        r_terms.append(plen * (vw2[j] / wa[j]) ** 2 * damp * par(ui))
    return _strict_descendant_ratio(q_terms, ui, n), _strict_descendant_ratio(r_terms, vw2, n)


def weighted_fkp_levels(sigma: StepWeight, w: StepWeight) -> list[np.ndarray]:
    """``(1/|J|) sum |I| |Delta_I w/<w>_I|^2 <sigma>_I / <sigma>_J``."""
    return carleson_levels(fkp_sequence(w), sigma)


def modified_delta_levels(u, v, w) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Local ratios of the two Lebesgue-average forms compared in the Haar-multiplier proof.

    First uses ``<u^{-1}>_{I+-}/<w>_{I+-}`` differences, second uses the common
    denominator ``<w>_I``.
    """
    n = w.depth
    ui = _averages(1.0 / u.values, n)
    vw2 = _averages(v.values * w.values ** 2, n)
    wa = w.all_averages()
    t1, t2 = [], []
    for j in range(n):
        up, um = ui[j + 1][1::2], ui[j + 1][0::2]
        wp, wm = wa[j + 1][1::2], wa[j + 1][0::2]
        t1.append(2.0 ** (-j) * (up / wp - um / wm) ** 2 * vw2[j])
        t2.append(2.0 ** (-j) * ((up - um) / wa[j]) ** 2 * vw2[j])
    s1, s2 = subtree_sums(t1), subtree_sums(t2)
    return ([s1[j] * 2.0 ** j / ui[j] for j in range(n)], [s2[j] * 2.0 ** j / ui[j] for j in range(n)])


def doubling_lemma_levels(u: StepWeight, w: StepWeight) -> list[np.ndarray]:
    """Local ratio ``(1/|J|) sum |<u^{-1}w, h_I^w>_w|^2 <w>_I/<u^{-1}w^2>_I / <u^{-1}w^2>_J``."""
    n = w.depth
    g = w.values / u.values
    coef = haar_coefficients(g, w)
    uw2 = _averages(w.values ** 2 / u.values, n)
    wa = w.all_averages()
    sums = subtree_sums([coef[j] ** 2 * wa[j] / uw2[j] for j in range(n)])
    return [sums[j] * 2.0 ** j / uw2[j] for j in range(n)]


@dataclass
class CharacteristicReport:
    """Weight-class constants of ``w`` plus theorem constants of ``(u, v, w)``."""

    ap: dict = field(default_factory=dict)
    rhp: dict = field(default_factory=dict)
    aInf: float = 1.0
    rh1: float = 0.0
    doubling: float = 2.0
    jointA2w: Optional[float] = None
    restrictedA2w: Optional[float] = None
    thm1C1: Optional[float] = None
    thm1C2: Optional[float] = None
    thm61C1: Optional[float] = None
    thm61C2: Optional[float] = None
    thm61C3: Optional[float] = None
    qMax: Optional[float] = None
    rMax: Optional[float] = None
    cond65: Optional[float] = None
    cond66: Optional[float] = None
    depth: int = 0

    def to_json(self) -> dict:
        d = asdict(self)
        d["ap"] = {str(k): v for k, v in self.ap.items()}
        d["rhp"] = {str(k): v for k, v in self.rhp.items()}
        return {k: v for k, v in d.items() if v is not None}


def _fmt_p(p: float):
    return int(p) if float(p).is_integer() else float(p)


def weight_report(w: StepWeight, ps=(2.0,)) -> CharacteristicReport:
    ainf, rh1 = ainf_and_rh1(w)
    return CharacteristicReport(
        ap={_fmt_p(p): ap_characteristic(w, p) for p in ps},
        rhp={_fmt_p(p): rhp_characteristic(w, p) for p in ps},
        aInf=ainf,
        rh1=rh1,
        doubling=doubling_constant(w),
        depth=w.depth,
    )


def theorem_constants(u: StepWeight, v: StepWeight, w: StepWeight, ps=(2.0,)) -> CharacteristicReport:
    """Full report for the triple; single-weight entries describe ``w``.

    ``jointA2w`` and ``restrictedA2w`` are taken for the pair
    ``(u w^{-1}, v w^{-1})``, the arrangement entering the square-function theorems.
    """
    rep = weight_report(w, ps)
    uw, vw = u / w, v / w
    rep.jointA2w = joint_a2w(uw, vw, w)
    rep.restrictedA2w = restricted_a2w(uw, vw, w)
    rep.thm1C1 = _max_levels(sufficiency_c1_levels(u, v, w))
    rep.thm1C2 = max(_max_levels(sufficiency_c2_levels(u, v, w)), 0.0)
    rep.thm61C1 = three_weight_a2(u, v, w)
    rep.thm61C2 = max(_max_levels(haar_carleson_levels(u, v, w)), 0.0)
    rep.thm61C3 = max(_max_levels(haar_dual_carleson_levels(u, v, w)), 0.0)
    q, r = qr_levels(u, v, w)
    rep.qMax = max(_max_levels(q), 0.0)
    rep.rMax = max(_max_levels(r), 0.0)
    rep.cond65 = _max_levels(weighted_fkp_levels(u.reciprocal(), w))
    rep.cond66 = _max_levels(weighted_fkp_levels(v * w ** 2, w))
    return rep


def a2w_of(x: StepWeight, w: StepWeight) -> float:
    """``[x]_{A_2(w)} = [x, x]_{A_2(w)}``."""
    return joint_a2w(x, x, w)


def log_ratio_bound(value: float) -> float:
    return math.log(value) if value > 1 else 0.0
