import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given

from twoweight import DyadicTree, StepWeight
from twoweight.characteristics import CarlesonSequence
from twoweight.norms import square_function_norm
from twoweight.verify import (
    CLAIM_IDS,
    CSV_COLUMNS,
    MONITORED,
    TOLERANCES,
    Case,
    check_claims,
    failures,
    fixture_cases,
    judge,
    monitor,
    ntv_testing,
    random_sawyer_instance,
    random_triple,
    resummation_verdict,
    run_claims,
    sawyer_hypothesis,
    sawyer_ratios,
    slack_histogram,
    sort_verdicts,
    standard_corpus,
    sufficiency_sawyer_data,
    testing_ratios as probe_ratios,
    verdicts_to_csv,
    verdicts_to_json,
    verify_bounded_constant_lemmas,
    verify_corollaries,
    verify_haar_multiplier_equivalence,
    verify_identities,
    verify_necessity,
    verify_sawyer,
    verify_sufficiency,
)

from conftest import random_weight, weight_triples


def test_judge_boundaries():
    assert judge("bessel", 1.0, 1.0).passed
    assert judge("bessel", 1.0 + 5e-13, 1.0).passed
    assert not judge("bessel", 1.0 + 1e-11, 1.0).passed
    assert judge("thm4.1-upper", 1.0 + 5e-10, 1.0).passed
    assert not judge("thm4.1-upper", 1.0 + 1e-8, 1.0).passed
    # identity claims carry an absolute tolerance against zero
    assert judge("prop3.1-forms", 5e-13, 0.0).passed
    assert not judge("prop3.1-forms", 1e-10, 0.0).passed
    assert judge("bessel", 2.0, 1.0, overrides={"bessel": {"rel": 0.6}}).passed
    assert judge("bessel", 2.0, 1.0, overrides={"bessel": {"abs": 1.0}}).passed


def test_verdict_fields():
    v = judge("bessel", 1.0, 3.0)
    assert v.slack == 2.0 and v.relative_slack == pytest.approx(2 / 3)
    m = monitor("doubling", 4.0)
    assert m.passed and not m.asserted and math.isnan(m.rhs)
    assert m.row()["rhs"] == "nan"
    assert set(MONITORED).isdisjoint(TOLERANCES)


def test_check_claims():
    assert check_claims(["bessel", "doubling"]) == ["bessel", "doubling"]
    with pytest.raises(KeyError):
        check_claims(["bessel", "thm9.9"])


def brute_sawyer_q(sigma, omega, lam):
    tree = sigma.tree
    best = 0.0
    for J in tree.nonleaf():
        total = 0.0
        for I in tree.subintervals(J):
            if I.level == tree.depth:
                continue
            sl = tree.cells(I)
            a = np.sum(omega.values[sl] * sigma.values[sl]) / np.sum(sigma.values[sl])
            total += a ** 2 * lam[I]
        sl = tree.cells(J)
        aj = np.sum(omega.values[sl] * sigma.values[sl]) / np.sum(sigma.values[sl])
        best = max(best, total / sigma.mass(J) / aj)
    return best


def test_sawyer_hypothesis_brute_force(rng):
    for _ in range(10):
        sigma, omega = random_weight(rng, 3), random_weight(rng, 3)
        lam = CarlesonSequence(sigma.tree, rng.random(7))
        assert sawyer_hypothesis(sigma, omega, lam) == pytest.approx(brute_sawyer_q(sigma, omega, lam), rel=1e-12)


def test_sawyer_fixtures(rng):
    sigma, omega = random_weight(rng, 4), random_weight(rng, 4)
    zero = CarlesonSequence.zeros(sigma.tree)
    v = verify_sawyer(sigma, omega, zero, [rng.standard_normal(16)])
    assert v.passed and v.lhs == 0.0 and v.rhs == 0.0
    # f = omega^{1/2} turns the ratio into the testing quantity, whose sup is Q
    lam = CarlesonSequence(sigma.tree, rng.random(15))
    q = sawyer_hypothesis(sigma, omega, lam)
    r = sawyer_ratios(sigma, omega, lam, np.sqrt(omega.values))
    assert np.max(r) == pytest.approx(q, rel=1e-12)


def test_sawyer_random_instances():
    for seed in range(1, 11):
        v = verify_sawyer(*random_sawyer_instance(seed, depth=4))
        assert v.passed and v.context["functions"] == 20


@given(weight_triples(max_depth=4))
def test_square_function_claims_hold(triple):
    u, v, w = triple
    norm = square_function_norm(u, v, w)
    assert verify_sufficiency(u, v, w, norm).passed
    assert all(x.passed for x in verify_necessity(u, v, w, norm))


def test_testing_ratios_below_norm(rng):
    u, v, w = (random_weight(rng, 4) for _ in range(3))
    norm = square_function_norm(u, v, w)
    ratios, lower = probe_ratios(u, v, w)
    assert ratios.size == 2 + 4 + 8 + 16
    assert np.all(ratios <= norm * (1 + 1e-9))
    assert np.all(lower <= ratios ** 2 * (1 + 1e-12))


def test_sufficiency_sawyer_data_passes(rng):
    u, v, w = (random_weight(rng, 4) for _ in range(3))
    sigma, omega, lam = sufficiency_sawyer_data(u, v, w)
    assert sigma is w and np.allclose(omega.values, w.values / u.values)
    assert np.all(lam.values >= 0)
    assert verify_sawyer(sigma, omega, lam, [rng.standard_normal(16) for _ in range(5)]).passed


def test_lemmas_constant_weights():
    one = StepWeight.constant(DyadicTree(3))
    lem, br, bez = verify_bounded_constant_lemmas(one, one)
    assert lem.lhs == pytest.approx(0.0, abs=1e-15) and lem.passed
    assert br.lhs == pytest.approx(0.0, abs=1e-15) and br.passed
    assert not bez.asserted


def test_lemmas_random(rng):
    for _ in range(20):
        u, w = random_weight(rng, 4), random_weight(rng, 4)
        assert all(v.passed for v in verify_bounded_constant_lemmas(u, w))


def test_identities_random(rng):
    for _ in range(20):
        u, v, w = (random_weight(rng, 4) for _ in range(3))
        verdicts = verify_identities(u, v, w, rng)
        assert [x.claimId for x in verdicts] == ["qf-identity", "eq4.5-resummation", "prop3.1-forms", "bessel"]
        assert all(x.passed for x in verdicts)


@given(weight_triples(max_depth=4))
def test_resummation_both_directions(triple):
    u, v, w = triple
    assert resummation_verdict("lem6.4-resummation", u, v, w).passed


def test_ntv_testing_unit_weights():
    one = StepWeight.constant(DyadicTree(3))
    lhs, rhs = ntv_testing(one, one)
    # S(1_I) vanishes only for the root
    assert lhs[0] == pytest.approx(0.0, abs=1e-15)
    assert np.all(lhs <= rhs * (1 + 1e-9))


def test_corollaries(rng):
    w, u = random_weight(rng, 4), random_weight(rng, 4)
    verdicts = verify_corollaries(w, u)
    assert verdicts[0].claimId == "eq5.2-testing" and verdicts[0].passed
    assert all(not v.asserted and math.isnan(v.rhs) for v in verdicts[1:])


def test_scale_invariance_of_verdicts(rng):
    # scaling w leaves both sides fixed; scaling u and v moves both sides together
    u, v, w = (random_weight(rng, 3) for _ in range(3))
    base = verify_sufficiency(u, v, w)
    a = verify_sufficiency(u, v, w * 7.0)
    assert (a.lhs, a.rhs) == pytest.approx((base.lhs, base.rhs), rel=1e-9)
    b = verify_sufficiency(u * 4.0, v * 9.0, w)
    assert (b.lhs, b.rhs) == pytest.approx((1.5 * base.lhs, 1.5 * base.rhs), rel=1e-9)


def test_haar_multiplier_report_fixture():
    one = StepWeight.constant(DyadicTree(2))
    rep = verify_haar_multiplier_equivalence(one, one, one)
    assert rep.sigma_norm == pytest.approx(1.0, abs=1e-12)
    assert rep.c2 == pytest.approx(0.0, abs=1e-15) and rep.c4 == pytest.approx(0.0, abs=1e-15)
    assert all(v.passed for v in rep.verdicts)
    json.dumps(rep.to_json(), allow_nan=True)


def test_run_claims_every_id():
    case = fixture_cases()[5]
    verdicts = run_claims(case, CLAIM_IDS)
    assert [v.claimId for v in verdicts] == list(CLAIM_IDS)
    assert not failures(verdicts)
    assert all(v.depth == 2 and v.context["case"] == case.name for v in verdicts)
    assert [v.asserted for v in verdicts] == [c not in MONITORED for c in CLAIM_IDS]


def test_run_claims_override_rejudges_same_values():
    case = random_triple(3, depth=3)
    (v,) = run_claims(case, ["thm4.1-upper"])
    assert v.passed
    bad = judge("thm4.1-upper", v.rhs * 2, v.rhs)
    assert not bad.passed
    (again,) = run_claims(case, ["thm4.1-upper"], overrides={"thm4.1-upper": {"rel": 0.0}})
    assert again.lhs == v.lhs and again.rhs == v.rhs


def test_random_triple_deterministic():
    a, b = random_triple(17, 4), random_triple(17, 4)
    for x, y in zip((a.u, a.v, a.w), (b.u, b.v, b.w)):
        assert x.values.tobytes() == y.values.tobytes()
    assert not np.array_equal(a.u.values, a.w.values)


def test_standard_corpus_composition():
    corpus = standard_corpus(depth=3, seeds=range(1, 4))
    names = [c.name for c in corpus]
    assert names[:3] == ["random-1", "random-2", "random-3"]
    assert sum(n.startswith("power") for n in names) == 16
    assert sum(n.startswith("fixture") for n in names) == 6


def test_csv_and_json_output():
    verdicts = sort_verdicts(run_claims(random_triple(2, 3), ["doubling", "bessel"])
                             + run_claims(random_triple(1, 3), ["bessel"]))
    assert [(v.claimId, v.seed) for v in verdicts] == [("bessel", 1), ("bessel", 2), ("doubling", 2)]
    text = verdicts_to_csv(verdicts)
    reader = csv.reader(io.StringIO(text))
    assert next(reader) == list(CSV_COLUMNS)
    rows = list(reader)
    assert len(rows) == 3 and rows[2][4] == "nan" and rows[0][6] == "true"
    # repr round-trips floats exactly
    assert float(rows[0][3]) == verdicts[0].lhs
    data = json.loads(verdicts_to_json(verdicts))
    assert data[0]["claimId"] == "bessel"
    assert verdicts_to_csv([]) == ",".join(CSV_COLUMNS) + "\n"


def test_slack_histogram_counts():
    verdicts = [judge("bessel", 1.0, x) for x in (1.0, 1.5, 2.0, 4.0)] + [monitor("doubling", 3.0)]
    rows = slack_histogram(verdicts, bins=4)
    assert {r["claimId"] for r in rows} == {"bessel"}
    assert sum(r["count"] for r in rows) == 4


def test_case_depth():
    one = StepWeight.constant(DyadicTree(2))
    assert Case("x", one, one, one).depth == 2
