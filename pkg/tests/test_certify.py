import json
from fractions import Fraction as Fr

import jsonschema
import numpy as np
import pytest

from discrete_f2 import diffeo
from discrete_f2.certificate import Certificate, frac, validate
from discrete_f2.certify import (
    C1Action,
    ObstructionParams,
    PLAction,
    derivative_deviation_norm,
    displacement_norm,
    norm0_discreteness_certificate,
    obstruction_bound,
    obstruction_report,
    revalidate,
    strong_discreteness_certificate,
    uniform_discreteness_certificate,
)
from discrete_f2.pingpong import PLHomeo, PingPongSystem, build_chain
from discrete_f2.words import ReducedWord, words_up_to


def test_norms_of_identity():
    assert displacement_norm(PLHomeo.identity()) == 0
    assert derivative_deviation_norm(PLHomeo.identity()) == 0
    ident = diffeo.build(0, 1.5)
    m = C1Action(ident, 1.5, 0.01).word_maps([ReducedWord.parse("fg")])[0]
    assert displacement_norm(m, 1000) == 0.0 and derivative_deviation_norm(m, 1000) == 0.0


def test_squeezed_generator_displacement_at_most_epsilon():
    eps = Fr(1, 100)
    s = PingPongSystem.build(build_chain("squeezed", 22, epsilon=eps))
    assert 0 < displacement_norm(s.f) <= eps
    assert 0 < displacement_norm(s.g) <= eps


def test_derivative_deviation_at_x0(thm1_action):
    c = thm1_action.construction
    for plan in c.plans[::17]:
        (m,) = thm1_action.word_maps([plan.pair.U])
        assert derivative_deviation_norm(m, 10**4) >= (1 + plan.beta) ** plan.pair.r - 1 - 1e-9


def test_uniform_first_pair():
    c = diffeo.build(1, 1.5)
    cert = uniform_discreteness_certificate(c, 1.5)
    assert cert.passed
    gap = cert.witnesses[0]["values"]["gap"]
    assert gap == pytest.approx(1.515, rel=1e-12)


def test_uniform_vacuous():
    cert = uniform_discreteness_certificate(diffeo.build(0, 1.5), 1.5)
    assert cert.passed and cert.witnesses == []


def test_uniform_fails_for_larger_C():
    c = diffeo.build(20, 1.5)
    cert = uniform_discreteness_certificate(c, 1.6)
    assert not cert.passed
    assert any(not w["values"].get("ok", True) for w in cert.witnesses)


def test_uniform_200_pairs(thm1_200):
    cert = uniform_discreteness_certificate(thm1_200, 1.5)
    assert cert.passed
    assert cert.summary["checked"] + cert.summary["skipped_equal"] == 200


def test_strong_discreteness_contrast(pl_action, thm1_action):
    pl = strong_discreteness_certificate(pl_action, Fr(1, 2), Fr(1, 20), 4)
    assert pl.passed and Fr(pl.summary["min_displacement"]) > Fr(1, 20)
    c1 = strong_discreteness_certificate(thm1_action, None, Fr(1, 20), 4)
    assert not c1.passed


def test_strong_discreteness_C_zero_per_word(pl_action):
    cert = strong_discreteness_certificate(pl_action, None, 0, 2)
    assert cert.passed and len(cert.witnesses) == 16


def test_norm0_contrast(pl_norm0_cert, thm1_action):
    assert pl_norm0_cert.passed
    c1 = norm0_discreteness_certificate(thm1_action, Fr(1, 20), 4, 10**4)
    assert not c1.passed


def test_norm0_identity_action_vacuous():
    # no nontrivial words up to length 0
    s = PingPongSystem.build(build_chain("default", 3))
    cert = norm0_discreteness_certificate(PLAction(s), Fr(1, 20), 0)
    assert cert.passed and cert.witnesses == []


def test_norm_relation_small(thm1_action):
    words = words_up_to(2)
    for m in thm1_action.word_maps(words):
        assert displacement_norm(m, 2000) <= derivative_deviation_norm(m, 2000)


def test_obstruction_examples():
    three = obstruction_report(ObstructionParams(1, "0.99", "1.01", 3))
    two = obstruction_report(ObstructionParams(1, "0.99", "1.01", 2))
    assert three.passed and two.passed
    assert three.summary["bound"] == pytest.approx(0.3469, abs=1e-4)
    assert two.summary["bound"] == pytest.approx(0.5152, abs=1e-4)
    assert three.witnesses[-1]["values"]["bound < 1/2"] is True
    assert "bound < 1/2" not in two.witnesses[-1]["values"]
    assert obstruction_bound(1, 1, 3) == Fr(1, 3)
    assert obstruction_bound(1, 1, 2) == Fr(1, 2)


def test_obstruction_monotone():
    q = [Fr(99, 100), Fr(1), Fr(101, 100), Fr(102, 100)]
    for k in (2, 3):
        vals = [obstruction_bound(Fr(99, 100), p2, k) for p2 in q[1:]]
        assert vals == sorted(vals) and len(set(vals)) == len(vals)
    assert obstruction_bound(Fr(99, 100), Fr(101, 100), 3) < obstruction_bound(Fr(99, 100), Fr(101, 100), 2)


@pytest.mark.parametrize(
    "args",
    [(1, "1.01", "0.99", 3), (1, "0.99", "1.01", 4), (1, "0.9", "1.01", 3), (1, "0.99", "1.02", 3), (2, "0.99", "1.01", 3)],
)
def test_obstruction_params_rejected(args):
    with pytest.raises(ValueError):
        ObstructionParams(*args)


def test_certificate_schema_and_round_trip(tmp_path):
    cert = Certificate.make("demo", {"x": Fr(1, 3)}, [{"description": "w", "values": {"v": Fr(2, 7)}}], True)
    d = json.loads(cert.to_json())
    validate(d)
    assert d["inputs"] == {"x": "1/3"}
    path = cert.write(tmp_path / "c.json")
    assert Certificate.read(path).content() == cert.content()
    bad = dict(d, status="maybe")
    with pytest.raises(jsonschema.ValidationError):
        validate(bad)
    with pytest.raises(jsonschema.ValidationError):
        validate(dict(d, status="fail", witnesses=[]))
    with pytest.raises(ValueError):
        Certificate.make("demo", {}, [], False)


def test_frac_serialization():
    assert frac({"a": (Fr(1, 2), Fr(3))}) == {"a": ["1/2", "3"]}
    assert frac(np.float64(0.5)) == 0.5


def test_revalidate_round_trip(tmp_path):
    certs = [
        uniform_discreteness_certificate(diffeo.build(30, 1.5), 1.5, 0.01),
        obstruction_report(ObstructionParams(1, "0.99", "1.01", 3)),
        strong_discreteness_certificate(PLAction(PingPongSystem.build(build_chain("default", 12))), None, Fr(1, 20), 2),
        norm0_discreteness_certificate(C1Action.build(20, 1.5), Fr(1, 20), 2, 500),
    ]
    for cert in certs:
        stored = Certificate.read(cert.write(tmp_path / "c.json"))
        ok, fresh = revalidate(stored)
        assert ok and fresh.status == cert.status


def test_revalidate_detects_tampering():
    cert = obstruction_report(ObstructionParams(1, "0.99", "1.01", 2))
    d = json.loads(cert.to_json())
    d["witnesses"][0]["values"]["|A_n|/|B_n|"] = "1/7"
    ok, _ = revalidate(Certificate.from_dict(d))
    assert not ok
