import json
from fractions import Fraction

import pytest

from legendre_betti.algebra import parse_ratfunc
from legendre_betti.wang import (
    InstanceError,
    WangInstance,
    place_from_str,
    rank,
    roth_prop_check,
    wang_lemma_check,
    wang_random_suite,
)

BASIC = {"S": ["t", "inf"], "A_star": ["t"], "r": 0, "f": "t + 1", "choices": {"t": "0", "inf": "t"}}


def test_basic_instance():
    res = wang_lemma_check(WangInstance.from_json(BASIC))
    assert res.hypothesis_held
    assert res.lhs == 0 and res.rhs == 2


def test_hypothesis_failure_has_witness():
    data = dict(BASIC, f="t")
    res = wang_lemma_check(WangInstance.from_json(data))
    assert not res.hypothesis_held
    assert res.witness is not None


def test_non_unit_rejected():
    with pytest.raises(InstanceError):
        WangInstance.from_json(dict(BASIC, A_star=["t - 1"]))


def test_round_trip_and_file(tmp_path):
    inst = WangInstance.from_json(BASIC)
    again = WangInstance.from_json(inst.to_json())
    assert again.to_json() == inst.to_json()
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(BASIC))
    assert WangInstance.load(str(path)).chi == 0


def test_place_degree_in_chi():
    inst = WangInstance.from_json({"S": ["t^2 + 1", "inf"], "A_star": ["t^2 + 1"], "r": 1, "f": "t",
                                   "choices": {}})
    assert inst.size_S == 3 and inst.chi == 1


def test_rank_over_q():
    fs = [parse_ratfunc(s, "t") for s in ("1", "t", "1 + t", "1/t")]
    assert rank(fs) == 3


def test_random_suite_never_violated():
    res = wang_random_suite(20, seed=5, valid_only=True)
    assert res["hypothesis_held"] == 20
    assert res["violations"] == 0


def test_two_alternatives():
    res = roth_prop_check(parse_ratfunc("t + 1", "t"), [parse_ratfunc("t", "t")],
                          [place_from_str("t"), place_from_str("inf")], Fraction(1, 16), {})
    assert res.first_holds or res.second_holds


def test_two_alternatives_rejects_large_eps():
    with pytest.raises(ValueError):
        roth_prop_check(parse_ratfunc("t", "t"), [parse_ratfunc("t", "t")], [place_from_str("t")],
                        Fraction(1, 2), {})
