import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riccati3.polyclass import (
    ConstraintInstance,
    OrderingError,
    PolyclassError,
    classify,
    classify_a3,
    classify_a12,
    instance_from_dict,
    instance_to_dict,
    plant_a3,
    plant_a12,
    pscale,
    tilde_transform,
    verify_constraint,
)


def test_verify_czero():
    inst = ConstraintInstance("a12", ("1", "2", "3"), (), ("1", "1"), (), Lambda="4")
    assert verify_constraint(inst) == 0.0


def test_verify_sqrt2_float_path():
    a = (1.0, 0.5, 2.0)
    d1 = tuple(math.sqrt(2) * x for x in a)
    inst = ConstraintInstance("a12", a, (1.0, 1.0), d1, (0.0,), Lambda=2.0)
    assert verify_constraint(inst) < 1e-12
    assert not inst.exact
    v = classify_a12(inst)
    assert v.branch == "DEqualsSqrtLambdaA" and v.signs == (1,)


def test_verify_random_nonzero():
    rng = np.random.default_rng(0)
    inst = ConstraintInstance(
        "a12",
        tuple(Fraction(int(x), 3) for x in rng.integers(1, 9, 3)),
        ("1", "1/2"),
        ("1", "0", "2"),
        ("1", "1", "1"),
        Lambda="3",
    )
    assert verify_constraint(inst) > 0


@pytest.mark.parametrize(
    "branch,signs",
    [
        ("CZero", [()]),
        ("DEqualsSqrtLambdaA", [(1,), (-1,)]),
        ("CaseIII", [(1,), (-1,)]),
        ("CaseIV", [(1,), (-1,)]),
        ("Infeasible", [()]),
    ],
)
def test_planted_a12(branch, signs):
    rng = np.random.default_rng(17)
    for sg in signs:
        for _ in range(60):
            inst, expect = plant_a12(rng, branch, *sg)
            assert inst.exact
            v = classify_a12(inst)
            assert v.branch == expect.branch, (branch, v.certificate)
            if branch != "Infeasible":
                assert v.signs == expect.signs
                assert v.oracle_residual == 0.0
            else:
                assert v.oracle_residual > 0


@pytest.mark.parametrize(
    "branch,signs",
    [
        ("CZero", [(1, 1)]),
        ("A3BranchII", [(1, 1), (1, -1), (-1, 1), (-1, -1)]),
        ("Infeasible", [(1, 1)]),
    ],
)
def test_planted_a3(branch, signs):
    rng = np.random.default_rng(23)
    for sg in signs:
        for _ in range(60):
            inst, expect = plant_a3(rng, branch, sg)
            v = classify_a3(inst)
            assert v.branch == expect.branch, (branch, v.certificate)
            if branch == "A3BranchII":
                assert v.signs == expect.signs
                assert v.oracle_residual == 0.0


def test_infeasible_certificates():
    rng = np.random.default_rng(5)
    inst, _ = plant_a12(rng, "Infeasible")
    v = classify_a12(inst)
    assert "sign clash" in v.certificate
    inst, _ = plant_a3(rng, "Infeasible")
    v = classify_a3(inst)
    assert "(r-1)(r^2+4)" in v.certificate


def test_scaling_stability():
    """Common positive rescale (a, c, d1 by s; P by s^2) keeps the verdict."""
    rng = np.random.default_rng(31)
    s = Fraction(7, 3)
    for branch in ("DEqualsSqrtLambdaA", "CaseIII", "CaseIV"):
        inst, expect = plant_a12(rng, branch, -1)
        scaled = ConstraintInstance(
            "a12",
            pscale(inst.a, s),
            pscale(inst.c, s),
            pscale(inst.d1, s),
            pscale(inst.P, s * s),
            Lambda=inst.Lambda,
        )
        v = classify_a12(scaled)
        assert (v.branch, v.signs) == (expect.branch, expect.signs)
    inst, expect = plant_a3(rng, "A3BranchII", (-1, 1))
    scaled = ConstraintInstance(
        "a3",
        pscale(inst.a, s),
        pscale(inst.c, s),
        pscale(inst.d1, s),
        pscale(inst.P, s * s),
        lambda2=inst.lambda2,
        lambda3=inst.lambda3,
    )
    v = classify_a3(scaled)
    assert (v.branch, v.signs) == (expect.branch, expect.signs)


def test_tilde_involution_and_reversal():
    rng = np.random.default_rng(2)
    inst, _ = plant_a3(rng, "A3BranchII", (1, -1))
    t2 = tilde_transform(tilde_transform(inst))
    assert t2.a == inst.a and t2.c == inst.c and t2.d1 == inst.d1 and t2.P == inst.P
    cube = ConstraintInstance(
        "a3", inst.a, inst.c, ("0", "0", "0", "1"), (), lambda2=inst.lambda2, lambda3=inst.lambda3
    )
    assert tilde_transform(cube).d1 == (Fraction(1),)


def test_tilde_swaps_classification():
    rng = np.random.default_rng(3)
    inst, expect = plant_a3(rng, "A3BranchII", (1, 1))
    swapped = tilde_transform(inst)
    assert float(swapped.lambda2) > float(swapped.lambda3)
    with pytest.raises(OrderingError):
        classify_a3(swapped)
    v, tilded = classify(swapped)
    assert tilded and v.branch == "A3BranchII"


def test_json_roundtrip():
    rng = np.random.default_rng(4)
    inst, _ = plant_a12(rng, "CaseIII", 1)
    data = instance_to_dict(inst)
    text = json.dumps(data)
    inst2 = instance_from_dict(json.loads(text))
    assert inst2.exact
    assert inst2.a == inst.a and inst2.P == inst.P
    assert classify_a12(inst2).branch == "CaseIII"


def test_degree_validation():
    with pytest.raises(PolyclassError):
        ConstraintInstance("a12", ("1", "1"), (), (), (), Lambda="1")  # deg a != 2
    with pytest.raises(PolyclassError):
        ConstraintInstance(
            "a12", ("1", "0", "1"), (), ("0", "0", "0", "1"), (), Lambda="1"
        )  # deg d1 > 2
    with pytest.raises(PolyclassError):
        ConstraintInstance(
            "a3", ("1", "0", "1"), (), (), ("0",) * 7 + ("1",), lambda2="-2", lambda3="-1"
        )  # deg P > 6


small_fraction = st.fractions(
    min_value=Fraction(-4), max_value=Fraction(4), max_denominator=8
)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(small_fraction, min_size=3, max_size=3),
    st.lists(small_fraction, min_size=2, max_size=3),
    st.lists(small_fraction, min_size=1, max_size=3),
    st.lists(small_fraction, min_size=1, max_size=6),
)
def test_classifier_never_unsound(a, c, d1, P):
    """Fuzz: any instance either gets Infeasible or passes the oracle exactly."""
    a = list(a)
    if a[2] == 0:
        a[2] = Fraction(1)
    inst = ConstraintInstance("a12", a, c, d1, P, Lambda=Fraction(9, 4))
    v = classify_a12(inst)
    if v.branch != "Infeasible":
        assert verify_constraint(inst) == 0
