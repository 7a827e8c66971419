import json
from fractions import Fraction as Q

import pytest

from nilsampler import corpus
from nilsampler.lie_core import (
    SpecError,
    ad_restricted,
    bracket,
    exp_nilpotent,
    lattice_exponentials,
    load_spec,
    parse_spec,
    spec_from_brackets,
    verify_condition1,
    verify_structure,
)
from nilsampler.poly import Poly, PolyMatrix


def heis_json(**over):
    d = {"name": "h", "dim": 3, "p_dim": 2, "brackets": [{"i": 2, "j": 3, "coeffs": {"1": "-1"}}]}
    d.update(over)
    return json.dumps(d)


# ---------------------------------------------------------------- parsing


def test_parse_roundtrip_and_digest():
    spec = parse_spec(heis_json())
    ref = corpus.heisenberg()
    assert spec.structure(2, 1) == ref.structure(2, 1)
    assert spec.to_json()["brackets"] == ref.to_json()["brackets"]
    assert parse_spec(json.dumps(spec.to_json())).digest() == spec.digest()


def test_parse_error_reports_position():
    with pytest.raises(SpecError, match=r"line 2, column"):
        parse_spec('{"name": "x",\n "dim": 3,, }')


@pytest.mark.parametrize(
    "brackets, msg",
    [
        ([{"i": 2, "j": 3, "coeffs": {"1": 1}}, {"i": 2, "j": 3, "coeffs": {"1": 2}}], "duplicate"),
        ([{"i": 3, "j": 2, "coeffs": {"1": 1}}], "i < j"),
        ([{"i": 2, "j": 3, "coeffs": {"1": "1/0"}}], "rational"),
        ([{"i": 2, "j": 3, "coeffs": {"7": 1}}], "out of range"),
        ([{"i": 2, "j": 3}], "coeffs"),
    ],
)
def test_parse_rejects(brackets, msg):
    with pytest.raises(SpecError, match=msg):
        parse_spec(heis_json(brackets=brackets))


def test_parse_missing_field():
    with pytest.raises(SpecError, match="p_dim"):
        parse_spec('{"name": "x", "dim": 3, "brackets": []}')


def test_load_spec(tmp_path):
    f = tmp_path / "h.json"
    f.write_text(heis_json(), encoding="utf-8")
    assert load_spec(str(f)).n == 3
    with pytest.raises(SpecError, match="cannot read"):
        load_spec(str(tmp_path / "missing.json"))


# ---------------------------------------------------------------- brackets


def test_bracket_examples():
    h = corpus.heisenberg()
    Z1, Z2, A1 = h.basis(0), h.basis(1), h.basis(2)
    assert bracket(h, A1, Z2) == Z1
    assert bracket(h, Z2, A1) == tuple(-c for c in Z1)
    assert bracket(h, [Q(1, 3), Q(2), Q(-5)], [Q(1, 3), Q(2), Q(-5)]) == (0, 0, 0)
    ex = corpus.example_ex()
    assert bracket(ex, ex.basis(3), ex.basis(1)) == (2, 0, 0, 0)
    with pytest.raises(SpecError):
        bracket(h, [1, 0], [0, 1, 0])


def test_ad_restricted_examples():
    step3 = corpus.dim4_step3()
    A1 = step3.basis(3)
    M = ad_restricted(step3, A1)
    assert [[e.constant_term() for e in row] for row in M.entries] == [[0, 2, 0], [0, 0, 2], [0, 0, 0]]
    abelian = spec_from_brackets("ab", 3, 2, {})
    assert ad_restricted(abelian, abelian.basis(2)).is_zero()
    rem = corpus.remark_5dim_example()
    S = ad_restricted(rem)  # symbolic in t1, t2
    t1, t2 = Poly.var(2, 0), Poly.var(2, 1)
    zero = Poly(2)
    assert S == PolyMatrix([[zero, t2, t1], [zero, zero, t2], [zero, zero, zero]])
    with pytest.raises(SpecError):
        ad_restricted(step3, step3.basis(0))


def test_exp_nilpotent_examples():
    I3 = PolyMatrix.identity(3, 2)
    assert exp_nilpotent(PolyMatrix.zeros(3, 3, 2)) == I3
    rem = corpus.remark_5dim_example()
    P = exp_nilpotent(-ad_restricted(rem)).transpose()
    t1, t2 = Poly.var(2, 0), Poly.var(2, 1)
    one, zero = Poly.const(2, 1), Poly(2)
    assert P == PolyMatrix([[one, zero, zero], [-t2, one, zero], [Q(1, 2) * t2 * t2 - t1, -t2, one]])
    s = Poly.var(1, 0)
    M = PolyMatrix([[Poly(1), 2 * s], [Poly(1), Poly(1)]])
    assert exp_nilpotent(M) == PolyMatrix([[Poly.const(1, 1), 2 * s], [Poly(1), Poly.const(1, 1)]])
    with pytest.raises(SpecError, match="nilpotent"):
        exp_nilpotent(PolyMatrix.from_rational([[1, 0], [0, 0]]))


def test_step3_lattice_exponential():
    # exact series of [[0,2,0],[0,0,2],[0,0,0]]
    E = lattice_exponentials(corpus.dim4_step3())[0]
    assert E == [[1, 2, 2], [0, 1, 2], [0, 0, 1]]


# ---------------------------------------------------------------- structure and Condition 1


def test_verify_structure():
    assert verify_structure(corpus.heisenberg()).passed
    bad = spec_from_brackets("bad", 3, 2, {(3, 2): {2: 1}})  # [A1, Z2] = Z2
    rep = verify_structure(bad)
    assert not rep.passed and not rep.malcev_triangular
    assert rep.first_violation is not None
    assert verify_structure(corpus.counterexample_5dim()).passed


def test_jacobi_violation_is_reported():
    # [X5,X4]=X3, [X5,X3]=X2, [X4,X2]=X1 breaks Jacobi on (X3, X4, X5)
    s = spec_from_brackets("nj", 5, 2, {(5, 4): {3: 1}, (5, 3): {2: 1}, (4, 2): {1: 1}})
    rep = verify_structure(s)
    assert not rep.jacobi and not rep.passed
    assert rep.first_violation is not None


@pytest.mark.parametrize("key", corpus.corpus_keys())
def test_jacobi_holds_on_corpus(key):
    assert verify_structure(corpus.get(key)).jacobi


def test_condition1_heisenberg():
    rep = verify_condition1(corpus.heisenberg())
    assert rep.passed and rep.generic_jump_cardinality == 2
    assert rep.passed == (rep.p_is_ideal and rep.p_commutative and rep.m_commutative and rep.m_indices_all_jump
                          and rep.p_is_constant_polarization and rep.lattice_integral
                          and rep.generic_jump_cardinality == 4 - 2)


def test_condition1_counterexample():
    rep = verify_condition1(corpus.counterexample_5dim())
    assert not rep.passed
    assert rep.generic_jump_cardinality == 2
    assert any("cardinality 2 != 2m = 4" in d for d in rep.diagnostics)


def test_condition1_stepk_and_remark():
    assert verify_condition1(corpus.stepk(2)).passed
    rem = verify_condition1(corpus.remark_5dim_example())
    assert rem.structural_ok() and not rem.lattice_integral and not rem.passed


@pytest.mark.parametrize("key", corpus.corpus_keys())
def test_condition1_matches_corpus(key):
    rep = verify_condition1(corpus.get(key))
    exp = corpus.EXPECTED[key]
    assert rep.passed == exp["passed"]
    assert tuple(rep.generic_jump_set) == exp["jump_set"]


def test_condition1_deterministic_and_monotone_in_trials():
    for key in ("heisenberg", "dim4_step3", "stepk_m2", "oneparam_p4"):
        spec = corpus.get(key)
        a, b = verify_condition1(spec, 25, 7), verify_condition1(spec, 25, 7)
        assert a.to_json() == b.to_json()
        assert verify_condition1(spec, 60, 7).passed


def test_m_not_commutative_is_reported():
    s = spec_from_brackets("mc", 4, 2, {(3, 4): {1: 1}})
    rep = verify_condition1(s)
    assert not rep.m_commutative
    assert any("(c)" in d for d in rep.diagnostics)
