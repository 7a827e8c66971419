from fractions import Fraction as Q

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from nilsampler import corpus
from nilsampler.lie_core import bracket, exp_nilpotent, jump_indices, m_matrix
from nilsampler.orbit import orbit_data
from nilsampler.poly import PolyMatrix, rational_rank
from nilsampler.sampling import sup_inf_norm

from conftest import PASSING

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=12)
keys = st.sampled_from(PASSING)


@st.composite
def strict_upper(draw, n=None):
    n = n or draw(st.integers(1, 5))
    return [[draw(rationals) if j > i else Q(0) for j in range(n)] for i in range(n)]


def const(mat):
    return PolyMatrix.from_rational(mat)


@settings(max_examples=60, deadline=None)
@given(strict_upper())
def test_exp_inverse(M):
    n = len(M)
    P = const(M)
    assert exp_nilpotent(P) @ exp_nilpotent(-P) == PolyMatrix.identity(n, 0)


@settings(max_examples=60, deadline=None)
@given(strict_upper(4), rationals, rationals)
def test_one_parameter_group(M, s, u):
    P = const(M)
    lhs = exp_nilpotent(P.scale(s)) @ exp_nilpotent(P.scale(u))
    assert lhs == exp_nilpotent(P.scale(s + u))


@settings(max_examples=60, deadline=None)
@given(keys, st.data())
def test_beta_cocycle(key, data):
    od = orbit_data(corpus.get(key))
    sigma = [data.draw(rationals) for _ in range(od.d)]
    t = [data.draw(rationals) for _ in range(od.m)]
    u = [data.draw(rationals) for _ in range(od.m)]
    Pt = od.P.eval(t)
    inner = od.beta(sigma, u)
    lhs = od.beta(sigma, [a + b for a, b in zip(t, u)])
    rhs = [sum((Pt[i][j] * inner[j] for j in range(od.p)), Q(0)) for i in range(od.p)]
    assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(keys, st.data())
def test_m_matrix_skew_and_jump_count(key, data):
    spec = corpus.get(key)
    lam = [data.draw(rationals) for _ in range(spec.n)]
    M = m_matrix(spec, lam)
    n = spec.n
    assert all(M[i][j] == -M[j][i] for i in range(n) for j in range(n))
    assert len(jump_indices(spec, lam)) == rational_rank(M)


@settings(max_examples=40, deadline=None)
@given(keys, st.data())
def test_bracket_antisymmetric_and_bilinear(key, data):
    spec = corpus.get(key)
    x = [data.draw(rationals) for _ in range(spec.n)]
    y = [data.draw(rationals) for _ in range(spec.n)]
    c = data.draw(rationals)
    assert bracket(spec, x, y) == tuple(-v for v in bracket(spec, y, x))
    assert bracket(spec, [c * v for v in x], y) == tuple(c * v for v in bracket(spec, x, y))


@settings(max_examples=40, deadline=None)
@given(keys, st.data())
def test_sup_bounds_every_point(key, data):
    od = orbit_data(corpus.get(key))
    nb = sup_inf_norm(od.P)
    s = [data.draw(st.floats(0, 1)) for _ in range(od.m)]
    val = float(np.abs(od.P.eval_float([np.array(x) for x in s])).sum(axis=-1).max())
    assert 1 <= nb.upper and val <= nb.upper + 1e-12
