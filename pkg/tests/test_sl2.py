import cmath
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from laxlab import lax
from laxlab.errors import NonTraceless
from laxlab.fields import ModelParams
from laxlab.sl2 import (
    E_MINUS,
    E_PLUS,
    H,
    GradedElement,
    commutator,
    det,
    generator,
    grade_decompose,
    mat2,
    mat_exp,
    trace,
    twisted_involution,
)
from oracles import entrywise_commutator, taylor_expm

finite = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, finite, finite)
mat = st.lists(cplx, min_size=4, max_size=4).map(lambda v: np.array(v).reshape(2, 2))
traceless = st.tuples(cplx, cplx, cplx).map(lambda t: mat2(t[0], t[1], t[2], -t[0]))


def test_generators():
    assert np.array_equal(generator("H"), [[1, 0], [0, -1]])
    assert np.array_equal(generator("E_plus"), [[0, 1], [0, 0]])
    assert np.array_equal(generator("E_minus"), [[0, 0], [1, 0]])
    with pytest.raises(ValueError):
        generator("F")


def test_generators_are_read_only():
    with pytest.raises(ValueError):
        H[0, 0] = 5


def test_structure_constants():
    assert np.array_equal(commutator(H, E_PLUS), 2 * E_PLUS)
    assert np.array_equal(commutator(H, E_MINUS), -2 * E_MINUS)
    assert np.array_equal(commutator(E_PLUS, E_MINUS), H)


@given(mat)
def test_commutator_self_is_zero(a):
    assert np.all(commutator(a, a) == 0)


@given(mat, mat)
def test_commutator_matches_entrywise(a, b):
    assert np.allclose(commutator(a, b), entrywise_commutator(a, b), atol=1e-13)


@given(traceless, traceless)
def test_commutator_of_traceless_is_traceless(a, b):
    c = commutator(a, b)
    assert abs(trace(c)) <= 1e-14 * max(1.0, np.max(np.abs(c)))


def test_grade_decompose_basis_and_lax_vacuum():
    g = grade_decompose(H)
    assert (g.h, g.ep, g.em) == (1, 0, 0)
    a = lax.build_a_plus(0.0, 0.0, 0.0, 1.0, ModelParams())
    g = grade_decompose(a)
    assert (g.h, g.ep, g.em) == (0, 1, 1)


@given(traceless)
def test_grade_round_trip_exact(m):
    assert np.array_equal(grade_decompose(m).to_matrix(), m)


def test_grade_decompose_rejects_trace():
    with pytest.raises(NonTraceless):
        grade_decompose(np.eye(2))
    grade_decompose(mat2(1.0, 0, 0, -1.0 + 1e-12))


def test_twisted_involution_examples():
    g = GradedElement(0.3, 1 + 2j, -1j)
    assert twisted_involution(0.0, g) == g
    th = 0.37
    twice = twisted_involution(th, twisted_involution(th, GradedElement(0, 1, 0)))
    assert twice.h == 0 and twice.em == 0
    assert abs(twice.ep - cmath.exp(4j * th)) < 1e-15
    assert abs(twisted_involution(math.pi / 4, GradedElement(0, 0, 1)).em - (-1j)) < 1e-15


@given(st.floats(-10, 10), cplx, cplx, cplx)
def test_twisted_involution_keeps_h(th, h, ep, em):
    assert twisted_involution(th, GradedElement(h, ep, em)).h == h


def test_mat_exp_simple_cases():
    assert np.array_equal(mat_exp(np.zeros((2, 2))), np.eye(2))
    a = 0.7
    assert np.allclose(mat_exp(np.diag([a, -a])), np.diag([math.exp(a), math.exp(-a)]), rtol=1e-15)


@given(mat)
def test_mat_exp_small_matches_taylor(m):
    m = m / max(1.0, np.linalg.norm(m, 2))
    ref = taylor_expm(m)
    assert np.max(np.abs(mat_exp(m) - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


@given(mat)
def test_mat_exp_matches_scaling_and_squaring(m):
    ref = scipy.linalg.expm(m)
    assert np.max(np.abs(mat_exp(m) - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_mat_exp_near_degenerate_and_nilpotent():
    assert np.allclose(mat_exp(E_PLUS), np.eye(2) + E_PLUS, atol=1e-16)
    m = mat2(1e-9, 1.0, 0.0, -1e-9)
    assert np.allclose(mat_exp(m), scipy.linalg.expm(m), rtol=1e-13, atol=1e-15)


def test_mat_exp_batched():
    ms = np.stack([np.diag([0.1 * k, -0.1 * k]).astype(complex) for k in range(5)])
    out = mat_exp(ms)
    assert out.shape == (5, 2, 2)
    assert np.allclose(det(out), 1.0, atol=1e-14)
