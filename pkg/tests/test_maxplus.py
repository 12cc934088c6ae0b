"""Semiring laws, polynomial matrices and the cycle-mean solver."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from support import enumerate_cycle_mean, karp_cycle_mean, random_poly_matrix

from metroflux.maxplus import (
    EPS,
    EventGraph,
    ImplicitSystemError,
    NoCycleError,
    PolyMatrix,
    generalized_eigenpair,
    mat_vec,
    max_cycle_mean,
    mp_add,
    mp_mul,
    mp_sum,
    nontrivial_components,
    poly_eval,
    poly_mat_add,
    poly_mat_mul,
    scalar_from_text,
    scalar_to_text,
    strongly_connected_components,
    to_float,
)

fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=50)
scalars = st.one_of(st.just(EPS), fractions)


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------

@given(scalars, scalars, scalars)
def test_semiring_laws(a, b, c):
    assert mp_add(a, b) == mp_add(b, a)
    assert mp_add(mp_add(a, b), c) == mp_add(a, mp_add(b, c))
    assert mp_add(a, a) == a
    assert mp_add(a, EPS) == a
    assert mp_mul(a, 0) == a
    assert mp_mul(a, EPS) is EPS
    assert mp_mul(mp_mul(a, b), c) == mp_mul(a, mp_mul(b, c))
    assert mp_mul(a, mp_add(b, c)) == mp_add(mp_mul(a, b), mp_mul(a, c))


@given(st.one_of(scalars, st.integers(-10**6, 10**6),
                 st.floats(allow_nan=False, allow_infinity=False)))
def test_scalar_text_round_trip(a):
    back = scalar_from_text(scalar_to_text(a))
    assert back == a and type(back) is type(a)


def test_eps_ordering_and_float():
    assert EPS < -10**9 and not EPS > 0
    assert to_float(EPS) == float("-inf")
    assert mp_sum([]) is EPS
    assert mp_sum([3, EPS, Fraction(7, 2)]) == Fraction(7, 2)


# ---------------------------------------------------------------------------
# Polynomial matrices
# ---------------------------------------------------------------------------

def test_matrix_validation():
    with pytest.raises(IndexError):
        PolyMatrix(2, {(2, 0): {0: 1}})
    with pytest.raises(ValueError):
        PolyMatrix(2, {(0, 1): {-1: 1}})
    with pytest.raises(ValueError):
        PolyMatrix(2, {}, labels=["a"])
    A = PolyMatrix(2, {(0, 1): {1: 3, 2: EPS}})
    assert dict(A[0, 1]) == {1: 3} and A.coefficient(1, 0, 0) is EPS


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_product_is_associative_and_has_identity(seed):
    rng = np.random.default_rng(seed)
    A = random_poly_matrix(rng, max_nodes=5)
    n = A.dim
    B = PolyMatrix(n, {k: v for k, v in A.entries.items() if (k[0] + k[1]) % 2 == 0})
    C = PolyMatrix(n, {k: v for k, v in A.entries.items() if k[0] >= k[1]})
    assert poly_mat_mul(poly_mat_mul(A, B), C) == poly_mat_mul(A, poly_mat_mul(B, C))
    assert A @ PolyMatrix.identity(n) == A == PolyMatrix.identity(n) @ A
    assert poly_mat_add(A, PolyMatrix.zero(n)) == A
    # distributivity over (+)
    assert A @ poly_mat_add(B, C) == poly_mat_add(A @ B, A @ C)


def test_product_adds_degrees():
    A = PolyMatrix(2, {(0, 1): {1: 2}})
    B = PolyMatrix(2, {(1, 0): {0: 5, 2: 1}})
    P = A @ B
    assert dict(P[0, 0]) == {1: 7, 3: 3}


# ---------------------------------------------------------------------------
# Graph structure
# ---------------------------------------------------------------------------

def test_components_and_dot():
    A = PolyMatrix(3, {(1, 0): {1: 2}, (0, 1): {1: 1}, (2, 2): {1: 4}},
                   labels=[(0, 0), (0, 1), (1, 1)])
    G = EventGraph.from_matrix(A)
    comps, irreducible = strongly_connected_components(G)
    assert not irreducible and sorted(map(sorted, comps)) == [[0, 1], [2]]
    assert len(nontrivial_components(G)) == 2
    dot = G.to_dot("A")
    assert dot.startswith("digraph A {") and dot.count("->") == 3


def test_no_cycle_and_implicit_errors():
    acyclic = PolyMatrix(2, {(1, 0): {1: 2}})
    with pytest.raises(NoCycleError):
        max_cycle_mean(EventGraph.from_matrix(acyclic))
    implicit = PolyMatrix(2, {(1, 0): {0: 1}, (0, 1): {0: 1}})
    with pytest.raises(ImplicitSystemError):
        generalized_eigenpair(implicit)


# ---------------------------------------------------------------------------
# Cycle means
# ---------------------------------------------------------------------------

def test_known_cycle_mean():
    # cycle 0 -> 1 -> 0 with weights 3 + 5 over durations 1 + 2; self-loop 2/1
    A = PolyMatrix(2, {(1, 0): {1: 3}, (0, 1): {2: 5}, (0, 0): {1: 2}})
    res = max_cycle_mean(EventGraph.from_matrix(A))
    assert res.mean == Fraction(8, 3)
    assert Fraction(sum(a.weight for a in res.cycle), sum(a.duration for a in res.cycle)) == res.mean


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_howard_matches_oracles(seed):
    A = random_poly_matrix(np.random.default_rng(seed))
    res = max_cycle_mean(EventGraph.from_matrix(A))
    assert isinstance(res.mean, Fraction)
    assert res.mean == enumerate_cycle_mean(A) == karp_cycle_mean(A)
    # the witness attains the mean
    w = sum(Fraction(a.weight) for a in res.cycle)
    assert w / sum(a.duration for a in res.cycle) == res.mean


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_eigenvector_equation(seed):
    A = random_poly_matrix(np.random.default_rng(seed))
    res = generalized_eigenpair(A)
    assert res.irreducible
    v = list(res.v)
    assert mat_vec(poly_eval(A, res.mu), v) == v


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**9), st.fractions(-20, 20, max_denominator=7))
def test_cycle_mean_shifts_with_weights(seed, c):
    """Adding c * degree to every coefficient adds c to the mean."""
    A = random_poly_matrix(np.random.default_rng(seed))
    shifted = PolyMatrix(A.dim, {k: {d: w + c * d for d, w in p.items()} for k, p in A.entries.items()})
    assert max_cycle_mean(EventGraph.from_matrix(shifted)).mean == \
        max_cycle_mean(EventGraph.from_matrix(A)).mean + c


def test_float_weights_close_to_exact():
    A = random_poly_matrix(np.random.default_rng(5))
    F = PolyMatrix(A.dim, {k: {d: float(w) for d, w in p.items()} for k, p in A.entries.items()})
    exact = max_cycle_mean(EventGraph.from_matrix(A)).mean
    approx = max_cycle_mean(EventGraph.from_matrix(F)).mean
    assert isinstance(approx, float) and approx == pytest.approx(float(exact), rel=1e-12)
