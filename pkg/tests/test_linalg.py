from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diraclab.linalg import (
    DimensionMismatch,
    LinMap,
    Subspace,
    annihilator,
    basis_vec,
    canonicalize,
    image,
    intersect,
    kernel,
    preimage,
    quotient_dim,
    solve,
    span_sum,
    vec,
    zero_subspace,
)

F = Fraction


def test_canonicalize_full_plane():
    s = canonicalize([vec(1, 0), vec(0, 1)])
    assert s.basis == (vec(1, 0), vec(0, 1))


def test_canonicalize_scaling_invariance():
    s = canonicalize([vec(2, 4)])
    assert s.basis == (vec(1, 2),)


def test_canonicalize_dependent_vectors():
    # frozen from a hand Gaussian elimination: {(1,1),(2,2),(1,0)} spans Q^2
    s = canonicalize([vec(1, 1), vec(2, 2), vec(1, 0)])
    assert s.dim == 2
    assert s.basis == (vec(1, 0), vec(0, 1))


def test_canonicalize_ambient_mismatch():
    with pytest.raises(DimensionMismatch):
        canonicalize([vec(1, 0), vec(1, 0, 0)])


def test_intersect_axes_is_zero():
    x = canonicalize([vec(1, 0)])
    y = canonicalize([vec(0, 1)])
    assert intersect(x, y) == zero_subspace(2)


def test_annihilator_diagonal():
    # solving alpha^T v = 0 for v = (1,1) by hand gives span{(1,-1)}
    s = canonicalize([vec(1, 1)])
    assert annihilator(s) == canonicalize([vec(1, -1)])


def test_preimage_projection():
    # F : Q^3 -> Q^2 dropping the last coordinate; solve F x in x-axis by hand
    f = LinMap.from_rows([[1, 0, 0], [0, 1, 0]])
    s = canonicalize([vec(1, 0)])
    assert preimage(f, s) == canonicalize([vec(1, 0, 0), vec(0, 0, 1)])


def test_solve_identity():
    f = LinMap.identity(2)
    assert solve(f, vec(3, 5)) == vec(3, 5)


def test_solve_underdetermined_free_variable_zero():
    # echelon back-substitution with the free variable pinned to zero
    f = LinMap.from_rows([[1, 1]])
    assert solve(f, vec(2)) == vec(2, 0)


def test_solve_inconsistent():
    f = LinMap.from_rows([[0, 0]])
    assert solve(f, vec(1)) is None


def test_quotient_dim_requires_nesting():
    s1 = canonicalize([vec(1, 0), vec(0, 1)])
    s2 = canonicalize([vec(1, 1)])
    assert quotient_dim(s1, s2) == 1
    with pytest.raises(DimensionMismatch):
        quotient_dim(s2, s1)


def test_matmul_apply_agree():
    a = LinMap.from_rows([[1, 2], [3, 4]])
    b = LinMap.from_rows([[0, 1], [1, 0]])
    v = vec(5, 7)
    assert (a @ b).apply(v) == a.apply(b.apply(v))


rationals = st.fractions(min_value=-6, max_value=6, max_denominator=5)


def subspaces(ambient=4, max_gens=4):
    return st.lists(
        st.tuples(*[rationals] * ambient).map(lambda t: tuple(F(x) for x in t)),
        min_size=0, max_size=max_gens,
    ).map(lambda gens: canonicalize(gens, ambient))


@settings(max_examples=60, deadline=None)
@given(subspaces(), subspaces())
def test_dimension_formula(s1, s2):
    assert span_sum(s1, s2).dim + intersect(s1, s2).dim == s1.dim + s2.dim


@settings(max_examples=60, deadline=None)
@given(subspaces())
def test_double_annihilator(s):
    assert annihilator(annihilator(s)) == s


@settings(max_examples=60, deadline=None)
@given(subspaces())
def test_canonicalize_idempotent(s):
    assert canonicalize(list(s.basis), s.ambient_dim) == s


@settings(max_examples=40, deadline=None)
@given(st.permutations(list(range(3))),
       st.lists(st.tuples(*[rationals] * 3), min_size=3, max_size=3))
def test_canonicalize_permutation_invariant(perm, gens):
    gens = [tuple(F(x) for x in g) for g in gens]
    a = canonicalize(gens, 3)
    b = canonicalize([gens[i] for i in perm], 3)
    assert a == b


@settings(max_examples=60, deadline=None)
@given(subspaces(ambient=3, max_gens=3),
       st.lists(st.tuples(*[rationals] * 3), min_size=2, max_size=2))
def test_image_preimage_adjunction(s, rows):
    f = LinMap.from_rows([list(r) for r in rows], cols=3)
    assert s.issubset(preimage(f, image(f, s)))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(*[rationals] * 4), min_size=2, max_size=3),
       st.tuples(*[rationals] * 4))
def test_solve_produces_solutions(rows, x):
    f = LinMap.from_rows([list(r) for r in rows], cols=4)
    b = f.apply(tuple(F(v) for v in x))
    sol = solve(f, b)
    assert sol is not None
    assert f.apply(sol) == b


def test_kernel_matches_rank():
    f = LinMap.from_rows([[1, 2, 3], [2, 4, 6]])
    k = kernel(f)
    assert k.dim == 2
    for v in k.basis:
        assert f.apply(v) == vec(0, 0)


def test_subspace_equality_is_canonical():
    a = canonicalize([vec(1, 1), vec(0, 2)])
    b = canonicalize([vec(3, 5), vec(7, 2)])
    assert a == b  # both are all of Q^2
    assert isinstance(a, Subspace)
    assert a.basis == (basis_vec(2, 0), basis_vec(2, 1))
