from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from folia.errors import UsageError
from folia.exactla import GF, QQ
from folia.multivec import (
    MultiVector,
    cmd_basis,
    grass_tangent_dirs,
    interior_d,
    is_decomposable2,
    koszul_check,
    koszul_dims,
    span_rank,
    wedge_all,
    wedge_mv,
)

FP = GF(32003)


def e(m, *idx, ring=FP):
    return MultiVector.basis(ring, m, idx)


def mv(m, grade, comps, ring=FP):
    return MultiVector(ring, m, grade, comps)


def random_mv(ring, m, grade, rng):
    sets = list(combinations(range(m), grade))
    return MultiVector.from_coordinates(ring, m, grade, [int(x) for x in rng.integers(-9, 10, len(sets))])


degree_vectors = st.lists(st.integers(1, 5), min_size=2, max_size=6)
seeds = st.integers(0, 10**6)


# -- examples (indices shifted to 0-based) ------------------------------------


def test_wedge_examples():
    assert wedge_mv(e(3, 0), e(3, 1)) == e(3, 0, 1)
    assert wedge_mv(e(3, 0, 1), e(3, 0, 2)).is_zero()
    lam = mv(4, 2, {(0, 1): 1, (0, 2): -1, (1, 2): 1})
    sq = wedge_mv(lam, lam)
    assert sq.grade == 4 and sq.coordinate((0, 1, 2, 3)) == 0


def test_wedge_dimension_mismatch():
    with pytest.raises(UsageError):
        wedge_mv(e(3, 0), e(4, 1))


def test_interior_examples():
    assert interior_d((1, 1, 1), e(3, 0, 1)) == e(3, 1) - e(3, 0)
    assert interior_d((1, 1, 1), mv(3, 2, {(0, 1): 1, (0, 2): -1, (1, 2): 1})).is_zero()
    s = interior_d((2, 3), e(2, 0))
    assert s.grade == 0 and s.coordinate(()) == 2


def test_cmd_basis_examples():
    (b,) = cmd_basis((1, 1), FP)
    assert b.as_vector() == [1, 32002]
    assert len(cmd_basis((1, 1, 1, 1, 1), FP)) == 4
    basis = cmd_basis((1, 2, 3), QQ)
    assert [v.as_vector() for v in basis] == [[2, -1, 0], [3, 0, -1]]
    for v in basis:
        assert interior_d((1, 2, 3), v).is_zero()
    assert span_rank(basis) == 2


def test_koszul_examples():
    assert koszul_dims((1, 1, 1), 2, FP) == (1, 1)
    assert koszul_check((1, 1, 1), 2, FP)
    ker, im = koszul_dims((1,) * 5, 2, FP)
    assert ker == im == 6


def test_decomposable_examples():
    assert is_decomposable2(e(4, 0, 1))
    lam = e(4, 0, 1) + e(4, 2, 3)
    assert not is_decomposable2(lam)
    assert wedge_mv(lam, lam) == e(4, 0, 1, 2, 3).scale(2)
    with pytest.raises(UsageError):
        is_decomposable2(e(4, 0))


def test_grass_tangent_examples():
    d = (1,) * 5
    l1, l2 = cmd_basis(d, FP)[0], cmd_basis(d, FP)[1] + cmd_basis(d, FP)[3]
    dirs = grass_tangent_dirs(l1, l2, d)
    lam = wedge_mv(l1, l2)
    assert len(dirs) == 8
    for v in dirs:
        assert wedge_mv(v, lam).is_zero()
        assert interior_d(d, v).is_zero()
    # cone over the tangent space of Gr(2, 4): 2*(4-2) + 1 = 2m - 5
    assert span_rank(dirs) == 5
    assert span_rank(dirs + [lam]) == 5


def test_grass_tangent_rejects_bad_input():
    d = (1, 1, 1, 1)
    b = cmd_basis(d, FP)
    with pytest.raises(UsageError):
        grass_tangent_dirs(b[0], b[0].scale(3), d)
    with pytest.raises(UsageError):
        grass_tangent_dirs(b[0], e(4, 0), d)


def test_coordinate_antisymmetry():
    lam = mv(3, 2, {(0, 1): 5})
    assert lam.coordinate((1, 0)) == 32003 - 5
    assert lam.coordinate((0, 0)) == 0


def test_json_roundtrip():
    lam = mv(4, 2, {(0, 1): "1/2", (2, 3): -1}, ring=QQ)
    assert MultiVector.from_json(QQ, 4, 2, lam.to_json()) == lam


# -- properties ---------------------------------------------------------------


@given(st.integers(2, 5), st.integers(1, 4), seeds)
def test_wedge_of_vectors_gives_minors(m, k, seed):
    k = min(k, m)
    rng = np.random.default_rng(seed)
    rows = rng.integers(-9, 10, size=(k, m)).tolist()
    w = wedge_all([MultiVector.from_vector(QQ, r) for r in rows])
    mat = sympy.Matrix(rows)
    for cols in combinations(range(m), k):
        assert w.coordinate(cols) == mat[:, list(cols)].det()


@given(st.integers(2, 6), seeds)
def test_graded_anticommutative_and_associative(m, seed):
    rng = np.random.default_rng(seed)
    p, r, s = (int(x) for x in rng.integers(0, m + 1, 3))
    a, b, c = random_mv(FP, m, p, rng), random_mv(FP, m, r, rng), random_mv(FP, m, s, rng)
    ab, ba = wedge_mv(a, b), wedge_mv(b, a)
    assert ab == (ba if (p * r) % 2 == 0 else -ba)
    assert wedge_mv(wedge_mv(a, b), c) == wedge_mv(a, wedge_mv(b, c))


@given(degree_vectors, seeds)
def test_interior_squares_to_zero(d, seed):
    m = len(d)
    rng = np.random.default_rng(seed)
    for q in range(2, m + 1):
        lam = random_mv(FP, m, q, rng)
        assert interior_d(d, interior_d(d, lam)).is_zero()


@given(degree_vectors)
def test_koszul_exact(d):
    for q in range(1, len(d)):
        assert koszul_check(d, q, FP)


@given(degree_vectors)
def test_cmd_basis_spans_orthogonal_complement(d):
    basis = cmd_basis(d, FP)
    assert len(basis) == len(d) - 1 == span_rank(basis)
    assert all(interior_d(d, v).is_zero() for v in basis)


@given(st.integers(2, 6), seeds)
def test_products_of_vectors_are_decomposable(m, seed):
    rng = np.random.default_rng(seed)
    l1 = MultiVector.from_vector(FP, [int(x) for x in rng.integers(-9, 10, m)])
    l2 = MultiVector.from_vector(FP, [int(x) for x in rng.integers(-9, 10, m)])
    assert is_decomposable2(wedge_mv(l1, l2))


@given(degree_vectors, seeds)
def test_contraction_of_plane_vs_factors(d, seed):
    # for independent l1, l2: i_d(l1 ^ l2) = 0 iff both are orthogonal to d
    m = len(d)
    rng = np.random.default_rng(seed)
    basis = cmd_basis(d, FP)
    l1 = sum((b.scale(int(x)) for b, x in zip(basis, rng.integers(-5, 6, m - 1))), MultiVector(FP, m, 1))
    l2 = MultiVector.from_vector(FP, [int(x) for x in rng.integers(-5, 6, m)])
    if wedge_mv(l1, l2).is_zero():
        return
    orth = interior_d(d, l2).is_zero()
    assert interior_d(d, wedge_mv(l1, l2)).is_zero() == orth


@given(st.integers(4, 7), seeds)
def test_grass_span_dimension(m, seed):
    d = [int(x) for x in np.random.default_rng(seed).integers(1, 4, m)]
    basis = cmd_basis(d, FP)
    rng = np.random.default_rng(seed + 1)
    combo = lambda: sum((b.scale(int(x)) for b, x in zip(basis, rng.integers(-5, 6, m - 1))), MultiVector(FP, m, 1))
    l1, l2 = combo(), combo()
    if wedge_mv(l1, l2).is_zero():
        return
    dirs = grass_tangent_dirs(l1, l2, d)
    assert len(dirs) == 2 * (m - 1)
    assert span_rank(dirs) == 2 * m - 5
    assert span_rank(dirs + [wedge_mv(l1, l2)]) == 2 * m - 5
