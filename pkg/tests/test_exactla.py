from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from folia.errors import UsageError
from folia.exactla import (
    GF,
    QQ,
    Dual,
    DualRing,
    SparseMatrix,
    _matmul_modp,
    field_from_json,
    in_column_space,
    kernel_basis,
    rank,
    rank_across_primes,
)

FP = GF(32003)


def _naive_rank_modp(rows, p):
    """Textbook row reduction on lists of ints; independent of the package."""
    a = [[x % p for x in r] for r in rows]
    r = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], -1, p)
        a[r] = [x * inv % p for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        r += 1
    return r


int_matrices = st.integers(1, 7).flatmap(
    lambda nr: st.integers(1, 7).flatmap(
        lambda nc: st.lists(
            st.lists(st.integers(-5, 5), min_size=nc, max_size=nc), min_size=nr, max_size=nr
        )
    )
)


# -- examples -----------------------------------------------------------------


@pytest.mark.parametrize("field", [FP, QQ])
@pytest.mark.parametrize("method", ["auto", "sparse"])
def test_rank_examples(field, method):
    assert rank(SparseMatrix.identity(field, 3), method) == 3
    assert rank(SparseMatrix(field, 4, 7), method) == 0
    assert rank(SparseMatrix.from_dense(field, [[1, 1], [2, 2]]), method) == 1


@pytest.mark.parametrize("field", [FP, QQ])
def test_kernel_examples(field):
    assert kernel_basis(SparseMatrix.identity(field, 3)) == []
    ker = kernel_basis(SparseMatrix(field, 2, 5))
    assert len(ker) == 5
    assert rank(SparseMatrix.from_dense(field, ker)) == 5
    (v,) = kernel_basis(SparseMatrix.from_dense(field, [[1, 1], [2, 2]]))
    assert field.is_zero(v[0] + v[1]) and not field.is_zero(v[0])


def test_mixed_field_entries_rejected():
    with pytest.raises(UsageError):
        SparseMatrix(FP, 2, 2, {(0, 0): Fraction(1, 2)})
    with pytest.raises(UsageError):
        SparseMatrix(QQ, 2, 2, {(0, 0): 3})


def test_out_of_range_entry_rejected():
    with pytest.raises(UsageError):
        SparseMatrix(FP, 2, 2, {(2, 0): 1})


def test_no_stored_zeros():
    m = SparseMatrix(FP, 2, 2, [(0, 0, 0), (1, 1, 5), (1, 1, 32003 - 5)])
    assert m.nnz == 0


def test_dense_method_requires_prime_field():
    with pytest.raises(UsageError):
        rank(SparseMatrix.identity(QQ, 2), "dense")


def test_field_parsing():
    assert FP.convert("1/2") * 2 % 32003 == 1
    assert FP.convert(-1) == 32002
    assert QQ.convert("-3/6") == Fraction(-1, 2)
    assert field_from_json("Q") is QQ
    assert field_from_json({"Fp": 7}) == GF(7)
    with pytest.raises(UsageError):
        GF(9)
    with pytest.raises(UsageError):
        field_from_json({"p": 7})


def test_dual_numbers():
    D = DualRing(FP)
    x = D.lift(3, 1)
    y = x * x
    assert (y.a, y.b) == (9, 6)
    assert D.is_zero(D.eps * D.eps)
    assert D.normalize(Dual(-1, 32004)) == Dual(32002, 1)


def test_rank_across_primes_flags_disagreement():
    m = SparseMatrix.from_dense(QQ, [[1, 0], [0, 7]])
    ranks, agree = rank_across_primes(m, [3, 7])
    assert ranks == {3: 2, 7: 1} and not agree
    ranks, agree = rank_across_primes(m, [3, 5])
    assert agree


def test_in_column_space():
    m = SparseMatrix.from_dense(FP, [[1, 0], [0, 0], [0, 1]])
    assert in_column_space(m, [[2, 0, 5], [0, 1, 0]]) == [True, False]
    mq = m.map_field(QQ)
    assert in_column_space(mq, [[2, 0, 5], [0, 1, 0]]) == [True, False]


@pytest.mark.parametrize("p", [32003, 1048573, 2147483647])
def test_matmul_modp_paths(p):
    rng = np.random.default_rng(p % 1000)
    a = rng.integers(0, min(p, 1 << 30), size=(7, 40), dtype=np.int64)
    b = rng.integers(0, min(p, 1 << 30), size=(40, 5), dtype=np.int64)
    got = _matmul_modp(a % p, b % p, p)
    want = [[sum(int(a[i, k]) * int(b[k, j]) for k in range(40)) % p for j in range(5)] for i in range(7)]
    assert got.tolist() == want


def test_matvec_large_prime_fallback():
    big = GF(2147483647)
    m = SparseMatrix.from_dense(big, [[2147483646, 3], [0, 1]])
    assert m.matvec([2147483646, 1]) == [4, 1]


# -- properties ---------------------------------------------------------------


@given(int_matrices)
def test_rank_matches_oracles(rows):
    ncols = len(rows[0])
    m_q = SparseMatrix.from_dense(QQ, rows, ncols)
    m_p = SparseMatrix.from_dense(FP, rows, ncols)
    r_q = rank(m_q)
    assert r_q == sympy.Matrix(rows).rank()
    r_dense = rank(m_p, "dense")
    r_sparse = rank(m_p, "sparse")
    assert r_dense == r_sparse == _naive_rank_modp(rows, 32003)
    assert r_q <= min(len(rows), ncols)


@given(int_matrices, st.sampled_from(["dense", "sparse"]))
def test_rank_nullity_and_kernel_vectors(rows, method):
    ncols = len(rows[0])
    for field in (FP, QQ):
        if method == "dense" and field is QQ:
            continue
        m = SparseMatrix.from_dense(field, rows, ncols)
        ker = kernel_basis(m, method)
        assert rank(m, method) + len(ker) == ncols
        for v in ker:
            assert m.is_zero_product(v)
        if ker:
            assert rank(SparseMatrix.from_dense(field, ker)) == len(ker)


@given(int_matrices)
def test_qq_kernel_vectors_are_integral(rows):
    m = SparseMatrix.from_dense(QQ, rows, len(rows[0]))
    for v in kernel_basis(m):
        assert all(x.denominator == 1 for x in v)


@given(int_matrices)
def test_transpose_preserves_rank(rows):
    m = SparseMatrix.from_dense(FP, rows, len(rows[0]))
    assert rank(m) == rank(m.transpose())
    assert m.transpose().transpose() == m
