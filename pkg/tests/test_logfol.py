from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from folia.errors import DegenerateInputError, PreconditionError, SamplingError, UsageError
from folia.exactla import GF, QQ
from folia.forms import PolyForm, radial_contract, wedge_forms
from folia.logfol import (
    LogParams,
    balanced_check,
    construct_log_form,
    descent_check,
    genericity_check,
    hat_F,
    ideal_equality_check,
    integrability_check,
    integrability_witness,
    logdiff_identity_check,
    nc_linear_check,
    pluecker_check,
    random_params,
    stratum_slice,
    vanishes_on_stratum,
)
from folia.multivec import MultiVector, interior_d
from folia.poly import Poly

FP = GF(32003)
X = sympy.symbols("x0:6")


def lin(nvars, coeffs, ring=FP):
    return Poly.linear(ring, list(coeffs) + [0] * (nvars - len(coeffs)))


def coords(nvars, ring=FP):
    return [Poly.variable(ring, nvars, i) for i in range(nvars)]


def dx(nvars, *idx):
    return PolyForm.basis(FP, nvars, idx)


def m3_params(ring=FP):
    # lambda^1 = (1, 0, -1), lambda^2 = (0, 1, -1): lambda_01, lambda_02, lambda_12 = (1, -1, 1)
    return LogParams(2, 2, (1, 1, 1), [[1, 0, -1], [0, 1, -1]], coords(3, ring), ring)


def to_sympy(p: Poly):
    out = 0
    for ev, c in p.terms():
        t = sympy.Rational(c.numerator, c.denominator) if p.ring is QQ else sympy.Integer(int(c))
        for i, e in enumerate(ev):
            t *= X[i] ** e
        out += t
    return out


# -- hat_F and construction ---------------------------------------------------


def test_hat_F_examples():
    x = coords(3)
    assert hat_F(x, (0, 1)) == x[2]
    one = hat_F(x, (0, 1, 2))
    assert one.degree == 0 and one == Poly.constant(FP, 3)
    F = coords(3) + [x[0] + x[1]]
    assert hat_F(F, (1,)) == x[0] * x[2] * (x[0] + x[1])


def test_construct_m3_example():
    p = m3_params()
    assert p.lam().to_coordinates() == [1, 32002, 1]
    assert all(interior_d(p.degrees, v).is_zero() for v in p.lambda_vectors())
    omega = construct_log_form(p)
    x = coords(3)
    want = dx(3, 0, 1).times(x[2]) - dx(3, 0, 2).times(x[1]) + dx(3, 1, 2).times(x[0])
    assert omega == want
    assert omega.grade == 2 and omega.total_degree == 3
    assert radial_contract(omega).is_zero()


def test_construct_q1_example():
    p = LogParams(1, 1, (1, 1), [[1, -1]], coords(2), FP)
    x = coords(2)
    assert construct_log_form(p) == dx(2, 0).times(x[1]) - dx(2, 1).times(x[0])
    assert logdiff_identity_check(p)


def test_degenerate_lambda():
    p = LogParams(2, 2, (1, 1, 1), [[1, 0, -1], [1, 0, -1]], coords(3), FP)
    with pytest.raises(DegenerateInputError):
        construct_log_form(p)


@given(st.integers(1, 2), st.lists(st.integers(1, 2), min_size=2, max_size=3), st.integers(0, 10**6))
@settings(max_examples=10)
def test_q1_form_matches_rational_expression(n, d, seed):
    # omega = F * sum_i lambda_i dF_i / F_i, checked against sympy's rational arithmetic
    try:
        p = random_params(seed, n, 1, d, field=QQ, bound=5)
    except SamplingError:
        return
    omega = construct_log_form(p)
    Fs = [to_sympy(f) for f in p.polys]
    F = sympy.Mul(*Fs)
    lam = p.lambdas[0]
    for i in range(n + 1):
        want = sympy.cancel(F * sum(sympy.Rational(l.numerator, l.denominator) * sympy.diff(f, X[i]) / f
                                    for l, f in zip(lam, Fs)))
        assert sympy.expand(to_sympy(omega.coefficient((i,))) - want) == 0


# -- moduli equations ---------------------------------------------------------


def test_pluecker_examples():
    assert pluecker_check(construct_log_form(m3_params()), 2)
    raw = dx(4, 0, 1) + dx(4, 2, 3)
    assert not pluecker_check(raw, 2)
    assert wedge_forms(raw, raw) == dx(4, 0, 1, 2, 3).scale(2)


def test_integrability_examples():
    omega = construct_log_form(m3_params())
    assert integrability_check(omega, 2)
    assert integrability_witness(omega) is None
    # a random descended 2-form on P^4 (radial contraction of a random 3-form)
    rng = np.random.default_rng(0)
    comps = {I: Poly.random(FP, 5, 1, rng) for I in combinations(range(5), 3)}
    beta = radial_contract(PolyForm(FP, 5, 3, 4, comps))
    assert descent_check(beta)
    assert not integrability_check(beta, 2)
    v = integrability_witness(beta)
    assert v is not None and len(v) == 1


def test_logdiff_examples():
    assert logdiff_identity_check(m3_params())
    p = random_params(7, 3, 2, (1, 1, 1, 1))
    assert logdiff_identity_check(p)


@pytest.mark.parametrize(
    "n,q,d,seed",
    [(3, 2, (1, 1, 1, 1), 0), (3, 2, (1, 2, 1), 1), (4, 2, (2, 1, 1, 1, 1), 2), (3, 1, (1, 2), 3),
     (4, 3, (1, 1, 1, 1), 4), (3, 3, (1, 1, 1, 2), 5), (3, 1, (2, 2, 1), 6)],
)
def test_constructed_forms_satisfy_moduli_equations(n, q, d, seed):
    p = random_params(seed, n, q, d)
    omega = construct_log_form(p)
    assert omega.grade == q and omega.total_degree == sum(d)
    assert descent_check(omega)
    assert pluecker_check(omega, q)
    assert integrability_check(omega, q)
    assert logdiff_identity_check(p, omega)
    assert vanishes_on_stratum(omega, p.polys, q + 1)


@given(st.integers(0, 10**6), st.integers(2, 40))
@settings(max_examples=10)
def test_construction_is_multilinear(seed, c):
    p = random_params(seed, 3, 2, (1, 1, 2))
    omega = construct_log_form(p)
    scaled_lam = LogParams(p.n, p.q, p.degrees, [[x * c for x in p.lambdas[0]], p.lambdas[1]], p.polys, FP)
    assert construct_log_form(scaled_lam) == omega.scale(c)
    for i in range(p.m):
        polys = list(p.polys)
        polys[i] = polys[i].scale(c)
        assert construct_log_form(LogParams(p.n, p.q, p.degrees, p.lambdas, polys, FP)) == omega.scale(c)


# -- predicates ---------------------------------------------------------------


def test_genericity_examples():
    assert genericity_check(m3_params().lam(), (1, 1, 1))
    lam = MultiVector(FP, 3, 2, {(0, 1): 1, (1, 2): 1})
    assert not genericity_check(lam, (1, 1, 1))
    p = random_params(11, 3, 2, (1, 1, 1, 1))
    assert genericity_check(p.lam(), p.degrees)
    with pytest.raises(PreconditionError):
        genericity_check(MultiVector.basis(FP, 3, (0,)))


def test_genericity_empty_for_degenerate_degree_vector():
    # for m=3 and d_0 = d_1 + d_2 one triple condition vanishes identically
    with pytest.raises(SamplingError):
        random_params(0, 3, 2, (2, 1, 1), max_tries=20)


def test_balanced_examples():
    assert balanced_check((1, 1, 1, 1, 1), 2)
    assert balanced_check((1, 2, 3, 3), 1)
    assert not balanced_check((1, 2, 3, 3), 2)
    assert not balanced_check((1, 2, 3, 4), 2)
    with pytest.raises(PreconditionError):
        balanced_check((1, 1, 1), 3)


@given(st.integers(2, 9))
def test_all_ones_balanced_iff(m):
    for k in range(1, m):
        assert balanced_check((1,) * m, k) == (2 * k < m)


def test_nc_linear_examples():
    assert nc_linear_check(coords(5))
    x = coords(5)
    assert not nc_linear_check([x[0], x[1], x[0] + x[1]])
    rng = np.random.default_rng(5)
    assert nc_linear_check([Poly.random(FP, 5, 1, rng) for _ in range(5)])
    with pytest.raises(PreconditionError):
        nc_linear_check([x[0] * x[1]])


# -- stratum slices -----------------------------------------------------------


def test_stratum_slice_examples():
    x = coords(3)
    assert stratum_slice(x, 3, 2).dimension == 6
    rng = np.random.default_rng(1)
    polys = [Poly.random(FP, 4, di, rng) for di in (1, 2)]
    for e in range(3, 6):
        assert stratum_slice(polys, 1, e).dimension == comb(3 + e - 3, e - 3)
    assert stratum_slice(polys, 1, 2).dimension == 0


def test_vanishes_examples():
    p = random_params(1, 4, 2, (1, 1, 1, 1, 1))
    omega = construct_log_form(p)
    assert vanishes_on_stratum(omega, p.polys, 3)
    assert vanishes_on_stratum(omega, p.polys, 4)
    rng = np.random.default_rng(2)
    comps = {I: Poly.random(FP, 5, 2, rng) for I in combinations(range(5), 3)}
    beta = radial_contract(PolyForm(FP, 5, 3, 5, comps))
    assert not vanishes_on_stratum(beta, p.polys, 4)
    assert vanishes_on_stratum(PolyForm.zero(FP, 5, 2, 5), p.polys, 4)


def test_ideal_equality_examples():
    p = random_params(1, 4, 2, (1, 1, 1, 1))
    assert ideal_equality_check(p.polys, 2, 3)
    assert ideal_equality_check(p.polys, 4, 3)
    p = random_params(2, 4, 2, (1, 1, 1, 2, 2))
    assert ideal_equality_check(p.polys, 3, 5)


def test_ideal_equality_fails_past_ambient_dimension():
    # five generic hyperplanes in P^3: no point lies on four of them, so the
    # intersection of the 4-fold ideals is larger than <Fhat_J : |J| = 3> in degree 1
    p = random_params(0, 3, 2, (1, 1, 1, 1, 1))
    assert not ideal_equality_check(p.polys, 4, 1)


# -- sampling and serialization ----------------------------------------------


def test_random_params_deterministic():
    a = random_params(3, 3, 2, (1, 2, 1))
    b = random_params(3, 3, 2, (1, 2, 1))
    assert a.to_json() == b.to_json()
    assert a.to_json() != random_params(4, 3, 2, (1, 2, 1)).to_json()


def test_random_params_seed1_generic():
    p = random_params(1, 4, 2, (1, 1, 1, 1, 1))
    assert genericity_check(p.lam(), p.degrees)
    assert nc_linear_check(p.polys)


def test_random_params_preconditions():
    with pytest.raises(PreconditionError):
        random_params(0, 3, 2, (1, 1))
    with pytest.raises(PreconditionError):
        random_params(0, 1, 2, (1, 1, 1))


@given(st.integers(0, 10**6), st.sampled_from([(1, 1, 1), (1, 2, 1, 2), (2, 1, 3)]), st.integers(1, 2))
@settings(max_examples=20)
def test_sampled_lambdas_orthogonal(seed, d, q):
    try:
        p = random_params(seed, 3, q, d)
    except SamplingError:
        return
    assert p.problems() == []
    for v in p.lambda_vectors():
        assert interior_d(d, v).is_zero()


def test_json_roundtrip_and_validation():
    p = random_params(5, 3, 2, (1, 2, 1))
    q = LogParams.from_json(p.to_json())
    assert q.to_json() == p.to_json()
    bad = p.to_json()
    bad["lambdas"][0][0] = str((int(bad["lambdas"][0][0]) + 1) % 32003)
    with pytest.raises(UsageError, match="orthogonal"):
        LogParams.from_json(bad)
    assert any("orthogonal" in s for s in LogParams.from_json(bad, validate=False).problems())
    with pytest.raises(UsageError):
        LogParams.from_json({"n": 3})
    with pytest.raises(UsageError):
        LogParams.from_json([1, 2])


def test_with_field_recovers_integers():
    p = random_params(5, 3, 2, (1, 2, 1))
    q = p.with_field(QQ)
    assert q.problems() == []
    back = q.with_field(FP)
    assert back.to_json() == p.to_json()
    other = p.with_field(GF(65537))
    assert other.problems() == []
    assert integrability_check(construct_log_form(other))
