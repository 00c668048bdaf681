"""Logarithmic q-forms of type d and the foliation moduli equations.

A parameter point is a degree vector ``d = (d_1..d_m)``, vectors
``lambda^1..lambda^q`` orthogonal to ``d`` and homogeneous polynomials
``F_i`` of degree ``d_i``.  The associated form is

    omega = sum_{|I| = q} lambda_I * Fhat_I * dF_{i_1} ^ ... ^ dF_{i_q}

where ``lambda = lambda^1 ^ ... ^ lambda^q`` and ``Fhat_I`` is the product
of the ``F_j`` with ``j`` not in ``I``.  Polynomial indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, PreconditionError, SamplingError, UsageError
from .exactla import DEFAULT_PRIME, GF, SparseMatrix, field_from_json, in_column_space, kernel_basis, rank
from .forms import PolyForm, contract_multi, ext_d, radial_contract, wedge_forms
from .multivec import MultiVector, check_degrees, cmd_basis, interior_d, wedge_all
from .poly import Poly, monomial_basis, product


# ---------------------------------------------------------------------------
# parameters


@dataclass
class LogParams:
    n: int
    q: int
    degrees: tuple
    lambdas: list  # q coordinate lists of length m, entries in ``field``
    polys: list
    field: object = field(default_factory=lambda: GF(DEFAULT_PRIME))
    seed: int | None = None

    def __post_init__(self):
        self.degrees = tuple(int(x) for x in self.degrees)
        self.lambdas = [[self.field.convert(c) for c in vec] for vec in self.lambdas]

    @property
    def m(self) -> int:
        return len(self.degrees)

    @property
    def nvars(self) -> int:
        return self.n + 1

    @property
    def total_degree(self) -> int:
        return sum(self.degrees)

    def lambda_vectors(self) -> list[MultiVector]:
        return [MultiVector.from_vector(self.field, v) for v in self.lambdas]

    def lam(self) -> MultiVector:
        """The decomposable q-vector ``lambda^1 ^ ... ^ lambda^q``."""
        return wedge_all(self.lambda_vectors())

    def problems(self) -> list[str]:
        """Violated invariants, as human-readable strings."""
        out = []
        try:
            check_degrees(self.degrees)
        except UsageError as exc:
            out.append(str(exc))
            return out
        if self.q < 1:
            out.append("q must be positive")
        if self.m < self.q + 1:
            out.append(f"need m >= q + 1, got m={self.m}, q={self.q}")
        if self.q > self.n:
            out.append(f"need q <= n, got q={self.q}, n={self.n}")
        if len(self.lambdas) != self.q:
            out.append(f"expected {self.q} lambda vectors, got {len(self.lambdas)}")
        for j, v in enumerate(self.lambdas):
            if len(v) != self.m:
                out.append(f"lambda^{j + 1} has {len(v)} entries, expected {self.m}")
            elif not interior_d(self.degrees, MultiVector.from_vector(self.field, v)).is_zero():
                out.append(f"lambda^{j + 1} is not orthogonal to the degree vector")
        if len(self.polys) != self.m:
            out.append(f"expected {self.m} polynomials, got {len(self.polys)}")
        for i, (f, di) in enumerate(zip(self.polys, self.degrees)):
            if f.nvars != self.nvars:
                out.append(f"F_{i + 1} has {f.nvars} variables, expected {self.nvars}")
            if f.is_zero():
                out.append(f"F_{i + 1} is zero")
            elif f.degree != di:
                out.append(f"F_{i + 1} has degree {f.degree}, expected {di}")
            if f.ring != self.field:
                out.append(f"F_{i + 1} is defined over {f.ring!r}, not {self.field!r}")
        return out

    def validate(self) -> "LogParams":
        bad = self.problems()
        if bad:
            raise UsageError("; ".join(bad))
        return self

    def with_field(self, field) -> "LogParams":
        """Same integral instance over another field.

        Prime-field residues are lifted to the symmetric range, which
        recovers the sampled integers as long as they stay below p/2.
        """
        lift = _symmetric_lift(self.field)
        polys = [f.map_coefficients(lambda c: field.convert(lift(c)), field) for f in self.polys]
        lambdas = [[field.convert(lift(c)) for c in v] for v in self.lambdas]
        return LogParams(self.n, self.q, self.degrees, lambdas, polys, field, self.seed)

    def to_json(self) -> dict:
        fmt = self.field.format
        out = {
            "n": self.n,
            "q": self.q,
            "degrees": list(self.degrees),
            "lambdas": [[fmt(c) for c in v] for v in self.lambdas],
            "polys": [f.to_json() for f in self.polys],
            "field": self.field.to_json(),
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_json(cls, obj: dict, field=None, validate: bool = True) -> "LogParams":
        """Parse the JSON schema; ``field`` overrides the file's field."""
        if not isinstance(obj, dict):
            raise UsageError("LogParams JSON must be an object")
        try:
            n, q = int(obj["n"]), int(obj["q"])
            degrees = [int(x) for x in obj["degrees"]]
            if field is None:
                field = field_from_json(obj["field"]) if "field" in obj else GF(DEFAULT_PRIME)
            polys = [
                Poly.from_json(field, pj, n + 1, di) for pj, di in zip(obj["polys"], degrees)
            ]
            if len(obj["polys"]) != len(degrees):
                raise UsageError("number of polynomials does not match the degree vector")
            lambdas = [[field.convert(c) for c in v] for v in obj["lambdas"]]
        except (KeyError, TypeError) as exc:
            raise UsageError(f"malformed LogParams JSON: {exc}") from exc
        params = cls(n, q, tuple(degrees), lambdas, polys, field, obj.get("seed"))
        return params.validate() if validate else params


def _symmetric_lift(field):
    p = getattr(field, "p", None)
    if p is None:
        return lambda c: c
    half = p // 2
    return lambda c: c - p if c > half else c


# ---------------------------------------------------------------------------
# construction


def hat_F(polys: Sequence[Poly], I: Sequence[int]) -> Poly:
    """Product of the ``F_j`` with ``j`` not in ``I``."""
    I = set(I)
    if not polys:
        raise UsageError("no polynomials given")
    rest = [f for j, f in enumerate(polys) if j not in I]
    rest.sort(key=len)
    return product(rest, polys[0].ring, polys[0].nvars)


def log_form(lam: MultiVector, polys: Sequence[Poly]) -> PolyForm:
    """``sum_I lam_I Fhat_I dF_I`` for any grade-q tensor ``lam``.

    Linear in ``lam`` and in each ``F_i`` separately; no orthogonality or
    decomposability is required here.
    """
    if lam.m != len(polys):
        raise UsageError(f"tensor dimension {lam.m} does not match {len(polys)} polynomials")
    ring, nvars = polys[0].ring, polys[0].nvars
    q = lam.grade
    total = sum(f.degree for f in polys)
    diffs = [PolyForm.differential(f) for f in polys]
    out = PolyForm.zero(ring, nvars, q, total)
    for I, c in sorted(lam.comps.items()):
        dF = diffs[I[0]]
        for i in I[1:]:
            dF = wedge_forms(dF, diffs[i])
        if dF.is_zero():
            continue
        term = dF.times(hat_F(polys, I).scale(c))
        out = out + term
    return out


def construct_log_form(p: LogParams) -> PolyForm:
    """The logarithmic q-form of type ``d`` attached to ``p``."""
    lam = p.lam()
    if lam.is_zero():
        raise DegenerateInputError("lambda vectors are linearly dependent (zero q-vector)")
    return log_form(lam, p.polys)


# ---------------------------------------------------------------------------
# moduli equations


def _coordinate_multivectors(nvars: int, k: int):
    return combinations(range(nvars), k)


def descent_check(omega: PolyForm) -> bool:
    return radial_contract(omega).is_zero()


def pluecker_check(omega: PolyForm, q: int | None = None) -> bool:
    """Decomposability: ``omega ^ omega = 0`` for q=2, else ``i_v omega ^ omega = 0``."""
    q = omega.grade if q is None else q
    if omega.grade != q:
        raise UsageError(f"form has grade {omega.grade}, expected {q}")
    if q == 2:
        if 2 * q > omega.nvars:
            return True
        return wedge_forms(omega, omega).is_zero()
    if q + 1 > omega.nvars:
        return True
    return all(
        wedge_forms(contract_multi(v, omega), omega).is_zero()
        for v in _coordinate_multivectors(omega.nvars, q - 1)
    )


def integrability_check(omega: PolyForm, q: int | None = None) -> bool:
    """Integrability: ``i_v omega ^ d omega = 0`` for every coordinate (q-1)-vector."""
    q = omega.grade if q is None else q
    if omega.grade != q:
        raise UsageError(f"form has grade {omega.grade}, expected {q}")
    if q + 2 > omega.nvars:
        return True
    domega = ext_d(omega)
    if domega.is_zero():
        return True
    return all(
        wedge_forms(contract_multi(v, omega), domega).is_zero()
        for v in _coordinate_multivectors(omega.nvars, q - 1)
    )


def integrability_witness(omega: PolyForm):
    """First coordinate multivector ``v`` with ``i_v omega ^ d omega != 0``, or None."""
    q = omega.grade
    if q + 2 > omega.nvars:
        return None
    domega = ext_d(omega)
    for v in _coordinate_multivectors(omega.nvars, q - 1):
        if not wedge_forms(contract_multi(v, omega), domega).is_zero():
            return v
    return None


def logdiff_identity_check(p: LogParams, omega: PolyForm | None = None) -> bool:
    """``F * d omega == dF ^ omega`` with ``F`` the product of all ``F_i``."""
    omega = construct_log_form(p) if omega is None else omega
    if omega.grade + 1 > omega.nvars:
        return True
    F = product(p.polys, p.field, p.nvars)
    lhs = ext_d(omega).times(F)
    rhs = wedge_forms(PolyForm.differential(F), omega)
    return lhs == rhs


# ---------------------------------------------------------------------------
# genericity and degree conditions


def genericity_check(lam: MultiVector, d: Sequence[int] | None = None) -> bool:
    """The lambda part of the generic open set, for grade-2 ``lam``.

    Requires ``lam_ij != 0`` for all pairs and, for every triple
    ``i < j < k``, ``lam_ij - lam_ik + lam_jk != 0`` and
    ``lam_ij - lam_ik - lam_jk != 0``.  ``d`` is only used to check the
    dimension.
    """
    if lam.grade != 2:
        raise PreconditionError("genericity is defined for q = 2")
    if d is not None and len(d) != lam.m:
        raise UsageError("degree vector and tensor dimensions differ")
    ring = lam.ring
    c = lam.coordinate
    for i, j in combinations(range(lam.m), 2):
        if ring.is_zero(c((i, j))):
            return False
    for i, j, k in combinations(range(lam.m), 3):
        a, b, e = c((i, j)), c((i, k)), c((j, k))
        if ring.is_zero(a - b + e) or ring.is_zero(a - b - e):
            return False
    return True


def balanced_check(d: Sequence[int], k: int) -> bool:
    """Whether every ``k`` of the degrees sum to less than the others."""
    d = check_degrees(d)
    if not 1 <= k < len(d):
        raise PreconditionError(f"need 1 <= k < m, got k={k}, m={len(d)}")
    total = sum(d)
    return all(2 * sum(d[i] for i in I) < total for I in combinations(range(len(d)), k))


def nc_linear_check(polys: Sequence[Poly]) -> bool:
    """Simple normal crossings for a hyperplane arrangement.

    Every subset of ``s <= min(m, n+1)`` linear forms must be independent.
    """
    if any(f.degree != 1 for f in polys):
        raise PreconditionError("normal-crossings check is for linear forms")
    ring, nvars = polys[0].ring, polys[0].nvars
    vecs = [f.to_vector() for f in polys]
    top = min(len(polys), nvars)
    for s in range(1, top + 1):
        for sub in combinations(vecs, s):
            m = SparseMatrix.from_dense(ring, sub, nvars)
            if rank(m) < s:
                return False
    return True


# ---------------------------------------------------------------------------
# stratum ideals in a fixed degree


@dataclass
class StratumSlice:
    k: int
    e: int
    basis_matrix: SparseMatrix  # rows: monomial_basis(n, e); columns: Fhat_J * monomial
    generators: list  # (J, degree of Fhat_J) in column-block order

    @property
    def dimension(self) -> int:
        return rank(self.basis_matrix) if self.basis_matrix.ncols else 0


def _multiples_matrix(gens: Sequence[Poly], n: int, e: int, ring) -> SparseMatrix:
    rows = monomial_basis(n, e)
    index = {ev: i for i, ev in enumerate(rows)}
    cols = []
    for g in gens:
        for mu in monomial_basis(n, e - g.degree):
            prod = g.times_monomial(mu)
            cols.append({index[ev]: c for ev, c in prod.terms()})
    return SparseMatrix.from_columns(ring, len(rows), cols)


def stratum_slice(polys: Sequence[Poly], k: int, e: int) -> StratumSlice:
    """Degree-``e`` part of the ideal generated by ``Fhat_J``, ``|J| = k - 1``."""
    m = len(polys)
    if not 1 <= k <= m:
        raise PreconditionError(f"need 1 <= k <= m, got k={k}, m={m}")
    ring, n = polys[0].ring, polys[0].nvars - 1
    gens, info = [], []
    for J in combinations(range(m), k - 1):
        g = hat_F(polys, J)
        gens.append(g)
        info.append((J, g.degree))
    return StratumSlice(k, e, _multiples_matrix(gens, n, e, ring), info)


def vanishes_on_stratum(alpha: PolyForm, polys: Sequence[Poly], k: int) -> bool:
    """Whether every coefficient of ``alpha`` lies in the stratum ideal slice."""
    if alpha.is_zero():
        return True
    sl = stratum_slice(polys, k, alpha.coefficient_degree)
    vecs = [p.to_vector() for p in alpha.comps.values()]
    if sl.basis_matrix.ncols == 0:
        return False
    return all(in_column_space(sl.basis_matrix, vecs))


def ideal_intersection_dim(polys: Sequence[Poly], k: int, e: int) -> tuple[int, SparseMatrix]:
    """Dimension of the degree-``e`` slice of the intersection of the ideals
    ``<F_j : j in J>`` over ``|J| = k``, plus the stacked annihilator matrix.

    Each ideal slice is replaced by its annihilator (vectors orthogonal to
    every generator multiple); the intersection is the kernel of the stack.
    """
    ring, n = polys[0].ring, polys[0].nvars - 1
    N = len(monomial_basis(n, e))
    ann_rows = []
    for J in combinations(range(len(polys)), k):
        M = _multiples_matrix([polys[j] for j in J], n, e, ring)
        if M.ncols == 0:
            ann_rows.extend([[ring.one if i == t else ring.zero for i in range(N)] for t in range(N)])
            continue
        ann_rows.extend(kernel_basis(M.transpose()))
    A = SparseMatrix.from_dense(ring, ann_rows, N) if ann_rows else SparseMatrix(ring, 0, N)
    return N - rank(A), A


def ideal_equality_check(polys: Sequence[Poly], k: int, e: int) -> bool:
    """Compare the stratum slice with the intersection of ``k``-fold ideals."""
    sl = stratum_slice(polys, k, e)
    dim_int, A = ideal_intersection_dim(polys, k, e)
    dim_slice = sl.dimension
    if dim_slice != dim_int:
        return False
    # slice inside the intersection: every generator multiple is annihilated
    for col in sl.basis_matrix.columns():
        vec = [polys[0].ring.zero] * sl.basis_matrix.nrows
        for i, v in col.items():
            vec[i] = v
        if A.nrows and not A.is_zero_product(vec):
            return False
    return True


# ---------------------------------------------------------------------------
# sampling


def random_lambda(d: Sequence[int], q: int, ring, rng, bound: int = 100) -> list[list]:
    """``q`` random integer combinations of ``cmd_basis(d)``, as coordinate lists."""
    m = len(d)
    mus = [mu.as_vector() for mu in cmd_basis(d, ring)]
    out = []
    for _ in range(q):
        coeffs = [int(x) for x in rng.integers(-bound, bound + 1, size=m - 1)]
        vec = [ring.zero] * m
        for c, mu in zip(coeffs, mus):
            vec = [ring.normalize(a + ring.from_int(c) * b) for a, b in zip(vec, mu)]
        out.append(vec)
    return out


def random_params(
    seed: int,
    n: int,
    q: int,
    degrees: Sequence[int],
    field=None,
    bound: int = 100,
    max_tries: int = 200,
) -> LogParams:
    """Seeded sample from the generic locus.

    Coefficients are integers in ``[-bound, bound]`` reduced into ``field``,
    so one seed describes the same rational instance over every field.
    Draws are rejected until the lambda conditions (q = 2) and, for all
    linear ``F_i``, normal crossings hold.
    """
    field = GF(DEFAULT_PRIME) if field is None else field
    degrees = check_degrees(degrees)
    m = len(degrees)
    if q < 1 or m < q + 1:
        raise PreconditionError(f"need m >= q + 1 >= 2, got m={m}, q={q}")
    if q > n:
        raise PreconditionError(f"need q <= n, got q={q}, n={n}")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        polys = [Poly.random(field, n + 1, di, rng, bound) for di in degrees]
        lambdas = random_lambda(degrees, q, field, rng, bound)
        params = LogParams(n, q, degrees, lambdas, polys, field, seed)
        if any(f.is_zero() for f in polys):
            continue
        lam = params.lam()
        if lam.is_zero():
            continue
        if q == 2 and not genericity_check(lam, degrees):
            continue
        if q != 2 and any(field.is_zero(c) for c in lam.to_coordinates()):
            continue
        if all(di == 1 for di in degrees) and not nc_linear_check(polys):
            continue
        return params.validate()
    raise SamplingError(f"no generic instance found in {max_tries} draws (seed {seed})")
