"""Tangent-space computations at a logarithmic 2-form.

The descended forms of type ``(q, d)`` get an explicit basis, the two
perturbation equations become a sparse matrix on that basis, and the
derivative of the natural parametrization becomes a second matrix whose
columns must lie in the kernel of the first.  ``certify_stability``
compares the two dimensions.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field as dc_field
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np

from . import __version__
from .errors import InternalConsistencyError, PreconditionError, UsageError
from .exactla import (
    DEFAULT_PRIME,
    GF,
    Dual,
    PrimeField,
    SparseMatrix,
    DualRing,
    _DENSE_MAX_PRIME,
    in_column_space,
    rank,
    row_echelon,
)
from .forms import PolyForm, contract_basis, ext_d, radial_contract
from .logfol import LogParams, balanced_check, construct_log_form, log_form, stratum_slice
from .multivec import MultiVector, cmd_basis, grass_tangent_dirs, merge_sign, span_rank, wedge_mv
from .poly import Poly, _unit_keys, min_variable, monomial_basis, pack, unpack

log = logging.getLogger(__name__)


def bott_dimension(n: int, q: int, d: int) -> int:
    """``h^0(P^n, Omega^q(d))`` by the closed product formula."""
    if d <= q:
        return 0
    return comb(d + n - q, d) * comb(d - 1, q)


def affine_dimension(n: int, q: int, d: int) -> int:
    """Dimension of all homogeneous affine q-forms of total degree ``d``."""
    return comb(n + 1, q) * comb(n + d - q, d - q)


def _radial_rank(ring, n: int, q: int, d: int) -> int:
    """Rank of ``i_R`` on affine q-forms of total degree ``d``."""
    nvars = n + 1
    src = [(I, ev) for I in combinations(range(nvars), q) for ev in monomial_basis(n, d - q)]
    row_index: dict = {}
    cols = []
    for I, ev in src:
        form = PolyForm._raw(ring, nvars, q, d, {I: Poly.monomial(ring, ev)})
        col = {}
        for K, ev2, c in radial_contract(form).terms():
            r = row_index.setdefault((K, ev2), len(row_index))
            col[r] = c
        cols.append(col)
    return rank(SparseMatrix.from_columns(ring, max(len(row_index), 1), cols))


# ---------------------------------------------------------------------------
# descended forms


class FormBasis:
    """Explicit basis of the descended q-forms of total degree ``d``.

    Element ``(mu, J)`` with ``|J| = q + 1``, ``deg mu = d - q - 1`` and
    ``min(J) <= min_variable(mu)`` is ``i_R(x^mu dx_J)``.  Its term that
    drops ``j0 = min(J)`` is ``x^(mu + e_j0) dx_(J - j0)`` with coefficient
    1; these "leading" pairs ``(nu, K)`` are exactly the ones with
    ``min_variable(nu) < min(K)``, and no other term of any element is of
    that shape.  Coordinates of a descended form are therefore read off
    its coefficients at leading pairs.
    """

    def __init__(self, ring, n: int, q: int, d: int):
        if q < 1 or q > n:
            raise PreconditionError(f"need 1 <= q <= n, got q={q}, n={n}")
        if d <= q:
            raise PreconditionError(f"need d > q, got d={d}, q={q}")
        self.ring = ring
        self.n = n
        self.q = q
        self.d = d
        self.nvars = n + 1
        elems = []
        for J in combinations(range(self.nvars), q + 1):
            for mu in reversed(monomial_basis(n, d - q - 1)):
                if J[0] <= min_variable(mu):
                    elems.append((mu, J))
        self.elements = elems
        self._lead = {}
        for i, (mu, J) in enumerate(elems):
            nu = list(mu)
            nu[J[0]] += 1
            self._lead[(J[1:], pack(nu))] = i

    @property
    def dimension(self) -> int:
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    def element(self, i: int) -> PolyForm:
        mu, J = self.elements[i]
        raw = PolyForm._raw(self.ring, self.nvars, self.q + 1, self.d, {J: Poly.monomial(self.ring, mu)})
        return radial_contract(raw)

    def element_terms(self, i: int):
        """``(K, packed monomial, sign)`` for the ``q + 1`` terms of element ``i``."""
        mu, J = self.elements[i]
        base = pack(mu)
        units = _unit_keys(self.nvars)
        return [(J[:pos] + J[pos + 1:], base + units[j], -1 if pos & 1 else 1) for pos, j in enumerate(J)]

    def decode(self, vec: Sequence) -> PolyForm:
        if len(vec) != len(self):
            raise UsageError(f"coordinate vector has length {len(vec)}, expected {len(self)}")
        ring = self.ring
        acc: dict = {}
        for i, c in enumerate(vec):
            if ring.is_zero(c):
                continue
            for K, key, s in self.element_terms(i):
                comp = acc.setdefault(K, {})
                comp[key] = comp.get(key, ring.zero) + (c if s > 0 else -c)
        comps = {
            K: Poly._from_accumulator(ring, self.nvars, self.d - self.q, t) for K, t in acc.items()
        }
        return PolyForm._raw(ring, self.nvars, self.q, self.d, comps)

    def encode(self, form: PolyForm, check: bool = True) -> list:
        """Coordinates of a descended form; ``check`` verifies descent first."""
        if (form.nvars, form.grade) != (self.nvars, self.q):
            raise UsageError("form does not match the basis shape")
        if form.comps and form.total_degree != self.d:
            raise UsageError(f"form has total degree {form.total_degree}, expected {self.d}")
        if check and not radial_contract(form).is_zero():
            raise UsageError("form does not descend (radial contraction is nonzero)")
        vec = [self.ring.zero] * len(self)
        for K, p in form.comps.items():
            for key, c in p._t.items():
                i = self._lead.get((K, key))
                if i is not None:
                    vec[i] = c
        return vec

    def radial_kernel_dimension(self) -> int:
        return affine_dimension(self.n, self.q, self.d) - _radial_rank(self.ring, self.n, self.q, self.d)


def twisted_form_basis(n: int, q: int, d: int, ring=None, cross_check: bool = True) -> FormBasis:
    """Basis of the descended q-forms of total degree ``d`` in ``n + 1`` variables.

    The size is compared with the closed product formula and, when
    ``cross_check`` is set, with the kernel dimension of the radial
    contraction computed by elimination.
    """
    ring = GF(DEFAULT_PRIME) if ring is None else ring
    basis = FormBasis(ring, n, q, d)
    expected = bott_dimension(n, q, d)
    diag = {"n": n, "q": q, "d": d, "basis": len(basis), "bott": expected}
    if len(basis) != expected:
        raise InternalConsistencyError("descended-form basis disagrees with the product formula", diag)
    if cross_check:
        kdim = basis.radial_kernel_dimension()
        diag["radial_kernel"] = kdim
        if kdim != expected:
            raise InternalConsistencyError("radial kernel dimension disagrees with the product formula", diag)
    return basis


# ---------------------------------------------------------------------------
# sparse assembly of linear maps on elementary forms


def _vals_dtype(ring):
    return np.int64 if isinstance(ring, PrimeField) and ring.p < _DENSE_MAX_PRIME else object


def _form_arrays(form: PolyForm, dtype) -> dict:
    out = {}
    for K, p in form.comps.items():
        keys = np.fromiter(p._t.keys(), dtype=np.int64, count=len(p._t))
        vals = np.array(list(p._t.values()), dtype=dtype)
        out[K] = (keys, vals)
    return out


class _Assembler:
    """Collects ``(group, monomial, column, value)`` contributions."""

    def __init__(self, ring, ncols: int):
        self.ring = ring
        self.ncols = ncols
        self.dtype = _vals_dtype(ring)
        self.parts = []

    def add(self, group: int, monos: np.ndarray, col: int, vals: np.ndarray):
        if len(monos):
            n = len(monos)
            self.parts.append((np.full(n, group, dtype=np.int64), monos, np.full(n, col, dtype=np.int64), vals))

    def wedge_term(self, group_of, col: int, I, key: int, coef, beta: dict):
        """Add ``coef * x^key dx_I ^ beta``; ``group_of(K)`` names the target."""
        for J, (keys, vals) in beta.items():
            s = merge_sign(I, J)
            if s:
                self.add(group_of(tuple(sorted(I + J))), keys + key, col, vals * (coef * s))

    def build(self, transform=None) -> tuple[SparseMatrix, list]:
        """Sum duplicates, drop zeros, and number nonzero rows in sorted order.

        ``transform`` is an optional ``(elem, target, sign)`` triple of arrays
        that re-expresses elementary columns as combinations of basis columns.
        """
        ring = self.ring
        if not self.parts:
            return SparseMatrix(ring, 0, self.ncols if transform is None else transform[3]), []
        g = np.concatenate([p[0] for p in self.parts])
        m = np.concatenate([p[1] for p in self.parts])
        c = np.concatenate([p[2] for p in self.parts])
        v = np.concatenate([p[3] for p in self.parts])
        self.parts = []
        ncols = self.ncols
        if transform is not None:
            t_elem, t_target, t_sign, ncols = transform
            counts = np.bincount(t_elem, minlength=self.ncols)
            starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
            rep = counts[c]
            idx = np.repeat(np.arange(len(c)), rep)
            first = np.repeat(np.cumsum(rep) - rep, rep)
            tpos = starts[c[idx]] + (np.arange(len(idx)) - first)
            g, m = g[idx], m[idx]
            c = t_target[tpos]
            v = v[idx] * t_sign[tpos]
        # rank the monomials, then sort on one combined integer key
        umono, midx = np.unique(m, return_inverse=True)
        key = (g * len(umono) + midx.ravel()) * ncols + c
        order = np.argsort(key, kind="stable")
        key, v = key[order], v[order]
        new = np.ones(len(key), dtype=bool)
        new[1:] = key[1:] != key[:-1]
        starts = np.flatnonzero(new)
        sums = np.add.reduceat(v, starts)
        key = key[starts]
        c = key % ncols
        rest = key // ncols
        g, m = rest // len(umono), umono[rest % len(umono)]
        if self.dtype is np.int64:
            sums = sums % ring.p
            keep = sums != 0
            vals = sums[keep].tolist()
        else:
            sums = [ring.normalize(x) for x in sums]
            keep = np.array([not ring.is_zero(x) for x in sums], dtype=bool)
            vals = [x for x, k in zip(sums, keep) if k]
        g, m, c = g[keep], m[keep], c[keep]
        rowstart = np.ones(len(g), dtype=bool)
        rowstart[1:] = (g[1:] != g[:-1]) | (m[1:] != m[:-1])
        r = np.cumsum(rowstart) - 1
        labels = list(zip(g[rowstart].tolist(), m[rowstart].tolist()))
        mat = SparseMatrix._from_coo(ring, len(labels), ncols, r.astype(np.int64), c, tuple(vals))
        return mat, labels


def _elementary_columns(basis: FormBasis):
    """Elementary terms ``(K, key)`` used by the basis, plus the transform arrays."""
    index: dict = {}
    t_elem, t_target, t_sign = [], [], []
    for i in range(len(basis)):
        for K, key, s in basis.element_terms(i):
            e = index.setdefault((K, key), len(index))
            t_elem.append(e)
            t_target.append(i)
            t_sign.append(s)
    t_elem = np.asarray(t_elem, dtype=np.int64)
    order = np.argsort(t_elem, kind="stable")
    transform = (
        t_elem[order],
        np.asarray(t_target, dtype=np.int64)[order],
        np.asarray(t_sign, dtype=np.int64)[order],
        len(basis),
    )
    return list(index), transform


# ---------------------------------------------------------------------------
# perturbation system


@dataclass
class PerturbationSystem:
    matrix: SparseMatrix
    row_labels: list  # (group, packed monomial); group 0 is alpha ^ omega, 1 + v the v-th field
    rows_before_pruning: int


def perturbation_system(omega: PolyForm, basis: FormBasis, with_labels: bool = False):
    """Linear equations on basis coordinates cutting out the tangent cone.

    Rows are the coefficients of ``alpha ^ omega`` and, for each constant
    field ``e_v``, of ``i_v omega ^ d alpha + i_v alpha ^ d omega``.
    All-zero rows are dropped.
    """
    if omega.grade != 2 or basis.q != 2:
        raise PreconditionError("perturbation equations are implemented for q = 2")
    if omega.nvars != basis.nvars or omega.total_degree != basis.d:
        raise UsageError("form and basis have different shapes")
    if not radial_contract(omega).is_zero():
        raise UsageError("omega does not descend")
    ring, nvars, d = basis.ring, basis.nvars, basis.d
    dtype = _vals_dtype(ring)
    elems, transform = _elementary_columns(basis)
    asm = _Assembler(ring, len(elems))
    if nvars < 4:
        mat = SparseMatrix(ring, 0, len(basis))
        out = PerturbationSystem(mat, [], 0)
        return out if with_labels else mat

    four = {K: i for i, K in enumerate(combinations(range(nvars), 4))}
    nfour = len(four)
    w_arr = _form_arrays(omega, dtype)
    domega = _form_arrays(ext_d(omega), dtype)
    iv_omega = [_form_arrays(contract_basis(v, omega), dtype) for v in range(nvars)]
    units = _unit_keys(nvars)
    one = ring.one

    for col, (I, key) in enumerate(elems):
        asm.wedge_term(lambda K: four[K], col, I, key, one, w_arr)
        ev = unpack(key, nvars)
        for v in range(nvars):
            grp = lambda K, v=v: (1 + v) * nfour + four[K]
            # i_v omega ^ d(x^a dx_I), where d(x^a dx_I) = sum_c a_c x^(a - e_c) dx_c ^ dx_I
            for c in range(nvars):
                if ev[c] == 0 or c in I:
                    continue
                s = merge_sign((c,), I)
                dI = tuple(sorted((c,) + I))
                dcoef = ring.from_int(ev[c] * s)
                for (j,), (keys, vals) in iv_omega[v].items():
                    s2 = merge_sign((j,), dI)
                    if s2:
                        asm.add(grp(tuple(sorted((j,) + dI))), keys + (key - units[c]), col, vals * (dcoef * s2))
            # i_v(x^a dx_I) ^ d omega
            if v in I:
                pos = I.index(v)
                rest = I[:pos] + I[pos + 1:]
                s = -1 if pos & 1 else 1
                asm.wedge_term(grp, col, rest, key, ring.from_int(s), domega)

    mat, labels = asm.build(transform)
    total = nfour * comb(nvars + 2 * d - 5, 2 * d - 4) + nvars * nfour * comb(nvars + 2 * d - 6, 2 * d - 5)
    if with_labels:
        return PerturbationSystem(mat, labels, total)
    return mat


# ---------------------------------------------------------------------------
# derivative of the natural parametrization


@dataclass
class DrhoColumns:
    """Column provenance of ``drho_matrix``: block A then block B."""

    lambda_dirs: list  # grade-2 multivectors
    poly_dirs: list  # (k, exponent vector)


def _replace(polys: Sequence[Poly], k: int, new: Poly) -> list:
    out = list(polys)
    out[k] = new
    return out


def drho_columns(p: LogParams) -> DrhoColumns:
    if p.q != 2:
        raise PreconditionError("the derivative matrix is implemented for q = 2")
    l1, l2 = p.lambda_vectors()
    dirs = grass_tangent_dirs(l1, l2, p.degrees)
    polys = [(k, mu) for k, dk in enumerate(p.degrees) for mu in monomial_basis(p.n, dk)]
    return DrhoColumns(dirs, polys)


def drho_forms(p: LogParams):
    """The forms spanning the image of the derivative, in column order."""
    cols = drho_columns(p)
    lam = p.lam()
    for mu in cols.lambda_dirs:
        yield log_form(mu, p.polys)
    for k, ev in cols.poly_dirs:
        yield log_form(lam, _replace(p.polys, k, Poly.monomial(p.field, ev)))


def drho_matrix(p: LogParams, basis: FormBasis) -> SparseMatrix:
    """Basis coordinates of the derivative images.

    Block A: one column per Grassmannian tangent direction ``lambda'``,
    the log form built with ``lambda'``.  Block B: for each ``k`` and each
    monomial ``mu`` of degree ``d_k``, the log form with ``F_k`` replaced
    by ``mu`` (the form is linear in each ``F_k``, so this is the
    derivative in the direction ``F_k' = mu``).
    """
    if p.field != basis.ring:
        raise UsageError("parameters and basis live over different fields")
    cols = []
    for form in drho_forms(p):
        vec = basis.encode(form, check=True)
        cols.append({i: c for i, c in enumerate(vec) if not p.field.is_zero(c)})
    return SparseMatrix.from_columns(p.field, len(basis), cols)


def direction_coordinates(p: LogParams, lam1_dir: Sequence, lam2_dir: Sequence, poly_dirs: Sequence[Poly]) -> list:
    """Coordinates of a tangent direction on the ``drho_matrix`` columns."""
    ring, d = p.field, p.degrees
    out = []
    for v in (lam1_dir, lam2_dir):
        v = [ring.convert(x) for x in v]
        if len(v) != p.m:
            raise UsageError("lambda direction has the wrong length")
        if not ring.is_zero(sum(x * ring.from_int(dk) for x, dk in zip(v, d))):
            raise UsageError("lambda direction is not orthogonal to the degree vector")
        # mu_k = d_k e_0 - d_0 e_k, so coordinate k is -v_k / d_0
        inv = ring.inv(ring.from_int(-d[0]))
        out.extend(ring.normalize(v[k] * inv) for k in range(1, p.m))
    if len(poly_dirs) != p.m:
        raise UsageError("need one polynomial direction per F_k")
    for f, dk in zip(poly_dirs, d):
        if f.degree != dk and not f.is_zero():
            raise UsageError("polynomial direction has the wrong degree")
        out.extend(f.to_vector() if not f.is_zero() else [ring.zero] * len(monomial_basis(p.n, dk)))
    return out


def dual_image(p: LogParams, lam1_dir, lam2_dir, poly_dirs) -> PolyForm:
    """The eps-part of the log form at ``(lambda + eps lambda', F + eps F')``."""
    ring = p.field
    D = DualRing(ring)
    vecs = [
        MultiVector._raw(D, p.m, 1, {(i,): D.lift(a, b) for i, (a, b) in enumerate(zip(base, dirv))})
        for base, dirv in zip(p.lambdas, (lam1_dir, lam2_dir))
    ]
    lam = wedge_mv(vecs[0], vecs[1])
    polys = []
    for f, g in zip(p.polys, poly_dirs):
        acc = {k: D.lift(c, ring.zero) for k, c in f._t.items()}
        for k, c in g._t.items():
            base = acc.get(k, D.zero)
            acc[k] = Dual(base.a, ring.normalize(base.b + c))
        polys.append(Poly._from_accumulator(D, p.nvars, f.degree, acc))
    form = log_form(lam, polys)
    return form.map_coefficients(lambda x: ring.normalize(x.b), ring)


def dual_number_consistency(
    p: LogParams,
    direction,
    basis: FormBasis | None = None,
    matrix: SparseMatrix | None = None,
) -> bool:
    """Compare the dual-number derivative with the matrix image of a direction.

    ``direction`` is ``(lam1', lam2', [F_1', ..., F_m'])``.
    """
    lam1_dir, lam2_dir, poly_dirs = direction
    ring = p.field
    lam1_dir = [ring.convert(x) for x in lam1_dir]
    lam2_dir = [ring.convert(x) for x in lam2_dir]
    basis = twisted_form_basis(p.n, 2, p.total_degree, ring, cross_check=False) if basis is None else basis
    matrix = drho_matrix(p, basis) if matrix is None else matrix
    x = direction_coordinates(p, lam1_dir, lam2_dir, poly_dirs)
    predicted = matrix.matvec(x)
    eps_part = dual_image(p, lam1_dir, lam2_dir, poly_dirs)
    if not radial_contract(eps_part).is_zero():
        return False
    actual = basis.encode(eps_part, check=False)
    return [ring.normalize(t) for t in predicted] == actual


def random_direction(p: LogParams, rng, bound: int = 100):
    """A random tangent direction with integer entries."""
    ring = p.field
    mus = [mu.as_vector() for mu in cmd_basis(p.degrees, ring)]
    lam_dirs = []
    for _ in range(2):
        c = [ring.from_int(int(t)) for t in rng.integers(-bound, bound + 1, size=len(mus))]
        lam_dirs.append([ring.normalize(sum(ci * mu[j] for ci, mu in zip(c, mus))) for j in range(p.m)])
    polys = [Poly.random(ring, p.nvars, dk, rng, bound) for dk in p.degrees]
    return lam_dirs[0], lam_dirs[1], polys


# ---------------------------------------------------------------------------
# certificate


def parameter_count(p: LogParams) -> dict:
    """Projective parameter count from the computed Grassmannian span."""
    l1, l2 = p.lambda_vectors()
    grass = span_rank(grass_tangent_dirs(l1, l2, p.degrees)) - 1
    polys = sum(comb(p.n + dk, dk) - 1 for dk in p.degrees)
    closed = sum(comb(p.n + dk, dk) for dk in p.degrees) - p.m + p.q * (p.m - 1 - p.q)
    return {"grassmannian": grass, "polynomials": polys, "total": grass + polys, "closed_form": closed}


@dataclass
class StabilityReport:
    n: int
    q: int
    degrees: list
    seed: int | None
    field: object
    dim_ambient: int
    ker_dim: int
    drho_rank: int
    quotient_tangent_dim: int
    quotient_image_dim: int
    perturbation_rows: int
    perturbation_rows_before_pruning: int
    drho_columns: int
    dual_directions: int
    balanced_k2: bool
    theorem_silent: bool
    sanity: dict
    verdict: str
    parameter_count: dict
    assumptions: list = dc_field(default_factory=list)
    provenance: dict = dc_field(default_factory=dict)

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"

    @property
    def sane(self) -> bool:
        return all(v for v in self.sanity.values() if v is not None)

    def key(self) -> tuple:
        return (self.n, tuple(self.degrees), self.seed, json_field_key(self.field))

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "StabilityReport":
        return cls(**obj)


def json_field_key(field_json) -> str:
    if isinstance(field_json, dict):
        return str(field_json.get("Fp"))
    return str(field_json)


ASSUMPTIONS = [
    "nonlinear F_i assumed smooth, irreducible and normal crossing (random dense coefficients, not certified)",
    "singular set codimension >= 2 not checked",
]


def _step1_vanishing(kernel_forms: list[PolyForm], polys: Sequence[Poly], k: int = 4) -> bool:
    if not kernel_forms:
        return True
    e = kernel_forms[0].coefficient_degree
    sl = stratum_slice(polys, k, e)
    vecs = [c.to_vector() for f in kernel_forms for c in f.comps.values()]
    if not vecs:
        return True
    if sl.basis_matrix.ncols == 0:
        return False
    return all(in_column_space(sl.basis_matrix, vecs))


def certify_stability(
    p: LogParams,
    n_directions: int = 10,
    direction_seed: int = 0,
    strict: bool = True,
    provenance: dict | None = None,
) -> StabilityReport:
    """Compare the derivative rank with the tangent-space dimension at ``omega``.

    With ``strict`` a failed sanity flag raises ``InternalConsistencyError``
    whose diagnostics hold the report; otherwise the report is returned.
    """
    if p.q != 2:
        raise PreconditionError(f"certificate needs q = 2, got q={p.q}")
    if p.m <= 3:
        raise PreconditionError(f"certificate needs m > 3, got m={p.m}")
    if p.n <= 3:
        raise PreconditionError(f"certificate needs n > 3, got n={p.n}")
    p.validate()
    balanced = balanced_check(p.degrees, 2)
    if not balanced:
        log.warning("degree vector %s is not 2-balanced; no stability claim applies", p.degrees)

    counts = parameter_count(p)
    sanity: dict = {"parameter_count_identity": counts["total"] == counts["closed_form"]}

    d = p.total_degree
    basis = twisted_form_basis(p.n, 2, d, p.field)
    sanity["bott_cross_check"] = True
    omega = construct_log_form(p)
    w = basis.encode(omega)

    system = perturbation_system(omega, basis, with_labels=True)
    P = system.matrix
    ech = row_echelon(P)
    ker_dim = len(basis) - ech.rank
    kernel = ech.kernel()

    D = drho_matrix(p, basis)
    drho_rank = rank(D)

    sanity["omega_in_kernel"] = P.is_zero_product(w)
    sanity["omega_in_image"] = in_column_space(D, [w])[0]
    sanity["image_in_kernel"] = _product_vanishes(P, D)
    sanity["drho_rank_le_ker_dim"] = drho_rank <= ker_dim
    step1 = _step1_vanishing([basis.decode(v) for v in kernel], p.polys, 4)
    sanity["step1_vanishing"] = step1 if balanced else None

    # scaling F_k' = F_k multiplies omega by one
    scal = []
    for k, f in enumerate(p.polys):
        x = [0] * (2 * (p.m - 1)) + _poly_block(p, k, f)
        scal.append(_in_span(D.matvec([p.field.convert(t) for t in x]), w, p.field))
    sanity["scaling_in_omega_span"] = all(scal)

    rng = np.random.default_rng(direction_seed)
    dual_ok = all(
        dual_number_consistency(p, random_direction(p, rng), basis, D) for _ in range(n_directions)
    )
    if n_directions:
        lam_dir = (p.lambdas[0], [p.field.zero] * p.m, [Poly.zero(p.field, p.nvars, dk) for dk in p.degrees])
        dual_ok = dual_ok and dual_number_consistency(p, lam_dir, basis, D)
    sanity["dual_number_consistency"] = dual_ok

    report = StabilityReport(
        n=p.n,
        q=p.q,
        degrees=list(p.degrees),
        seed=p.seed,
        field=p.field.to_json(),
        dim_ambient=len(basis),
        ker_dim=ker_dim,
        drho_rank=drho_rank,
        quotient_tangent_dim=ker_dim - 1,
        quotient_image_dim=drho_rank - 1,
        perturbation_rows=P.nrows,
        perturbation_rows_before_pruning=system.rows_before_pruning,
        drho_columns=D.ncols,
        dual_directions=n_directions + (1 if n_directions else 0),
        balanced_k2=balanced,
        theorem_silent=not balanced,
        sanity=sanity,
        verdict="stable" if drho_rank == ker_dim else "unstable",
        parameter_count=counts,
        assumptions=list(ASSUMPTIONS),
        provenance={"version": __version__, **(provenance or {})},
    )
    if strict and not report.sane:
        bad = sorted(k for k, v in sanity.items() if v is False)
        raise InternalConsistencyError(f"sanity checks failed: {', '.join(bad)}", report.to_json())
    return report


def _product_vanishes(P: SparseMatrix, D: SparseMatrix) -> bool:
    """Whether ``P @ D == 0``."""
    if isinstance(P.field, PrimeField) and P.field.p < _DENSE_MAX_PRIME:
        dense = np.zeros((D.nrows, D.ncols), dtype=np.int64)
        for (r, c), v in D.entries.items():
            dense[r, c] = v
        return not P.matmat_modp(dense).any()
    return all(P.is_zero_product(_dense(col, D.nrows, P.field)) for col in D.columns())


def _dense(col: dict, n: int, ring) -> list:
    out = [ring.zero] * n
    for i, v in col.items():
        out[i] = v
    return out


def _poly_block(p: LogParams, k: int, f: Poly) -> list:
    out = []
    for j, dk in enumerate(p.degrees):
        size = len(monomial_basis(p.n, dk))
        out.extend(f.to_vector() if j == k else [0] * size)
    return out


def _in_span(vec: list, w: list, ring) -> bool:
    """Whether ``vec`` is a scalar multiple of the nonzero vector ``w``."""
    pivot = next(i for i, t in enumerate(w) if not ring.is_zero(t))
    c = vec[pivot] * ring.inv(w[pivot])
    return all(ring.is_zero(a - c * b) for a, b in zip(vec, w))


def scan(
    config: Sequence[tuple[int, Sequence[int]]],
    seeds: Sequence[int],
    primes: Sequence[int],
    skip: set | None = None,
    jobs: int = 1,
    n_directions: int = 10,
):
    """Run the certificate over ``config x seeds x primes``.

    Yields one dict per task: a report, or an error record with the same
    key fields.  Tasks whose key is in ``skip`` are not run.  Output order
    follows the task order regardless of ``jobs``.
    """
    tasks = []
    for n, degrees in config:
        for seed in seeds:
            for prime in primes:
                key = task_key(n, degrees, seed, prime)
                if skip and key in skip:
                    continue
                tasks.append((n, tuple(degrees), seed, prime, n_directions))
    if jobs <= 1:
        for t in tasks:
            yield _scan_task(t)
        return
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(_scan_task, tasks)


def task_key(n: int, degrees: Sequence[int], seed, prime) -> tuple:
    return (int(n), tuple(int(x) for x in degrees), seed, str(prime))


def _scan_task(task) -> dict:
    from .errors import FoliaError
    from .exactla import QQ
    from .logfol import random_params

    n, degrees, seed, prime, n_directions = task
    field = QQ if str(prime) in ("Q", "QQ") else GF(int(prime))
    base = {"n": n, "degrees": list(degrees), "seed": seed, "field": field.to_json()}
    try:
        params = random_params(seed, n, 2, degrees, field)
        report = certify_stability(params, n_directions=n_directions, strict=False)
        return report.to_json()
    except FoliaError as exc:
        return {**base, "error": type(exc).__name__, "message": str(exc)}

