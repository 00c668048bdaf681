"""Polynomial differential forms on the affine cone K^(n+1).

A ``PolyForm`` of grade ``q`` and total degree ``d`` is
``sum_I A_I dx_I`` with every ``A_I`` homogeneous of degree ``d - q``
(``dx_i`` counts as degree one).  Index sets are 0-based sorted tuples.
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from .errors import UsageError
from .multivec import merge_sign
from .poly import Poly


class PolyForm:
    __slots__ = ("ring", "nvars", "grade", "total_degree", "comps")

    def __init__(self, ring, nvars: int, grade: int, total_degree: int, comps: dict | None = None):
        if not 0 <= grade <= nvars:
            raise UsageError(f"grade {grade} impossible with {nvars} variables")
        self.ring = ring
        self.nvars = nvars
        self.grade = grade
        self.total_degree = total_degree
        cdeg = total_degree - grade
        out = {}
        for idx, p in (comps or {}).items():
            idx = tuple(idx)
            if len(idx) != grade or list(idx) != sorted(set(idx)):
                raise UsageError(f"bad index set {idx} for a {grade}-form")
            if idx and not 0 <= idx[0] <= idx[-1] < nvars:
                raise UsageError(f"index set {idx} out of range")
            if p.nvars != nvars or p.ring != ring:
                raise UsageError("coefficient polynomial has the wrong ring or variable count")
            if p.is_zero():
                continue
            if p.degree != cdeg:
                raise UsageError(f"coefficient of dx{idx} has degree {p.degree}, expected {cdeg}")
            out[idx] = p
        self.comps = out

    @classmethod
    def _raw(cls, ring, nvars, grade, total_degree, comps):
        self = object.__new__(cls)
        self.ring, self.nvars, self.grade, self.total_degree = ring, nvars, grade, total_degree
        self.comps = {k: p for k, p in comps.items() if not p.is_zero()}
        return self

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, ring, nvars, grade, total_degree):
        return cls._raw(ring, nvars, grade, total_degree, {})

    @classmethod
    def basis(cls, ring, nvars: int, idx: Sequence[int]) -> "PolyForm":
        """The constant form ``dx_idx``."""
        idx = tuple(idx)
        return cls(ring, nvars, len(idx), len(idx), {idx: Poly.constant(ring, nvars)})

    @classmethod
    def function(cls, p: Poly) -> "PolyForm":
        return cls._raw(p.ring, p.nvars, 0, p.degree, {(): p})

    @classmethod
    def differential(cls, p: Poly) -> "PolyForm":
        """``dP = sum_i dP/dx_i dx_i``."""
        return cls._raw(p.ring, p.nvars, 1, p.degree, {(i,): p.partial(i) for i in range(p.nvars)})

    # -- inspection -------------------------------------------------------

    @property
    def coefficient_degree(self) -> int:
        return self.total_degree - self.grade

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self):
        return bool(self.comps)

    def coefficient(self, idx) -> Poly:
        return self.comps.get(tuple(idx), Poly.zero(self.ring, self.nvars, self.coefficient_degree))

    def index_sets(self):
        return list(combinations(range(self.nvars), self.grade))

    def __eq__(self, other):
        if not isinstance(other, PolyForm):
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        if not self.comps and not other.comps:
            return True
        return (
            self.grade == other.grade
            and self.total_degree == other.total_degree
            and self.comps.keys() == other.comps.keys()
            and all(self.comps[k] == other.comps[k] for k in self.comps)
        )

    __hash__ = None

    def __repr__(self):
        if not self.comps:
            return "0"
        return " + ".join(
            f"({p})*d{'^d'.join(f'x{i}' for i in k)}" if k else f"({p})"
            for k, p in sorted(self.comps.items())
        )

    # -- linear structure -------------------------------------------------

    def _check(self, other, same_shape=True):
        if self.nvars != other.nvars:
            raise UsageError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
        if self.ring != other.ring:
            raise UsageError("ring mismatch")
        if same_shape and (self.grade, self.total_degree) != (other.grade, other.total_degree):
            raise UsageError(
                f"shape mismatch: ({self.grade}, {self.total_degree}) vs ({other.grade}, {other.total_degree})"
            )

    def __add__(self, other):
        self._check(other)
        acc = dict(self.comps)
        for k, p in other.comps.items():
            acc[k] = acc[k] + p if k in acc else p
        return PolyForm._raw(self.ring, self.nvars, self.grade, self.total_degree, acc)

    def __neg__(self):
        return PolyForm._raw(
            self.ring, self.nvars, self.grade, self.total_degree, {k: -p for k, p in self.comps.items()}
        )

    def __sub__(self, other):
        self._check(other)
        acc = dict(self.comps)
        for k, p in other.comps.items():
            acc[k] = acc[k] - p if k in acc else -p
        return PolyForm._raw(self.ring, self.nvars, self.grade, self.total_degree, acc)

    def scale(self, c) -> "PolyForm":
        return PolyForm._raw(
            self.ring, self.nvars, self.grade, self.total_degree, {k: p.scale(c) for k, p in self.comps.items()}
        )

    def times(self, f: Poly) -> "PolyForm":
        """Multiply every coefficient by the polynomial ``f``."""
        return PolyForm._raw(
            self.ring, self.nvars, self.grade, self.total_degree + f.degree,
            {k: p * f for k, p in self.comps.items()},
        )

    def map_coefficients(self, fn, ring) -> "PolyForm":
        return PolyForm._raw(
            ring, self.nvars, self.grade, self.total_degree,
            {k: p.map_coefficients(fn, ring) for k, p in self.comps.items()},
        )

    def terms(self):
        """Yield ``(index_set, exponent_vector, coefficient)`` triples."""
        for k, p in self.comps.items():
            for ev, c in p.terms():
                yield k, ev, c

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "grade": self.grade,
            "total_degree": self.total_degree,
            "comps": [[list(k), p.to_json()] for k, p in sorted(self.comps.items())],
        }

    @classmethod
    def from_json(cls, ring, obj: dict) -> "PolyForm":
        nvars = int(obj["nvars"])
        grade = int(obj["grade"])
        total = int(obj["total_degree"])
        comps = {}
        for idx, pj in obj["comps"]:
            comps[tuple(int(i) for i in idx)] = Poly.from_json(ring, pj, nvars, total - grade)
        return cls(ring, nvars, grade, total, comps)


class PolyField:
    """Polynomial vector field ``sum_i v_i d/dx_i`` of one homogeneous degree."""

    __slots__ = ("ring", "nvars", "degree", "comps")

    def __init__(self, comps: Sequence[Poly]):
        comps = tuple(comps)
        if not comps:
            raise UsageError("empty vector field")
        ring, nvars = comps[0].ring, comps[0].nvars
        if len(comps) != nvars:
            raise UsageError(f"vector field needs {nvars} components, got {len(comps)}")
        degs = {p.degree for p in comps if not p.is_zero()}
        if len(degs) > 1:
            raise UsageError("vector field components have different degrees")
        self.ring = ring
        self.nvars = nvars
        self.degree = degs.pop() if degs else comps[0].degree
        self.comps = comps

    @classmethod
    def constant(cls, ring, nvars: int, i: int) -> "PolyField":
        zero = Poly.zero(ring, nvars, 0)
        return cls([Poly.constant(ring, nvars) if j == i else zero for j in range(nvars)])

    @classmethod
    def radial(cls, ring, nvars: int) -> "PolyField":
        return cls([Poly.variable(ring, nvars, i) for i in range(nvars)])


# ---------------------------------------------------------------------------
# operations


def _accumulate(acc: dict, key, p: Poly, sign: int):
    if key in acc:
        acc[key] = acc[key] + p if sign > 0 else acc[key] - p
    else:
        acc[key] = p if sign > 0 else -p


def wedge_forms(a: PolyForm, b: PolyForm) -> PolyForm:
    """Exterior product; grades and total degrees add."""
    a._check(b, same_shape=False)
    grade = a.grade + b.grade
    total = a.total_degree + b.total_degree
    if grade > a.nvars:
        raise UsageError(f"product grade {grade} exceeds {a.nvars}")
    acc = {}
    for i, p in a.comps.items():
        for j, q in b.comps.items():
            s = merge_sign(i, j)
            if s:
                _accumulate(acc, tuple(sorted(i + j)), p * q, s)
    return PolyForm._raw(a.ring, a.nvars, grade, total, acc)


def ext_d(a: PolyForm) -> PolyForm:
    """Exterior derivative; grade goes up by one, total degree is kept."""
    if a.grade >= a.nvars:
        raise UsageError("exterior derivative of a top-degree form")
    acc = {}
    for idx, p in a.comps.items():
        for c in range(a.nvars):
            if c in idx:
                continue
            dp = p.partial(c)
            if dp.is_zero():
                continue
            _accumulate(acc, tuple(sorted(idx + (c,))), dp, merge_sign((c,), idx))
    return PolyForm._raw(a.ring, a.nvars, a.grade + 1, a.total_degree, acc)


def contract_basis(i: int, a: PolyForm) -> PolyForm:
    """Interior product with the constant field ``d/dx_i``."""
    if a.grade < 1:
        raise UsageError("cannot contract a function")
    acc = {}
    for idx, p in a.comps.items():
        if i in idx:
            pos = idx.index(i)
            _accumulate(acc, idx[:pos] + idx[pos + 1:], p, -1 if pos & 1 else 1)
    return PolyForm._raw(a.ring, a.nvars, a.grade - 1, a.total_degree - 1, acc)


def contract_multi(v: Sequence[int], a: PolyForm) -> PolyForm:
    """Contract by ``e_{v_0}``, then ``e_{v_1}``, and so on."""
    for i in v:
        a = contract_basis(i, a)
    return a


def contract(v: PolyField, a: PolyForm) -> PolyForm:
    """Interior product ``i_v a`` with a polynomial vector field."""
    if v.nvars != a.nvars:
        raise UsageError("vector field and form live in different dimensions")
    if a.grade < 1:
        raise UsageError("cannot contract a function")
    total = a.total_degree - 1 + v.degree
    acc = {}
    for i, vi in enumerate(v.comps):
        if vi.is_zero():
            continue
        for idx, p in a.comps.items():
            if i in idx:
                pos = idx.index(i)
                _accumulate(acc, idx[:pos] + idx[pos + 1:], p * vi, -1 if pos & 1 else 1)
    return PolyForm._raw(a.ring, a.nvars, a.grade - 1, total, acc)


def radial_contract(a: PolyForm) -> PolyForm:
    """``i_R a`` for the Euler field ``R = sum_i x_i d/dx_i``."""
    if a.grade < 1:
        raise UsageError("cannot contract a function")
    acc = {}
    for idx, p in a.comps.items():
        for pos, i in enumerate(idx):
            _accumulate(acc, idx[:pos] + idx[pos + 1:], p.times_variable(i), -1 if pos & 1 else 1)
    return PolyForm._raw(a.ring, a.nvars, a.grade - 1, a.total_degree, acc)


def descends(a: PolyForm) -> bool:
    return radial_contract(a).is_zero()
