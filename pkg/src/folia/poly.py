"""Sparse homogeneous polynomials in ``x_0, ..., x_n``.

Exponent vectors are packed into a single int (a fixed bit field per
variable) so that monomial multiplication is an integer addition.  The
public API speaks in exponent tuples; packing never leaks out.

Monomials of a fixed degree are ordered graded-lexicographically with
``x_0 > x_1 > ... > x_n``; ``monomial_basis`` and the coefficient-vector
maps use that order everywhere.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import UsageError
from .exactla import PrimeField, _DENSE_MAX_PRIME

ExpVec = tuple  # tuple[int, ...] of length nvars

_NUMPY_MUL_THRESHOLD = 4096


@lru_cache(maxsize=None)
def _bits(nvars: int) -> int:
    if nvars < 1 or nvars > 12:
        raise UsageError(f"unsupported number of variables: {nvars}")
    return min(16, 62 // nvars)


def pack(ev: Sequence[int]) -> int:
    b = _bits(len(ev))
    key = 0
    for i, e in enumerate(ev):
        if e < 0 or e >> b:
            raise UsageError(f"exponent {e} out of range")
        key |= e << (b * i)
    return key


@lru_cache(maxsize=1 << 16)
def unpack(key: int, nvars: int) -> ExpVec:
    b = _bits(nvars)
    mask = (1 << b) - 1
    return tuple((key >> (b * i)) & mask for i in range(nvars))


@lru_cache(maxsize=None)
def _unit_keys(nvars: int) -> tuple[int, ...]:
    b = _bits(nvars)
    return tuple(1 << (b * i) for i in range(nvars))


def _exponent_of(key: int, i: int, nvars: int) -> int:
    b = _bits(nvars)
    return (key >> (b * i)) & ((1 << b) - 1)


@lru_cache(maxsize=None)
def monomial_basis(n: int, e: int) -> tuple[ExpVec, ...]:
    """All exponent vectors of degree ``e`` in ``n + 1`` variables, grlex order."""
    if e < 0:
        return ()
    nvars = n + 1
    out = []
    # stars and bars: choose bar positions among e + n slots, then sort descending
    for bars in combinations(range(e + n), n):
        prev = -1
        ev = []
        for b in bars:
            ev.append(b - prev - 1)
            prev = b
        ev.append(e + n - prev - 1)
        out.append(tuple(ev))
    out.sort(reverse=True)
    assert len(out) == comb(n + e, e)
    assert all(len(ev) == nvars for ev in out)
    return tuple(out)


@lru_cache(maxsize=None)
def _monomial_index(n: int, e: int) -> dict:
    return {pack(ev): i for i, ev in enumerate(monomial_basis(n, e))}


_COMPACT_BITS = 22


def _compact(keys: np.ndarray, nvars: int, cb: int) -> np.ndarray:
    b = _bits(nvars)
    mask = (1 << b) - 1
    out = np.zeros(len(keys), dtype=np.int64)
    for i in range(1, nvars):
        out |= ((keys >> (b * i)) & mask) << (cb * (i - 1))
    return out


def _expand(compact: np.ndarray, nvars: int, cb: int, deg: int) -> np.ndarray:
    b = _bits(nvars)
    cmask = (1 << cb) - 1
    out = np.zeros(len(compact), dtype=np.int64)
    rest = np.full(len(compact), deg, dtype=np.int64)
    for i in range(1, nvars):
        e = (compact >> (cb * (i - 1))) & cmask
        out |= e << (b * i)
        rest -= e
    return out | rest


@lru_cache(maxsize=256)
def _sorted_keys(nvars: int, e: int) -> np.ndarray:
    return np.sort(np.fromiter((pack(ev) for ev in monomial_basis(nvars - 1, e)), dtype=np.int64))


def min_variable(ev: Sequence[int]) -> int:
    """Smallest variable index occurring in ``ev`` (``len(ev)`` for 1)."""
    for i, e in enumerate(ev):
        if e:
            return i
    return len(ev)


class Poly:
    """Homogeneous polynomial with coefficients in ``ring``.

    ``terms`` maps exponent tuples to nonzero ring elements.  The zero
    polynomial has no terms and keeps whatever degree it was declared with.
    """

    __slots__ = ("ring", "nvars", "degree", "_t", "_arr")

    def __init__(self, ring, nvars: int, degree: int, terms: dict | None = None):
        self.ring = ring
        self.nvars = nvars
        self.degree = degree
        self._arr = None
        t = {}
        for ev, c in (terms or {}).items():
            ev = tuple(ev)
            if len(ev) != nvars:
                raise UsageError(f"exponent {ev} has wrong length for {nvars} variables")
            if sum(ev) != degree:
                raise UsageError(f"monomial {ev} is not of degree {degree}")
            c = ring.convert(c) if not ring.contains(c) else c
            if not ring.is_zero(c):
                k = pack(ev)
                t[k] = ring.normalize(t[k] + c) if k in t else c
        self._t = {k: v for k, v in t.items() if not ring.is_zero(v)}

    @classmethod
    def _raw(cls, ring, nvars, degree, packed: dict):
        self = object.__new__(cls)
        self.ring = ring
        self.nvars = nvars
        self.degree = degree
        self._t = packed
        self._arr = None
        return self

    @classmethod
    def _from_accumulator(cls, ring, nvars, degree, acc: dict):
        norm = ring.normalize
        isz = ring.is_zero
        out = {}
        for k, v in acc.items():
            v = norm(v)
            if not isz(v):
                out[k] = v
        return cls._raw(ring, nvars, degree, out)

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, ring, nvars: int, degree: int) -> "Poly":
        return cls._raw(ring, nvars, degree, {})

    @classmethod
    def constant(cls, ring, nvars: int, c=None) -> "Poly":
        c = ring.one if c is None else ring.convert(c)
        return cls._raw(ring, nvars, 0, {} if ring.is_zero(c) else {0: c})

    @classmethod
    def monomial(cls, ring, ev: Sequence[int], c=None) -> "Poly":
        c = ring.one if c is None else ring.convert(c)
        return cls._raw(ring, len(ev), sum(ev), {} if ring.is_zero(c) else {pack(ev): c})

    @classmethod
    def variable(cls, ring, nvars: int, i: int) -> "Poly":
        ev = [0] * nvars
        ev[i] = 1
        return cls.monomial(ring, ev)

    @classmethod
    def linear(cls, ring, coeffs: Sequence) -> "Poly":
        nvars = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            ev = [0] * nvars
            ev[i] = 1
            terms[tuple(ev)] = c
        return cls(ring, nvars, 1, terms)

    @classmethod
    def from_vector(cls, ring, n: int, e: int, vec: Sequence) -> "Poly":
        basis = monomial_basis(n, e)
        if len(vec) != len(basis):
            raise UsageError(f"vector of length {len(vec)} does not match S_{e} dimension {len(basis)}")
        out = {}
        for ev, c in zip(basis, vec):
            if not ring.is_zero(c):
                out[pack(ev)] = ring.normalize(c)
        return cls._raw(ring, n + 1, e, out)

    @classmethod
    def random(cls, ring, nvars: int, degree: int, rng, bound: int = 100) -> "Poly":
        """Dense polynomial with integer coefficients drawn from ``[-bound, bound]``."""
        terms = {}
        for ev in monomial_basis(nvars - 1, degree):
            c = int(rng.integers(-bound, bound + 1))
            terms[ev] = ring.from_int(c)
        return cls(ring, nvars, degree, terms)

    # -- inspection -------------------------------------------------------

    def __len__(self):
        return len(self._t)

    def __bool__(self):
        return bool(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def terms(self) -> Iterator[tuple[ExpVec, object]]:
        nv = self.nvars
        for k, c in self._t.items():
            yield unpack(k, nv), c

    def to_dict(self) -> dict:
        return dict(self.terms())

    def coefficient(self, ev: Sequence[int]):
        return self._t.get(pack(ev), self.ring.zero)

    def to_vector(self) -> list:
        """Coefficients on ``monomial_basis(nvars - 1, degree)``."""
        index = _monomial_index(self.nvars - 1, self.degree)
        vec = [self.ring.zero] * len(index)
        for k, c in self._t.items():
            vec[index[k]] = c
        return vec

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        if not self._t and not other._t:
            return True
        return self.degree == other.degree and self._t == other._t

    __hash__ = None

    def __repr__(self):
        if not self._t:
            return "0"
        parts = []
        for ev, c in sorted(self.terms(), reverse=True):
            mono = "*".join(
                f"x{i}" if e == 1 else f"x{i}^{e}" for i, e in enumerate(ev) if e
            )
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)

    # -- arithmetic -------------------------------------------------------

    def _check_compatible(self, other: "Poly", same_degree: bool):
        if self.ring != other.ring:
            raise UsageError(f"ring mismatch: {self.ring!r} vs {other.ring!r}")
        if self.nvars != other.nvars:
            raise UsageError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
        if same_degree and self.degree != other.degree:
            raise UsageError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "Poly") -> "Poly":
        self._check_compatible(other, True)
        acc = dict(self._t)
        for k, c in other._t.items():
            acc[k] = acc[k] + c if k in acc else c
        return Poly._from_accumulator(self.ring, self.nvars, self.degree, acc)

    def __neg__(self) -> "Poly":
        norm = self.ring.normalize
        return Poly._raw(self.ring, self.nvars, self.degree, {k: norm(-c) for k, c in self._t.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        self._check_compatible(other, True)
        acc = dict(self._t)
        for k, c in other._t.items():
            acc[k] = acc[k] - c if k in acc else -c
        return Poly._from_accumulator(self.ring, self.nvars, self.degree, acc)

    def scale(self, c) -> "Poly":
        ring = self.ring
        if ring.is_zero(c):
            return Poly.zero(ring, self.nvars, self.degree)
        return Poly._from_accumulator(ring, self.nvars, self.degree, {k: v * c for k, v in self._t.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(self.ring.convert(other))
        self._check_compatible(other, False)
        deg = self.degree + other.degree
        if not self._t or not other._t:
            return Poly.zero(self.ring, self.nvars, deg)
        ring = self.ring
        if (
            isinstance(ring, PrimeField)
            and ring.p < _DENSE_MAX_PRIME
            and len(self._t) * len(other._t) >= _NUMPY_MUL_THRESHOLD
        ):
            return self._mul_numpy(other, deg)
        a, b = (self._t, other._t) if len(self._t) >= len(other._t) else (other._t, self._t)
        acc = {}
        get = acc.get
        for k2, c2 in b.items():
            for k1, c1 in a.items():
                k = k1 + k2
                acc[k] = get(k, 0) + c1 * c2
        return Poly._from_accumulator(ring, self.nvars, deg, acc)

    __rmul__ = __mul__

    def _arrays(self):
        if self._arr is None:
            keys = np.fromiter(self._t.keys(), dtype=np.int64, count=len(self._t))
            vals = np.fromiter(self._t.values(), dtype=np.int64, count=len(self._t))
            self._arr = (keys, vals)
        return self._arr

    def _mul_numpy(self, other: "Poly", deg: int) -> "Poly":
        p = self.ring.p
        nv = self.nvars
        k1, v1 = self._arrays()
        k2, v2 = other._arrays()
        vals = ((v1[:, None] * v2[None, :]) % p).ravel().astype(np.float64)
        # float64 sums below are exact while len(vals) * p < 2**53
        cb = max(deg.bit_length(), 1)
        if cb * (nv - 1) <= _COMPACT_BITS:
            # re-pack x_1..x_n into cb bits each (x_0 is implied by homogeneity);
            # the map is additive, so product keys are sums of compact keys
            c1, c2 = _compact(k1, nv, cb), _compact(k2, nv, cb)
            idx = (c1[:, None] + c2[None, :]).ravel()
            sums = np.fmod(np.bincount(idx, weights=vals, minlength=1 << (cb * (nv - 1))), p)
            nz = np.flatnonzero(sums)
            keys = _expand(nz, nv, cb, deg)
        else:
            table = _sorted_keys(nv, deg)
            idx = np.searchsorted(table, (k1[:, None] + k2[None, :]).ravel())
            sums = np.fmod(np.bincount(idx, weights=vals, minlength=len(table)), p)
            nz = np.flatnonzero(sums)
            keys = table[nz]
        return Poly._raw(self.ring, nv, deg, dict(zip(keys.tolist(), sums[nz].astype(np.int64).tolist())))

    def __pow__(self, k: int) -> "Poly":
        out = Poly.constant(self.ring, self.nvars)
        for _ in range(k):
            out = out * self
        return out

    def partial(self, i: int) -> "Poly":
        """Formal derivative with respect to ``x_i``."""
        if not 0 <= i < self.nvars:
            raise UsageError(f"variable index {i} out of range")
        nv = self.nvars
        unit = _unit_keys(nv)[i]
        ring = self.ring
        acc = {}
        for k, c in self._t.items():
            e = _exponent_of(k, i, nv)
            if e:
                acc[k - unit] = c * ring.from_int(e)
        return Poly._from_accumulator(ring, nv, self.degree - 1, acc)

    def times_monomial(self, ev: Sequence[int]) -> "Poly":
        if len(ev) != self.nvars:
            raise UsageError("monomial has the wrong number of variables")
        shift = pack(ev)
        return Poly._raw(self.ring, self.nvars, self.degree + sum(ev), {k + shift: c for k, c in self._t.items()})

    def times_variable(self, i: int) -> "Poly":
        unit = _unit_keys(self.nvars)[i]
        return Poly._raw(self.ring, self.nvars, self.degree + 1, {k + unit: c for k, c in self._t.items()})

    def map_coefficients(self, fn, ring) -> "Poly":
        """Apply ``fn`` to every coefficient, landing in ``ring``."""
        return Poly._from_accumulator(ring, self.nvars, self.degree, {k: fn(c) for k, c in self._t.items()})

    # -- serialization ----------------------------------------------------

    def to_json(self) -> list:
        fmt = self.ring.format
        return [[fmt(c), list(ev)] for ev, c in sorted(self.terms(), reverse=True)]

    @classmethod
    def from_json(cls, ring, obj, nvars: int | None = None, degree: int | None = None) -> "Poly":
        if not isinstance(obj, list):
            raise UsageError("polynomial JSON must be a list of [coefficient, exponents] pairs")
        terms = {}
        for item in obj:
            if not (isinstance(item, list) and len(item) == 2 and isinstance(item[1], list)):
                raise UsageError(f"bad polynomial term {item!r}")
            c, ev = item
            ev = tuple(int(e) for e in ev)
            terms[ev] = ring.normalize(terms.get(ev, ring.zero) + ring.convert(c))
        if terms:
            lens = {len(ev) for ev in terms}
            degs = {sum(ev) for ev in terms}
            if len(lens) != 1 or len(degs) != 1:
                raise UsageError("polynomial JSON is not homogeneous")
            nvars_found, degree_found = lens.pop(), degs.pop()
            if nvars is not None and nvars != nvars_found:
                raise UsageError(f"expected {nvars} variables, found {nvars_found}")
            if degree is not None and degree != degree_found:
                raise UsageError(f"expected degree {degree}, found {degree_found}")
            nvars, degree = nvars_found, degree_found
        elif nvars is None or degree is None:
            raise UsageError("zero polynomial JSON needs an explicit variable count and degree")
        return cls(ring, nvars, degree, terms)


def add(p: Poly, q: Poly) -> Poly:
    return p + q


def scal_mul(c, p: Poly) -> Poly:
    return p.scale(p.ring.convert(c))


def mul(p: Poly, q: Poly) -> Poly:
    return p * q


def partial(p: Poly, i: int) -> Poly:
    return p.partial(i)


def product(polys: Iterable[Poly], ring, nvars: int) -> Poly:
    out = Poly.constant(ring, nvars)
    for f in polys:
        out = out * f
    return out


def euler_identity_check(p: Poly) -> bool:
    """Whether ``sum_i x_i * dP/dx_i == deg(P) * P``."""
    acc = Poly.zero(p.ring, p.nvars, p.degree)
    for i in range(p.nvars):
        acc = acc + p.partial(i).times_variable(i)
    return acc == p.scale(p.ring.from_int(p.degree))
