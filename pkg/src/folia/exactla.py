"""Exact scalars and sparse exact linear algebra.

Two coefficient fields are supported: the rationals (``QQ``, elements are
:class:`fractions.Fraction`) and prime fields ``GF(p)`` (elements are Python
ints in ``[0, p)``).  ``DualRing`` adjoins a nilpotent ``eps`` with
``eps**2 == 0`` to either field; it is only a ring, so it never enters the
linear algebra below.

Ring elements support the ordinary ``+ - *`` operators.  Results may leave
the canonical range (ints grow past ``p``); callers bring them back with
``ring.normalize``.  Keeping normalization explicit lets polynomial code
accumulate a whole convolution before reducing once.

Rank and kernel computations go through one of two eliminations:

* ``"dense"``: vectorized Gauss-Jordan modulo ``p`` on int64 numpy blocks.
  The matrix is fed in row blocks and folded into a running reduced row
  echelon form, so tall matrices never need a full dense copy.
* ``"sparse"``: dictionary rows, Markowitz-style pivot choice, works over
  both fields.  Over ``QQ`` rows are kept as primitive integer vectors
  (fraction-free elimination).

``method="auto"`` picks ``dense`` for word-size primes and ``sparse``
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse

from .errors import UsageError

DEFAULT_PRIME = 32003

# dense elimination keeps (#rows * p**2) below 2**63
_DENSE_MAX_PRIME = 1 << 21
_DENSE_BLOCK_ROWS = 512


# ---------------------------------------------------------------------------
# coefficient rings


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0 or not _is_probable_prime(self.p):
            raise UsageError(f"{self.p} is not an odd prime")

    zero = 0
    one = 1

    @property
    def characteristic(self) -> int:
        return self.p

    def __repr__(self):
        return f"GF({self.p})"

    def from_int(self, n: int) -> int:
        return n % self.p

    def normalize(self, x: int) -> int:
        return x % self.p

    def is_zero(self, x) -> bool:
        return x % self.p == 0

    def contains(self, x) -> bool:
        return type(x) is int and 0 <= x < self.p

    def inv(self, x: int) -> int:
        x %= self.p
        if x == 0:
            raise ZeroDivisionError("inverse of zero in GF(%d)" % self.p)
        return pow(x, -1, self.p)

    def convert(self, x) -> int:
        """Coerce an int, Fraction or coefficient string into the field."""
        if isinstance(x, str):
            x = _parse_rational(x)
        if isinstance(x, Fraction):
            return x.numerator * self.inv(x.denominator) % self.p
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            return int(x) % self.p
        raise UsageError(f"cannot interpret {x!r} in {self!r}")

    def format(self, x) -> str:
        return str(x % self.p)

    def to_json(self):
        return {"Fp": self.p}


@dataclass(frozen=True)
class RationalField:
    zero = Fraction(0)
    one = Fraction(1)
    characteristic = 0

    def __repr__(self):
        return "QQ"

    def from_int(self, n: int) -> Fraction:
        return Fraction(n)

    def normalize(self, x) -> Fraction:
        return x if type(x) is Fraction else Fraction(x)

    def is_zero(self, x) -> bool:
        return x == 0

    def contains(self, x) -> bool:
        return type(x) is Fraction

    def inv(self, x) -> Fraction:
        if x == 0:
            raise ZeroDivisionError("inverse of zero in QQ")
        return 1 / Fraction(x)

    def convert(self, x) -> Fraction:
        if isinstance(x, str):
            return _parse_rational(x)
        if isinstance(x, Fraction):
            return x
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            return Fraction(int(x))
        raise UsageError(f"cannot interpret {x!r} in QQ")

    def format(self, x) -> str:
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    def to_json(self):
        return "Q"


QQ = RationalField()


@lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    return PrimeField(p)


def field_from_json(obj):
    if obj == "Q" or obj == "QQ":
        return QQ
    if isinstance(obj, dict) and "Fp" in obj:
        return GF(int(obj["Fp"]))
    raise UsageError(f"unrecognized field specification {obj!r}")


def _parse_rational(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad coefficient string {s!r}") from exc


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Dual:
    """``a + b*eps`` with ``eps**2 == 0``."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = a
        self.b = b

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a + other.a, self.b + other.b)
        return Dual(self.a + other, self.b)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a - other.a, self.b - other.b)
        return Dual(self.a - other, self.b)

    def __rsub__(self, other):
        return Dual(other - self.a, -self.b)

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a * other.a, self.a * other.b + self.b * other.a)
        return Dual(self.a * other, self.b * other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Dual):
            return self.a == other.a and self.b == other.b
        return self.b == 0 and self.a == other

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"


@dataclass(frozen=True)
class DualRing:
    """The ring ``base[eps]/(eps**2)``."""

    base: object

    def __repr__(self):
        return f"{self.base!r}[eps]"

    @property
    def zero(self):
        return Dual(self.base.zero, self.base.zero)

    @property
    def one(self):
        return Dual(self.base.one, self.base.zero)

    @property
    def eps(self):
        return Dual(self.base.zero, self.base.one)

    def from_int(self, n):
        return Dual(self.base.from_int(n), self.base.zero)

    def normalize(self, x):
        if not isinstance(x, Dual):
            return Dual(self.base.normalize(x), self.base.zero)
        return Dual(self.base.normalize(x.a), self.base.normalize(x.b))

    def is_zero(self, x) -> bool:
        return self.base.is_zero(x.a) and self.base.is_zero(x.b)

    def contains(self, x) -> bool:
        return isinstance(x, Dual) and self.base.contains(x.a) and self.base.contains(x.b)

    def convert(self, x):
        if isinstance(x, Dual):
            return self.normalize(x)
        return Dual(self.base.convert(x), self.base.zero)

    def lift(self, a, b):
        return Dual(self.base.convert(a), self.base.convert(b))

    def inv(self, x):
        raise UsageError("DualRing is not a field")


# ---------------------------------------------------------------------------
# sparse matrices


class SparseMatrix:
    """Immutable sparse matrix over a single field.

    Entries are stored in COO form sorted by ``(row, col)``; stored values are
    canonical field elements and never zero.
    """

    __slots__ = ("field", "nrows", "ncols", "_r", "_c", "_v", "_va", "_csr")

    def __init__(self, field, nrows: int, ncols: int, entries=None):
        self.field = field
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        if entries is None:
            entries = {}
        if isinstance(entries, dict):
            items = entries.items()
        else:
            items = (((r, c), v) for r, c, v in entries)
        acc = {}
        for (r, c), v in items:
            if not (0 <= r < self.nrows and 0 <= c < self.ncols):
                raise UsageError(f"entry ({r}, {c}) outside {self.nrows}x{self.ncols}")
            if not field.contains(v):
                raise UsageError(f"entry {v!r} at ({r}, {c}) is not an element of {field!r}")
            acc[(r, c)] = acc[(r, c)] + v if (r, c) in acc else v
        keys = sorted(k for k, v in acc.items() if not field.is_zero(v))
        self._r = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
        self._c = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
        self._v = tuple(field.normalize(acc[k]) for k in keys)
        self._va = None
        self._csr = None

    @classmethod
    def _from_coo(cls, field, nrows, ncols, r, c, v):
        # trusted constructor: r, c sorted, v canonical and nonzero
        self = object.__new__(cls)
        self.field = field
        self.nrows = nrows
        self.ncols = ncols
        self._r = r
        self._c = c
        self._v = v
        self._va = None
        self._csr = None
        return self

    @classmethod
    def from_columns(cls, field, nrows: int, columns: Sequence[dict]):
        """Build from a list of ``{row: value}`` dicts, one per column.

        Values must already be canonical; zero values are dropped.
        """
        triples = []
        for j, col in enumerate(columns):
            for i, v in col.items():
                if not field.is_zero(v):
                    if not field.contains(v):
                        raise UsageError(f"entry {v!r} is not an element of {field!r}")
                    triples.append((i, j, v))
        triples.sort()
        r = np.fromiter((t[0] for t in triples), dtype=np.int64, count=len(triples))
        c = np.fromiter((t[1] for t in triples), dtype=np.int64, count=len(triples))
        if len(r) and (r.min() < 0 or r.max() >= nrows):
            raise UsageError("row index out of range")
        return cls._from_coo(field, nrows, len(columns), r, c, tuple(t[2] for t in triples))

    @classmethod
    def from_dense(cls, field, rows: Sequence[Sequence], ncols: int | None = None):
        rows = [list(row) for row in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        entries = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise UsageError("ragged dense matrix")
            for j, v in enumerate(row):
                v = field.convert(v)
                if not field.is_zero(v):
                    entries[(i, j)] = v
        return cls(field, len(rows), ncols, entries)

    @classmethod
    def identity(cls, field, n: int):
        return cls(field, n, n, {(i, i): field.one for i in range(n)})

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return len(self._v)

    @property
    def entries(self) -> dict:
        return {(int(r), int(c)): v for r, c, v in zip(self._r, self._c, self._v)}

    def __repr__(self):
        return f"SparseMatrix({self.field!r}, {self.nrows}x{self.ncols}, nnz={self.nnz})"

    def __eq__(self, other):
        return (
            isinstance(other, SparseMatrix)
            and self.field == other.field
            and self.shape == other.shape
            and np.array_equal(self._r, other._r)
            and np.array_equal(self._c, other._c)
            and self._v == other._v
        )

    def to_dense(self) -> list[list]:
        out = [[self.field.zero] * self.ncols for _ in range(self.nrows)]
        for r, c, v in zip(self._r, self._c, self._v):
            out[r][c] = v
        return out

    def iter_rows(self):
        """Yield ``(row_index, {col: value})`` for every nonzero row."""
        if not self.nnz:
            return
        bounds = np.flatnonzero(np.diff(self._r)) + 1
        starts = np.concatenate(([0], bounds))
        ends = np.concatenate((bounds, [self.nnz]))
        for s, e in zip(starts.tolist(), ends.tolist()):
            yield int(self._r[s]), dict(zip(self._c[s:e].tolist(), self._v[s:e]))

    def columns(self) -> list[dict]:
        cols = [dict() for _ in range(self.ncols)]
        for r, c, v in zip(self._r.tolist(), self._c.tolist(), self._v):
            cols[c][r] = v
        return cols

    def transpose(self) -> "SparseMatrix":
        order = np.lexsort((self._r, self._c))
        return SparseMatrix._from_coo(
            self.field, self.ncols, self.nrows,
            self._c[order], self._r[order], tuple(self._v[i] for i in order.tolist()),
        )

    def hstack(self, other: "SparseMatrix") -> "SparseMatrix":
        if other.field != self.field:
            raise UsageError("cannot stack matrices over different fields")
        if other.nrows != self.nrows:
            raise UsageError("row counts differ")
        entries = self.entries
        for (r, c), v in other.entries.items():
            entries[(r, c + self.ncols)] = v
        return SparseMatrix(self.field, self.nrows, self.ncols + other.ncols, entries)

    def map_field(self, field) -> "SparseMatrix":
        """Reduce an integral (or p-integral) rational matrix into ``field``."""
        entries = {}
        for (r, c), v in self.entries.items():
            entries[(r, c)] = field.convert(v)
        return SparseMatrix(field, self.nrows, self.ncols, entries)

    def _value_array(self) -> np.ndarray:
        if self._va is None:
            self._va = np.asarray(self._v, dtype=np.int64)
        return self._va

    def dense_block(self, start: int, stop: int) -> np.ndarray:
        """Rows ``start:stop`` as an int64 array (prime fields only)."""
        _require_prime(self.field)
        lo, hi = np.searchsorted(self._r, [start, stop])
        block = np.zeros((stop - start, self.ncols), dtype=np.int64)
        if hi > lo:
            block[self._r[lo:hi] - start, self._c[lo:hi]] = self._value_array()[lo:hi]
        return block

    def matvec(self, x: Sequence) -> list:
        if len(x) != self.ncols:
            raise UsageError("vector length does not match column count")
        f = self.field
        if isinstance(f, PrimeField) and f.p < _DENSE_MAX_PRIME:
            return self._matvec_modp(x).tolist()
        out = [f.zero] * self.nrows
        for r, c, v in zip(self._r.tolist(), self._c.tolist(), self._v):
            out[r] = out[r] + v * x[c]
        return [f.normalize(t) for t in out]

    def _float_csr(self):
        """CSR copy with float64 values, or None if products could round."""
        if self._csr is None:
            p = self.field.p
            width = int(np.bincount(self._r).max()) if self.nnz else 0
            if (p - 1) ** 2 * max(width, 1) >= (1 << 53):
                self._csr = False
            else:
                self._csr = scipy.sparse.csr_matrix(
                    (self._value_array().astype(np.float64), (self._r, self._c)),
                    shape=(self.nrows, self.ncols),
                )
        return self._csr

    def matmat_modp(self, x: np.ndarray) -> np.ndarray:
        """``self @ x mod p`` for an int array ``x`` of shape (ncols, k)."""
        _require_prime(self.field)
        p = self.field.p
        x = np.asarray(x, dtype=np.int64) % p
        csr = self._float_csr()
        if csr is not False:
            return np.fmod(csr @ x.astype(np.float64), p).astype(np.int64)
        out = np.zeros((self.nrows, x.shape[1]), dtype=np.int64)
        for r, c, v in zip(self._r.tolist(), self._c.tolist(), self._v):
            out[r] = (out[r] + v * x[c]) % p
        return out

    def _matvec_modp(self, x: Sequence) -> np.ndarray:
        xv = np.asarray([int(t) for t in x], dtype=np.int64)
        return self.matmat_modp(xv[:, None])[:, 0]

    def is_zero_product(self, x: Sequence) -> bool:
        f = self.field
        if len(x) != self.ncols:
            raise UsageError("vector length does not match column count")
        if isinstance(f, PrimeField) and f.p < _DENSE_MAX_PRIME:
            return not self._matvec_modp(x).any()
        return all(f.is_zero(t) for t in self.matvec(x))


def _require_prime(field):
    if not isinstance(field, PrimeField):
        raise UsageError(f"dense modular elimination needs a prime field, got {field!r}")


# ---------------------------------------------------------------------------
# echelon forms


def _rref_modp(a: np.ndarray, p: int):
    """Gauss-Jordan on an int64 array with entries in [0, p)."""
    a = a.copy()
    nrows, ncols = a.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), -1, p)
        if inv != 1:
            a[r] = a[r] * inv % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            # row r vanishes left of c, so only columns c.. change
            a[hit, c:] = (a[hit, c:] - col[hit, None] * a[r, c:]) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def _matmul_modp(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """``a @ b mod p`` for entries in [0, p).

    Float64 products are exact while every dot product stays below 2**53,
    and BLAS makes them much faster than integer matmul.
    """
    k = a.shape[1]
    if (p - 1) ** 2 * max(k, 1) < (1 << 53):
        out = a.astype(np.float64) @ b.astype(np.float64)
        return np.fmod(out, p).astype(np.int64)
    if (p - 1) ** 2 * max(k, 1) < (1 << 63):
        return (a @ b) % p
    # split the inner dimension so partial sums fit in int64
    step = max(1, ((1 << 63) - 1) // ((p - 1) ** 2))
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for s in range(0, k, step):
        out = (out + a[:, s:s + step] @ b[s:s + step]) % p
    return out


class DenseModpEchelon:
    """Running reduced row echelon form of a row space over GF(p)."""

    def __init__(self, p: int, ncols: int):
        if p >= _DENSE_MAX_PRIME:
            raise UsageError(f"prime {p} too large for dense elimination")
        self.p = p
        self.ncols = ncols
        self.basis = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, block: np.ndarray) -> np.ndarray:
        block = np.asarray(block, dtype=np.int64) % self.p
        if self.pivots:
            block = (block - _matmul_modp(block[:, self.pivots], self.basis, self.p)) % self.p
        return block

    def add_block(self, block: np.ndarray) -> None:
        if self.rank == self.ncols:
            return
        residual = self.reduce(block)
        keep = residual.any(axis=1)
        if not keep.any():
            return
        new, newpiv = _rref_modp(residual[keep], self.p)
        if not newpiv:
            return
        # residual rows are already zero on the old pivots; clear the new
        # pivot columns from the old rows, then merge in pivot order
        basis = self.basis
        if len(self.pivots):
            basis = (basis - _matmul_modp(basis[:, newpiv], new, self.p)) % self.p
        rows = np.vstack([basis, new])
        pivots = self.pivots + list(newpiv)
        order = np.argsort(pivots, kind="stable")
        self.basis = rows[order]
        self.pivots = [pivots[i] for i in order.tolist()]

    def contains(self, vectors: np.ndarray) -> np.ndarray:
        vectors = np.atleast_2d(vectors)
        return ~self.reduce(vectors).any(axis=1)

    def kernel(self) -> list[list[int]]:
        """Basis of ``{x : B x = 0}`` for the accumulated rows ``B``."""
        p = self.p
        pivset = set(self.pivots)
        out = []
        for f in range(self.ncols):
            if f in pivset:
                continue
            x = [0] * self.ncols
            x[f] = 1
            for i, c in enumerate(self.pivots):
                x[c] = int(-self.basis[i, f]) % p
            out.append(x)
        return out


class SparseEchelon:
    """Running reduced row echelon form with dictionary rows.

    Over ``QQ`` the rows are primitive integer vectors and elimination is
    fraction-free.  Pivot columns are chosen Markowitz-style: the candidate
    column with the fewest nonzeros in the input, ties broken by index.
    """

    def __init__(self, field, ncols: int, col_counts: Sequence[int] | None = None):
        self.field = field
        self.ncols = ncols
        self.rational = isinstance(field, RationalField)
        self.col_counts = list(col_counts) if col_counts is not None else [0] * ncols
        self.rows: dict[int, dict] = {}  # pivot column -> row

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def pivots(self) -> list[int]:
        return sorted(self.rows)

    def _prepare(self, row: dict) -> dict:
        f = self.field
        if self.rational:
            den = 1
            for v in row.values():
                den = den * v.denominator // math.gcd(den, v.denominator)
            out = {c: int(v * den) for c, v in row.items() if v != 0}
            return _primitive(out)
        return {c: v % f.p for c, v in row.items() if v % f.p}

    def _reduce_prepared(self, row: dict) -> dict:
        f = self.field
        hits = [c for c in row if c in self.rows]
        for c in hits:
            a = row.get(c)
            if not a:
                continue
            prow = self.rows[c]
            if self.rational:
                b = prow[c]
                g = math.gcd(a, b)
                sa, sb = b // g, a // g
                new = {k: v * sa for k, v in row.items()}
                for k, v in prow.items():
                    t = new.get(k, 0) - sb * v
                    if t:
                        new[k] = t
                    else:
                        new.pop(k, None)
                row = new
            else:
                p = f.p
                for k, v in prow.items():
                    t = (row.get(k, 0) - a * v) % p
                    if t:
                        row[k] = t
                    else:
                        row.pop(k, None)
        if self.rational:
            row = _primitive(row)
        return row

    def reduce(self, row: dict) -> dict:
        return self._reduce_prepared(self._prepare(row))

    def add_row(self, row: dict) -> bool:
        if self.rank == self.ncols:
            return False
        row = self.reduce(row)
        if not row:
            return False
        c = min(row, key=lambda k: (self.col_counts[k], k))
        if not self.rational:
            inv = pow(row[c], -1, self.field.p)
            row = {k: v * inv % self.field.p for k, v in row.items()}
        elif row[c] < 0:
            row = {k: -v for k, v in row.items()}
        # keep the form fully reduced: clear column c from older pivot rows
        for pc, prow in list(self.rows.items()):
            if c in prow:
                self.rows[pc] = self._eliminate(prow, row, c)
        self.rows[c] = row
        return True

    def _eliminate(self, target: dict, prow: dict, c: int) -> dict:
        a = target[c]
        if self.rational:
            b = prow[c]
            g = math.gcd(a, b)
            sa, sb = b // g, a // g
            new = {k: v * sa for k, v in target.items()}
            for k, v in prow.items():
                t = new.get(k, 0) - sb * v
                if t:
                    new[k] = t
                else:
                    new.pop(k, None)
            return _primitive(new)
        p = self.field.p
        new = dict(target)
        for k, v in prow.items():
            t = (new.get(k, 0) - a * v) % p
            if t:
                new[k] = t
            else:
                new.pop(k, None)
        return new

    def contains(self, row: dict) -> bool:
        return not self.reduce(row)

    def kernel(self) -> list[list]:
        f = self.field
        out = []
        piv = self.rows
        for free in range(self.ncols):
            if free in piv:
                continue
            if self.rational:
                x = {free: Fraction(1)}
                for c, prow in piv.items():
                    if free in prow:
                        x[c] = Fraction(-prow[free], prow[c])
                den = 1
                for v in x.values():
                    den = den * v.denominator // math.gcd(den, v.denominator)
                vec = [Fraction(0)] * self.ncols
                for k, v in x.items():
                    vec[k] = Fraction(v * den)
            else:
                vec = [0] * self.ncols
                vec[free] = 1
                for c, prow in piv.items():
                    if free in prow:
                        vec[c] = -prow[free] % f.p
            out.append(vec)
        return out


def _primitive(row: dict) -> dict:
    g = 0
    for v in row.values():
        g = math.gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {k: v // g for k, v in row.items()}
    return row


def _pick_method(field, method: str) -> str:
    if method not in ("auto", "dense", "sparse"):
        raise UsageError(f"unknown elimination method {method!r}")
    if method == "auto":
        return "dense" if isinstance(field, PrimeField) and field.p < _DENSE_MAX_PRIME else "sparse"
    if method == "dense":
        _require_prime(field)
    return method


def row_echelon(m: SparseMatrix, method: str = "auto"):
    """Reduced row echelon form of the row space of ``m``."""
    method = _pick_method(m.field, method)
    if method == "dense":
        ech = DenseModpEchelon(m.field.p, m.ncols)
        for start in range(0, m.nrows, _DENSE_BLOCK_ROWS):
            ech.add_block(m.dense_block(start, min(start + _DENSE_BLOCK_ROWS, m.nrows)))
            if ech.rank == m.ncols:
                break
        return ech
    counts = np.bincount(m._c, minlength=m.ncols).tolist() if m.nnz else [0] * m.ncols
    ech = SparseEchelon(m.field, m.ncols, counts)
    rows = sorted(m.iter_rows(), key=lambda t: (len(t[1]), t[0]))
    for _, row in rows:
        ech.add_row(row)
        if ech.rank == m.ncols:
            break
    return ech


def rank(m: SparseMatrix, method: str = "auto") -> int:
    """Exact rank of ``m`` over its field."""
    return row_echelon(m, method).rank


def kernel_basis(m: SparseMatrix, method: str = "auto") -> list[list]:
    """``ncols - rank`` vectors spanning ``{x : m x = 0}``."""
    return row_echelon(m, method).kernel()


def column_echelon(m: SparseMatrix, method: str = "auto"):
    """Echelon form of the column space (row space of the transpose)."""
    return row_echelon(m.transpose(), method)


def in_column_space(m: SparseMatrix, vectors: Iterable[Sequence], method: str = "auto") -> list[bool]:
    """For each vector, whether it lies in the column space of ``m``."""
    vectors = [list(v) for v in vectors]
    if not vectors:
        return []
    for v in vectors:
        if len(v) != m.nrows:
            raise UsageError("vector length does not match row count")
    ech = column_echelon(m, method)
    f = m.field
    if isinstance(ech, DenseModpEchelon):
        arr = np.asarray([[int(t) % f.p for t in v] for v in vectors], dtype=np.int64)
        return ech.contains(arr).tolist()
    return [ech.contains({i: t for i, t in enumerate(v) if not f.is_zero(t)}) for v in vectors]


def rank_across_primes(m: SparseMatrix, primes: Sequence[int]) -> tuple[dict[int, int], bool]:
    """Ranks of an integral matrix reduced modulo each prime.

    Returns the per-prime ranks and whether they all agree.  Disagreement
    means some prime divides a minor and the smaller rank is spurious.
    """
    if not isinstance(m.field, RationalField):
        raise UsageError("multi-prime checks start from a matrix over QQ")
    ranks = {p: rank(m.map_field(GF(p))) for p in primes}
    return ranks, len(set(ranks.values())) <= 1
