"""Exterior algebra of K^m on the basis e_0, ..., e_{m-1}.

A multivector stores one coefficient per strictly increasing index tuple;
antisymmetry is implicit and all signs are produced by the operations.
Indices are 0-based throughout (``e_0`` is the first basis vector).
"""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Sequence

from .errors import UsageError
from .exactla import SparseMatrix, rank

IndexSet = tuple  # strictly increasing tuple of ints


def merge_sign(a: Sequence[int], b: Sequence[int]) -> int:
    """Sign of the shuffle sorting ``a + b``; 0 if they share an index."""
    inversions = 0
    for x in a:
        for y in b:
            if x == y:
                return 0
            if x > y:
                inversions += 1
    return -1 if inversions & 1 else 1


def check_degrees(d: Sequence[int]) -> tuple[int, ...]:
    d = tuple(int(x) for x in d)
    if not d or any(x < 1 for x in d):
        raise UsageError(f"degree vector must have positive entries, got {d}")
    return d


class MultiVector:
    __slots__ = ("ring", "m", "grade", "comps")

    def __init__(self, ring, m: int, grade: int, comps: dict | None = None):
        if not 0 <= grade <= m:
            raise UsageError(f"grade {grade} impossible in dimension {m}")
        self.ring = ring
        self.m = m
        self.grade = grade
        out = {}
        for idx, c in (comps or {}).items():
            idx = tuple(idx)
            if len(idx) != grade:
                raise UsageError(f"index set {idx} does not have size {grade}")
            if list(idx) != sorted(set(idx)) or (idx and not 0 <= idx[0] <= idx[-1] < m):
                raise UsageError(f"index set {idx} is not strictly increasing in range({m})")
            c = ring.convert(c) if not ring.contains(c) else c
            if not ring.is_zero(c):
                out[idx] = c
        self.comps = out

    @classmethod
    def _raw(cls, ring, m, grade, comps):
        self = object.__new__(cls)
        self.ring, self.m, self.grade = ring, m, grade
        norm, isz = ring.normalize, ring.is_zero
        self.comps = {}
        for k, v in comps.items():
            v = norm(v)
            if not isz(v):
                self.comps[k] = v
        return self

    @classmethod
    def basis(cls, ring, m: int, idx: Sequence[int]) -> "MultiVector":
        return cls(ring, m, len(idx), {tuple(idx): ring.one})

    @classmethod
    def from_vector(cls, ring, coords: Sequence) -> "MultiVector":
        return cls(ring, len(coords), 1, {(i,): c for i, c in enumerate(coords)})

    @classmethod
    def from_coordinates(cls, ring, m: int, grade: int, coords: Sequence) -> "MultiVector":
        sets = list(combinations(range(m), grade))
        if len(coords) != len(sets):
            raise UsageError(f"expected {len(sets)} coordinates, got {len(coords)}")
        return cls(ring, m, grade, dict(zip(sets, coords)))

    def coordinate(self, idx: Sequence[int]):
        """Coefficient of ``e_idx`` for any ordering of distinct indices."""
        idx = tuple(idx)
        if len(set(idx)) != len(idx):
            return self.ring.zero
        key = tuple(sorted(idx))
        c = self.comps.get(key, self.ring.zero)
        if _perm_sign(idx) < 0:
            c = self.ring.normalize(-c)
        return c

    def to_coordinates(self) -> list:
        z = self.ring.zero
        return [self.comps.get(s, z) for s in combinations(range(self.m), self.grade)]

    def as_vector(self) -> list:
        if self.grade != 1:
            raise UsageError("only grade-1 multivectors are vectors")
        return [self.comps.get((i,), self.ring.zero) for i in range(self.m)]

    def is_zero(self) -> bool:
        return not self.comps

    def __eq__(self, other):
        if not isinstance(other, MultiVector):
            return NotImplemented
        return self.m == other.m and (
            (not self.comps and not other.comps)
            or (self.grade == other.grade and self.comps == other.comps)
        )

    __hash__ = None

    def __repr__(self):
        if not self.comps:
            return "0"
        return " + ".join(
            f"{c}*e{''.join(map(str, k))}" if k else f"{c}" for k, c in sorted(self.comps.items())
        )

    def _check(self, other):
        if self.m != other.m:
            raise UsageError(f"dimension mismatch: {self.m} vs {other.m}")
        if self.ring != other.ring:
            raise UsageError("ring mismatch")

    def __add__(self, other):
        self._check(other)
        if self.grade != other.grade and self.comps and other.comps:
            raise UsageError("cannot add multivectors of different grades")
        grade = self.grade if self.comps else other.grade
        acc = dict(self.comps)
        for k, v in other.comps.items():
            acc[k] = acc[k] + v if k in acc else v
        return MultiVector._raw(self.ring, self.m, grade, acc)

    def __neg__(self):
        return MultiVector._raw(self.ring, self.m, self.grade, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = self.ring.convert(c) if not self.ring.contains(c) else c
        return MultiVector._raw(self.ring, self.m, self.grade, {k: v * c for k, v in self.comps.items()})

    def to_json(self) -> list:
        fmt = self.ring.format
        return [[list(k), fmt(v)] for k, v in sorted(self.comps.items())]

    @classmethod
    def from_json(cls, ring, m: int, grade: int, obj) -> "MultiVector":
        comps = {}
        for item in obj:
            idx, c = item
            comps[tuple(int(i) for i in idx)] = ring.convert(c)
        return cls(ring, m, grade, comps)


def _perm_sign(seq: Sequence[int]) -> int:
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv & 1 else 1


def wedge_mv(a: MultiVector, b: MultiVector) -> MultiVector:
    """Exterior product ``a ^ b``."""
    a._check(b)
    grade = a.grade + b.grade
    if grade > a.m:
        return MultiVector(a.ring, a.m, min(grade, a.m))
    acc = {}
    for i, x in a.comps.items():
        for j, y in b.comps.items():
            s = merge_sign(i, j)
            if s:
                k = tuple(sorted(i + j))
                t = x * y if s > 0 else -(x * y)
                acc[k] = acc[k] + t if k in acc else t
    return MultiVector._raw(a.ring, a.m, grade, acc)


def wedge_all(vectors: Sequence[MultiVector]) -> MultiVector:
    out = vectors[0]
    for v in vectors[1:]:
        out = wedge_mv(out, v)
    return out


def interior_d(d: Sequence, lam: MultiVector) -> MultiVector:
    """Contraction of ``lam`` by the covector ``d``.

    ``i_d(e_{i_1} ^ ... ^ e_{i_q}) = sum_j (-1)**j d_{i_j} e_{I minus i_j}``
    with ``j`` counted from 0.
    """
    if lam.grade < 1:
        raise UsageError("cannot contract a grade-0 multivector")
    if len(d) != lam.m:
        raise UsageError(f"degree vector has {len(d)} entries, expected {lam.m}")
    ring = lam.ring
    dd = [ring.convert(x) for x in d]
    acc = {}
    for idx, c in lam.comps.items():
        for j, i in enumerate(idx):
            k = idx[:j] + idx[j + 1:]
            t = c * dd[i]
            if j & 1:
                t = -t
            acc[k] = acc[k] + t if k in acc else t
    return MultiVector._raw(ring, lam.m, lam.grade - 1, acc)


def cmd_basis(d: Sequence, ring) -> list[MultiVector]:
    """Basis ``mu_k = d_k e_a - d_a e_k`` (``k != a``) of ``{mu : mu . d = 0}``.

    ``a`` is the first index with ``d_a != 0``; for positive degree vectors
    ``a = 0``.
    """
    dd = [ring.convert(x) for x in d]
    nonzero = [i for i, x in enumerate(dd) if not ring.is_zero(x)]
    if not nonzero:
        raise UsageError("degree vector is zero")
    a = nonzero[0]
    m = len(dd)
    out = []
    for k in range(m):
        if k == a:
            continue
        out.append(MultiVector(ring, m, 1, {(a,): dd[k], (k,): ring.normalize(-dd[a])}))
    return out


def interior_matrix(d: Sequence, q: int, ring) -> SparseMatrix:
    """Matrix of ``i_d : Lambda^q -> Lambda^(q-1)`` on sorted index sets."""
    m = len(d)
    rows = {s: i for i, s in enumerate(combinations(range(m), q - 1))}
    entries = {}
    for j, idx in enumerate(combinations(range(m), q)):
        img = interior_d(d, MultiVector.basis(ring, m, idx))
        for k, c in img.comps.items():
            entries[(rows[k], j)] = c
    return SparseMatrix(ring, len(rows), comb(m, q), entries)


def koszul_dims(d: Sequence, q: int, ring) -> tuple[int, int]:
    """``(dim ker i_d on Lambda^q, dim im i_d from Lambda^(q+1))``."""
    m = len(d)
    if not 1 <= q <= m - 1:
        raise UsageError(f"need 1 <= q <= m-1, got q={q}, m={m}")
    a = interior_matrix(d, q, ring)
    b = interior_matrix(d, q + 1, ring)
    return a.ncols - rank(a), rank(b)


def koszul_check(d: Sequence, q: int, ring) -> bool:
    """Exactness of the Koszul complex of ``d`` at ``Lambda^q``."""
    ker, im = koszul_dims(d, q, ring)
    return ker == im


def is_decomposable2(lam: MultiVector) -> bool:
    if lam.grade != 2:
        raise UsageError("decomposability test is for grade 2")
    return wedge_mv(lam, lam).is_zero()


def grass_tangent_dirs(l1: MultiVector, l2: MultiVector, d: Sequence) -> list[MultiVector]:
    """Spanning set ``{mu ^ l2} + {l1 ^ mu}`` for ``mu`` in ``cmd_basis(d)``.

    The span is the affine cone over the tangent space of the Grassmannian
    of planes in ``{mu : mu . d = 0}`` at ``l1 ^ l2``; it contains ``l1 ^ l2``.
    """
    if l1.grade != 1 or l2.grade != 1:
        raise UsageError("tangent directions need two grade-1 vectors")
    if wedge_mv(l1, l2).is_zero():
        raise UsageError("l1 and l2 are linearly dependent")
    for v in (l1, l2):
        if not interior_d(d, v).is_zero():
            raise UsageError("vector is not orthogonal to the degree vector")
    mus = cmd_basis(d, l1.ring)
    return [wedge_mv(mu, l2) for mu in mus] + [wedge_mv(l1, mu) for mu in mus]


def span_rank(vectors: Sequence[MultiVector]) -> int:
    """Dimension of the span of same-grade multivectors."""
    if not vectors:
        return 0
    ring, m, q = vectors[0].ring, vectors[0].m, vectors[0].grade
    rows = {s: i for i, s in enumerate(combinations(range(m), q))}
    entries = {}
    for j, v in enumerate(vectors):
        for k, c in v.comps.items():
            entries[(rows[k], j)] = c
    return rank(SparseMatrix(ring, len(rows), len(vectors), entries))
