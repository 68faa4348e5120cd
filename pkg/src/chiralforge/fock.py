"""Charged Fock modules of the Heisenberg algebra.

The module of charge ``alpha`` has the basis ``J_{-l1} ... J_{-lk} Omega``
indexed by partitions ``l = (l1 >= ... >= lk >= 1)``.  Basis vectors are
*not* normalised; the inner product (with ``J_n^* = J_{-n}``) is diagonal
in this basis and is computed by moving annihilators through creators.

Currents act by

* ``J_{-n}`` (n > 0): append the part ``n``;
* ``J_n`` (n > 0): remove one part ``n``, times ``n * multiplicity``;
* ``J_0``: multiplication by the charge.

The Virasoro generators are the Sugawara bilinears with central charge 1.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import mutations
from .errors import TruncationOverflowError
from .exactlin import SparseBlock, to_fraction

Partition = tuple  # weakly decreasing tuple of positive ints


class ChargeMismatchWarning(UserWarning):
    """Inner product requested between different charge sectors."""


# ------------------------------------------------------------------ partitions

@lru_cache(maxsize=None)
def partitions(n: int, max_part: int | None = None) -> tuple[Partition, ...]:
    """All partitions of ``n`` in reverse-lexicographic order.

    >>> partitions(3)
    ((3,), (2, 1), (1, 1, 1))
    """
    if n < 0:
        return ()
    if n == 0:
        return ((),)
    top = n if max_part is None else min(n, max_part)
    out = []
    for first in range(top, 0, -1):
        for rest in partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


def partition_count(n: int) -> int:
    return len(partitions(n))


def is_partition(p) -> bool:
    return (
        isinstance(p, tuple)
        and all(isinstance(x, int) and x >= 1 for x in p)
        and all(p[i] >= p[i + 1] for i in range(len(p) - 1))
    )


def add_part(p: Partition, k: int) -> Partition:
    i = 0
    while i < len(p) and p[i] >= k:
        i += 1
    return p[:i] + (k,) + p[i:]


def remove_part(p: Partition, k: int) -> Partition:
    i = p.index(k)
    return p[:i] + p[i + 1:]


def merge(p: Partition, q: Partition) -> Partition:
    """Multiset union of two partitions."""
    return tuple(sorted(p + q, reverse=True))


# --------------------------------------------------------------------- vectors

@dataclass(frozen=True, eq=False)
class FockVector:
    """Sparse exact vector in the charge-``charge`` Fock module."""

    charge: Fraction
    coeffs: Mapping[Partition, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "charge", to_fraction(self.charge))
        clean = {}
        for p, c in self.coeffs.items():
            c = to_fraction(c)
            if c:
                clean[tuple(p)] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def vacuum(cls, charge=0) -> "FockVector":
        return cls(charge, {(): Fraction(1)})

    @classmethod
    def basis(cls, charge, p: Partition) -> "FockVector":
        return cls(charge, {tuple(p): Fraction(1)})

    @classmethod
    def zero(cls, charge=0) -> "FockVector":
        return cls(charge, {})

    def is_zero(self) -> bool:
        return not self.coeffs

    def levels(self) -> set[int]:
        return {sum(p) for p in self.coeffs}

    def max_level(self) -> int:
        return max((sum(p) for p in self.coeffs), default=0)

    def coeff(self, p: Partition) -> Fraction:
        return self.coeffs.get(tuple(p), Fraction(0))

    def items(self):
        return self.coeffs.items()

    def _check(self, other: "FockVector"):
        if self.charge != other.charge:
            raise ValueError(f"charge mismatch {self.charge} vs {other.charge}")

    def __add__(self, other: "FockVector") -> "FockVector":
        self._check(other)
        out = dict(self.coeffs)
        for p, c in other.coeffs.items():
            out[p] = out.get(p, 0) + c
        return FockVector(self.charge, out)

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + other.scale(-1)

    def scale(self, c) -> "FockVector":
        c = to_fraction(c)
        return FockVector(self.charge, {p: c * v for p, v in self.coeffs.items()})

    def __rmul__(self, c) -> "FockVector":
        return self.scale(c)

    def __neg__(self) -> "FockVector":
        return self.scale(-1)

    def __eq__(self, other):
        if not isinstance(other, FockVector):
            return NotImplemented
        return self.charge == other.charge and self.coeffs == other.coeffs

    def __repr__(self):
        terms = ", ".join(f"{p}: {c}" for p, c in sorted(self.coeffs.items()))
        return f"FockVector(charge={self.charge}, {{{terms}}})"


def combine(charge, terms: Iterable[tuple[Partition, Fraction]]) -> FockVector:
    out: dict = {}
    for p, c in terms:
        out[p] = out.get(p, 0) + c
    return FockVector(charge, out)


# ------------------------------------------------------------------ truncation

@dataclass(frozen=True)
class FockTruncation:
    """The charge-``charge`` module cut off at partition weight ``max_level``."""

    charge: Fraction
    max_level: int

    def __post_init__(self):
        object.__setattr__(self, "charge", to_fraction(self.charge))
        if self.max_level < 0:
            raise ValueError("max_level must be non-negative")

    def basis(self, level: int) -> tuple[Partition, ...]:
        if level < 0 or level > self.max_level:
            return ()
        return partitions(level)

    def all_basis(self) -> list[Partition]:
        return [p for n in range(self.max_level + 1) for p in partitions(n)]

    @property
    def dim(self) -> int:
        return sum(partition_count(n) for n in range(self.max_level + 1))

    def contains(self, v: FockVector) -> bool:
        return v.charge == self.charge and v.max_level() <= self.max_level

    def degree(self, level: int) -> Fraction:
        return self.charge * self.charge / 2 + level


@lru_cache(maxsize=None)
def level_index(level: int) -> dict:
    return {p: i for i, p in enumerate(partitions(level))}


# -------------------------------------------------------------------- currents

@lru_cache(maxsize=None)
def _j_on(n: int, charge: Fraction, p: Partition) -> tuple:
    if n < 0:
        return ((add_part(p, -n), Fraction(1)),)
    if n == 0:
        return ((p, charge),) if charge else ()
    mult = p.count(n)
    if not mult:
        return ()
    return ((remove_part(p, n), Fraction(n * mult)),)


def apply_j(n: int, v: FockVector) -> FockVector:
    """Apply the current mode ``J_n`` exactly."""
    terms = []
    for p, c in v.items():
        for q, a in _j_on(n, v.charge, p):
            terms.append((q, a * c))
    return combine(v.charge, terms)


def _j_on_terms(n: int, charge: Fraction, terms: Iterable[tuple[Partition, Fraction]]):
    for p, c in terms:
        for q, a in _j_on(n, charge, p):
            yield q, a * c


@lru_cache(maxsize=None)
def _l_on(n: int, charge: Fraction, p: Partition, drop_shift: bool) -> tuple:
    # L_n = sum_{b > n/2} J_{n-b} J_b + [n even] J_{n/2}^2 / 2, every
    # product already normal ordered (the larger index acts first).
    level = sum(p)
    acc: dict = {}

    def add(terms, weight):
        for q, a in terms:
            acc[q] = acc.get(q, 0) + weight * a

    for b in range(n // 2 + 1, level + 1):
        add(_j_on_terms(n - b, charge, _j_on(b, charge, p)), Fraction(1))
    if n % 2 == 0 and not (n == 0 and drop_shift):
        h = n // 2
        add(_j_on_terms(h, charge, _j_on(h, charge, p)), Fraction(1, 2))
    return tuple((q, a) for q, a in acc.items() if a)


def apply_l(n: int, v: FockVector, cutoff: FockTruncation) -> FockVector:
    """Apply the Sugawara generator ``L_n`` exactly.

    Raises
    ------
    TruncationOverflowError
        If the input is not inside ``cutoff`` or a nonzero component of the
        result lies above ``cutoff.max_level``.
    """
    if v.charge != cutoff.charge:
        raise ValueError(f"vector charge {v.charge} differs from truncation charge {cutoff.charge}")
    if v.max_level() > cutoff.max_level:
        raise TruncationOverflowError(f"input reaches level {v.max_level()} > cutoff {cutoff.max_level}")
    drop = mutations.is_on(mutations.SUGAWARA_SHIFT)
    terms = []
    for p, c in v.items():
        for q, a in _l_on(n, v.charge, p, drop):
            terms.append((q, a * c))
    out = combine(v.charge, terms)
    if out.max_level() > cutoff.max_level:
        raise TruncationOverflowError(
            f"L_{n} produces level {out.max_level()} beyond cutoff {cutoff.max_level}"
        )
    return out


def sugawara_degree(charge, p: Partition) -> Fraction:
    """``L_0`` eigenvalue of a basis vector, read off the Sugawara action."""
    charge = to_fraction(charge)
    drop = mutations.is_on(mutations.SUGAWARA_SHIFT)
    terms = dict(_l_on(0, charge, tuple(p), drop))
    return terms.get(tuple(p), Fraction(0))


# ---------------------------------------------------------------- inner product

@lru_cache(maxsize=None)
def _basis_inner(p: Partition, q: Partition) -> Fraction:
    if sum(p) != sum(q):
        return Fraction(0)
    # <J_{-p1}..J_{-pk} Omega, w> = <Omega, J_{pk}..J_{p1} w>
    terms = [(q, Fraction(1))]
    for k in p:
        acc: dict = {}
        for r, a in _j_on_terms(k, Fraction(0), terms):
            acc[r] = acc.get(r, 0) + a
        terms = [(r, a) for r, a in acc.items() if a]
        if not terms:
            return Fraction(0)
    return sum((a for r, a in terms if r == ()), Fraction(0))


def basis_norm_sq(p: Partition) -> Fraction:
    return _basis_inner(tuple(p), tuple(p))


def inner(v: FockVector, w: FockVector) -> Fraction:
    """Canonical inner product; all coefficients are real rationals.

    Vectors in different charge sectors are orthogonal; a
    :class:`ChargeMismatchWarning` flags that this convention was used.
    """
    if v.charge != w.charge:
        warnings.warn(
            f"inner product across charges {v.charge} and {w.charge}; returning 0",
            ChargeMismatchWarning,
            stacklevel=2,
        )
        return Fraction(0)
    total = Fraction(0)
    for p, a in v.items():
        for q, b in w.items():
            if sum(p) == sum(q):
                total += a * b * _basis_inner(p, q)
    return total


def gram(alpha, level: int) -> SparseBlock:
    """Gram matrix of the level-``level`` basis (independent of the charge)."""
    alpha = to_fraction(alpha)
    basis = partitions(level)
    ent = {}
    for i, p in enumerate(basis):
        for j, q in enumerate(basis):
            ent[(i, j)] = inner(FockVector.basis(alpha, p), FockVector.basis(alpha, q))
    return SparseBlock(basis, basis, ent)


@lru_cache(maxsize=None)
def norm_vector(level: int) -> np.ndarray:
    """Float norms of the level basis, used to pass to orthonormal frames."""
    return np.sqrt([float(basis_norm_sq(p)) for p in partitions(level)])


# -------------------------------------------------------------- block matrices

def j_block(n: int, charge, level: int) -> SparseBlock:
    """Matrix of ``J_n`` from ``level`` to ``level - n``."""
    charge = to_fraction(charge)
    src, tgt = partitions(level), partitions(level - n)
    idx = level_index(level - n) if tgt else {}
    ent = {}
    for j, p in enumerate(src):
        for q, a in _j_on(n, charge, p):
            ent[(idx[q], j)] = ent.get((idx[q], j), 0) + a
    return SparseBlock(tgt, src, ent)


def l_block(n: int, charge, level: int) -> SparseBlock:
    """Matrix of ``L_n`` from ``level`` to ``level - n``."""
    charge = to_fraction(charge)
    drop = mutations.is_on(mutations.SUGAWARA_SHIFT)
    src, tgt = partitions(level), partitions(level - n)
    idx = level_index(level - n) if tgt else {}
    ent = {}
    for j, p in enumerate(src):
        for q, a in _l_on(n, charge, p, drop):
            ent[(idx[q], j)] = ent.get((idx[q], j), 0) + a
    return SparseBlock(tgt, src, ent)


def orthonormal(block: SparseBlock, src_level: int, tgt_level: int) -> np.ndarray:
    """Float matrix of a level-to-level block in normalised bases."""
    m = block.to_numpy()
    if m.size == 0:
        return m
    return norm_vector(tgt_level)[:, None] * m / norm_vector(src_level)[None, :]


def iter_basis(charges: Iterable, max_level: int) -> Iterator[FockVector]:
    for a in charges:
        for n in range(max_level + 1):
            for p in partitions(n):
                yield FockVector.basis(a, p)
