"""Exact scalars, phases and sparse blocks.

Rationals are :class:`fractions.Fraction` throughout; phases are stored as
their exponent ``q`` in ``exp(i*pi*q)`` with ``q`` reduced into ``[0, 2)``.
Data that cannot be kept rational (irrational charges) falls back to
:class:`FloatPhase`, compared with an absolute tolerance of ``1e-12``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import NormConvergenceError, ShapeError

ExactScalar = Fraction
Number = Union[int, Fraction]

FLOAT_PHASE_TOL = 1e-12


def to_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected on purpose: silently converting ``0.1`` would
    smuggle a rounding error into the exact path.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {x!r} ({type(x).__name__}) as an exact rational")


def fraction_str(x: Fraction) -> str:
    """Serialise as ``"p/q"``, always with an explicit denominator."""
    x = to_fraction(x)
    return f"{x.numerator}/{x.denominator}"


# --------------------------------------------------------------------- phases

@dataclass(frozen=True)
class ExactPhase:
    """The unimodular number ``exp(i*pi*q)`` with rational ``q`` mod 2."""

    q: Fraction

    def __post_init__(self):
        q = to_fraction(self.q)
        q = q - 2 * (q // 2)
        object.__setattr__(self, "q", q)

    @classmethod
    def one(cls) -> "ExactPhase":
        return cls(Fraction(0))

    def __mul__(self, other):
        if isinstance(other, ExactPhase):
            return ExactPhase(self.q + other.q)
        if isinstance(other, FloatPhase):
            return other * self
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "ExactPhase":
        return ExactPhase(self.q * k)

    def conj(self) -> "ExactPhase":
        return ExactPhase(-self.q)

    inverse = conj

    def is_one(self) -> bool:
        return self.q == 0

    def is_real(self) -> bool:
        return self.q in (0, 1)

    def to_complex(self) -> complex:
        if self.q == 0:
            return 1 + 0j
        if self.q == 1:
            return -1 + 0j
        if self.q == Fraction(1, 2):
            return 1j
        if self.q == Fraction(3, 2):
            return -1j
        return cmath.exp(1j * math.pi * float(self.q))

    def close_to(self, other, tol: float = FLOAT_PHASE_TOL) -> bool:
        if isinstance(other, ExactPhase):
            return self == other
        return abs(self.to_complex() - other.to_complex()) <= tol

    def __str__(self):
        return f"exp(i*pi*{fraction_str(self.q)})"


@dataclass(frozen=True)
class FloatPhase:
    """Float fallback ``exp(i*pi*t)`` for irrational exponents ``t``."""

    t: float

    def __post_init__(self):
        object.__setattr__(self, "t", math.fmod(float(self.t), 2.0) % 2.0)

    def __mul__(self, other):
        if isinstance(other, (ExactPhase, FloatPhase)):
            t2 = float(other.q) if isinstance(other, ExactPhase) else other.t
            return FloatPhase(self.t + t2)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "FloatPhase":
        return FloatPhase(self.t * k)

    def conj(self) -> "FloatPhase":
        return FloatPhase(-self.t)

    inverse = conj

    def to_complex(self) -> complex:
        return cmath.exp(1j * math.pi * self.t)

    def is_one(self, tol: float = FLOAT_PHASE_TOL) -> bool:
        return abs(self.to_complex() - 1) <= tol

    def close_to(self, other, tol: float = FLOAT_PHASE_TOL) -> bool:
        return abs(self.to_complex() - other.to_complex()) <= tol

    def __str__(self):
        return f"exp(i*pi*{self.t!r})"


Phase = Union[ExactPhase, FloatPhase]


def phase_mul(a: Phase, b: Phase) -> Phase:
    return a * b


def phases_equal(a: Phase, b: Phase) -> bool:
    """Exact comparison when both are exact, tolerance otherwise."""
    if isinstance(a, ExactPhase) and isinstance(b, ExactPhase):
        return a == b
    return a.close_to(b)


def phase_is_one(a: Phase) -> bool:
    return a.is_one()


# ---------------------------------------------------------------- sparse blocks

@dataclass(frozen=True, eq=False)
class SparseBlock:
    """Sparse exact matrix with labelled rows and columns.

    ``entries`` maps ``(i, j)`` index pairs to nonzero Fractions.  Labels
    (``rows``/``cols``) are carried along for bookkeeping but only their
    number matters for arithmetic.
    """

    rows: tuple
    cols: tuple
    entries: Mapping[tuple[int, int], Fraction]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        nr, nc = len(self.rows), len(self.cols)
        clean = {}
        for (i, j), v in self.entries.items():
            if not (0 <= i < nr and 0 <= j < nc):
                raise ShapeError(f"entry ({i}, {j}) outside a {nr}x{nc} block")
            v = to_fraction(v)
            if v:
                clean[(i, j)] = v
        object.__setattr__(self, "entries", clean)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    @classmethod
    def zeros(cls, rows: Sequence, cols: Sequence) -> "SparseBlock":
        return cls(rows, cols, {})

    @classmethod
    def identity(cls, labels: Sequence) -> "SparseBlock":
        return cls(labels, labels, {(i, i): Fraction(1) for i in range(len(labels))})

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[Number]], rows=None, cols=None) -> "SparseBlock":
        data = [list(r) for r in data]
        nr = len(data)
        nc = len(data[0]) if nr else 0
        rows = tuple(range(nr)) if rows is None else rows
        cols = tuple(range(nc)) if cols is None else cols
        ent = {(i, j): to_fraction(v) for i, r in enumerate(data) for j, v in enumerate(r) if v}
        return cls(rows, cols, ent)

    def to_dense(self) -> list[list[Fraction]]:
        nr, nc = self.shape
        out = [[Fraction(0)] * nc for _ in range(nr)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def to_numpy(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for (i, j), v in self.entries.items():
            out[i, j] = float(v)
        return out

    def is_zero(self) -> bool:
        return not self.entries

    def transpose(self) -> "SparseBlock":
        return SparseBlock(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    def scale(self, c: Number) -> "SparseBlock":
        c = to_fraction(c)
        return SparseBlock(self.rows, self.cols, {k: c * v for k, v in self.entries.items()})

    def __add__(self, other: "SparseBlock") -> "SparseBlock":
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        ent = dict(self.entries)
        for k, v in other.entries.items():
            ent[k] = ent.get(k, 0) + v
        return SparseBlock(self.rows, self.cols, ent)

    def __sub__(self, other: "SparseBlock") -> "SparseBlock":
        return self + other.scale(-1)

    def __matmul__(self, other: "SparseBlock") -> "SparseBlock":
        return block_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, SparseBlock):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.shape, frozenset(self.entries.items())))

    def max_abs(self) -> Fraction:
        return max((abs(v) for v in self.entries.values()), default=Fraction(0))


def block_mul(a: SparseBlock, b: SparseBlock) -> SparseBlock:
    """Exact product ``a @ b``."""
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    by_row: dict[int, list[tuple[int, Fraction]]] = {}
    for (k, j), v in b.entries.items():
        by_row.setdefault(k, []).append((j, v))
    out: dict[tuple[int, int], Fraction] = {}
    for (i, k), u in a.entries.items():
        for j, v in by_row.get(k, ()):
            out[(i, j)] = out.get((i, j), 0) + u * v
    return SparseBlock(a.rows, b.cols, out)


# -------------------------------------------------------------------- norms

def operator_norm_upper(a, tol: float = 1e-12, max_squarings: int = 64) -> float:
    """Upper bound on the spectral norm of ``a`` (SparseBlock or ndarray).

    Works on ``M = a^H a`` (or ``a a^H``, whichever is smaller).  Repeated
    squaring is power iteration on the whole space at once: with ``t_j``
    the trace of ``M^(2^j)``,

        (t_{j+1} / t_j) ** 2**-j  <=  lambda_max  <=  t_j ** 2**-j,

    so both ends of the interval are certified (up to float rounding, which
    is covered by a small relative widening).  Iteration stops once the
    interval is relatively narrower than ``tol``.

    Raises
    ------
    NormConvergenceError
        If the interval is still too wide after ``max_squarings`` steps.
    """
    arr = a.to_numpy() if isinstance(a, SparseBlock) else np.asarray(a)
    if arr.size == 0 or not np.any(arr):
        return 0.0
    m = arr.conj().T @ arr if arr.shape[1] <= arr.shape[0] else arr @ arr.conj().T
    m = (m + m.conj().T) / 2
    n = m.shape[0]
    t = float(np.real(np.trace(m)))
    if t <= 0.0:
        return 0.0
    log_t = math.log(t)
    cur = m / t
    for j in range(max_squarings):
        nxt = cur @ cur
        nxt = (nxt + nxt.conj().T) / 2
        t_next = float(np.real(np.trace(nxt)))
        if t_next <= 0.0:
            raise NormConvergenceError("trace underflow while squaring")
        log_next = 2 * log_t + math.log(t_next)
        scale = 2.0 ** -j
        hi = log_t * scale
        lo = (log_next - log_t) * scale
        if hi - lo <= math.log1p(tol):
            slack = 1 + 64 * n * np.finfo(float).eps
            return math.sqrt(math.exp(hi)) * slack
        cur = nxt / t_next
        log_t = log_next
    raise NormConvergenceError(
        f"norm interval did not close to relative width {tol} in {max_squarings} squarings"
    )

