"""Vertex operators of the U(1) current and their modes.

``Y_alpha(z) = c_alpha E^-(alpha, z) E^+(alpha, z) z^{alpha J_0}`` with

    E^{+}(alpha, z) = exp(-sum_{n>0} alpha J_n z^{-n} / n),
    E^{-}(alpha, z) = exp(+sum_{n>0} alpha J_{-n} z^{n} / n),

and ``c_alpha`` the relabelling ``H_beta -> H_{beta+alpha}`` that keeps the
partition.  On ``H_beta`` write ``Y_alpha(z) = sum_s Y_{alpha,s} z^{-s-D}``
with ``D = alpha^2/2``; the coefficient of ``z^p`` in ``E^- E^+`` then
contributes to the mode ``s = -p - alpha*beta - D``.  Internally modes are
addressed by this integer *level shift* ``p``: ``Y_{alpha,s}`` maps level
``l`` to level ``l + p``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import numpy as np

from . import mutations
from .errors import ContractViolationError, GridError, TruncationOverflowError
from .exactlin import SparseBlock, fraction_str, operator_norm_upper, to_fraction
from .fock import FockVector, merge, norm_vector, partitions, remove_part, basis_norm_sq

CACHE_FORMAT_VERSION = 1


# ------------------------------------------------------- exponential factors

def _multiplicities(p) -> dict[int, int]:
    out: dict[int, int] = {}
    for k in p:
        out[k] = out.get(k, 0) + 1
    return out


@lru_cache(maxsize=None)
def eplus_terms(alpha: Fraction, n: int, flipped: bool = False) -> tuple:
    """Coefficient of ``z^{-n}`` in ``E^+``: pairs (annihilator partition, coeff)."""
    sign = 1 if flipped else -1
    out = []
    for mu in partitions(n):
        c = Fraction(1)
        for k, m in _multiplicities(mu).items():
            c *= (sign * alpha / k) ** m / math.factorial(m)
        out.append((mu, c))
    return tuple(out)


@lru_cache(maxsize=None)
def eminus_terms(alpha: Fraction, n: int) -> tuple:
    """Coefficient of ``z^{n}`` in ``E^-``: pairs (creator partition, coeff)."""
    out = []
    for mu in partitions(n):
        c = Fraction(1)
        for k, m in _multiplicities(mu).items():
            c *= (alpha / k) ** m / math.factorial(m)
        out.append((mu, c))
    return tuple(out)


@lru_cache(maxsize=None)
def _eplus_on(alpha: Fraction, p: tuple, flipped: bool) -> tuple:
    # E^+(z) on a basis vector factorises over distinct parts k of
    # multiplicity M:  sum_m binom(M, m) (-alpha)^m z^{-k m} (drop m parts).
    a = alpha if flipped else -alpha
    states = [((), 0, Fraction(1))]  # (removed parts, removed weight, coeff)
    for k, mult in _multiplicities(p).items():
        nxt = []
        for removed, w, c in states:
            for m in range(mult + 1):
                nxt.append((removed + (k,) * m, w + k * m, c * math.comb(mult, m) * a ** m))
        states = nxt
    out = []
    for removed, w, c in states:
        if c:
            rest = p
            for k in removed:
                rest = remove_part(rest, k)
            out.append((w, rest, c))
    return tuple(out)


@lru_cache(maxsize=None)
def _y_on(alpha: Fraction, shift: int, p: tuple, flipped: bool) -> tuple:
    """``sum_b E^-_{b+shift} E^+_b`` applied to one basis vector."""
    acc: dict = {}
    for b, rest, c in _eplus_on(alpha, p, flipped):
        a = b + shift
        if a < 0:
            continue
        for mu, d in eminus_terms(alpha, a):
            q = merge(rest, mu)
            acc[q] = acc.get(q, 0) + c * d
    return tuple((q, v) for q, v in acc.items() if v)


def _flipped() -> bool:
    return mutations.is_on(mutations.EPLUS_SIGN)


def charge_shift(alpha: Fraction, beta: Fraction) -> Fraction:
    """Target charge of ``c_alpha`` on ``H_beta``."""
    out = alpha + beta
    if mutations.is_on(mutations.CALPHA_OFFSET):
        out += 1
    return out


# ----------------------------------------------------------------- mode data

def conformal_dimension(alpha) -> Fraction:
    alpha = to_fraction(alpha)
    return alpha * alpha / 2


def grid_offset(alpha, beta) -> Fraction:
    """Representative in [0, 1) of the legal mode grid ``Z - alpha*beta - D``."""
    alpha, beta = to_fraction(alpha), to_fraction(beta)
    off = -alpha * beta - conformal_dimension(alpha)
    return off - math.floor(off)


def level_shift(alpha, s, beta) -> int:
    """Integer ``p`` with ``Y_{alpha,s}``: level ``l`` -> ``l + p`` on ``H_beta``."""
    alpha, s, beta = to_fraction(alpha), to_fraction(s), to_fraction(beta)
    p = -s - alpha * beta - conformal_dimension(alpha)
    if p.denominator != 1:
        raise GridError(
            f"s={s} is off the grid Z + {grid_offset(alpha, beta)} for alpha={alpha} on H_{beta}"
        )
    return int(p)


def mode_index(alpha, shift: int, beta) -> Fraction:
    alpha, beta = to_fraction(alpha), to_fraction(beta)
    return -shift - alpha * beta - conformal_dimension(alpha)


def apply_vertex_shift(alpha, shift: int, v: FockVector) -> FockVector:
    """The mode of ``Y_alpha`` raising the level by ``shift`` on ``v``."""
    alpha = to_fraction(alpha)
    flipped = _flipped()
    acc: dict = {}
    for p, c in v.items():
        for q, a in _y_on(alpha, shift, p, flipped):
            acc[q] = acc.get(q, 0) + a * c
    return FockVector(charge_shift(alpha, v.charge), acc)


def apply_vertex_mode(alpha, s, v: FockVector) -> FockVector:
    return apply_vertex_shift(alpha, level_shift(alpha, s, v.charge), v)


# --------------------------------------------------------------- tensor states

@dataclass(frozen=True, eq=False)
class TensorVector:
    """Sparse exact vector in a tensor product of Fock modules."""

    charges: tuple
    coeffs: Mapping[tuple, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "charges", tuple(to_fraction(c) for c in self.charges))
        object.__setattr__(self, "coeffs", {k: to_fraction(v) for k, v in self.coeffs.items() if v})

    @classmethod
    def product(cls, *vs: FockVector) -> "TensorVector":
        acc = {(): Fraction(1)}
        for v in vs:
            acc = {k + (p,): a * b for k, a in acc.items() for p, b in v.items()}
        return cls(tuple(v.charge for v in vs), acc)

    def items(self):
        return self.coeffs.items()

    def is_zero(self) -> bool:
        return not self.coeffs

    def max_level(self) -> int:
        return max((sum(map(sum, k)) for k in self.coeffs), default=0)

    def __add__(self, other):
        if self.charges != other.charges:
            raise ValueError("charge mismatch")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return TensorVector(self.charges, out)

    def scale(self, c):
        c = to_fraction(c)
        return TensorVector(self.charges, {k: c * v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + other.scale(-1)

    def __eq__(self, other):
        if not isinstance(other, TensorVector):
            return NotImplemented
        return self.charges == other.charges and self.coeffs == other.coeffs


@lru_cache(maxsize=None)
def tensor_basis(legs: int, level: int) -> tuple:
    """Basis of total weight ``level`` in a ``legs``-fold tensor product."""
    if legs == 1:
        return tuple((p,) for p in partitions(level))
    out = []
    for first in range(level, -1, -1):
        for p in partitions(first):
            for rest in tensor_basis(legs - 1, level - first):
                out.append((p,) + rest)
    return tuple(out)


def _basis(charge, level: int) -> tuple:
    return tensor_basis(len(charge), level) if isinstance(charge, tuple) else partitions(level)


def _norms(charge, level: int) -> np.ndarray:
    if not isinstance(charge, tuple):
        return norm_vector(level)
    return np.sqrt([
        math.prod(float(basis_norm_sq(p)) for p in key) for key in tensor_basis(len(charge), level)
    ])


# ----------------------------------------------------------------- ModeMatrix

@dataclass(frozen=True, eq=False)
class ModeMatrix:
    """One graded operator mode restricted to source levels ``<= cutoff``.

    ``blocks[l]`` is the exact block from source level ``l`` to target level
    ``l + shift``.  Charges are rationals for chiral modes and tuples for
    tensor-product modes (levels are then total weights).
    """

    source_charge: object
    target_charge: object
    s: Fraction
    shift: int
    cutoff: int
    blocks: Mapping[int, SparseBlock]
    alpha: object = None

    def block(self, level: int) -> SparseBlock:
        if level > self.cutoff:
            raise TruncationOverflowError(f"source level {level} beyond cutoff {self.cutoff}")
        if level in self.blocks:
            return self.blocks[level]
        return SparseBlock.zeros(_basis(self.target_charge, level + self.shift), _basis(self.source_charge, level))

    def source_degree(self, level: int) -> Fraction:
        c = self.source_charge
        sq = sum(x * x for x in c) if isinstance(c, tuple) else c * c
        return sq / 2 + level

    def target_degree(self, level: int) -> Fraction:
        c = self.target_charge
        sq = sum(x * x for x in c) if isinstance(c, tuple) else c * c
        return sq / 2 + level + self.shift

    def apply(self, v):
        """Apply to a FockVector (chiral) or TensorVector (tensor) exactly."""
        if v.max_level() > self.cutoff:
            raise TruncationOverflowError(f"vector reaches level {v.max_level()} > cutoff {self.cutoff}")
        key_level = (lambda k: sum(map(sum, k))) if isinstance(self.source_charge, tuple) else sum
        acc: dict = {}
        for key, c in v.items():
            level = key_level(key)
            blk = self.block(level)
            j = _basis(self.source_charge, level).index(key)
            for (i, jj), a in blk.entries.items():
                if jj == j:
                    k = blk.rows[i]
                    acc[k] = acc.get(k, 0) + a * c
        if isinstance(self.target_charge, tuple):
            return TensorVector(self.target_charge, acc)
        return FockVector(self.target_charge, acc)

    def orthonormal_block(self, level: int) -> np.ndarray:
        blk = self.block(level)
        m = blk.to_numpy()
        if m.size == 0:
            return m
        return _norms(self.target_charge, level + self.shift)[:, None] * m / _norms(self.source_charge, level)[None, :]

    def norm_upper(self, tol: float = 1e-12) -> float:
        """Norm of the truncated mode in the canonical inner product."""
        return max((operator_norm_upper(self.orthonormal_block(l), tol) for l in self.blocks), default=0.0)

    def is_zero(self) -> bool:
        return all(b.is_zero() for b in self.blocks.values())

    # ---- serialisation (chiral modes only)

    def to_json(self) -> dict:
        def part_list(labels):
            return [list(p) for p in labels]

        return {
            "version": CACHE_FORMAT_VERSION,
            "alpha": fraction_str(self.alpha),
            "s": fraction_str(self.s),
            "beta": fraction_str(self.source_charge),
            "cutoff": self.cutoff,
            "blocks": [
                {
                    "src_level": level,
                    "tgt_level": level + self.shift,
                    "rows": part_list(b.rows),
                    "cols": part_list(b.cols),
                    "entries": [[i, j, fraction_str(v)] for (i, j), v in sorted(b.entries.items())],
                }
                for level, b in sorted(self.blocks.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ModeMatrix":
        if data.get("version") != CACHE_FORMAT_VERSION:
            raise ValueError(f"cache format version {data.get('version')} != {CACHE_FORMAT_VERSION}")
        alpha, s, beta = (to_fraction(data[k]) for k in ("alpha", "s", "beta"))
        shift = level_shift(alpha, s, beta)
        blocks = {}
        for b in data["blocks"]:
            if b["tgt_level"] - b["src_level"] != shift:
                raise ValueError("block levels inconsistent with the mode index")
            rows = [tuple(r) for r in b["rows"]]
            cols = [tuple(c) for c in b["cols"]]
            if rows != list(partitions(b["tgt_level"])) or cols != list(partitions(b["src_level"])):
                raise ValueError("block basis does not match the canonical ordering")
            blocks[b["src_level"]] = SparseBlock(rows, cols, {(i, j): to_fraction(v) for i, j, v in b["entries"]})
        return cls(beta, alpha + beta, s, shift, int(data["cutoff"]), blocks, alpha)

    def content_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, ModeMatrix):
            return NotImplemented
        return (
            self.source_charge == other.source_charge
            and self.target_charge == other.target_charge
            and self.s == other.s
            and self.cutoff == other.cutoff
            and {k: b for k, b in self.blocks.items() if not b.is_zero()}
            == {k: b for k, b in other.blocks.items() if not b.is_zero()}
        )


def _blocks_from_action(src_charge, shift: int, cutoff: int, action, tgt_charge) -> dict:
    blocks = {}
    for level in range(cutoff + 1):
        tgt_level = level + shift
        if tgt_level < 0:
            continue
        rows = _basis(tgt_charge, tgt_level)
        cols = _basis(src_charge, level)
        ridx = {k: i for i, k in enumerate(rows)}
        ent = {}
        for j, key in enumerate(cols):
            for k, a in action(key):
                ent[(ridx[k], j)] = ent.get((ridx[k], j), 0) + a
        blocks[level] = SparseBlock(rows, cols, ent)
    return blocks


def eplus_mode(alpha, n: int, cutoff: int, charge=0) -> ModeMatrix:
    """``E^+_n`` (coefficient of ``z^{-n}``), lowering the level by ``n``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    alpha, charge = to_fraction(alpha), to_fraction(charge)
    flipped = _flipped()

    def action(p):
        return [(rest, c) for b, rest, c in _eplus_on(alpha, p, flipped) if b == n]

    return ModeMatrix(charge, charge, Fraction(n), -n, cutoff, _blocks_from_action(charge, -n, cutoff, action, charge))


def eminus_mode(alpha, n: int, cutoff: int, charge=0) -> ModeMatrix:
    """``E^-_n`` (coefficient of ``z^{n}``), raising the level by ``n``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    alpha, charge = to_fraction(alpha), to_fraction(charge)
    terms = eminus_terms(alpha, n)

    def action(p):
        return [(merge(p, mu), c) for mu, c in terms]

    return ModeMatrix(charge, charge, Fraction(-n), n, cutoff, _blocks_from_action(charge, n, cutoff, action, charge))


def vertex_mode(alpha, s, beta, cutoff: int) -> ModeMatrix:
    """The mode ``Y_{alpha,s}: H_beta -> H_{alpha+beta}`` on source levels ``<= cutoff``.

    Raises
    ------
    GridError
        If ``s`` is not in ``Z - alpha*beta - alpha^2/2``.
    """
    alpha, s, beta = to_fraction(alpha), to_fraction(s), to_fraction(beta)
    if cutoff < 0:
        raise TruncationOverflowError("cutoff must be non-negative")
    shift = level_shift(alpha, s, beta)
    flipped = _flipped()
    target = charge_shift(alpha, beta)

    def action(p):
        return _y_on(alpha, shift, p, flipped)

    return ModeMatrix(beta, target, s, shift, cutoff, _blocks_from_action(beta, shift, cutoff, action, target), alpha)


# ------------------------------------------------------------- formal series

@dataclass(frozen=True)
class VertexSeries:
    """Handle for the formal series ``Y_alpha(z)`` on one tensor leg.

    ``label`` stands for the index set of field multiplets, a single
    element for the U(1) current; it carries no further meaning.
    ``VertexSeries(0)`` is the identity series.
    """

    alpha: Fraction
    leg: int = 0
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", to_fraction(self.alpha))

    @property
    def dimension(self) -> Fraction:
        return conformal_dimension(self.alpha)

    def grid_offset(self, beta) -> Fraction:
        return grid_offset(self.alpha, beta)

    def target_charge(self, beta) -> Fraction:
        return charge_shift(self.alpha, to_fraction(beta))

    def shift_of(self, s, beta) -> int:
        return level_shift(self.alpha, s, beta)

    def index_of(self, shift: int, beta) -> Fraction:
        return mode_index(self.alpha, shift, beta)

    def apply_shift(self, shift: int, v: FockVector) -> FockVector:
        return apply_vertex_shift(self.alpha, shift, v)

    def apply(self, s, v: FockVector) -> FockVector:
        return apply_vertex_mode(self.alpha, s, v)

    def mode(self, s, beta, cutoff: int) -> ModeMatrix:
        return vertex_mode(self.alpha, s, beta, cutoff)

    def on_leg(self, leg: int) -> "VertexSeries":
        return replace(self, leg=leg)


def identity_series(leg: int = 0) -> VertexSeries:
    return VertexSeries(Fraction(0), leg)


def normal_product_mode(a: VertexSeries, b: VertexSeries, s, cutoff: int, source_charges=(0, 0)) -> ModeMatrix:
    """Mode ``C_s = sum_t A_{s-t} (x) B_t`` of two series on distinct legs.

    On a source vector of total level ``L`` only the finitely many ``t``
    with both factors nonzero contribute, so the sum is exact.
    """
    if a.leg == b.leg:
        raise ContractViolationError(f"both series act on leg {a.leg}; a normal product needs distinct legs")
    if sorted((a.leg, b.leg)) != [0, 1]:
        raise ContractViolationError("normal products are formed on legs 0 and 1")
    s = to_fraction(s)
    src = tuple(to_fraction(c) for c in source_charges)
    first, second = (a, b) if a.leg == 0 else (b, a)
    tgt = (first.target_charge(src[0]), second.target_charge(src[1]))
    total = -s - sum(x.alpha * c + x.dimension for x, c in zip((first, second), src))
    if total.denominator != 1:
        raise GridError(f"s={s} is off the grid of the normal product")
    total = int(total)
    flipped = _flipped()

    def action(key):
        p1, p2 = key
        l1, l2 = sum(p1), sum(p2)
        out = []
        # shift on leg b ranges so that both factors can be nonzero
        b_pos = 0 if b is first else 1
        lb, la = (l1, l2) if b_pos == 0 else (l2, l1)
        for sb in range(-lb, total + la + 1):
            sa = total - sb
            s1, s2 = (sb, sa) if b_pos == 0 else (sa, sb)
            img1 = _y_on(first.alpha, s1, p1, flipped)
            if not img1:
                continue
            img2 = _y_on(second.alpha, s2, p2, flipped)
            for q1, c1 in img1:
                for q2, c2 in img2:
                    out.append(((q1, q2), c1 * c2))
        return out

    return ModeMatrix(src, tgt, s, total, cutoff, _blocks_from_action(src, total, cutoff, action, tgt))


def two_point_coeffs(alpha, n_max: int) -> list[Fraction]:
    """Coefficients of ``(z/w)^n w^{-alpha^2}`` in ``<Omega, Y_{-alpha}(w) Y_alpha(z) Omega>``."""
    alpha = to_fraction(alpha)
    out = []
    vac = FockVector.vacuum(0)
    for n in range(n_max + 1):
        mid = apply_vertex_shift(alpha, n, vac)
        back = apply_vertex_shift(-alpha, -n, mid)
        out.append(back.coeff(()) if back.charge == 0 else Fraction(0))
    return out


def conjugation_factor(alpha) -> Fraction:
    """Ratio fixing the adjoint convention ``Y_{alpha,s}^* = c Y_{-alpha,-s}``.

    Determined from ``<Y_{alpha,-D} Omega_0, Omega_alpha>`` against
    ``<Omega_0, Y_{-alpha,D} Omega_alpha>``.
    """
    alpha = to_fraction(alpha)
    d = conformal_dimension(alpha)
    lhs = apply_vertex_mode(alpha, -d, FockVector.vacuum(0)).coeff(())
    rhs = apply_vertex_mode(-alpha, d, FockVector.vacuum(alpha)).coeff(())
    return lhs / rhs

