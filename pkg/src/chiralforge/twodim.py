"""Two-dimensional fields ``Y_{alpha_L(h)} (x) Y_{alpha_R(h)}`` on the diagonal sum.

The diagonal Hilbert space is ``sum_g H_{L(g)} (x) H_{R(g)}``; a 2d field of
charge ``h`` shifts both legs at once, so it maps the ``g`` summand into the
``g + h`` summand.  Locality is verified exactly on formal coefficients;
smeared commutators are a floating-point diagnostic.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ContractViolationError, MissingEnergyBoundError, SpecError, SpinError
from .exactlin import ExactPhase, to_fraction
from .fock import FockVector, iter_basis, partitions
from .props import ENERGY_FITS, VerificationReport, braiding_tables, smear_chiral
from .sectors import AbelianGroup, SectorSpec, integers
from .testfunctions import TestFunction, spacelike
from .vertex import ModeMatrix, VertexSeries, _blocks_from_action, _flipped, _y_on, charge_shift, level_shift

__all__ = [
    "TwoDimField", "TestFunction", "build_2d_mode", "check_2d_locality", "smear_2d",
    "Smeared2d", "commutator_decay", "ConfigurationWarning",
]


class ConfigurationWarning(UserWarning):
    """Test-function supports are not spacelike separated."""


@dataclass(frozen=True)
class TwoDimField:
    """The 2d field of group element ``h``.

    ``left`` and ``right`` map group elements to U(1) charges; the field's own
    charges are ``left(h)`` and ``right(h)``.  Construction fails with
    :class:`SpinError` unless ``D_L - D_R`` is an integer.
    """

    h: tuple
    group: AbelianGroup
    left: Callable
    right: Callable

    def __post_init__(self):
        object.__setattr__(self, "h", self.group.element(self.h))
        if (self.dim_left - self.dim_right).denominator != 1:
            raise SpinError(f"spin D_L - D_R = {self.dim_left - self.dim_right} is not an integer")

    @classmethod
    def u1(cls, alpha, h: int = 1, conjugate: bool = True) -> "TwoDimField":
        """``G = Z`` with ``L(n) = sigma_{n alpha}`` and ``R(n) = sigma_{-+ n alpha}``."""
        alpha = to_fraction(alpha)
        sign = -1 if conjugate else 1
        return cls((h,), integers(), lambda g: alpha * g[0], lambda g: sign * alpha * g[0])

    @classmethod
    def from_specs(cls, spec_left: SectorSpec, spec_right: SectorSpec, h) -> "TwoDimField":
        if spec_left.group != spec_right.group:
            raise SpecError("left and right sector data do not share the same group")
        maps = []
        for spec in (spec_left, spec_right):
            if len(spec.kappas) != 1:
                raise SpecError("2d fields need exactly one chiral index per side")
            kappa = spec.kappas[0]

            def charge(g, kappa=kappa):
                c = kappa.charge(g).as_fraction()
                if c is None:
                    raise SpecError("irrational charges have no exact vertex modes")
                return c

            maps.append(charge)
        return cls(h, spec_left.group, maps[0], maps[1])

    @property
    def alpha_left(self) -> Fraction:
        return to_fraction(self.left(self.h))

    @property
    def alpha_right(self) -> Fraction:
        return to_fraction(self.right(self.h))

    @property
    def dim_left(self) -> Fraction:
        return self.alpha_left ** 2 / 2

    @property
    def dim_right(self) -> Fraction:
        return self.alpha_right ** 2 / 2

    @property
    def spin(self) -> Fraction:
        return self.dim_left - self.dim_right

    @property
    def series(self) -> tuple[VertexSeries, VertexSeries]:
        return VertexSeries(self.alpha_left, 0), VertexSeries(self.alpha_right, 1)

    def sector(self, g) -> tuple[Fraction, Fraction]:
        """Charges ``(L(g), R(g))`` of the diagonal summand ``g``."""
        g = self.group.element(g)
        return to_fraction(self.left(g)), to_fraction(self.right(g))


def build_2d_mode(field: TwoDimField, s_left, s_right, cutoff: int, g=None) -> ModeMatrix:
    """``Y_{alpha_L, s_L} (x) Y_{alpha_R, s_R}`` on the summand ``g`` (default identity).

    Levels of the returned ModeMatrix are total levels of the two legs.
    The target summand is checked to be the diagonal summand ``g + h``.
    """
    G = field.group
    g = G.zero() if g is None else G.element(g)
    src = field.sector(g)
    tgt = (charge_shift(field.alpha_left, src[0]), charge_shift(field.alpha_right, src[1]))
    if tgt != field.sector(G.add(g, field.h)):
        raise ContractViolationError(f"2d mode leaves the diagonal: {tgt} is not the summand of {G.add(g, field.h)}")
    pl = level_shift(field.alpha_left, s_left, src[0])
    pr = level_shift(field.alpha_right, s_right, src[1])
    flipped = _flipped()

    def action(key):
        img_l = _y_on(field.alpha_left, pl, key[0], flipped)
        if not img_l:
            return []
        img_r = _y_on(field.alpha_right, pr, key[1], flipped)
        return [((ql, qr), cl * cr) for ql, cl in img_l for qr, cr in img_r]

    s_total = to_fraction(s_left) + to_fraction(s_right)
    return ModeMatrix(src, tgt, s_total, pl + pr, cutoff, _blocks_from_action(src, pl + pr, cutoff, action, tgt),
                      (field.alpha_left, field.alpha_right))


# --------------------------------------------------------------- locality

def reordering_phase(field_a: TwoDimField, field_b: TwoDimField, pairing: str = "spacelike") -> ExactPhase:
    """Phase picked up by exchanging two 2d fields.

    The left leg contributes ``exp(-i pi aL bL)``.  In the spacelike
    configuration the right variables are ordered the other way, so that
    leg contributes ``exp(+i pi aR bR)``; with ``pairing="same-sign"``
    (timelike configuration) both legs contribute the same orientation.
    """
    left = ExactPhase(-field_a.alpha_left * field_b.alpha_left)
    q_right = field_a.alpha_right * field_b.alpha_right
    right = ExactPhase(q_right if pairing == "spacelike" else -q_right)
    return left * right


def check_2d_locality(field_a: TwoDimField, field_b: TwoDimField, N: int = 3,
                      pairing: str = "spacelike") -> VerificationReport:
    """Coefficient-level locality of two 2d fields at cutoff ``N``.

    Each leg carries the chiral braiding identity, the right leg with the
    roles of the two fields swapped.  The combined reordering phase must be
    exactly 1; then the products of the two legs' coefficient tables are
    compared on every diagonal source ``g in {0, h_a, h_b, h_a + h_b}``.
    """
    if pairing not in ("spacelike", "same-sign"):
        raise ValueError("pairing must be 'spacelike' or 'same-sign'")
    start = time.perf_counter()
    if field_a.group != field_b.group:
        raise SpecError("fields live on different groups")
    phase = reordering_phase(field_a, field_b, pairing)
    G = field_a.group
    aL, aR = field_a.alpha_left, field_a.alpha_right
    bL, bR = field_b.alpha_left, field_b.alpha_right
    sources = []
    for g in (G.zero(), field_a.h, field_b.h, G.add(field_a.h, field_b.h)):
        if g not in sources:
            sources.append(g)
    left_cache: dict = {}
    right_cache: dict = {}
    worst, count = Fraction(0), 0
    for g in sources:
        cl, cr = field_a.sector(g)
        for vl in iter_basis([cl], N):
            kl = (cl, next(iter(vl.coeffs)))
            if kl not in left_cache:
                left_cache[kl] = braiding_tables(aL, bL, vl, N)[:2]
            lhs_l, rhs_l = left_cache[kl]
            for vr in iter_basis([cr], N):
                kr = (cr, next(iter(vr.coeffs)))
                if kr not in right_cache:
                    right_cache[kr] = braiding_tables(bR, aR, vr, N)[:2]
                lhs_r, rhs_r = right_cache[kr]
                worst = max(worst, _product_violation(lhs_l, rhs_l, lhs_r, rhs_r))
                count += len(lhs_l.keys() | rhs_l.keys()) * len(lhs_r.keys() | rhs_r.keys())
    status = "pass" if worst == 0 and phase.is_one() else "fail"
    details = {"combined_phase": phase, "coefficient_violation": worst, "pairing": pairing}
    params = {"h_a": field_a.h, "h_b": field_b.h, "charges_a": [aL, aR], "charges_b": [bL, bR], "cutoff": N}
    if not phase.is_one():
        worst = max(worst, Fraction(1))
    return VerificationReport("locality_2d", params, status, worst, count, time.perf_counter() - start, details)


def _product_violation(lhs1: dict, rhs1: dict, lhs2: dict, rhs2: dict) -> Fraction:
    """``max |L1[k1] L2[k2] - R1[k1] R2[k2]|`` over all key pairs.

    Pairs where both legs already agree contribute zero, so only pairs
    with a disagreeing key on at least one leg are visited.
    """
    keys1, keys2 = lhs1.keys() | rhs1.keys(), lhs2.keys() | rhs2.keys()
    bad1 = {k for k in keys1 if lhs1.get(k, 0) != rhs1.get(k, 0)}
    bad2 = {k for k in keys2 if lhs2.get(k, 0) != rhs2.get(k, 0)}
    worst = Fraction(0)
    for k1 in keys1:
        others = keys2 if k1 in bad1 else bad2
        for k2 in others:
            d = abs(lhs1.get(k1, 0) * lhs2.get(k2, 0) - rhs1.get(k1, 0) * rhs2.get(k2, 0))
            worst = max(worst, d)
    return worst


# --------------------------------------------------------------- smearing

@dataclass
class Smeared2d:
    """Truncated smeared 2d field ``A_L (x) A_R`` with a tail bound.

    ``tail_bound`` multiplies ``||(L_0+1)^{p_L} Psi_L|| ||(L_0+1)^{p_R} Psi_R||``
    for product vectors; see :func:`smear_2d`.
    """

    left: object
    right: object
    tail_left: float
    tail_right: float
    head_left: float
    head_right: float
    exponents: tuple

    @property
    def tail_bound(self) -> float:
        return self.tail_left * (self.head_right + self.tail_right) + self.head_left * self.tail_right

    def matrix(self) -> np.ndarray:
        return np.kron(self.left.matrix, self.right.matrix)

    def is_zero(self) -> bool:
        return not np.any(self.left.matrix) or not np.any(self.right.matrix)


def _fit(alpha: Fraction):
    if alpha == 0:
        return None
    try:
        return ENERGY_FITS[alpha]
    except KeyError:
        raise MissingEnergyBoundError(
            f"no fitted energy bound for charge {alpha}; run check_energy_bounds({alpha}) first"
        ) from None


def _leg_bounds(series: VertexSeries, f: TestFunction, charge) -> tuple[float, float, float]:
    """(sum inside window, sum outside window, p) of ``|f_s| C (1+|s|)^r``."""
    fit = _fit(series.alpha)
    if fit is None:  # identity series: only the mode s = 0 survives, with norm 1
        return abs(f.coeff(0)), 0.0, 0.0
    off = series.grid_offset(charge)

    def weight(s):
        return fit.C * (1 + abs(float(s))) ** fit.r

    inside = sum(abs(f.coeff(s)) * weight(s) for s in f.grid_points(off))
    return inside, f.tail_sum(off, weight), fit.p


def smear_2d(field: TwoDimField, f_left: TestFunction, f_right: TestFunction, cutoff: int,
             g=None) -> Smeared2d:
    """``sum f_L(s_L) f_R(s_R) Y_{s_L} (x) Y_{s_R}`` on the summand ``g``.

    The truncated operator factorizes as ``A_L (x) A_R``.  The tail bound
    uses the fitted energy-bound constants of each leg: with
    ``T = sum_{|s|>S} |f_s| C (1+|s|)^r`` and ``S_in`` the same sum inside
    the window, ``||(A - A_trunc) Psi|| <= (T_L (S_R + T_R) + S_L T_R) ||...||``.

    Raises
    ------
    MissingEnergyBoundError
        If :func:`chiralforge.props.check_energy_bounds` has not been run
        for a charge of the field.
    """
    G = field.group
    g = G.zero() if g is None else G.element(g)
    cl, cr = field.sector(g)
    ser_l, ser_r = field.series
    head_l, tail_l, p_l = _leg_bounds(ser_l, f_left, cl)
    head_r, tail_r, p_r = _leg_bounds(ser_r, f_right, cr)
    left = smear_chiral(ser_l, f_left, cutoff, [cl])
    right = smear_chiral(ser_r, f_right, cutoff, [cr])
    return Smeared2d(left, right, tail_l, tail_r, head_l, head_r, (p_l, p_r))


# ----------------------------------------------------------- commutators

def _vacuum_chain(series_outer: VertexSeries, f_outer: TestFunction, series_inner: VertexSeries,
                  f_inner: TestFunction, charge, N: int) -> tuple[np.ndarray, list]:
    """``A_outer A_inner Omega_charge`` with every intermediate level ``<= N``."""
    inner = smear_chiral(series_inner, f_inner, N, [charge])
    vac = np.zeros(inner.matrix.shape[1], dtype=complex)
    vac[inner.src_labels.index((to_fraction(charge), ()))] = 1.0
    mid_full = inner.matrix @ vac
    mid_charge = series_inner.target_charge(charge)
    outer = smear_chiral(series_outer, f_outer, N, [mid_charge])
    pos = {lab: i for i, lab in enumerate(outer.src_labels)}
    mid = np.zeros(outer.matrix.shape[1], dtype=complex)
    for i, lab in enumerate(inner.tgt_labels):
        if lab in pos:  # drops components above level N
            mid[pos[lab]] = mid_full[i]
    out = outer.matrix @ mid
    keep = [i for i, (_, p) in enumerate(outer.tgt_labels) if sum(p) <= N]
    return out[keep], [outer.tgt_labels[i] for i in keep]


def _align(x: np.ndarray, xl: list, y: np.ndarray, yl: list) -> tuple[np.ndarray, np.ndarray]:
    labels = sorted(set(xl) | set(yl), key=lambda t: (t[0], sum(t[1]), t[1]))
    idx = {lab: i for i, lab in enumerate(labels)}
    a = np.zeros(len(labels), dtype=complex)
    b = np.zeros(len(labels), dtype=complex)
    for v, lab in zip(x, xl):
        a[idx[lab]] += v
    for v, lab in zip(y, yl):
        b[idx[lab]] += v
    return a, b


def commutator_norm(field_a: TwoDimField, field_b: TwoDimField, fl_a: TestFunction, fr_a: TestFunction,
                    fl_b: TestFunction, fr_b: TestFunction, N: int) -> float:
    """``||[A, B] Omega||`` for product-smeared 2d fields on the truncated vacuum summand."""
    al, ar = field_a.series
    bl, br = field_b.series
    # A B Omega = (A_L B_L Omega) (x) (A_R B_R Omega), and likewise for B A
    ab_l, ab_ll = _vacuum_chain(al, fl_a, bl, fl_b, 0, N)
    ba_l, ba_ll = _vacuum_chain(bl, fl_b, al, fl_a, 0, N)
    ab_r, ab_rl = _vacuum_chain(ar, fr_a, br, fr_b, 0, N)
    ba_r, ba_rl = _vacuum_chain(br, fr_b, ar, fr_a, 0, N)
    x, u = _align(ab_l, ab_ll, ba_l, ba_ll)
    y, v = _align(ab_r, ab_rl, ba_r, ba_rl)
    # ||x(x)y - u(x)v||^2 expanded through inner products of the legs
    sq = (np.vdot(x, x) * np.vdot(y, y) + np.vdot(u, u) * np.vdot(v, v)
          - 2 * (np.vdot(x, u) * np.vdot(y, v)).real)
    return math.sqrt(max(sq.real, 0.0))


def commutator_decay(field_a: TwoDimField, field_b: TwoDimField, fl_a: TestFunction, fr_a: TestFunction,
                     fl_b: TestFunction, fr_b: TestFunction, cutoffs: Sequence[int]) -> dict:
    """Table ``{cutoff: ||[A, B] Omega||}`` with a spacelike flag.

    Spacelike means the left centres are ordered one way and the right
    centres the other way.  Other configurations still run but emit a
    :class:`ConfigurationWarning`.
    """
    is_spacelike = spacelike(fl_a.center, fl_b.center, fr_a.center, fr_b.center)
    if not is_spacelike:
        warnings.warn("test functions are not spacelike separated", ConfigurationWarning, stacklevel=2)
    norms = [commutator_norm(field_a, field_b, fl_a, fr_a, fl_b, fr_b, N) for N in cutoffs]
    return {"cutoffs": list(cutoffs), "norms": norms, "spacelike": is_spacelike}
