"""Pointed sector calculus.

Sectors are labelled by a finitely generated abelian group ``G``.  Each
chiral index (``Kappa``) supplies a conformal dimension ``D(g)`` and a
braiding bicharacter ``eps^+(g, h)``, either derived from a U(1) charge map
``g -> alpha(g)`` (``D = alpha^2/2``, ``eps^{+-} = exp(-+ i pi alpha(g) alpha(h))``)
or given explicitly on generators.  On top of that data the module checks
the gluing and two-dimensional extension conditions, builds the shift
fields with their ``V^{g,h}`` cocycles, and models the pointed
Longo-Rehren Q-system.
"""
from __future__ import annotations

import itertools
import json
import math
import random
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import SpecError, UnsupportedGroupError, WindowError
from .exactlin import ExactPhase, FloatPhase, fraction_str, phases_equal, to_fraction
from .props import VerificationReport

Element = tuple

INTEGRALITY_TOL = 1e-12


# ------------------------------------------------------------------- groups

@dataclass(frozen=True)
class AbelianGroup:
    """``Z^free_rank x Z_{n_1} x ... x Z_{n_k}``.

    Elements are integer tuples, free coordinates first; cyclic coordinates
    are reduced into ``[0, n)``.
    """

    free_rank: int = 0
    torsion: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(int(n) for n in self.torsion))
        if self.free_rank < 0 or any(n < 1 for n in self.torsion):
            raise SpecError("free rank must be >= 0 and cyclic orders >= 1")

    @property
    def rank(self) -> int:
        return self.free_rank + len(self.torsion)

    @property
    def orders(self) -> tuple:
        """Order of each coordinate, 0 for a free one."""
        return (0,) * self.free_rank + self.torsion

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> int:
        if not self.is_finite:
            raise UnsupportedGroupError("infinite group")
        return math.prod(self.torsion)

    def element(self, g) -> Element:
        if isinstance(g, int):
            g = (g,)
        g = tuple(int(x) for x in g)
        if len(g) != self.rank:
            raise SpecError(f"element {g} has {len(g)} coordinates, group has {self.rank}")
        return tuple(x % n if n else x for x, n in zip(g, self.orders))

    def zero(self) -> Element:
        return (0,) * self.rank

    def add(self, g, h) -> Element:
        return self.element(tuple(a + b for a, b in zip(g, h)))

    def neg(self, g) -> Element:
        return self.element(tuple(-a for a in g))

    def scale(self, k: int, g) -> Element:
        return self.element(tuple(k * a for a in g))

    def generators(self) -> list[Element]:
        return [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]

    def elements(self, window: int = 2) -> list[Element]:
        """All elements with free coordinates in ``[-window, window]``."""
        ranges = [range(-window, window + 1) if n == 0 else range(n) for n in self.orders]
        return [tuple(x) for x in itertools.product(*ranges)]

    def random_element(self, rng: random.Random, bound: int = 3) -> Element:
        return tuple(rng.randint(-bound, bound) if n == 0 else rng.randrange(n) for n in self.orders)

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}

    @classmethod
    def from_json(cls, data: dict) -> "AbelianGroup":
        return cls(int(data.get("free_rank", 0)), tuple(data.get("torsion", ())))


def cyclic(n: int) -> AbelianGroup:
    return AbelianGroup(0, (n,))


def integers(rank: int = 1) -> AbelianGroup:
    return AbelianGroup(rank, ())


# ------------------------------------------------------------ quadratic surds

def _squarefree(r: int) -> tuple[int, int]:
    """``r = k^2 * m`` with ``m`` squarefree; returns ``(k, m)``."""
    k, m, d = 1, r, 2
    while d * d <= m:
        while m % (d * d) == 0:
            m //= d * d
            k *= d
        d += 1
    return k, m


_TERM = re.compile(r"^\s*([+-])?\s*(\d+(?:/\d+)?)?\s*\*?\s*(?:sqrt\(\s*(\d+)\s*\))?\s*$")


@dataclass(frozen=True)
class Surd:
    """Finite sum ``sum_m c_m sqrt(m)`` over squarefree ``m`` with rational ``c_m``.

    Charges such as ``sqrt(2)`` (the even-lattice generator) need this;
    products are rational exactly when every irrational part cancels.
    """

    terms: tuple = ()  # sorted ((radicand, coefficient), ...)

    @classmethod
    def of(cls, data: dict) -> "Surd":
        return cls(tuple(sorted((m, c) for m, c in data.items() if c)))

    @classmethod
    def rational(cls, x) -> "Surd":
        return cls.of({1: to_fraction(x)})

    @classmethod
    def parse(cls, text) -> "Surd":
        """Parse ``"p/q"``, ``"sqrt(m)"``, ``"p/q*sqrt(m)"`` and sums of these."""
        if isinstance(text, Surd):
            return text
        if not isinstance(text, str):
            return cls.rational(text)
        acc: dict[int, Fraction] = {}
        chunks = re.split(r"(?<=[\d)])\s*(?=[+-])", text.strip())
        for chunk in chunks:
            m = _TERM.match(chunk)
            if not m or not (m.group(2) or m.group(3)):
                raise SpecError(f"cannot parse charge {text!r}")
            coef = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            if m.group(1) == "-":
                coef = -coef
            k, rad = _squarefree(int(m.group(3))) if m.group(3) else (1, 1)
            if rad == 0:
                continue
            acc[rad] = acc.get(rad, 0) + coef * k
        return cls.of(acc)

    def _dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "Surd") -> "Surd":
        acc = self._dict()
        for m, c in other.terms:
            acc[m] = acc.get(m, 0) + c
        return Surd.of(acc)

    def __neg__(self) -> "Surd":
        return Surd.of({m: -c for m, c in self.terms})

    def times(self, k) -> "Surd":
        k = to_fraction(k)
        return Surd.of({m: k * c for m, c in self.terms})

    def __mul__(self, other: "Surd") -> "Surd":
        acc: dict[int, Fraction] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                g = math.gcd(m1, m2)
                rad = (m1 // g) * (m2 // g)
                acc[rad] = acc.get(rad, 0) + c1 * c2 * g
        return Surd.of(acc)

    def as_fraction(self) -> Fraction | None:
        d = self._dict()
        if set(d) - {1}:
            return None
        return d.get(1, Fraction(0))

    def __float__(self) -> float:
        return float(sum(float(c) * math.sqrt(m) for m, c in self.terms))

    def __str__(self):
        if not self.terms:
            return "0/1"
        parts = []
        for m, c in self.terms:
            parts.append(fraction_str(c) if m == 1 else f"{fraction_str(c)}*sqrt({m})")
        return "+".join(parts).replace("+-", "-")


Value = Fraction | float


def _value(x: Surd) -> Value:
    r = x.as_fraction()
    return r if r is not None else float(x)


def _phase(q: Value):
    return ExactPhase(q) if isinstance(q, Fraction) else FloatPhase(q)


def is_integral(x: Value) -> bool:
    if isinstance(x, Fraction):
        return x.denominator == 1
    return abs(x - round(x)) <= INTEGRALITY_TOL


def _value_str(x: Value) -> str:
    return fraction_str(x) if isinstance(x, Fraction) else repr(float(x))


def _phase_str(p) -> str:
    return fraction_str(p.q) if isinstance(p, ExactPhase) else repr(p.t)


# ------------------------------------------------------------ chiral indices

@dataclass(frozen=True)
class Kappa:
    """Sector data of one chiral index over a fixed group.

    Either ``charges`` (one Surd per generator) or the explicit pair
    ``dims`` (one rational per generator) and ``eps_q`` (matrix of phase
    exponents: ``eps^+(e_i, e_j) = exp(i pi eps_q[i][j])``).  Explicit
    dimensions extend to all of ``G`` as the quadratic form whose
    polarization is read off ``eps^+``, exactly as for a charge map.
    """

    name: str
    group: AbelianGroup
    charges: tuple | None = None
    dims: tuple | None = None
    eps_q: tuple | None = None

    def __post_init__(self):
        r = self.group.rank
        if self.charges is not None:
            cs = tuple(Surd.parse(c) for c in self.charges)
            if len(cs) != r:
                raise SpecError(f"{self.name}: need {r} generator charges, got {len(cs)}")
            object.__setattr__(self, "charges", cs)
        else:
            if self.dims is None or self.eps_q is None:
                raise SpecError(f"{self.name}: give a charge map or explicit D and eps_plus")
            dims = tuple(to_fraction(d) for d in self.dims)
            eps = tuple(tuple(to_fraction(x) for x in row) for row in self.eps_q)
            if len(dims) != r or len(eps) != r or any(len(row) != r for row in eps):
                raise SpecError(f"{self.name}: explicit data must be given on all {r} generators")
            object.__setattr__(self, "dims", dims)
            object.__setattr__(self, "eps_q", eps)

    @classmethod
    def u1(cls, group: AbelianGroup, charges: Sequence, name: str = "u1") -> "Kappa":
        return cls(name, group, charges=tuple(charges))

    @classmethod
    def explicit(cls, group: AbelianGroup, dims: Sequence, eps_q: Sequence, name: str = "explicit") -> "Kappa":
        return cls(name, group, dims=tuple(dims), eps_q=tuple(tuple(r) for r in eps_q))

    @classmethod
    def trivial(cls, group: AbelianGroup, name: str = "trivial") -> "Kappa":
        r = group.rank
        return cls.explicit(group, [0] * r, [[0] * r for _ in range(r)], name)

    @property
    def has_charges(self) -> bool:
        return self.charges is not None

    def charge(self, g) -> Surd:
        """U(1) charge of ``g`` (representatives of cyclic coordinates in ``[0, n)``)."""
        if not self.has_charges:
            raise SpecError(f"{self.name} has no charge map")
        g = self.group.element(g)
        out = Surd()
        for x, c in zip(g, self.charges):
            out = out + c.times(x)
        return out

    def pairing(self, g, h) -> Value:
        """Exponent ``b(g, h)`` with ``eps^+(g, h) = exp(-i pi b(g, h))``."""
        g, h = self.group.element(g), self.group.element(h)
        if self.has_charges:
            return _value(self.charge(g) * self.charge(h))
        return -sum((a * b * self.eps_q[i][j] for i, a in enumerate(g) for j, b in enumerate(h)), Fraction(0))

    def dimension(self, g) -> Value:
        g = self.group.element(g)
        if self.has_charges:
            c = self.charge(g)
            return _value((c * c).times(Fraction(1, 2)))
        out = Fraction(0)
        for i, a in enumerate(g):
            out += a * a * self.dims[i]
            for j in range(i + 1, len(g)):
                out += a * g[j] * -self.eps_q[i][j]
        return out

    def eps(self, sign: int, g, h):
        """``eps^+(g, h) = exp(-i pi b(g,h))``; ``eps^-(g, h) = conj(eps^+(h, g))``."""
        if sign > 0:
            return _phase(-self.pairing(g, h))
        return _phase(-self.pairing(h, g)).conj()

    def to_json(self) -> dict:
        if self.has_charges:
            return {"name": self.name, "charge_map": {str(i): str(c) for i, c in enumerate(self.charges)}}
        r = self.group.rank
        return {
            "name": self.name,
            "explicit": {
                "D": {str(i): fraction_str(d) for i, d in enumerate(self.dims)},
                "eps_plus": {f"{i},{j}": fraction_str(self.eps_q[i][j]) for i in range(r) for j in range(r)},
            },
        }


@dataclass(frozen=True)
class SectorSpec:
    """A group together with the sector data of one or more chiral indices."""

    group: AbelianGroup
    kappas: tuple

    def __post_init__(self):
        object.__setattr__(self, "kappas", tuple(self.kappas))
        for k in self.kappas:
            if k.group != self.group:
                raise SpecError(f"chiral index {k.name} lives on a different group")

    @classmethod
    def u1(cls, group: AbelianGroup, *charge_lists: Sequence) -> "SectorSpec":
        return cls(group, tuple(Kappa.u1(group, cs, f"u1_{i}") for i, cs in enumerate(charge_lists)))

    def pairing(self, g, h) -> Value:
        return _sum(k.pairing(g, h) for k in self.kappas)

    def dimension(self, g) -> Value:
        return _sum(k.dimension(g) for k in self.kappas)

    def eps(self, sign: int, g, h):
        out = ExactPhase.one()
        for k in self.kappas:
            out = out * k.eps(sign, g, h)
        return out

    def to_json(self) -> dict:
        return {"group": self.group.to_json(), "kappas": [k.to_json() for k in self.kappas]}

    @classmethod
    def from_json(cls, data: dict) -> "SectorSpec":
        try:
            group = AbelianGroup.from_json(data["group"])
            kappas = []
            for i, kd in enumerate(data["kappas"]):
                name = kd.get("name", f"kappa{i}")
                if "charge_map" in kd:
                    cmap = kd["charge_map"]
                    kappas.append(Kappa(name, group, charges=tuple(cmap[str(j)] for j in range(group.rank))))
                elif "explicit" in kd:
                    ex = kd["explicit"]
                    r = group.rank
                    dims = [ex["D"].get(str(j), "0/1") for j in range(r)]
                    eps = [[ex["eps_plus"].get(f"{a},{b}", "0/1") for b in range(r)] for a in range(r)]
                    kappas.append(Kappa.explicit(group, dims, eps, name))
                else:
                    raise SpecError(f"chiral index {name} has neither charge_map nor explicit data")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"malformed sector spec: {exc}") from exc
        return cls(group, tuple(kappas))

    @classmethod
    def load(cls, path) -> "SectorSpec":
        return cls.from_json(json.loads(Path(path).read_text()))


def _sum(values: Iterable[Value]) -> Value:
    out: Value = Fraction(0)
    for v in values:
        out = out + v
    return out


def _merge(specs) -> SectorSpec:
    if isinstance(specs, SectorSpec):
        return specs
    specs = list(specs)
    if not specs:
        raise SpecError("no sector data given")
    group = specs[0].group
    if any(s.group != group for s in specs):
        raise SpecError("sector specs do not share the same group")
    return SectorSpec(group, tuple(k for s in specs for k in s.kappas))


def _report(suite: str, params: dict, cert: list, start: float, extra: dict | None = None) -> VerificationReport:
    failed = sum(not c["ok"] for c in cert)
    details = {"certificate": cert, "failed": failed}
    details.update(extra or {})
    return VerificationReport(suite, params, "pass" if failed == 0 else "fail", Fraction(failed), len(cert),
                              time.perf_counter() - start, details)


def check_bicharacter(spec: SectorSpec, samples: int = 100, seed: int = 0) -> VerificationReport:
    """Multiplicativity of ``eps^+`` in the first slot and ``eps^- = conj eps^+`` reversed."""
    start = time.perf_counter()
    G = spec.group
    rng = random.Random(seed)
    gens = G.generators()
    triples = [(a, b, c) for a in gens for b in gens for c in gens]
    triples += [(G.random_element(rng), G.random_element(rng), G.random_element(rng)) for _ in range(samples)]
    cert = []
    for g1, g2, h in triples:
        lhs = spec.eps(1, G.add(g1, g2), h)
        rhs = spec.eps(1, g1, h) * spec.eps(1, g2, h)
        cert.append({"condition": "bicharacter", "g1": g1, "g2": g2, "h": h, "ok": phases_equal(lhs, rhs)})
        cert.append({"condition": "reversal", "g": g1, "h": h,
                     "ok": phases_equal(spec.eps(-1, g1, h), spec.eps(1, h, g1).conj())})
    return _report("bicharacter", {"group": G.to_json(), "samples": samples, "seed": seed}, cert, start)


# ------------------------------------------------------------- 1d gluing

def check_1d_gluing(specs, window: int = 3) -> VerificationReport:
    """Gluing conditions for a local extension of the tensor product.

    For each sign and each pair of generators: ``prod_k eps^{+-}_k(g1, g2) = 1``
    and the same with ``g1`` inverted; for each generator and each element
    of a window of ``G`` (a spot check of the quadratic form):
    ``sum_k D_k(g)`` integral.
    """
    start = time.perf_counter()
    spec = _merge(specs)
    G = spec.group
    cert = []
    gens = G.generators()
    for sign in (1, -1):
        for g1 in gens:
            for g2 in gens:
                for cond, a in (("braiding", g1), ("inverse_braiding", G.neg(g1))):
                    ph = spec.eps(sign, a, g2)
                    cert.append({"condition": cond, "sign": "+" if sign > 0 else "-", "g1": a, "g2": g2,
                                 "phase_q": _phase_str(ph), "ok": ph.is_one()})
    for g in gens:
        d = spec.dimension(g)
        cert.append({"condition": "dimension", "g": g, "value": _value_str(d), "ok": is_integral(d)})
    for g in G.elements(window):
        if g in gens or g == G.zero():
            continue
        d = spec.dimension(g)
        cert.append({"condition": "dimension_spot", "g": g, "value": _value_str(d), "ok": is_integral(d)})
    params = {"group": G.to_json(), "kappas": [k.name for k in spec.kappas]}
    return _report("gluing_1d", params, cert, start)


# ------------------------------------------------------- 2d extension

PAIRINGS = ("conjugate", "same-sign")


def check_2d_extension(spec_left: SectorSpec, spec_right: SectorSpec, pairing: str = "conjugate",
                       window: int = 3) -> VerificationReport:
    """Braiding cancellation and integral spin for a diagonal 2d extension.

    ``pairing="conjugate"`` checks ``conj(eps^{+-}_L(a, b)) = eps^{-+}_R(a, b)``
    for generator pairs ``(a, b)``, ``(a^{-1}, b)`` and ``(a, b^{-1})``.
    ``pairing="same-sign"`` checks ``conj(eps^{+-}_L) = eps^{+-}_R`` instead:
    the configuration where the braidings of the two legs reinforce.
    In both cases ``D_L(g) - D_R(g)`` must be integral on generators and on
    a window of elements.
    """
    if pairing not in PAIRINGS:
        raise SpecError(f"pairing must be one of {PAIRINGS}")
    start = time.perf_counter()
    if spec_left.group != spec_right.group:
        raise SpecError("left and right sector data do not share the same group")
    G = spec_left.group
    gens = G.generators()
    cert = []
    for sign in (1, -1):
        rsign = -sign if pairing == "conjugate" else sign
        for a in gens:
            for b in gens:
                for variant, (x, y) in (("plain", (a, b)), ("inverse_first", (G.neg(a), b)),
                                        ("inverse_second", (a, G.neg(b)))):
                    lhs = spec_left.eps(sign, x, y).conj()
                    rhs = spec_right.eps(rsign, x, y)
                    cert.append({"condition": f"cancellation_{variant}", "sign": "+" if sign > 0 else "-",
                                 "g1": x, "g2": y, "left_conj_q": _phase_str(lhs), "right_q": _phase_str(rhs),
                                 "ok": phases_equal(lhs, rhs)})
    for g in G.elements(window):
        if g == G.zero():
            continue
        spin = _sum([spec_left.dimension(g), -spec_right.dimension(g)])
        cert.append({"condition": "spin" if g in gens else "spin_spot", "g": g,
                     "value": _value_str(spin), "ok": is_integral(spin)})
    params = {"group": G.to_json(), "pairing": pairing,
              "left": [k.name for k in spec_left.kappas], "right": [k.name for k in spec_right.kappas]}
    return _report("extension_2d", params, cert, start)


# ------------------------------------------------------------ shift fields

@dataclass(frozen=True)
class Word:
    """Normal-ordered monomial ``a^{e_1}(x) ... a^{e_k}(x) V^v``.

    ``v`` holds one exponent per group coordinate (always 0 on free
    coordinates, where no ``V`` is needed).  ``algebra`` lists the shift
    exponents ``e`` of the symbols ``a^e(x) = kappa(e)(x)``, kept as integer
    vectors without modular reduction.  Moving ``V`` of a ``Z_n`` factor to
    the right of a symbol uses ``V a^e(x) = a^{e + n}(x) V``, the defining
    property of ``V`` as an intertwiner from the identity to ``a^n``.
    """

    v: tuple
    algebra: tuple = ()

    def times(self, other: "Word", orders: tuple) -> "Word":
        moved = tuple(tuple(e + n * k for e, n, k in zip(sym, orders, self.v)) for sym in other.algebra)
        return Word(tuple(a + b for a, b in zip(self.v, other.v)), self.algebra + moved)

    def adjoint(self) -> "Word":
        if self.algebra:
            raise ValueError("only unitary words have adjoints here")
        return Word(tuple(-a for a in self.v))

    def __str__(self):
        parts = [f"a^{list(e)}(x)" for e in self.algebra]
        parts += [f"V{i}^{k}" for i, k in enumerate(self.v) if k]
        return "*".join(parts) or "1"


@dataclass(frozen=True)
class Monomial:
    """Partial monomial matrix: ``rows[h] = (column, word)``."""

    rows: dict
    orders: tuple

    def __matmul__(self, other: "Monomial") -> "Monomial":
        out = {}
        for r, (mid, w1) in self.rows.items():
            if mid in other.rows:
                c, w2 = other.rows[mid]
                out[r] = (c, w1.times(w2, self.orders))
        return Monomial(out, self.orders)

    def adjoint(self) -> "Monomial":
        return Monomial({c: (r, w.adjoint()) for r, (c, w) in self.rows.items()}, self.orders)

    def agrees(self, other: "Monomial") -> tuple[bool, int]:
        """Equality on the common domain; returns (equal, number of rows compared)."""
        common = self.rows.keys() & other.rows.keys()
        return all(self.rows[k] == other.rows[k] for k in common) and bool(common), len(common)


@dataclass(frozen=True)
class ShiftFieldTable:
    """Shift fields ``(psi^g Psi)_h = V^{g,h} Psi_{g+h}`` on a grading window.

    Cyclic coordinates run over representatives ``0..n-1`` and carry
    ``V^{g,h} = V`` when ``g + h >= n``; free coordinates run over
    ``[-window, window]`` with ``V^{g,h} = 1``.
    """

    group: AbelianGroup
    window: int = 8

    @property
    def labels(self) -> list[Element]:
        return self.group.elements(self.window)

    def _check(self, g) -> Element:
        g = self.group.element(g)
        for x, n in zip(g, self.group.orders):
            if n == 0 and abs(x) > self.window:
                raise WindowError(f"element {g} does not fit in the window [-{self.window}, {self.window}]")
        return g

    def v_exponents(self, g, h) -> tuple:
        g, h = self.group.element(g), self.group.element(h)
        return tuple(int(n > 0 and a + b >= n) for a, b, n in zip(g, h, self.group.orders))

    def psi(self, g) -> Monomial:
        g = self._check(g)
        rows = {}
        for h in self.labels:
            col = self.group.add(g, h)
            if all(n > 0 or abs(c) <= self.window for c, n in zip(col, self.group.orders)):
                rows[h] = (col, Word(self.v_exponents(g, h)))
        return Monomial(rows, self.group.orders)

    def product(self, g, h) -> Monomial:
        """``psi^g psi^h``; the combined shift must fit in the window."""
        self._check(self.group.add(g, h))
        return self.psi(g) @ self.psi(h)

    def identity(self) -> Monomial:
        zero = Word((0,) * self.group.rank)
        return Monomial({h: (h, zero) for h in self.labels}, self.group.orders)

    def diagonal(self, shift=None) -> Monomial:
        """``hat kappa(kappa(shift)(x))``: row ``h`` carries ``a^{h + shift}(x)``.

        ``shift`` is an integer vector, not reduced, so that negative shifts
        represent inverse automorphisms.
        """
        shift = (0,) * self.group.rank if shift is None else tuple(shift)
        return Monomial({h: (h, Word((0,) * self.group.rank, (tuple(a + b for a, b in zip(h, shift)),)))
                         for h in self.labels}, self.group.orders)

    def dense(self, g) -> list[list[str | None]]:
        """``psi^g`` as a ``|labels| x |labels|`` matrix of word strings (``None`` for 0)."""
        labels = self.labels
        index = {h: i for i, h in enumerate(labels)}
        out = [[None] * len(labels) for _ in labels]
        for r, (c, w) in self.psi(g).rows.items():
            out[index[r]][index[c]] = str(w)
        return out


def build_shift_fields(group: AbelianGroup, window: int = 8) -> ShiftFieldTable:
    if window < 1:
        raise WindowError("window must be at least 1")
    return ShiftFieldTable(group, window)


def _test_elements(group: AbelianGroup, free_bound: int = 2) -> list[Element]:
    return group.elements(free_bound)


def check_shift_fields(table: ShiftFieldTable, free_bound: int = 2) -> VerificationReport:
    """Pairwise commutation of all ``psi^g``, ``psi^h`` and adjoints, plus unitarity.

    On free coordinates the products must also compose, ``psi^g psi^h = psi^{g+h}``.
    """
    start = time.perf_counter()
    G = table.group
    elems = _test_elements(G, free_bound)
    psi = {g: table.psi(g) for g in elems}
    adj = {g: p.adjoint() for g, p in psi.items()}
    ident = table.identity()
    cert = []
    for g in elems:
        ok1, n1 = (psi[g] @ adj[g]).agrees(ident)
        ok2, n2 = (adj[g] @ psi[g]).agrees(ident)
        cert.append({"condition": "unitary", "g": g, "rows": n1 + n2, "ok": ok1 and ok2})
    for g, h in itertools.product(elems, repeat=2):
        for cond, a, b in (("psi_psi", psi[g], psi[h]), ("psi_adj", psi[g], adj[h]), ("adj_psi", adj[g], psi[h]),
                           ("adj_adj", adj[g], adj[h])):
            ok, n = (a @ b).agrees(b @ a)
            cert.append({"condition": cond, "g": g, "h": h, "rows": n, "ok": ok})
        if G.is_finite or G.torsion:
            continue
        ok, n = (psi[g] @ psi[h]).agrees(table.psi(G.add(g, h)))
        cert.append({"condition": "composition", "g": g, "h": h, "rows": n, "ok": ok})
    return _report("shift_fields", {"group": G.to_json(), "window": table.window}, cert, start)


def charged_intertwiner_shiftcheck(table: ShiftFieldTable, free_bound: int = 2) -> VerificationReport:
    """``psi^g hat k(x) = hat k(k(g)(x)) psi^g`` and its adjoint form, symbolically.

    ``hat k(x)`` is the diagonal with ``a^h(x)`` in row ``h``; ``k(g)`` shifts
    the exponent by the representative of ``g``.  Both sides are products of
    monomial matrices over the free symbols and are compared after moving
    every ``V`` to the right.
    """
    start = time.perf_counter()
    G = table.group
    cert = []
    x = table.diagonal()
    for g in _test_elements(G, free_bound):
        p = table.psi(g)
        ok, n = (p @ x).agrees(table.diagonal(g) @ p)
        cert.append({"condition": "intertwiner", "g": g, "rows": n, "ok": ok})
        pa = p.adjoint()
        ok, n = (pa @ x).agrees(table.diagonal(tuple(-a for a in g)) @ pa)
        cert.append({"condition": "intertwiner_adjoint", "g": g, "rows": n, "ok": ok})
    return _report("charged_intertwiner", {"group": G.to_json(), "window": table.window}, cert, start)


# ------------------------------------------------------ pointed Q-system

@dataclass
class PointedQSystem:
    """Longo-Rehren object ``sum_g g (x) conj(g)`` of a finite pointed category.

    The multiplication is ``e_g e_h = e_{g+h}`` with unit ``e_0``; all
    quantum dimensions are 1, so ``X* X`` counts the ``|G|`` summands.
    """

    group: AbelianGroup
    summands: list
    product: dict
    unit: Element
    x_coeffs: dict = field(default_factory=dict)
    phases: dict = field(default_factory=dict)

    def x_norm(self) -> int:
        """``X* X`` as a multiple of the identity: one per unimodular coefficient."""
        return sum(1 for ph in self.x_coeffs.values() if isinstance(ph, ExactPhase))

    def multiply(self, a: dict, b: dict) -> dict:
        """Product of formal combinations ``{g: coefficient}``."""
        out: dict = {}
        for g, x in a.items():
            for h, y in b.items():
                k = self.product[(g, h)]
                out[k] = out.get(k, 0) + x * y
        return {k: v for k, v in out.items() if v}


def lr_qsystem(spec: SectorSpec, single_leg: bool = False) -> tuple[PointedQSystem, VerificationReport]:
    """Build and check the pointed Longo-Rehren Q-system.

    The statistical phase of the summand pair ``(g, h)`` is
    ``eps^+(g, h)`` on the left leg times the opposite braiding
    ``eps^-(g^{-1}, h^{-1})`` on the conjugate leg; commutativity requires
    all of them to be 1.  ``single_leg=True`` drops the conjugate leg.
    """
    start = time.perf_counter()
    G = spec.group
    if not G.is_finite:
        raise UnsupportedGroupError("the Longo-Rehren Q-system needs a finite group")
    elems = G.elements()
    q = PointedQSystem(G, [(g, G.neg(g)) for g in elems],
                       {(g, h): G.add(g, h) for g in elems for h in elems}, G.zero(),
                       {g: ExactPhase.one() for g in elems})
    cert = []
    for g in elems:
        e = {g: Fraction(1)}
        cert.append({"condition": "unit", "g": g,
                     "ok": q.multiply({q.unit: Fraction(1)}, e) == e == q.multiply(e, {q.unit: Fraction(1)})})
        counit = sum(c for k, c in q.multiply(e, {G.neg(g): Fraction(1)}).items() if k == q.unit)
        cert.append({"condition": "counit", "g": g, "ok": counit == 1})
    for g, h, k in itertools.product(elems, repeat=3):
        a, b, c = ({x: Fraction(1)} for x in (g, h, k))
        cert.append({"condition": "associativity", "g": (g, h, k),
                     "ok": q.multiply(q.multiply(a, b), c) == q.multiply(a, q.multiply(b, c))})
    norm = q.x_norm()
    cert.append({"condition": "normalization", "value": norm, "ok": norm == G.order})
    for g, h in itertools.product(elems, repeat=2):
        ph = spec.eps(1, g, h)
        if not single_leg:
            ph = ph * spec.eps(-1, G.neg(g), G.neg(h))
        q.phases[(g, h)] = ph
        cert.append({"condition": "commutativity", "g": g, "h": h, "phase_q": _phase_str(ph), "ok": ph.is_one()})
    cert.append({"condition": "summands", "value": len(q.summands), "ok": len(q.summands) == G.order})
    rep = _report("lr_qsystem", {"group": G.to_json(), "single_leg": single_leg}, cert, start)
    return q, rep
