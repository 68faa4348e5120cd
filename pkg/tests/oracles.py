"""Independent reference computations used by the tests.

Each oracle re-derives a quantity from first principles by a different
route than the library: commutator rewriting of words instead of partition
bookkeeping, power-series recursions instead of closed-form multinomials,
dense triple loops instead of sparse products.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

from chiralforge.fock import FockVector, apply_j


# ------------------------------------------------------ Heisenberg words

@lru_cache(maxsize=None)
def vacuum_expectation(word: tuple) -> Fraction:
    """``<Omega_0, J_{w_1} ... J_{w_k} Omega_0>`` by commuting annihilators right.

    Only ``[J_m, J_n] = m delta_{m+n,0}`` and the vacuum conditions are used.
    """
    if not word:
        return Fraction(1)
    if word[-1] >= 0 or word[0] <= 0 or 0 in word:
        return Fraction(0)
    # swap one adjacent (annihilator, creator) pair; none left means zero
    i = next((k for k in range(len(word) - 1) if word[k] > 0 > word[k + 1]), None)
    if i is None:
        return Fraction(0)
    a, b = word[i], word[i + 1]
    swapped = word[:i] + (b, a) + word[i + 2:]
    out = vacuum_expectation(swapped)
    if a + b == 0:
        out += a * vacuum_expectation(word[:i] + word[i + 2:])
    return out


def inner_oracle(p: tuple, q: tuple) -> Fraction:
    """``<J_{-p} Omega, J_{-q} Omega>`` with ``J_n^* = J_{-n}``."""
    word = tuple(reversed(p)) + tuple(-k for k in q)
    return vacuum_expectation(word)


# ------------------------------------------------------ Sugawara

def sugawara_oracle(n: int, v: FockVector) -> FockVector:
    """``L_n = 1/2 sum_{a+b=n} :J_a J_b:`` applied term by term."""
    reach = v.max_level() + abs(n) + 1
    out = FockVector.zero(v.charge)
    for a in range(-reach, reach + 1):
        b = n - a
        first, second = (a, b) if a <= b else (b, a)  # annihilator on the right
        out = out + apply_j(first, apply_j(second, v)).scale(Fraction(1, 2))
    return out


# ------------------------------------------------------ exponentials

def _exp_series(gen, v: FockVector, k_max: int) -> list[FockVector]:
    """Terms ``F_k v`` of ``exp(sum_n A_n z^n)`` for commuting ``A_n``.

    Uses ``k F_k = sum_{n=1}^k n A_n F_{k-n}``; ``gen(n, w)`` applies ``n A_n``.
    """
    terms = [v]
    for k in range(1, k_max + 1):
        acc = FockVector.zero(v.charge)
        for n in range(1, k + 1):
            acc = acc + gen(n, terms[k - n])
        terms.append(acc.scale(Fraction(1, k)))
    return terms


def eminus_oracle(alpha, v: FockVector, k_max: int) -> list[FockVector]:
    alpha = Fraction(alpha)
    return _exp_series(lambda n, w: apply_j(-n, w).scale(alpha), v, k_max)


def eplus_oracle(alpha, v: FockVector, k_max: int) -> list[FockVector]:
    alpha = Fraction(alpha)
    return _exp_series(lambda n, w: apply_j(n, w).scale(-alpha), v, k_max)


def vertex_shift_oracle(alpha, shift: int, v: FockVector) -> FockVector:
    """``sum_b E^-_{b+shift} E^+_b v`` relabelled into charge ``alpha + beta``."""
    alpha = Fraction(alpha)
    top = v.max_level()
    plus = eplus_oracle(alpha, v, top)
    out: dict = {}
    for b, w in enumerate(plus):
        a = b + shift
        if a < 0 or w.is_zero():
            continue
        minus = eminus_oracle(alpha, w, a)[a]
        for p, c in minus.items():
            out[p] = out.get(p, 0) + c
    return FockVector(v.charge + alpha, out)


def binomial_series(a, n_max: int) -> list[Fraction]:
    """Taylor coefficients of ``(1 - x)^{-a}``."""
    a = Fraction(a)
    out = [Fraction(1)]
    for n in range(1, n_max + 1):
        out.append(out[-1] * (a + n - 1) / n)
    return out


# ------------------------------------------------------ dense linear algebra

def naive_matmul(a, b):
    """Triple loop over Fractions."""
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    return [[sum((a[i][t] * b[t][j] for t in range(k)), Fraction(0)) for j in range(m)] for i in range(n)]


def phase(q) -> complex:
    return cmath.exp(1j * math.pi * float(q))
