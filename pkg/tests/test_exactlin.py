from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chiralforge.errors import NormConvergenceError, ShapeError
from chiralforge.exactlin import (
    ExactPhase, FloatPhase, SparseBlock, block_mul, fraction_str, operator_norm_upper,
    phase_mul, phases_equal, to_fraction,
)
from oracles import naive_matmul, phase

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def test_to_fraction_rejects_floats_and_bools():
    assert to_fraction("3/6") == Fraction(1, 2)
    assert to_fraction(4) == 4
    with pytest.raises(TypeError):
        to_fraction(0.5)
    with pytest.raises(TypeError):
        to_fraction(True)


def test_fraction_str_keeps_denominator():
    assert fraction_str(Fraction(3)) == "3/1"
    assert fraction_str(Fraction(-2, 4)) == "-1/2"


def test_phase_examples():
    assert ExactPhase(Fraction(5, 2)).q == Fraction(1, 2)
    assert ExactPhase(-1).q == 1
    assert (ExactPhase(Fraction(1, 2)) * ExactPhase(Fraction(3, 2))).is_one()
    assert ExactPhase(1).is_real() and not ExactPhase(Fraction(1, 2)).is_real()
    assert ExactPhase(Fraction(1, 3)).conj().q == Fraction(5, 3)
    assert ExactPhase(Fraction(1, 4)) ** 8 == ExactPhase(0)


@given(fractions, fractions)
def test_phase_product_matches_complex(a, b):
    got = (ExactPhase(a) * ExactPhase(b)).to_complex()
    assert abs(got - phase(a) * phase(b)) < 1e-12


@given(fractions)
def test_phase_times_conjugate_is_one(a):
    p = ExactPhase(a)
    assert (p * p.conj()).is_one()


def test_float_phase_mixes_with_exact():
    f = FloatPhase(np.sqrt(2))
    mixed = phase_mul(f, ExactPhase(Fraction(1, 2)))
    assert isinstance(mixed, FloatPhase)
    assert abs(mixed.to_complex() - phase(np.sqrt(2) + 0.5)) < 1e-12
    assert phases_equal(FloatPhase(0.5), ExactPhase(Fraction(1, 2)))
    assert not phases_equal(FloatPhase(0.5 + 1e-6), ExactPhase(Fraction(1, 2)))


@st.composite
def dense(draw, rows=None, cols=None):
    r = rows or draw(st.integers(1, 8))
    c = cols or draw(st.integers(1, 8))
    vals = st.one_of(st.just(Fraction(0)), fractions)
    return [[draw(vals) for _ in range(c)] for _ in range(r)]


@st.composite
def pairs(draw):
    n, k, m = (draw(st.integers(1, 8)) for _ in range(3))
    return draw(dense(n, k)), draw(dense(k, m))


@given(pairs())
def test_block_mul_matches_triple_loop(ab):
    a, b = ab
    got = block_mul(SparseBlock.from_dense(a), SparseBlock.from_dense(b))
    assert got.to_dense() == naive_matmul(a, b)


@given(dense(), dense())
def test_addition_is_entrywise(a, b):
    if (len(a), len(a[0])) != (len(b), len(b[0])):
        with pytest.raises(ShapeError):
            SparseBlock.from_dense(a) + SparseBlock.from_dense(b)
        return
    got = (SparseBlock.from_dense(a) + SparseBlock.from_dense(b)).to_dense()
    assert got == [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def test_shape_errors():
    a = SparseBlock.from_dense([[1, 2]])
    with pytest.raises(ShapeError):
        a @ a
    with pytest.raises(ShapeError):
        SparseBlock((0,), (0,), {(1, 0): Fraction(1)})


def test_zero_entries_are_dropped():
    a = SparseBlock.from_dense([[0, 1], [0, 0]])
    assert a.entries == {(0, 1): 1}
    assert (a @ a).is_zero()
    assert a.transpose().entries == {(1, 0): 1}


def test_norm_examples():
    assert operator_norm_upper(SparseBlock.identity(range(3))) == pytest.approx(1.0, rel=1e-12)
    assert operator_norm_upper(np.diag([2.0, 0.5])) == pytest.approx(2.0, rel=1e-12)
    assert operator_norm_upper(np.zeros((2, 3))) == 0.0


@given(st.integers(0, 2**31 - 1), st.integers(1, 6), st.integers(1, 6))
def test_norm_is_certified_upper_bound(seed, n, m):
    a = np.random.default_rng(seed).normal(size=(n, m))
    sigma = np.linalg.svd(a, compute_uv=False)[0]
    bound = operator_norm_upper(a, tol=1e-10)
    assert sigma <= bound <= sigma * (1 + 1e-9)


def test_norm_raises_when_it_cannot_converge():
    a = np.diag([1.0, 1.0 - 1e-9])
    with pytest.raises(NormConvergenceError):
        operator_norm_upper(a, tol=1e-15, max_squarings=2)
