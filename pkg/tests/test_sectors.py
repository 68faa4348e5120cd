import cmath
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chiralforge.errors import SpecError, UnsupportedGroupError, WindowError
from chiralforge.exactlin import ExactPhase, FloatPhase
from chiralforge.sectors import (
    AbelianGroup, Kappa, SectorSpec, Surd, build_shift_fields, charged_intertwiner_shiftcheck, check_1d_gluing,
    check_2d_extension, check_bicharacter, check_shift_fields, cyclic, integers, lr_qsystem,
)

SPECS = Path(__file__).resolve().parents[1] / "specs"
rationals = st.fractions(min_value=-3, max_value=3, max_denominator=6)


def z_spec(*charges):
    return SectorSpec.u1(integers(), *[[c] for c in charges])


# ------------------------------------------------------------ groups, charges

def test_group_basics():
    G = AbelianGroup(1, (2, 3))
    assert G.rank == 3 and not G.is_finite
    assert G.add((1, 1, 2), (2, 1, 2)) == (3, 0, 1)
    assert G.neg((1, 1, 2)) == (-1, 1, 1)
    assert cyclic(6).order == 6
    assert AbelianGroup.from_json(G.to_json()) == G


def test_surd_arithmetic():
    assert Surd.parse("sqrt(8)") == Surd.parse("2*sqrt(2)")
    two = Surd.parse("sqrt(2)") * Surd.parse("sqrt(2)")
    assert two.as_fraction() == 2
    assert Surd.parse("1/2 + sqrt(3)").as_fraction() is None
    assert float(Surd.parse("-sqrt(2)")) == pytest.approx(-math.sqrt(2))
    with pytest.raises(SpecError):
        Surd.parse("two")


@given(rationals, rationals, st.integers(1, 12), st.integers(1, 12))
def test_surd_products_match_floats(a, b, m, n):
    x, y = Surd.parse(f"{a}*sqrt({m})"), Surd.parse(f"{b}*sqrt({n})")
    assert float(x * y) == pytest.approx(float(x) * float(y), abs=1e-9)


@given(st.lists(rationals, min_size=1, max_size=3), st.integers(-3, 3), st.integers(-3, 3))
def test_eps_matches_brute_force(charges, g, h):
    spec = z_spec(*charges)
    q = -sum(c * c for c in charges) * g * h
    assert abs(spec.eps(1, (g,), (h,)).to_complex() - cmath.exp(1j * math.pi * q)) < 1e-12
    assert abs(spec.eps(-1, (g,), (h,)).to_complex() - cmath.exp(-1j * math.pi * q)) < 1e-12


@settings(max_examples=30)
@given(st.lists(rationals, min_size=2, max_size=2), st.integers(0, 100))
def test_free_charges_always_give_a_bicharacter(charges, seed):
    G = integers(2)
    assert check_bicharacter(SectorSpec(G, (Kappa.u1(G, charges),)), 30, seed).passed


def test_irrational_charges_use_float_phases():
    spec = SectorSpec.u1(integers(2), ["sqrt(2)", "sqrt(3)"])
    assert isinstance(spec.eps(1, (1, 0), (0, 1)), FloatPhase)
    assert isinstance(spec.eps(1, (1, 0), (1, 0)), ExactPhase)
    assert check_bicharacter(spec).passed


def test_inconsistent_torsion_charges_fail_bicharacter():
    G = AbelianGroup(1, (2,))
    assert not check_bicharacter(SectorSpec.u1(G, ["1/2", "sqrt(2)"])).passed


# ------------------------------------------------------------ gluing

def test_gluing_examples():
    assert check_1d_gluing(SectorSpec.load(SPECS / "even_lattice.json")).passed
    assert not check_1d_gluing(SectorSpec.load(SPECS / "fermion.json")).passed
    assert check_1d_gluing(SectorSpec.load(SPECS / "two_fermions.json")).passed
    assert check_1d_gluing([z_spec(1), z_spec(1)]).passed


def test_gluing_failure_names_the_condition():
    rep = check_1d_gluing(z_spec(1))
    bad = {c["condition"] for c in rep.details["certificate"] if not c["ok"]}
    assert {"braiding", "dimension"} <= bad
    assert rep.worst_violation == rep.details["failed"]


@settings(max_examples=30)
@given(st.lists(rationals, min_size=1, max_size=3))
def test_trivial_index_does_not_change_gluing(charges):
    spec = z_spec(*charges)
    padded = SectorSpec(spec.group, spec.kappas + (Kappa.trivial(spec.group),))
    assert check_1d_gluing(spec).passed == check_1d_gluing(padded).passed


def test_explicit_data_extends_quadratically():
    G = cyclic(2)
    k = Kappa.explicit(G, ["1/2"], [["1"]])
    assert k.dimension((1,)) == Fraction(1, 2)
    assert k.eps(1, (1,), (1,)) == ExactPhase(1)


# ------------------------------------------------------------ 2d extension

@pytest.mark.parametrize("alpha", [Fraction(1), Fraction(1, 2), Fraction(2, 3)])
def test_conjugate_pairing_passes(alpha):
    assert check_2d_extension(z_spec(alpha), z_spec(-alpha), "conjugate").passed


def test_same_sign_pairing_detects_nonintegral_braiding():
    assert not check_2d_extension(z_spec(Fraction(1, 2)), z_spec(Fraction(1, 2)), "same-sign").passed
    # alpha^2 integral: the two orientations agree
    assert check_2d_extension(z_spec(1), z_spec(1), "same-sign").passed


def test_2d_rejects_bad_pairing_and_group_mismatch():
    with pytest.raises(SpecError):
        check_2d_extension(z_spec(1), z_spec(1), "diagonal")
    with pytest.raises(SpecError):
        check_2d_extension(z_spec(1), SectorSpec.u1(cyclic(2), [1]))


# ------------------------------------------------------------ shift fields

@pytest.mark.parametrize("group", [integers(), cyclic(2), AbelianGroup(0, (2, 3)), AbelianGroup(1, (2,))])
def test_shift_fields_commute(group):
    table = build_shift_fields(group, 6)
    assert check_shift_fields(table).passed
    assert charged_intertwiner_shiftcheck(table).passed


def test_z2_square_carries_v():
    t = build_shift_fields(cyclic(2))
    sq = t.product((1,), (1,))
    assert all(col == row and w.v == (1,) for row, (col, w) in sq.rows.items())
    assert t.dense((1,)) == [[None, "1"], ["V0^1", None]]


def _numeric_psi(table, g, v_values):
    labels = table.labels
    idx = {h: i for i, h in enumerate(labels)}
    m = np.zeros((len(labels), len(labels)), dtype=complex)
    for r, (c, w) in table.psi(g).rows.items():
        m[idx[r], idx[c]] = np.prod([z ** k for z, k in zip(v_values, w.v)])
    return m


def test_finite_shift_fields_commute_numerically():
    # V is central, so any scalar stands in for it
    G = AbelianGroup(0, (2, 3))
    table = build_shift_fields(G)
    v = [cmath.exp(0.7j), cmath.exp(1.9j)]
    mats = {g: _numeric_psi(table, g, v) for g in G.elements()}
    for a in mats.values():
        assert np.allclose(a @ a.conj().T, np.eye(len(a)))
        for b in mats.values():
            assert np.allclose(a @ b, b @ a)
            assert np.allclose(a @ b.conj().T, b.conj().T @ a)


def test_shift_window_error():
    t = build_shift_fields(integers(), 2)
    with pytest.raises(WindowError):
        t.psi((3,))
    with pytest.raises(WindowError):
        t.product((2,), (1,))
    with pytest.raises(WindowError):
        build_shift_fields(integers(), 0)


# ------------------------------------------------------------ LR Q-system

def test_lr_qsystem_z2():
    q, rep = lr_qsystem(SectorSpec.load(SPECS / "z2_boson.json"))
    assert rep.passed
    assert q.x_norm() == 2 and len(q.summands) == 2
    assert q.multiply({(1,): 1}, {(1,): 1}) == {(0,): 1}


def test_lr_single_leg_breaks_commutativity():
    spec = SectorSpec.load(SPECS / "z2_odd_explicit.json")
    assert lr_qsystem(spec)[1].passed
    _, rep = lr_qsystem(spec, single_leg=True)
    bad = {c["condition"] for c in rep.details["certificate"] if not c["ok"]}
    assert bad == {"commutativity"}


def test_lr_needs_finite_group():
    with pytest.raises(UnsupportedGroupError):
        lr_qsystem(z_spec(1))


# ------------------------------------------------------------ spec files

@pytest.mark.parametrize("path", sorted(p.name for p in SPECS.glob("*.json") if "gaussian" not in p.name))
def test_sample_specs_round_trip(path):
    spec = SectorSpec.load(SPECS / path)
    assert SectorSpec.from_json(json.loads(json.dumps(spec.to_json()))) == spec


@pytest.mark.parametrize("bad", [
    {},
    {"group": {"free_rank": 1, "torsion": []}, "kappas": [{"name": "x"}]},
    {"group": {"free_rank": 1, "torsion": []}, "kappas": [{"charge_map": {}}]},
    {"group": {"free_rank": 1, "torsion": []}, "kappas": [{"charge_map": {"0": "abc"}}]},
])
def test_malformed_specs(bad):
    with pytest.raises(SpecError):
        SectorSpec.from_json(bad)
