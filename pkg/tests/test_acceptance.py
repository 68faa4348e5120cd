"""The thirteen acceptance criteria, one test each.

Every test records a ``criterion k: PASS|FAIL`` line; the lines are printed
together at the end of the pytest session (and directly when this file is
run as a script).
"""
import math
import time
from fractions import Fraction

import pytest

from chiralforge import mutations, props, twodim
from chiralforge.fock import gram, partitions
from chiralforge.sectors import (
    AbelianGroup, SectorSpec, build_shift_fields, charged_intertwiner_shiftcheck, check_1d_gluing,
    check_2d_extension, check_shift_fields, cyclic, integers, lr_qsystem,
)
from chiralforge.testfunctions import TestFunction
from chiralforge.vertex import VertexSeries
from oracles import inner_oracle

BUDGETS = {1: 5, 2: 30, 3: 5, 4: 120, 5: 120, 6: 60, 7: 60, 8: 1, 9: 5, 10: 5, 11: 120, 12: 300, 13: 120}


def record(log, k: int, ok: bool, summary: str, start: float):
    elapsed = time.perf_counter() - start
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {summary}  [{elapsed:.2f}s of {BUDGETS[k]}s]"
    log[k] = line
    print(line)
    assert ok, line


def u1(*charges):
    return SectorSpec.u1(integers(), *[[c] for c in charges])


def test_criterion_01_heisenberg(acceptance_log):
    t = time.perf_counter()
    rep = props.check_heisenberg((0, 1), 6, 8)
    record(acceptance_log, 1, rep.passed, f"[J_m,J_n] = m delta, |m|,|n|<=6, charges 0,1, level<=8, "
                                          f"{rep.comparisons} comparisons, worst {rep.worst_violation}", t)


def test_criterion_02_virasoro(acceptance_log):
    t = time.perf_counter()
    rep = props.check_virasoro((0,), 4, 8)
    record(acceptance_log, 2, rep.passed, f"Virasoro c=1, |m|,|n|<=4, level<=8, worst {rep.worst_violation}", t)


def test_criterion_03_gram(acceptance_log):
    t = time.perf_counter()
    rep = props.check_gram(0, 10)
    lvl2 = [int(gram(0, 2).to_dense()[i][i]) for i in range(2)]
    lvl3 = [int(gram(0, 3).to_dense()[i][i]) for i in range(3)]
    oracle_ok = all(gram(0, n).to_dense() == [[inner_oracle(p, q) for q in partitions(n)] for p in partitions(n)]
                    for n in (2, 3))
    ok = rep.passed and lvl2 == [2, 2] and lvl3 == [3, 2, 6] and oracle_ok
    record(acceptance_log, 3, ok, f"levels 0-10 diagonal and positive; level 2 {lvl2}, level 3 {lvl3}, "
                                  f"oracle agreement {oracle_ok}", t)


def test_criterion_04_braiding(acceptance_log):
    t = time.perf_counter()
    pairs = [(1, 1), (1, -1), (1, 2), (Fraction(1, 2), Fraction(1, 2))]
    clean = {p: props.check_braiding(*p, N=4) for p in pairs}
    mutated = {}
    for name in mutations.KNOWN:
        with mutations.mutate(name):
            mutated[name] = props.check_braiding(1, 1, N=4)
    ok = all(r.passed for r in clean.values()) and all(r.worst_violation > 0 for r in mutated.values())
    summary = ", ".join(f"({a},{b}) {r.status}" for (a, b), r in clean.items())
    summary += "; mutations " + ", ".join(f"{n}={r.worst_violation}" for n, r in mutated.items())
    record(acceptance_log, 4, ok, summary, t)


def test_criterion_05_primarity(acceptance_log):
    t = time.perf_counter()
    reps = {a: props.check_primarity(a, 3, 4) for a in (1, 2)}
    record(acceptance_log, 5, all(r.passed for r in reps.values()),
           "primarity alpha=1,2, |m|<=3, cutoff 4: " + ", ".join(f"{a} {r.status}" for a, r in reps.items()), t)


def test_criterion_06_relative_locality(acceptance_log):
    t = time.perf_counter()
    reps = {a: props.check_relative_locality(a, 3, 5) for a in (1, 2)}
    record(acceptance_log, 6, all(r.passed for r in reps.values()),
           "[J_m, Y_s] = alpha Y_{m+s}, |m|<=3, cutoff 5: " + ", ".join(f"{a} {r.status}" for a, r in reps.items()), t)


def test_criterion_07_energy_bound(acceptance_log):
    t = time.perf_counter()
    rep = props.check_energy_bounds(1, 8, tol=1e-9)
    record(acceptance_log, 7, rep.passed,
           f"max truncated ||Y_(1,s)|| = {rep.details['max_norm']:.15f} over {rep.details['blocks']} blocks", t)


def test_criterion_08_sector_certificates(acceptance_log):
    t = time.perf_counter()
    a_ok = check_1d_gluing(SectorSpec.u1(integers(), ["sqrt(2)"])).passed
    a_rej = not check_1d_gluing(u1(1)).passed
    b_ok = check_1d_gluing(u1(1, 1)).passed
    half = Fraction(1, 2)
    c_ok = check_2d_extension(u1(half), u1(-half), "conjugate").passed
    c_rej = not check_2d_extension(u1(half), u1(half), "same-sign").passed
    ok = a_ok and a_rej and b_ok and c_ok and c_rej
    record(acceptance_log, 8, ok, f"(a) alpha^2=2 admitted {a_ok}, alpha^2=1 rejected {a_rej}; (b) two unit "
                                  f"charges admitted {b_ok}; (c) conjugate {c_ok}, same-sign rejected {c_rej}", t)


def test_criterion_09_shift_fields(acceptance_log):
    t = time.perf_counter()
    groups = {"Z": integers(), "Z2": cyclic(2), "Z2xZ3": AbelianGroup(0, (2, 3))}
    results = {}
    for name, G in groups.items():
        table = build_shift_fields(G)
        results[name] = check_shift_fields(table).passed and charged_intertwiner_shiftcheck(table).passed
    record(acceptance_log, 9, all(results.values()),
           "commutation and intertwiner: " + ", ".join(f"{k} {v}" for k, v in results.items()), t)


def test_criterion_10_lr_qsystem(acceptance_log):
    t = time.perf_counter()
    q, rep = lr_qsystem(SectorSpec.u1(cyclic(2), ["sqrt(2)"]))
    conds = {c["condition"] for c in rep.details["certificate"]}
    explicit = SectorSpec.from_json({"group": {"free_rank": 0, "torsion": [2]},
                                     "kappas": [{"name": "odd", "explicit": {"D": {"0": "1/2"},
                                                                             "eps_plus": {"0,0": "1/1"}}}]})
    _, single = lr_qsystem(explicit, single_leg=True)
    failed = {c["condition"] for c in single.details["certificate"] if not c["ok"]}
    ok = rep.passed and {"unit", "associativity", "normalization", "commutativity"} <= conds \
        and q.x_norm() == 2 and failed == {"commutativity"}
    record(acceptance_log, 10, ok, f"Z2 Q-system {rep.status}, X*X = {q.x_norm()}*1; single leg fails {sorted(failed)}", t)


def test_criterion_11_2d_locality(acceptance_log):
    t = time.perf_counter()
    f = twodim.TwoDimField.u1(1)
    rep = twodim.check_2d_locality(f, f, 3)
    phase = rep.details["combined_phase"]
    ok = rep.passed and phase.is_one() and rep.details["coefficient_violation"] == 0
    record(acceptance_log, 11, ok, f"combined phase exp(i pi {phase.q}), coefficient violation "
                                   f"{rep.details['coefficient_violation']} over {rep.comparisons} products", t)


def test_criterion_12_commutator_decay(acceptance_log):
    t = time.perf_counter()
    f = twodim.TwoDimField.u1(Fraction(1, 2))
    h = math.pi / 2

    def g(c):
        return TestFunction.gaussian(center=c, width=0.5)

    space = twodim.commutator_decay(f, f, g(-h), g(h), g(h), g(-h), [4, 6, 8])
    with pytest.warns(twodim.ConfigurationWarning):
        time_ = twodim.commutator_decay(f, f, g(-h), g(-h), g(h), g(h), [4, 6, 8])
    sn, tn = space["norms"], time_["norms"]
    decreasing = all(b < a for a, b in zip(sn, sn[1:]))
    persists = min(tn) > 0.5 * max(tn) and tn[-1] > 10 * sn[-1]
    record(acceptance_log, 12, decreasing and persists,
           "spacelike " + ", ".join(f"{x:.3e}" for x in sn) + "; timelike " + ", ".join(f"{x:.3e}" for x in tn), t)


def test_criterion_13_bound_chain(acceptance_log):
    t = time.perf_counter()
    f = TestFunction.gaussian()
    reps = {n: props.check_commutator_chain(VertexSeries(1), f, 3, n) for n in (6, 8)}
    c6, c8 = reps[6].details["constants"], reps[8].details["constants"]
    finite = all(math.isfinite(c) for c in c6 + c8)
    drift = max(abs(b - a) / max(abs(a), 1e-300) for a, b in zip(c6, c8))
    ok = finite and drift <= 0.10 and all(r.passed for r in reps.values())
    record(acceptance_log, 13, ok, "C_0..C_3 at N=6 " + ", ".join(f"{c:.4f}" for c in c6)
           + "; at N=8 " + ", ".join(f"{c:.4f}" for c in c8) + f"; max relative drift {drift:.2%}", t)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
