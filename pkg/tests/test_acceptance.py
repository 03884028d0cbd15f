"""Exit criteria, one test per criterion, each at its stated tolerance.

All comparisons are exact rational equality; runtimes are wall-clock limits.
"""
import random
import time
from fractions import Fraction

import pytest

from focs import (
    InfeasibleInstanceError,
    Instance,
    Objective,
    Schedule,
    ScheduleError,
    aggregate_power,
    build_partition,
    check_kkt,
    objective_value,
    oracle_solve,
    recover_duals,
    run_focs,
)
from focs import algorithm
from focs.generate import random_instance
from focs.instance import max_energy
from focs.verification import (
    certificate_failures,
    check_isolation,
    check_lemma1_equivalence,
    check_monotonicity,
)

from factories import enumerable_instances, fig1, fig4, random_schedule

F = Fraction


def kkt_family(count=500, seed=2024):
    """Random feasible instances with up to 8 jobs and mixed rational data."""
    rng = random.Random(seed)
    return [
        random_instance(
            rng.randint(1, 8),
            horizon=rng.randint(1, 12),
            rng=rng,
            p_max_choices=(1, 2, 3, "3/2", "7/3"),
            time_step=rng.choice([1, "1/2"]),
            energy_step="1/4",
        )
        for _ in range(count)
    ]


@pytest.fixture(scope="module")
def family():
    start = time.perf_counter()
    results = [(inst, run_focs(inst)) for inst in kkt_family()]
    return results, time.perf_counter() - start


@pytest.fixture(scope="module")
def small_family():
    return enumerable_instances(100, seed=77)


def test_1_fig1_golden(acceptance):
    start = time.perf_counter()
    res = run_focs(fig1())
    elapsed = time.perf_counter() - start
    # the limit-free flat profile needs 2 units in I_1, where only job 1 (cap 1) is present
    with pytest.raises(ScheduleError):
        Schedule.from_rows(fig1(), {"1": [2, 0], "2": [0, 2]})
    part = build_partition(fig1())
    flat_infeasible = sum(max_energy(fig1(), part, 0, j) for j in part.jobs_at[0]) < 2 * part.length(0)
    ok = res.profile.powers == (1, 3) and flat_infeasible and elapsed < 1
    acceptance(1, ok, f"profile {tuple(map(str, res.profile.powers))}, flat (2,2) infeasible={flat_infeasible}, {elapsed:.3f}s")
    assert ok


def test_2_fig4_golden_trace(acceptance):
    start = time.perf_counter()
    res = run_focs(fig4(), trace=True)
    elapsed = time.perf_counter() - start
    t = res.trace
    r1, r2 = res.rounds
    checks = {
        "r1k1 g=4/3": t[0].g == {0: F(4, 3), 1: F(4, 3), 2: F(4, 3)},
        "r1k1 |f|=10/3": t[0].flow_value == F(10, 3),
        "r1k1 parked {I1,I3}": t[0].parked == {0, 2},
        "r1k2 g(I2)=2": t[1].round == 1 and t[1].g[1] == 2,
        "r1 critical {I2}": r1.critical == {1},
        "r1 critical load (0,2)": r1.critical_loads == (0, 2),
        "r2 g=1": t[2].round == 2 and t[2].g == {0: 1, 2: 1},
        "r2 critical {I1,I3}": r2.critical == {0, 2},
        "profile (1,2,1)": res.profile.powers == (1, 2, 1),
        "runtime < 1s": elapsed < 1,
    }
    failed = [k for k, v in checks.items() if not v]
    acceptance(2, not failed, f"{len(checks) - len(failed)}/{len(checks)} trace checks, {elapsed:.3f}s" + (f", failed {failed}" if failed else ""))
    assert not failed


def test_3_oracle_equivalence(acceptance, small_family):
    start = time.perf_counter()
    mismatches = []
    for inst, delta in small_family:
        focs_val = objective_value(run_focs(inst).profile, Objective(2))
        oracle_val = objective_value(aggregate_power(oracle_solve(inst, Objective(2), delta)), Objective(2))
        if focs_val != oracle_val:
            mismatches.append((inst, focs_val, oracle_val))
    elapsed = time.perf_counter() - start
    sizes_ok = all(len(i) <= 3 and build_partition(i).m <= 4 for i, _ in small_family)
    ok = not mismatches and sizes_ok and len(small_family) == 100 and elapsed < 60
    acceptance(3, ok, f"{len(small_family) - len(mismatches)}/100 exact matches with the grid oracle, {elapsed:.2f}s")
    assert ok


def test_4_kkt_suite(acceptance, family):
    results, solve_time = family
    start = time.perf_counter()
    bad = []
    for inst, res in results:
        rep = check_kkt(res.schedule)
        cert = recover_duals(res.schedule, Objective(2))
        if not (rep.passed and cert.valid and not certificate_failures(res.schedule, cert, Objective(2))):
            bad.append(inst)
    elapsed = solve_time + time.perf_counter() - start
    ok = not bad and len(results) == 500 and max(len(i) for i, _ in results) <= 8 and elapsed < 60
    acceptance(4, ok, f"{500 - len(bad)}/500 pass KKT with exact certificates, {elapsed:.2f}s")
    assert ok


def test_5_structural_lemmas(acceptance, family):
    results, _ = family
    mono = sum(check_monotonicity(res) for _, res in results)
    iso = sum(all(check_isolation(r.flow, r.critical, r.parked) for r in res.rounds) for _, res in results)
    rng = random.Random(55)
    lemma1 = sum(check_lemma1_equivalence(random_schedule(results[k % 500][0], rng)) for k in range(200))
    ok = mono == 500 and iso == 500 and lemma1 == 200
    acceptance(5, ok, f"monotonicity {mono}/500, isolation {iso}/500, work-transfer iff residual path {lemma1}/200")
    assert ok


def test_6_complexity_bounds(acceptance, family, small_family):
    results, _ = family
    results = results + [(inst, run_focs(inst)) for inst, _ in small_family]
    worst_rounds = max(Fraction(len(res.rounds), res.partition.m) for _, res in results)
    worst_iters = max(Fraction(r.iterations, res.partition.m) for _, res in results for r in res.rounds)
    ok = worst_rounds <= 1 and worst_iters <= 1
    acceptance(6, ok, f"max rounds/m = {worst_rounds}, max iterations-per-round/m = {worst_iters} over {len(results)} instances")
    assert ok


def test_7_uniqueness_and_objective_independence(acceptance, family, small_family):
    results, _ = family
    rng = random.Random(7)
    perm_ok = 0
    for inst, res in results[:50]:
        order = list(range(len(inst)))
        rng.shuffle(order)
        jo = list(range(len(inst)))
        io = list(range(res.partition.m))
        rng.shuffle(jo)
        rng.shuffle(io)
        same = run_focs(inst.permuted(order)).profile.powers == res.profile.powers
        same &= run_focs(inst, job_order=jo, interval_order=io).profile.powers == res.profile.powers
        perm_ok += same
    shared = 0
    for inst, delta in small_family[:50]:
        target = run_focs(inst).profile.powers
        p2 = aggregate_power(oracle_solve(inst, Objective(2), delta)).powers
        p3 = aggregate_power(oracle_solve(inst, Objective(3), delta)).powers
        shared += p2 == p3 == target
    ok = perm_ok == 50 and shared == 50
    acceptance(7, ok, f"permutation-invariant profiles {perm_ok}/50, oracle alpha=2/alpha=3 share FOCS profile {shared}/50")
    assert ok


def test_8_feasibility_contract(acceptance, family, monkeypatch):
    results, _ = family
    violations = 0
    for inst, res in results:
        s = res.schedule
        part = s.partition
        for j, job in enumerate(inst):
            violations += s.job_total(j) != job.energy
            for i in part.intervals_of[j]:
                violations += not (0 <= s.get(i, j) <= max_energy(inst, part, i, j))
        violations += any(i not in part.intervals_of[j] for (i, j) in s.e)

    def no_round(*args, **kwargs):
        raise AssertionError("round started on an infeasible instance")

    monkeypatch.setattr(algorithm, "run_round", no_round)
    bad = Instance.from_tuples([(0, 4, 3, 1), (1, 2, 3, 2), (0, 1, 1, 1)], ids=["ev1", "ev2", "ev3"])
    try:
        run_focs(bad)
        rejected = None
    except InfeasibleInstanceError as exc:
        rejected = exc.job_ids
    ok = violations == 0 and rejected == ("ev2",)
    acceptance(8, ok, f"{violations} constraint violations over 500 schedules; infeasible instance rejected naming {rejected}")
    assert ok
