"""Optimality certificates for charging schedules.

Everything here works on a :class:`~focs.instance.Schedule` alone and never
calls the scheduler, so it can certify (or refute) any candidate, including
schedules read from disk.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

import numpy as np

from .instance import (
    Instance,
    Objective,
    Schedule,
    ScheduleError,
    aggregate_power,
    build_partition,
    max_energy,
)
from .maxflow import Flow, build_network, flow_from_assignment, residual_interval_reachability
from .rational import format_rational

Number = Union[Fraction, float]


# -- work-transferability -----------------------------------------------------

def work_transferable(schedule: Schedule, i: int, k: int) -> bool:
    """Some job charging in ``i`` has spare capacity in ``k``."""
    if i == k:
        raise ValueError("intervals must differ")
    inst, part = schedule.instance, schedule.partition
    shared = set(part.jobs_at[i]).intersection(part.jobs_at[k])
    return any(
        schedule.get(i, j) > 0 and schedule.get(k, j) < max_energy(inst, part, k, j) for j in sorted(shared)
    )


def work_transferable_relation(schedule: Schedule) -> Dict[int, FrozenSet[int]]:
    m = schedule.partition.m
    return {i: frozenset(k for k in range(m) if k != i and work_transferable(schedule, i, k)) for i in range(m)}


def _closure(relation: Dict[int, FrozenSet[int]]) -> Dict[int, FrozenSet[int]]:
    out = {}
    for start in relation:
        seen = set()
        stack = list(relation[start])
        while stack:
            k = stack.pop()
            if k in seen:
                continue
            seen.add(k)
            stack.extend(relation[k])
        seen.discard(start)
        out[start] = frozenset(seen)
    return out


def work_transferable_closure(schedule: Schedule) -> Dict[int, FrozenSet[int]]:
    return _closure(work_transferable_relation(schedule))


def schedule_flow(schedule: Schedule) -> Flow:
    """The flow carrying the schedule, on a network whose terminal edges it saturates."""
    inst, part = schedule.instance, schedule.partition
    net = build_network(
        inst,
        part,
        source_caps=[schedule.job_total(j) for j in range(len(inst))],
        sink_caps={i: schedule.interval_total(i) for i in range(part.m)},
    )
    return flow_from_assignment(net, {(j, i): f for (i, j), f in schedule.e.items()})


def check_lemma1_equivalence(schedule: Schedule) -> bool:
    """Direct relation vs. two-step residual paths, and closure vs. residual reachability."""
    flow = schedule_flow(schedule)
    net = flow.network
    direct = work_transferable_relation(schedule)
    for i in range(net.m):
        one_step = set()
        for (j, a), f in flow.job.items():
            if a != i or f <= 0:
                continue
            for k in schedule.partition.intervals_of[j]:
                if k != i and flow.job.get((j, k), Fraction(0)) < net.job_caps[(j, k)]:
                    one_step.add(k)
        if one_step != direct[i]:
            return False
    return _closure(direct) == residual_interval_reachability(flow)


# -- KKT conditions -----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    condition: str  # "KKT1" | "KKT2" | "KKT3"
    job: str
    intervals: Tuple[int, int]
    magnitude: Number

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "job": self.job,
            "intervals": list(self.intervals),
            "magnitude": _fmt(self.magnitude),
        }


@dataclass(frozen=True)
class KktReport:
    """Per-job split of the availability window into idle (``zero``),
    partial (``partial``) and full-power (``full``) intervals, plus violations."""

    zero: Dict[str, FrozenSet[int]]
    partial: Dict[str, FrozenSet[int]]
    full: Dict[str, FrozenSet[int]]
    violations: Tuple[Violation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations

    def condition_passed(self, condition: str) -> bool:
        return all(v.condition != condition for v in self.violations)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "conditions": {c: self.condition_passed(c) for c in ("KKT1", "KKT2", "KKT3")},
            "violations": [v.to_json() for v in self.violations],
            "classes": {
                jid: {
                    "zero": sorted(self.zero[jid]),
                    "partial": sorted(self.partial[jid]),
                    "full": sorted(self.full[jid]),
                }
                for jid in self.zero
            },
        }


def _fmt(x: Number) -> str:
    return format_rational(x) if isinstance(x, Fraction) else repr(float(x))


class _Cmp:
    """Exact comparisons, or relative-tolerance ones for float-derived input."""

    def __init__(self, tol: Optional[float]):
        self.tol = tol

    def _slack(self, a, b) -> float:
        return self.tol * max(1.0, abs(float(a)), abs(float(b)))

    def lt(self, a, b) -> bool:
        if self.tol is None:
            return a < b
        return float(b) - float(a) > self._slack(a, b)

    def eq(self, a, b) -> bool:
        if self.tol is None:
            return a == b
        return abs(float(a) - float(b)) <= self._slack(a, b)


def _classify(schedule: Schedule, cmp: _Cmp):
    inst, part = schedule.instance, schedule.partition
    zero, partial, full = {}, {}, {}
    for j, job in enumerate(inst):
        z, p, f = set(), set(), set()
        for i in part.intervals_of[j]:
            e, cap = schedule.get(i, j), max_energy(inst, part, i, j)
            if cmp.eq(e, 0):
                z.add(i)
            elif cmp.eq(e, cap):
                f.add(i)
            else:
                p.add(i)
        zero[job.id], partial[job.id], full[job.id] = frozenset(z), frozenset(p), frozenset(f)
    return zero, partial, full


def _require_complete(schedule: Schedule, cmp: _Cmp) -> None:
    for j, job in enumerate(schedule.instance):
        if not cmp.eq(schedule.job_total(j), job.energy):
            raise ScheduleError(
                f"job {job.id} receives {format_rational(schedule.job_total(j))} of {format_rational(job.energy)}"
            )


def check_kkt(schedule: Schedule, tol: Optional[float] = None) -> KktReport:
    """Check the per-job ordering full <= partial <= idle of interval powers.

    KKT1: all partial intervals of a job share one power level.
    KKT2: idle intervals are at least as high as any interval the job charges in.
    KKT3: full-power intervals are no higher than the partial level.

    ``tol`` switches to relative-tolerance comparisons (e.g. ``1e-9``) for
    schedules that came from floating-point sources.
    """
    cmp = _Cmp(tol)
    _require_complete(schedule, cmp)
    power = aggregate_power(schedule).powers
    zero, partial, full = _classify(schedule, cmp)
    violations: List[Violation] = []
    for job in schedule.instance:
        Z, P, M = sorted(zero[job.id]), sorted(partial[job.id]), sorted(full[job.id])
        if P:
            ref = P[0]
            for i in P[1:]:
                if not cmp.eq(power[i], power[ref]):
                    violations.append(Violation("KKT1", job.id, (ref, i), abs(power[i] - power[ref])))
        for z in Z:
            for c in P + M:
                if cmp.lt(power[z], power[c]):
                    violations.append(Violation("KKT2", job.id, (z, c), power[c] - power[z]))
        for f in M:
            for q in P:
                if cmp.lt(power[q], power[f]):
                    violations.append(Violation("KKT3", job.id, (f, q), power[f] - power[q]))
    return KktReport(zero, partial, full, tuple(violations))


# -- dual certificate ---------------------------------------------------------

@dataclass(frozen=True)
class DualCertificate:
    """Multipliers for demand (``delta``), non-negativity (``gamma``) and the
    power limit (``zeta``). ``gamma``/``zeta`` are keyed by ``(interval, job id)``.

    ``failures`` lists ``(component, interval, job id, value)`` entries for
    every multiplier or stationarity residual that breaks the conditions; a
    certificate with no failures proves optimality.
    """

    delta: Dict[str, Number]
    gamma: Dict[Tuple[int, str], Number]
    zeta: Dict[Tuple[int, str], Number]
    failures: Tuple[Tuple[str, Optional[int], str, Number], ...] = field(default=())

    @property
    def valid(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "delta": {jid: _fmt(v) for jid, v in self.delta.items()},
            "gamma": [{"interval": i, "job": jid, "value": _fmt(v)} for (i, jid), v in sorted(self.gamma.items())],
            "zeta": [{"interval": i, "job": jid, "value": _fmt(v)} for (i, jid), v in sorted(self.zeta.items())],
            "failures": [
                {"component": c, "interval": i, "job": jid, "value": _fmt(v)} for c, i, jid, v in self.failures
            ],
        }


def recover_duals(schedule: Schedule, obj: Objective = Objective(), tol: Optional[float] = None) -> DualCertificate:
    """Solve the stationarity system for the multipliers.

    ``delta_j`` is the marginal cost at any partial interval of job ``j``; with
    no partial interval it is the largest marginal cost over the job's
    full-power intervals (zero if the job never charges). ``gamma`` lives on
    idle intervals and ``zeta`` on full-power ones; negative values are kept
    and reported as failures.
    """
    cmp = _Cmp(tol)
    _require_complete(schedule, cmp)
    power = aggregate_power(schedule).powers
    zero, partial, full = _classify(schedule, cmp)
    grad = [obj.derivative(p) for p in power]
    delta, gamma, zeta = {}, {}, {}
    failures = []
    for job in schedule.instance:
        P, M, Z = sorted(partial[job.id]), sorted(full[job.id]), sorted(zero[job.id])
        if P:
            d = grad[P[0]]
        elif M:
            d = max(grad[i] for i in M)
        else:
            d = 0 * grad[0]
        delta[job.id] = d
        if cmp.lt(d, 0):
            failures.append(("delta", None, job.id, d))
        for i in Z:
            gamma[(i, job.id)] = grad[i] - d
            if cmp.lt(gamma[(i, job.id)], 0):
                failures.append(("gamma", i, job.id, gamma[(i, job.id)]))
        for i in M:
            zeta[(i, job.id)] = d - grad[i]
            if cmp.lt(zeta[(i, job.id)], 0):
                failures.append(("zeta", i, job.id, zeta[(i, job.id)]))
        for i in P[1:]:
            if not cmp.eq(grad[i], d):
                failures.append(("stationarity", i, job.id, grad[i] - d))
    return DualCertificate(delta, gamma, zeta, tuple(failures))


def certificate_failures(
    schedule: Schedule, cert: DualCertificate, obj: Objective = Objective(), tol: Optional[float] = None
) -> List[str]:
    """Check a certificate against primal feasibility, dual sign constraints,
    complementary slackness and stationarity, independently of how it was built."""
    cmp = _Cmp(tol)
    inst, part = schedule.instance, schedule.partition
    power = aggregate_power(schedule).powers
    problems = []
    for j, job in enumerate(inst):
        total = schedule.job_total(j)
        if cmp.lt(total, job.energy):
            problems.append(f"demand of job {job.id} unmet")
        d = cert.delta.get(job.id, 0)
        if cmp.lt(d, 0):
            problems.append(f"delta[{job.id}] negative")
        if not cmp.eq(d * (job.energy - total), 0):
            problems.append(f"slackness fails for delta[{job.id}]")
        for i in part.intervals_of[j]:
            e, cap = schedule.get(i, j), max_energy(inst, part, i, j)
            g = cert.gamma.get((i, job.id), 0)
            z = cert.zeta.get((i, job.id), 0)
            if cmp.lt(g, 0) or cmp.lt(z, 0):
                problems.append(f"negative multiplier at ({i}, {job.id})")
            if not cmp.eq(g * e, 0):
                problems.append(f"slackness fails for gamma at ({i}, {job.id})")
            if not cmp.eq(z * (cap - e), 0):
                problems.append(f"slackness fails for zeta at ({i}, {job.id})")
            if not cmp.eq(obj.derivative(power[i]) - d - g + z, 0):
                problems.append(f"stationarity fails at ({i}, {job.id})")
    return problems


# -- structural checks on scheduler output ------------------------------------

def check_monotonicity(result) -> bool:
    """Every interval of an earlier rank carries strictly more power than any later one."""
    power = result.profile.powers
    by_rank: Dict[int, List[Fraction]] = {}
    for i, r in result.ranks.items():
        by_rank.setdefault(r, []).append(power[i])
    ranks = sorted(by_rank)
    for a, b in zip(ranks, ranks[1:]):
        later = [p for r in ranks if r >= b for p in by_rank[r]]
        if min(by_rank[a]) <= max(later):
            return False
    return True


def check_isolation(round_flow: Flow, critical: Iterable[int], parked: Iterable[int]) -> bool:
    reach = residual_interval_reachability(round_flow)
    parked = set(parked)
    return all(not (reach[i] & parked) for i in critical)


# -- brute-force oracle -------------------------------------------------------

class OracleTooLargeError(ValueError):
    """Enumeration would exceed the candidate budget."""


def _compositions(total: int, caps: List[int]) -> List[Tuple[int, ...]]:
    if not caps:
        return [()] if total == 0 else []
    out = []
    rest_cap = sum(caps[1:])
    for first in range(max(0, total - rest_cap), min(caps[0], total) + 1):
        out += [(first,) + tail for tail in _compositions(total - first, caps[1:])]
    return out


def _units(value: Fraction, delta: Fraction, what: str, rounding) -> int:
    q = value / delta
    if q.denominator != 1:
        warnings.warn(f"{what} = {format_rational(value)} is not a multiple of the grid step; rounded", stacklevel=3)
    return rounding(q)


def oracle_candidate_count(instance: Instance, delta) -> int:
    return math.prod(len(opts) for opts in _grid_options(instance, Fraction(delta))[0])


def _grid_options(instance: Instance, delta: Fraction):
    part = build_partition(instance)
    options = []
    for j, job in enumerate(instance):
        units = _units(job.energy, delta, f"energy of job {job.id}", round)
        avail = list(part.intervals_of[j])
        caps = [_units(max_energy(instance, part, i, j), delta, f"limit of job {job.id}", math.floor) for i in avail]
        rows = []
        for comp in _compositions(units, caps):
            row = [0] * part.m
            for i, u in zip(avail, comp):
                row[i] = u
            rows.append(row)
        if not rows:
            raise ValueError(f"job {job.id} has no grid-feasible allocation")
        options.append(rows)
    return options, part


def oracle_solve(
    instance: Instance, obj: Objective = Objective(), delta="1/4", max_candidates: int = 10**7
) -> Schedule:
    """Minimise the objective over every schedule whose energies are multiples of ``delta``.

    Pure enumeration; meant for a handful of jobs and intervals. Demands that
    are not grid multiples are rounded with a warning. The grid optimum exceeds
    the true optimum by at most :func:`oracle_gap_bound` when demands and
    limits are grid-aligned.
    """
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("grid step must be positive")
    options, part = _grid_options(instance, delta)
    counts = [len(o) for o in options]
    if math.prod(counts) > max_candidates:
        raise OracleTooLargeError(f"{math.prod(counts)} candidate schedules exceed the limit of {max_candidates}")

    lengths = np.array([float(l) for l in part.lengths])
    alpha = float(obj.alpha)
    weights = float(delta) ** alpha * lengths ** (1.0 - alpha)

    outer = int(np.argmax(counts))
    others = [k for k in range(len(options)) if k != outer]
    rest = np.zeros((1, part.m), dtype=np.int64)
    for k in others:
        arr = np.asarray(options[k], dtype=np.int64)
        rest = (rest[:, None, :] + arr[None, :, :]).reshape(-1, part.m)
    outer_arr = np.asarray(options[outer], dtype=np.int64)

    best = math.inf
    near: Dict[Tuple[int, ...], Tuple[int, int]] = {}
    for a, row in enumerate(outer_arr):
        sums = rest + row
        scores = (sums.astype(np.float64) ** alpha) @ weights
        local = float(scores.min())
        if local > best * (1 + 1e-9) + 1e-12:
            continue
        best = min(best, local)
        for b in np.flatnonzero(scores <= best * (1 + 1e-9) + 1e-12):
            key = tuple(int(x) for x in sums[b])
            near.setdefault(key, (a, int(b)))

    def exact(units: Tuple[int, ...]) -> Number:
        profile = [Fraction(u) * delta / l for u, l in zip(units, part.lengths)]
        return sum(
            (l * (p ** int(obj.alpha)) if obj.exact else float(l) * float(p) ** alpha)
            for l, p in zip(part.lengths, profile)
        )

    threshold = best * (1 + 1e-9) + 1e-12
    candidates = [u for u in near if float(exact(u)) <= threshold * (1 + 1e-9)]
    winner = min(candidates, key=exact)
    a, b = near[winner]
    picks = {outer: a}
    if others:
        for k, idx in zip(others, np.unravel_index(b, [counts[k] for k in others])):
            picks[k] = int(idx)
    e = {}
    for j, idx in picks.items():
        for i, u in enumerate(options[j][idx]):
            if u:
                e[(i, j)] = u * delta
    return Schedule(instance, part, e)


def oracle_gap_bound(instance: Instance, obj: Objective, delta) -> float:
    """Upper bound on (grid optimum - true optimum) for a grid-aligned instance.

    Rounding an optimal flow to the grid moves each interval's energy by less
    than one step, so each power moves by less than ``delta / |I_i|``; the
    objective's local Lipschitz constant then bounds the gap.
    """
    delta = float(Fraction(delta))
    part = build_partition(instance)
    alpha = float(obj.alpha)
    bound = 0.0
    for i in range(part.m):
        top = sum(float(instance.jobs[j].p_max) for j in part.jobs_at[i]) + delta / float(part.length(i))
        bound += alpha * top ** (alpha - 1) * delta
    return bound
