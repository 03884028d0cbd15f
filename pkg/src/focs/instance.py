"""Charging jobs, atomic intervals, schedules and power profiles."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

from .rational import RationalLike, as_rational


class InstanceError(ValueError):
    """Malformed instance data."""


class InfeasibleInstanceError(ValueError):
    """Some job cannot receive its energy within its window at its power limit."""

    def __init__(self, job_ids: Sequence[str]):
        self.job_ids = tuple(job_ids)
        super().__init__("infeasible job(s): " + ", ".join(self.job_ids))


class ScheduleError(ValueError):
    """A schedule violates a charging constraint or does not fit its instance."""


@dataclass(frozen=True)
class Job:
    id: str
    arrival: Fraction
    departure: Fraction
    energy: Fraction
    p_max: Fraction

    def __post_init__(self):
        for name in ("arrival", "departure", "energy", "p_max"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        object.__setattr__(self, "id", str(self.id))
        if self.arrival >= self.departure:
            raise InstanceError(f"job {self.id}: arrival must precede departure")
        if self.energy < 0:
            raise InstanceError(f"job {self.id}: negative energy")
        if self.p_max <= 0:
            raise InstanceError(f"job {self.id}: p_max must be positive")

    @property
    def window(self) -> Fraction:
        return self.departure - self.arrival

    @property
    def feasible(self) -> bool:
        return self.energy <= self.p_max * self.window


@dataclass(frozen=True)
class Instance:
    jobs: Tuple[Job, ...]

    def __post_init__(self):
        jobs = tuple(self.jobs)
        object.__setattr__(self, "jobs", jobs)
        if not jobs:
            raise InstanceError("instance has no jobs")
        ids = [j.id for j in jobs]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate job ids")

    @classmethod
    def from_tuples(cls, rows: Iterable[Sequence[RationalLike]], ids: Optional[Sequence[str]] = None) -> "Instance":
        """Build from ``(arrival, departure, energy, p_max)`` rows; ids default to 1, 2, ..."""
        rows = list(rows)
        if ids is None:
            ids = [str(k + 1) for k in range(len(rows))]
        return cls(tuple(Job(jid, *row) for jid, row in zip(ids, rows)))

    def __len__(self) -> int:
        return len(self.jobs)

    def __iter__(self) -> Iterator[Job]:
        return iter(self.jobs)

    def index_of(self, job_id: str) -> int:
        for k, job in enumerate(self.jobs):
            if job.id == job_id:
                return k
        raise KeyError(job_id)

    @property
    def total_energy(self) -> Fraction:
        return sum((j.energy for j in self.jobs), Fraction(0))

    def permuted(self, order: Sequence[int]) -> "Instance":
        return Instance(tuple(self.jobs[k] for k in order))


@dataclass(frozen=True)
class AtomicPartition:
    """Breakpoint-induced intervals ``[t_i, t_{i+1}]`` and job availability.

    ``jobs_at[i]`` lists job indices available in interval ``i`` and
    ``intervals_of[j]`` the interval indices where job ``j`` may charge.
    Both use positions (0-based), not job ids.
    """

    breakpoints: Tuple[Fraction, ...]
    jobs_at: Tuple[Tuple[int, ...], ...]
    intervals_of: Tuple[Tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def lengths(self) -> Tuple[Fraction, ...]:
        b = self.breakpoints
        return tuple(b[i + 1] - b[i] for i in range(self.m))

    def length(self, i: int) -> Fraction:
        return self.breakpoints[i + 1] - self.breakpoints[i]

    def total_length(self, intervals: Iterable[int]) -> Fraction:
        return sum((self.length(i) for i in intervals), Fraction(0))

    def bounds(self, i: int) -> Tuple[Fraction, Fraction]:
        return self.breakpoints[i], self.breakpoints[i + 1]


def build_partition(instance: Instance) -> AtomicPartition:
    times = sorted({t for job in instance for t in (job.arrival, job.departure)})
    m = len(times) - 1
    jobs_at = [[] for _ in range(m)]
    intervals_of = []
    for k, job in enumerate(instance):
        avail = tuple(i for i in range(m) if job.arrival <= times[i] and times[i + 1] <= job.departure)
        intervals_of.append(avail)
        for i in avail:
            jobs_at[i].append(k)
    return AtomicPartition(tuple(times), tuple(map(tuple, jobs_at)), tuple(intervals_of))


def infeasible_jobs(instance: Instance) -> Tuple[str, ...]:
    return tuple(job.id for job in instance if not job.feasible)


def check_feasibility(instance: Instance) -> bool:
    return not infeasible_jobs(instance)


def max_energy(instance: Instance, partition: AtomicPartition, i: int, j: int) -> Fraction:
    """Per-interval energy cap ``p_max * |I_i|`` of job ``j``."""
    return instance.jobs[j].p_max * partition.length(i)


Key = Tuple[int, int]


@dataclass(frozen=True)
class Schedule:
    """Energy ``e[(i, j)]`` charged by job position ``j`` in interval ``i``.

    Missing pairs mean zero. Construction checks availability, non-negativity
    and the per-interval cap; completeness (every job fully served) is a
    separate question answered by :meth:`is_complete`.
    """

    instance: Instance
    partition: AtomicPartition
    e: Mapping[Key, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean: Dict[Key, Fraction] = {}
        for (i, j), value in dict(self.e).items():
            value = as_rational(value)
            if i not in self.partition.intervals_of[j]:
                if value != 0:
                    raise ScheduleError(f"job {self.instance.jobs[j].id} not available in interval {i}")
                continue
            if value < 0:
                raise ScheduleError(f"negative energy for job {self.instance.jobs[j].id} in interval {i}")
            if value > max_energy(self.instance, self.partition, i, j):
                raise ScheduleError(
                    f"job {self.instance.jobs[j].id} exceeds its power limit in interval {i}"
                )
            if value:
                clean[(i, j)] = value
        object.__setattr__(self, "e", clean)

    @classmethod
    def zero(cls, instance: Instance, partition: Optional[AtomicPartition] = None) -> "Schedule":
        return cls(instance, partition or build_partition(instance), {})

    @classmethod
    def from_rows(
        cls, instance: Instance, rows: Mapping[str, Sequence[RationalLike]], partition: Optional[AtomicPartition] = None
    ) -> "Schedule":
        """Dense per-job rows keyed by job id, one entry per atomic interval."""
        partition = partition or build_partition(instance)
        e = {}
        for job_id, row in rows.items():
            j = instance.index_of(job_id)
            if len(row) != partition.m:
                raise ScheduleError(f"row for job {job_id} has {len(row)} entries, expected {partition.m}")
            for i, value in enumerate(row):
                e[(i, j)] = as_rational(value)
        return cls(instance, partition, e)

    def get(self, i: int, j: int) -> Fraction:
        return self.e.get((i, j), Fraction(0))

    def job_total(self, j: int) -> Fraction:
        return sum((self.get(i, j) for i in self.partition.intervals_of[j]), Fraction(0))

    def interval_total(self, i: int) -> Fraction:
        return sum((self.get(i, j) for j in self.partition.jobs_at[i]), Fraction(0))

    def shortfall(self) -> Dict[str, Fraction]:
        """Jobs whose charged energy differs from their demand, with the difference."""
        out = {}
        for j, job in enumerate(self.instance):
            diff = job.energy - self.job_total(j)
            if diff:
                out[job.id] = diff
        return out

    def is_complete(self) -> bool:
        return not self.shortfall()

    def rows(self) -> Dict[str, Tuple[Fraction, ...]]:
        return {
            job.id: tuple(self.get(i, j) for i in range(self.partition.m))
            for j, job in enumerate(self.instance)
        }


@dataclass(frozen=True)
class PowerProfile:
    partition: AtomicPartition
    powers: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "powers", tuple(as_rational(p) for p in self.powers))
        if len(self.powers) != self.partition.m:
            raise ValueError("profile length does not match the partition")
        if any(p < 0 for p in self.powers):
            raise ValueError("negative power")

    def __getitem__(self, i: int) -> Fraction:
        return self.powers[i]

    def __len__(self) -> int:
        return len(self.powers)

    def __iter__(self):
        return iter(self.powers)

    def energy(self) -> Fraction:
        return sum((p * l for p, l in zip(self.powers, self.partition.lengths)), Fraction(0))


def aggregate_power(schedule: Schedule) -> PowerProfile:
    part = schedule.partition
    return PowerProfile(part, tuple(schedule.interval_total(i) / part.length(i) for i in range(part.m)))


Number = Union[Fraction, float]


@dataclass(frozen=True)
class Objective:
    """Time-weighted power sum ``sum_i |I_i| * p_i ** alpha`` with ``alpha > 1``.

    Integer exponents keep everything exact; other exponents fall back to
    floats in :meth:`value` and :meth:`derivative`.
    """

    alpha: Fraction = Fraction(2)

    def __post_init__(self):
        alpha = as_rational(self.alpha)
        if alpha <= 1:
            raise ValueError("alpha must exceed 1")
        object.__setattr__(self, "alpha", alpha)

    @property
    def exact(self) -> bool:
        return self.alpha.denominator == 1

    def _pow(self, x: Fraction, exponent: Fraction) -> Number:
        if exponent.denominator == 1:
            return x ** int(exponent)
        return float(x) ** float(exponent)

    def derivative(self, power: Fraction) -> Number:
        """Partial derivative of the objective with respect to one ``e_{i,j}``.

        The interval length cancels: ``d/de |I| (E/|I|)^a = a (E/|I|)^(a-1)``.
        """
        if self.exact:
            return self.alpha * power ** (int(self.alpha) - 1)
        return float(self.alpha) * float(power) ** float(self.alpha - 1)


def objective_value(profile: PowerProfile, obj: Objective = Objective()) -> Number:
    total: Number = Fraction(0) if obj.exact else 0.0
    for p, length in zip(profile.powers, profile.partition.lengths):
        total += (length if obj.exact else float(length)) * obj._pow(p, obj.alpha)
    return total
