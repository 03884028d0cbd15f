"""Flow-based offline charging scheduler.

Each round raises per-interval sink capacities until a maximum flow meets the
remaining demand, parking intervals that turn out subcritical along the way.
The intervals still active at that point are critical: their part of the
schedule is fixed, the network is reduced, and the next round starts on the
rest.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .instance import (
    AtomicPartition,
    InfeasibleInstanceError,
    Instance,
    PowerProfile,
    Schedule,
    aggregate_power,
    build_partition,
    infeasible_jobs,
)
from .maxflow import Flow, FlowNetwork, build_network, flow_from_assignment, max_flow, subcritical_intervals
from .rational import format_rational

log = logging.getLogger(__name__)


class ProgressError(RuntimeError):
    """A round can make no further progress: the remaining demand cannot be routed."""


@dataclass(frozen=True)
class IterationRecord:
    round: int
    iteration: int
    g: Mapping[int, Fraction]
    flow_value: Fraction
    demand: Fraction
    parked: FrozenSet[int]
    active: FrozenSet[int]
    finished: bool
    power: Mapping[int, Fraction]

    def to_json(self) -> dict:
        return {
            "kind": "iteration",
            "round": self.round,
            "iteration": self.iteration,
            "g": {str(i): format_rational(v) for i, v in sorted(self.g.items())},
            "flow_value": format_rational(self.flow_value),
            "demand": format_rational(self.demand),
            "parked": sorted(self.parked),
            "active": sorted(self.active),
            "critical": sorted(self.active) if self.finished else None,
            "power": {str(i): format_rational(v) for i, v in sorted(self.power.items())},
        }


@dataclass(frozen=True)
class RoundRecord:
    round: int
    iterations: int
    critical: FrozenSet[int]
    parked: FrozenSet[int]
    flow: Flow  # end-of-round maximum flow on this round's network
    critical_loads: Tuple[Fraction, ...]
    g: Mapping[int, Fraction]

    def to_json(self) -> dict:
        part = self.flow.network.partition
        profile = []
        for i in sorted(self.critical):
            start, end = part.bounds(i)
            power = self.flow.sink.get(i, Fraction(0)) / part.length(i)
            profile.append([format_rational(start), format_rational(end), format_rational(power)])
        ids = [job.id for job in self.flow.network.instance]
        return {
            "kind": "round",
            "round": self.round,
            "iteration": self.iterations,
            "g": {str(i): format_rational(v) for i, v in sorted(self.g.items())},
            "flow_value": format_rational(self.flow.value),
            "parked": sorted(self.parked),
            "critical": sorted(self.critical),
            "critical_loads": {jid: format_rational(v) for jid, v in zip(ids, self.critical_loads)},
            "profile": profile,
        }


@dataclass(frozen=True)
class FocsResult:
    instance: Instance
    partition: AtomicPartition
    flow: Flow
    schedule: Schedule
    rounds: Tuple[RoundRecord, ...]
    trace: Optional[Tuple[IterationRecord, ...]] = None

    @property
    def profile(self) -> PowerProfile:
        return aggregate_power(self.schedule)

    @property
    def critical_sets(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(r.critical for r in self.rounds)

    @property
    def ranks(self) -> Dict[int, int]:
        return {i: r.round for r in self.rounds for i in r.critical}

    @property
    def iterations(self) -> int:
        return sum(r.iterations for r in self.rounds)

    def trace_records(self) -> List[dict]:
        """Iteration and round records in execution order, JSON-ready."""
        out = []
        iters = list(self.trace or ())
        for rnd in self.rounds:
            out += [rec.to_json() for rec in iters if rec.round == rnd.round]
            out.append(rnd.to_json())
        return out


def initial_sink_caps(remaining_demand: Fraction, active: Iterable[int], partition: AtomicPartition) -> Dict[int, Fraction]:
    """Spread the remaining demand over the active intervals at constant power."""
    active = sorted(active)
    total = partition.total_length(active)
    if total == 0:
        if remaining_demand > 0:
            raise ProgressError("positive demand but no active interval")
        return {}
    level = Fraction(remaining_demand) / total
    return {i: level * partition.length(i) for i in active}


def update_sink_caps(
    g: Mapping[int, Fraction], deficit: Fraction, active: Iterable[int], partition: AtomicPartition
) -> Dict[int, Fraction]:
    """Raise active capacities in proportion to interval length; parked ones stay frozen."""
    active = set(active)
    if deficit <= 0:
        raise ValueError("deficit must be positive")
    total = partition.total_length(active)
    if total == 0:
        raise ProgressError("flow short of demand and every interval is parked")
    step = Fraction(deficit) / total
    out = dict(g)
    for i in active:
        out[i] = out[i] + step * partition.length(i)
    return out


def run_round(
    network: FlowNetwork,
    active: Iterable[int],
    round_index: int = 1,
    job_order: Optional[Sequence[int]] = None,
    interval_order: Optional[Sequence[int]] = None,
) -> Tuple[Flow, FrozenSet[int], FrozenSet[int], List[IterationRecord], Dict[int, Fraction]]:
    """One round on ``network`` whose sink edges are exactly the ``active`` intervals.

    Returns the feasible end-of-round flow, the critical set, the intervals
    parked during the round, per-iteration records and the final capacities.
    """
    part = network.partition
    active = set(active)
    parked: set = set()
    demand = network.demand
    g = initial_sink_caps(demand, active, part)
    records: List[IterationRecord] = []
    k = 1
    while True:
        flow = max_flow(network.with_sink_caps(g), job_order, interval_order)
        sub = subcritical_intervals(flow, active)
        parked |= sub
        active -= sub
        finished = flow.value == demand
        records.append(
            IterationRecord(
                round_index,
                k,
                dict(g),
                flow.value,
                demand,
                frozenset(parked),
                frozenset(active),
                finished,
                {i: flow.sink.get(i, Fraction(0)) / part.length(i) for i in g},
            )
        )
        log.debug("round %d iteration %d: |f|=%s of %s, parked %s", round_index, k, flow.value, demand, sorted(parked))
        if finished:
            if not active:
                raise ProgressError(f"round {round_index} ended without a critical interval")
            return flow, frozenset(active), frozenset(parked), records, g
        g = update_sink_caps(g, demand - flow.value, active, part)
        k += 1
        if k > part.m + 1:
            raise ProgressError(f"round {round_index} exceeded {part.m} iterations")


def restrict_flow(flow: Flow, critical: Iterable[int]) -> Flow:
    """Keep only the flow through critical intervals, back-propagated to the source."""
    critical = set(critical)
    job = {(j, i): f for (j, i), f in flow.job.items() if i in critical}
    return flow_from_assignment(flow.network, job)


def reduce_network(network: FlowNetwork, restricted: Flow, critical: Iterable[int]) -> FlowNetwork:
    """Drop critical columns and charge their load against the source capacities."""
    critical = set(critical)
    src = tuple(c - f for c, f in zip(network.source_caps, restricted.source))
    if any(c < 0 for c in src):
        raise RuntimeError("source capacity became negative during reduction")
    job_caps = {}
    for (j, i), c in network.job_caps.items():
        if i in critical:
            continue
        rest = c - restricted.job.get((j, i), Fraction(0))
        if rest < 0:
            raise RuntimeError("job edge capacity became negative during reduction")
        job_caps[(j, i)] = rest
    sink_caps = {i: c for i, c in network.sink_caps.items() if i not in critical}
    return FlowNetwork(network.instance, network.partition, src, job_caps, sink_caps)


def run_focs(
    instance: Instance,
    trace: bool = False,
    job_order: Optional[Sequence[int]] = None,
    interval_order: Optional[Sequence[int]] = None,
) -> FocsResult:
    """Optimal charging schedule for every increasing strictly convex objective.

    Raises :class:`InfeasibleInstanceError` naming the offending jobs before
    any flow is computed. ``job_order`` / ``interval_order`` only change the
    search order of the max-flow solver.
    """
    bad = infeasible_jobs(instance)
    if bad:
        raise InfeasibleInstanceError(bad)
    part = build_partition(instance)
    network = build_network(instance, part)
    active = set(range(part.m))
    total: Dict[Tuple[int, int], Fraction] = {}
    rounds: List[RoundRecord] = []
    iterations: List[IterationRecord] = []
    r = 1
    while active:
        f_r, critical, parked, records, g = run_round(network, active, r, job_order, interval_order)
        restricted = restrict_flow(f_r, critical)
        for key, f in restricted.job.items():
            total[key] = total.get(key, Fraction(0)) + f
        rounds.append(RoundRecord(r, len(records), critical, parked, f_r, restricted.source, g))
        if trace:
            iterations += records
        network = reduce_network(network, restricted, critical)
        active -= critical
        r += 1
    full = build_network(instance, part)
    final = flow_from_assignment(full, total)
    sinks = {i: final.sink.get(i, Fraction(0)) for i in range(part.m)}
    final = Flow(full.with_sink_caps(sinks), final.source, final.job, final.sink)
    schedule = Schedule(instance, part, {(i, j): f for (j, i), f in total.items()})
    if not schedule.is_complete():
        raise RuntimeError(f"schedule leaves demand unmet: {schedule.shortfall()}")
    return FocsResult(instance, part, final, schedule, tuple(rounds), tuple(iterations) if trace else None)


def rank(result: FocsResult, i: int) -> int:
    """Round (1-based) in which interval ``i`` became critical."""
    return result.ranks[i]
