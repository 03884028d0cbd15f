"""The source-jobs-intervals-sink network and exact maximum flows on it.

Nodes are labelled ``"s"``, ``"t"``, ``("job", j)`` and ``("interval", i)``
with positional indices. An edge is a ``(tail, head)`` pair of labels.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .instance import AtomicPartition, Instance, max_energy
from .rational import as_rational, format_rational

SOURCE = "s"
SINK = "t"

Node = Union[str, Tuple[str, int]]
Edge = Tuple[Node, Node]


def job_node(j: int) -> Node:
    return ("job", j)


def interval_node(i: int) -> Node:
    return ("interval", i)


@dataclass(frozen=True)
class FlowNetwork:
    instance: Instance
    partition: AtomicPartition
    source_caps: Tuple[Fraction, ...]
    job_caps: Mapping[Tuple[int, int], Fraction]  # (j, i) -> cap
    sink_caps: Mapping[int, Fraction]  # only intervals that still have a sink edge

    @property
    def n(self) -> int:
        return len(self.source_caps)

    @property
    def m(self) -> int:
        return self.partition.m

    @property
    def demand(self) -> Fraction:
        return sum(self.source_caps, Fraction(0))

    def edges(self) -> List[Edge]:
        out: List[Edge] = [(SOURCE, job_node(j)) for j in range(self.n)]
        out += [(job_node(j), interval_node(i)) for (j, i) in sorted(self.job_caps)]
        out += [(interval_node(i), SINK) for i in sorted(self.sink_caps)]
        return out

    def capacity(self, edge: Edge) -> Fraction:
        u, v = edge
        if u == SOURCE and isinstance(v, tuple) and v[0] == "job" and 0 <= v[1] < self.n:
            return self.source_caps[v[1]]
        if isinstance(u, tuple) and u[0] == "job" and isinstance(v, tuple) and v[0] == "interval":
            key = (u[1], v[1])
            if key in self.job_caps:
                return self.job_caps[key]
        if v == SINK and isinstance(u, tuple) and u[0] == "interval" and u[1] in self.sink_caps:
            return self.sink_caps[u[1]]
        raise KeyError(f"no edge {edge!r} in network")

    def with_sink_caps(self, sink_caps: Mapping[int, Fraction]) -> "FlowNetwork":
        _check_caps(sink_caps.values())
        return replace(self, sink_caps=dict(sink_caps))


def _check_caps(values: Iterable[Fraction]) -> None:
    for c in values:
        if c < 0:
            raise ValueError(f"negative capacity {c}")


def build_network(
    instance: Instance,
    partition: AtomicPartition,
    source_caps: Optional[Sequence] = None,
    sink_caps: Optional[Mapping[int, object]] = None,
    interval_mask: Optional[Iterable[int]] = None,
) -> FlowNetwork:
    """Network with ``c(s,j)`` from ``source_caps`` (default: job energies),
    ``c(j,I_i) = p_max_j |I_i|`` and sink edges only for ``interval_mask``.

    Intervals in the mask without an entry in ``sink_caps`` get capacity 0.
    """
    if source_caps is None:
        src = tuple(job.energy for job in instance)
    else:
        src = tuple(as_rational(c) for c in source_caps)
    if len(src) != len(instance):
        raise ValueError("one source capacity per job required")
    sink_caps = {i: as_rational(c) for i, c in (sink_caps or {}).items()}
    if interval_mask is None:
        interval_mask = range(partition.m)
    mask = sorted(set(interval_mask))
    for i in mask:
        if not 0 <= i < partition.m:
            raise ValueError(f"interval {i} out of range")
    sinks = {i: sink_caps.get(i, Fraction(0)) for i in mask}
    _check_caps(src)
    _check_caps(sinks.values())
    job_caps = {
        (j, i): max_energy(instance, partition, i, j)
        for j in range(len(instance))
        for i in partition.intervals_of[j]
    }
    return FlowNetwork(instance, partition, src, job_caps, sinks)


@dataclass(frozen=True)
class Flow:
    network: FlowNetwork
    source: Tuple[Fraction, ...]
    job: Mapping[Tuple[int, int], Fraction]  # (j, i) -> flow; missing means 0
    sink: Mapping[int, Fraction]

    @property
    def value(self) -> Fraction:
        return sum(self.source, Fraction(0))

    def get(self, edge: Edge) -> Fraction:
        self.network.capacity(edge)  # raises for unknown edges
        u, v = edge
        if u == SOURCE:
            return self.source[v[1]]
        if v == SINK:
            return self.sink.get(u[1], Fraction(0))
        return self.job.get((u[1], v[1]), Fraction(0))

    def check(self) -> None:
        """Raise AssertionError unless bounds and conservation hold exactly."""
        net = self.network
        for edge in net.edges():
            f = self.get(edge)
            assert 0 <= f <= net.capacity(edge), f"edge {edge} carries {f} outside [0, {net.capacity(edge)}]"
        for key in self.job:
            assert key in net.job_caps, f"flow on missing edge {key}"
        for i in self.sink:
            assert i in net.sink_caps, f"flow on missing sink edge {i}"
        for j in range(net.n):
            out = sum((f for (jj, _), f in self.job.items() if jj == j), Fraction(0))
            assert out == self.source[j], f"conservation fails at job {j}"
        for i in range(net.m):
            inflow = sum((f for (_, ii), f in self.job.items() if ii == i), Fraction(0))
            assert inflow == self.sink.get(i, Fraction(0)), f"conservation fails at interval {i}"


def zero_flow(network: FlowNetwork) -> Flow:
    return Flow(network, tuple(Fraction(0) for _ in range(network.n)), {}, {})


def flow_from_assignment(network: FlowNetwork, job_flow: Mapping[Tuple[int, int], Fraction]) -> Flow:
    """Complete a job->interval assignment into a flow by summing at the terminals."""
    src = [Fraction(0)] * network.n
    sink: Dict[int, Fraction] = {}
    clean = {}
    for (j, i), f in job_flow.items():
        if f:
            clean[(j, i)] = f
            src[j] += f
            sink[i] = sink.get(i, Fraction(0)) + f
    return Flow(network, tuple(src), clean, sink)


def max_flow(
    network: FlowNetwork,
    job_order: Optional[Sequence[int]] = None,
    interval_order: Optional[Sequence[int]] = None,
) -> Flow:
    """Exact maximum flow by shortest augmenting paths (Edmonds-Karp).

    Breadth-first search visits jobs and intervals in ascending index order,
    or in ``job_order`` / ``interval_order`` when given, so the returned flow
    is a deterministic function of the network and the orderings.
    """
    n, m = network.n, network.m
    jobs = list(job_order) if job_order is not None else list(range(n))
    ivs = list(interval_order) if interval_order is not None else list(range(m))
    if sorted(jobs) != list(range(n)) or sorted(ivs) != list(range(m)):
        raise ValueError("orderings must be permutations")
    # node ids: 0 = s, 1..n jobs, n+1..n+m intervals, n+m+1 = t
    s, t = 0, n + m + 1
    jid = lambda j: 1 + j  # noqa: E731
    iid = lambda i: 1 + n + i  # noqa: E731
    residual: Dict[int, Dict[int, Fraction]] = {v: {} for v in range(n + m + 2)}

    def add(u: int, v: int, c: Fraction) -> None:
        residual[u][v] = c
        residual[v].setdefault(u, Fraction(0))

    for j in range(n):
        add(s, jid(j), network.source_caps[j])
    for (j, i), c in network.job_caps.items():
        add(jid(j), iid(i), c)
    for i, c in network.sink_caps.items():
        add(iid(i), t, c)

    rank = {s: 0, t: 1}
    for pos, j in enumerate(jobs):
        rank[jid(j)] = 2 + pos
    for pos, i in enumerate(ivs):
        rank[iid(i)] = 2 + n + pos
    adjacency = {u: sorted(nbrs, key=rank.__getitem__) for u, nbrs in residual.items()}

    while True:
        parent = {s: s}
        queue = deque([s])
        while queue and t not in parent:
            u = queue.popleft()
            for v in adjacency[u]:
                if v not in parent and residual[u][v] > 0:
                    parent[v] = u
                    if v == t:
                        break
                    queue.append(v)
        if t not in parent:
            break
        path = []
        v = t
        while v != s:
            path.append((parent[v], v))
            v = parent[v]
        bottleneck = min(residual[u][v] for u, v in path)
        for u, v in path:
            residual[u][v] -= bottleneck
            residual[v][u] += bottleneck

    source = tuple(network.source_caps[j] - residual[s][jid(j)] for j in range(n))
    job_flow = {}
    for (j, i), c in network.job_caps.items():
        f = c - residual[jid(j)][iid(i)]
        if f:
            job_flow[(j, i)] = f
    sink = {}
    for i, c in network.sink_caps.items():
        f = c - residual[iid(i)][t]
        if f:
            sink[i] = f
    return Flow(network, source, job_flow, sink)


def is_saturated(flow: Flow, edge: Edge) -> bool:
    return flow.get(edge) == flow.network.capacity(edge)


def residual_interval_reachability(flow: Flow) -> Dict[int, FrozenSet[int]]:
    """For each interval, the other intervals reachable in the residual graph
    through job and interval nodes only.

    A step ``I_i -> j`` needs ``f(j, I_i) > 0``; a step ``j -> I_k`` needs
    ``f(j, I_k) < c(j, I_k)``.
    """
    net = flow.network
    back: Dict[int, List[int]] = {i: [] for i in range(net.m)}  # interval -> jobs with positive flow
    fwd: Dict[int, List[int]] = {j: [] for j in range(net.n)}  # job -> intervals with spare capacity
    for (j, i), c in sorted(net.job_caps.items()):
        f = flow.job.get((j, i), Fraction(0))
        if f > 0:
            back[i].append(j)
        if f < c:
            fwd[j].append(i)
    out = {}
    for start in range(net.m):
        seen_jobs: Set[int] = set()
        seen: Set[int] = set()
        stack = [start]
        while stack:
            i = stack.pop()
            for j in back[i]:
                if j in seen_jobs:
                    continue
                seen_jobs.add(j)
                for k in fwd[j]:
                    if k not in seen:
                        seen.add(k)
                        stack.append(k)
        seen.discard(start)
        out[start] = frozenset(seen)
    return out


def subcritical_intervals(flow: Flow, active: Iterable[int]) -> FrozenSet[int]:
    """Active intervals whose sink edge is unsaturated in some maximum flow.

    Starting from the intervals with an unsaturated sink edge, search backwards
    through residual job/interval steps; anything that reaches one of them can
    shed load onto it without changing the flow value.
    """
    net = flow.network
    targets = {i for i, c in net.sink_caps.items() if flow.sink.get(i, Fraction(0)) < c}
    into: Dict[int, List[int]] = {i: [] for i in range(net.m)}  # interval -> jobs with spare capacity there
    loaded: Dict[int, List[int]] = {j: [] for j in range(net.n)}  # job -> intervals it feeds
    for (j, i), c in net.job_caps.items():
        f = flow.job.get((j, i), Fraction(0))
        if f < c:
            into[i].append(j)
        if f > 0:
            loaded[j].append(i)
    reached = set(targets)
    seen_jobs: Set[int] = set()
    queue = deque(sorted(targets))
    while queue:
        i = queue.popleft()
        for j in into[i]:
            if j in seen_jobs:
                continue
            seen_jobs.add(j)
            for k in loaded[j]:
                if k not in reached:
                    reached.add(k)
                    queue.append(k)
    return frozenset(reached.intersection(active))


def _label(node: Node) -> str:
    if isinstance(node, str):
        return node
    kind, idx = node
    return f"j{idx + 1}" if kind == "job" else f"I{idx + 1}"


def to_dot(flow: Flow) -> str:
    """Graphviz text with every edge annotated ``f/c``; for debugging only."""
    lines = ["digraph focs {", "  rankdir=LR;"]
    for edge in flow.network.edges():
        u, v = edge
        label = f"{format_rational(flow.get(edge))}/{format_rational(flow.network.capacity(edge))}"
        lines.append(f'  "{_label(u)}" -> "{_label(v)}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
