"""Per-time-instance graphs linking domains to their resolved infrastructure.

Nodes are typed (DN, IPv4, IPv6, NS, IPPrefix) and identified by
(type, value); edges only ever join a DN node to an infrastructure node, so
domains become linked through shared infrastructure. Graphs are immutable
after construction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .errors import DomainNeverSeenError, EmptySeriesError
from .records import DnsQueryRecord

Node = tuple[str, str]

DN = "DN"
IPV4 = "IPv4"
IPV6 = "IPv6"
NS = "NS"
IP_PREFIX = "IPPrefix"


def dn_node(domain: str) -> Node:
    return (DN, domain)


@dataclass
class TemporalGraph:
    """Undirected bipartite graph of one time instance."""

    time: int
    adjacency: dict[Node, set[Node]] = field(default_factory=dict)
    _diameters: dict[Node, int] = field(default_factory=dict, repr=False)

    @property
    def nodes(self) -> set[Node]:
        return set(self.adjacency)

    def edges(self) -> list[tuple[Node, Node]]:
        out = []
        for node, neighbours in self.adjacency.items():
            if node[0] == DN:
                out.extend((node, other) for other in neighbours)
        return sorted(out)

    def has_node(self, node: Node) -> bool:
        return node in self.adjacency

    def degree(self, node: Node) -> int:
        return len(self.adjacency[node])

    def domains(self) -> list[str]:
        return [value for kind, value in self.adjacency if kind == DN]

    def component(self, node: Node) -> set[Node]:
        """Connected component of ``node`` by breadth-first traversal."""
        seen = {node}
        queue = deque([node])
        while queue:
            current = queue.popleft()
            for neighbour in self.adjacency[current]:
                if neighbour not in seen:
                    seen.add(neighbour)
                    queue.append(neighbour)
        return seen

    def _eccentricity(self, start: Node) -> int:
        depth = {start: 0}
        queue = deque([start])
        furthest = 0
        while queue:
            current = queue.popleft()
            d = depth[current]
            furthest = max(furthest, d)
            for neighbour in self.adjacency[current]:
                if neighbour not in depth:
                    depth[neighbour] = d + 1
                    queue.append(neighbour)
        return furthest

    def component_diameter(self, node: Node) -> int:
        """Largest shortest path within the node's component.

        Computed as the maximum eccentricity over every component member;
        memoized per component since graphs are immutable.
        """
        cached = self._diameters.get(node)
        if cached is not None:
            return cached
        members = self.component(node)
        diameter = max(self._eccentricity(member) for member in members)
        for member in members:
            self._diameters[member] = diameter
        return diameter


def _infra_nodes(record: DnsQueryRecord) -> Iterable[Node]:
    for value in record.ipv4:
        yield (IPV4, value)
    for value in record.ipv6:
        yield (IPV6, value)
    for value in record.ns:
        yield (NS, value)
    if record.ip_prefix:
        yield (IP_PREFIX, record.ip_prefix)


def build_graph(
    records: Sequence[DnsQueryRecord], time: int | None = None
) -> TemporalGraph:
    """Build the graph of all records sharing one time instance."""
    if time is None:
        if not records:
            raise ValueError("build_graph needs a time when records are empty")
        time = records[0].timestamp or 0
    graph = TemporalGraph(time)
    adjacency = graph.adjacency
    for record in records:
        dn = (DN, record.domain)
        dn_neighbours = adjacency.setdefault(dn, set())
        for infra in _infra_nodes(record):
            dn_neighbours.add(infra)
            adjacency.setdefault(infra, set()).add(dn)
    return graph


@dataclass(frozen=True)
class DegreeSeries:
    """The DN node's degree at each time instance where it appears."""

    times: tuple[int, ...]
    degrees: tuple[int, ...]


@dataclass(frozen=True)
class DegreeFeatures:
    change_count_ratio: float
    change_sum_ratio: float
    degree_max: int
    degree_min: int


@dataclass(frozen=True)
class DiameterFeatures:
    diameter_max: int
    diameter_min: int
    diameter_change_count: int
    diff: int


def degree_series(domain: str, graphs: Sequence[TemporalGraph]) -> DegreeSeries:
    """Degree of the DN across the (time-ordered) graphs containing it."""
    node = (DN, domain)
    times = []
    degrees = []
    for graph in graphs:
        if graph.has_node(node):
            times.append(graph.time)
            degrees.append(graph.degree(node))
    if not times:
        raise DomainNeverSeenError(domain)
    return DegreeSeries(tuple(times), tuple(degrees))


def degree_changes(degrees: Sequence[int]) -> list[int]:
    """Per-step nonnegative degree changes.

    The first appearance counts as a change from zero; a decrease is not a
    change, hence the clamp.
    """
    if not degrees:
        return []
    changes = [degrees[0]]
    changes.extend(
        max(degrees[i] - degrees[i - 1], 0) for i in range(1, len(degrees))
    )
    return changes


def degree_features(series: DegreeSeries) -> DegreeFeatures:
    """Change ratios plus degree extremes over a DN's degree series."""
    degrees = series.degrees
    if not degrees:
        raise EmptySeriesError("degree series is empty")
    changes = degree_changes(degrees)
    n = len(degrees)
    return DegreeFeatures(
        change_count_ratio=sum(1 for c in changes if c > 0) / n,
        change_sum_ratio=sum(changes) / n,
        degree_max=max(degrees),
        degree_min=min(degrees),
    )


def diameter_series(domain: str, graphs: Sequence[TemporalGraph]) -> list[int]:
    """Component diameter at each appearance of the DN."""
    node = (DN, domain)
    out = [g.component_diameter(node) for g in graphs if g.has_node(node)]
    if not out:
        raise DomainNeverSeenError(domain)
    return out


def diameter_features(domain: str, graphs: Sequence[TemporalGraph]) -> DiameterFeatures:
    diameters = diameter_series(domain, graphs)
    return diameter_features_from_series(diameters)


def diameter_features_from_series(diameters: Sequence[int]) -> DiameterFeatures:
    if not diameters:
        raise EmptySeriesError("diameter series is empty")
    d_max = max(diameters)
    d_min = min(diameters)
    changes = sum(
        1 for i in range(1, len(diameters)) if diameters[i] != diameters[i - 1]
    )
    return DiameterFeatures(d_max, d_min, changes, d_max - d_min)


def write_edge_list(graph: TemporalGraph, fh: IO[str]) -> None:
    """Debug dump: one edge per line, tab-separated typed endpoints."""
    for (k1, v1), (k2, v2) in graph.edges():
        fh.write(f"{k1}\t{v1}\t{k2}\t{v2}\n")
