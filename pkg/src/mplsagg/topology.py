"""Network graph, link-state database and shortest-path trees.

Nodes are dense integer ids. Every link is directed and carries its own
capacity, delay and base (IGP) metric, so asymmetric metrics are expressed
naturally. The LSDB overlays a mutable metric class on each directed link.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union


class TopologyError(ValueError):
    """Raised for malformed topology documents."""


class ContractViolation(RuntimeError):
    """A caller broke an operation precondition."""


class NodeRole(enum.Enum):
    PE = "PE"
    P = "P"


class MetricClass(enum.IntEnum):
    NORM = 0
    WARN = 1
    CONG = 2


@dataclass(frozen=True)
class MetricValues:
    """Absolute weights for the WARN and CONG classes.

    A NORM link uses its own base metric (the default IGP metric from the
    topology file). ``norm`` is kept for reporting and for validation of the
    ordering NORM < WARN < CONG.
    """

    norm: int = 1
    warn: int = 1000
    cong: int = 65535

    def __post_init__(self) -> None:
        if not (1 <= self.norm < self.warn < self.cong):
            raise ValueError(
                f"metric values must satisfy 1 <= NORM < WARN < CONG, got "
                f"{self.norm}/{self.warn}/{self.cong}"
            )


@dataclass(frozen=True)
class DirectedLink:
    src: int
    dst: int
    capacity: float  # bits/s
    delay: float  # seconds
    base_metric: int = 1

    @property
    def key(self) -> tuple[int, int]:
        return (self.src, self.dst)


LinkRef = Union[DirectedLink, tuple[int, int], int]


@dataclass
class Topology:
    roles: list[NodeRole]
    links: list[DirectedLink]
    index: dict[tuple[int, int], int] = field(init=False, repr=False)
    out_links: list[list[int]] = field(init=False, repr=False)
    in_links: list[list[int]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.roles)
        self.index = {}
        self.out_links = [[] for _ in range(n)]
        self.in_links = [[] for _ in range(n)]
        for i, link in enumerate(self.links):
            if not (0 <= link.src < n and 0 <= link.dst < n):
                raise TopologyError(f"link {link.key} references unknown node")
            if link.key in self.index:
                raise TopologyError(f"duplicate link {link.key}")
            self.index[link.key] = i
            self.out_links[link.src].append(i)
            self.in_links[link.dst].append(i)

    @property
    def num_nodes(self) -> int:
        return len(self.roles)

    @property
    def pes(self) -> list[int]:
        return [i for i, r in enumerate(self.roles) if r is NodeRole.PE]

    @property
    def p_nodes(self) -> list[int]:
        return [i for i, r in enumerate(self.roles) if r is NodeRole.P]

    def is_pe(self, node: int) -> bool:
        return 0 <= node < len(self.roles) and self.roles[node] is NodeRole.PE

    def link_index(self, ref: LinkRef) -> int:
        if isinstance(ref, int):
            if not 0 <= ref < len(self.links):
                raise ContractViolation(f"unknown link index {ref}")
            return ref
        key = ref.key if isinstance(ref, DirectedLink) else tuple(ref)
        try:
            return self.index[key]
        except KeyError:
            raise ContractViolation(f"unknown link {key}") from None

    def link_between(self, src: int, dst: int) -> int:
        return self.link_index((src, dst))


class Lsdb:
    """Current metric class of every directed link, initially NORM."""

    def __init__(self, topology: Topology, values: MetricValues | None = None):
        self.topology = topology
        self.values = values or MetricValues()
        self.current: list[MetricClass] = [MetricClass.NORM] * len(topology.links)

    def weight(self, link: int) -> int:
        cls = self.current[link]
        if cls is MetricClass.NORM:
            return self.topology.links[link].base_metric
        return self.values.warn if cls is MetricClass.WARN else self.values.cong

    def weights(self) -> list[int]:
        return [self.weight(i) for i in range(len(self.current))]

    def metric_of(self, link: LinkRef) -> MetricClass:
        return self.current[self.topology.link_index(link)]

    def copy(self) -> "Lsdb":
        other = Lsdb(self.topology, self.values)
        other.current = list(self.current)
        return other


def set_metric(lsdb: Lsdb, link: LinkRef, cls: MetricClass) -> bool:
    """Replace the metric class of ``link``; return True if it changed."""
    i = lsdb.topology.link_index(link)
    if lsdb.current[i] is cls:
        return False
    lsdb.current[i] = cls
    return True


@dataclass(frozen=True)
class SptTree:
    """Shortest-path tree.

    For a reverse tree ``next_hop[u]`` is u's successor toward the root. For a
    forward tree (legacy routing) it is u's predecessor on the path from the
    root, so following it from any node also walks back to the root.
    """

    root: int
    next_hop: dict[int, int]
    dist: dict[int, int]

    def path_to_root(self, node: int) -> list[int]:
        """Node sequence from ``node`` to the root (inclusive)."""
        if node not in self.dist:
            raise ContractViolation(f"node {node} unreachable from root {self.root}")
        path = [node]
        steps = len(self.dist)
        while node != self.root:
            node = self.next_hop[node]
            path.append(node)
            steps -= 1
            if steps < 0:
                raise ContractViolation("next_hop relation contains a cycle")
        return path


def _dijkstra(n: int, root: int, edges_of, weight_of) -> tuple[dict[int, int], dict[int, int]]:
    # edges_of(u) yields (neighbor, link_index) pairs to relax from settled u.
    dist: dict[int, int] = {root: 0}
    hop: dict[int, int] = {}
    done = [False] * n
    heap = [(0, root)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, li in edges_of(u):
            if done[v]:
                continue
            nd = d + weight_of(li)
            old = dist.get(v)
            if old is None or nd < old:
                dist[v] = nd
                hop[v] = u
                heapq.heappush(heap, (nd, v))
            elif nd == old and u < hop[v]:
                hop[v] = u
    return dist, hop


def reverse_dijkstra(topology: Topology, lsdb: Lsdb, root: int) -> SptTree:
    """Tree of shortest paths toward ``root`` using link metrics oriented to it."""
    if not topology.is_pe(root):
        raise ContractViolation(f"reverse Dijkstra root {root} is not a PE node")
    links = topology.links
    in_links = topology.in_links

    def edges_of(v):
        for li in in_links[v]:
            yield links[li].src, li

    dist, hop = _dijkstra(topology.num_nodes, root, edges_of, lsdb.weight)
    return SptTree(root, hop, dist)


def dijkstra(topology: Topology, lsdb: Lsdb, source: int) -> SptTree:
    """Regular (forward) shortest-path tree from ``source``."""
    links = topology.links
    out_links = topology.out_links

    def edges_of(u):
        for li in out_links[u]:
            yield links[li].dst, li

    dist, hop = _dijkstra(topology.num_nodes, source, edges_of, lsdb.weight)
    return SptTree(source, hop, dist)


def forward_path(tree: SptTree, dst: int) -> list[int]:
    """Node sequence root -> ``dst`` on a forward tree."""
    return tree.path_to_root(dst)[::-1]


def trees_equal(a: SptTree, b: SptTree) -> bool:
    if a.root != b.root:
        raise ContractViolation(f"comparing trees with roots {a.root} and {b.root}")
    return a.next_hop == b.next_hop


def path_links(topology: Topology, nodes: Iterable[int]) -> list[int]:
    """Link indices along a node sequence."""
    nodes = list(nodes)
    return [topology.link_between(u, v) for u, v in zip(nodes, nodes[1:])]


def tree_links(topology: Topology, tree: SptTree) -> set[int]:
    return {topology.link_between(u, v) for u, v in tree.next_hop.items()}


# --- topology file -------------------------------------------------------


def _number(tok: str, lineno: int, what: str) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise TopologyError(f"line {lineno}: bad {what} {tok!r}") from None
    if not math.isfinite(value):
        raise TopologyError(f"line {lineno}: {what} must be finite, got {tok!r}")
    return value


def parse_topology(text: str) -> tuple[Topology, Lsdb]:
    """Parse the line-oriented topology format.

    ``node <id> <PE|P>`` declares a node; ``link <from> <to> <capacity_bps>
    <delay_s> <metric>`` a directed link; ``bilink`` the same in both
    directions. Everything after ``#`` is a comment.
    """
    roles: dict[int, NodeRole] = {}
    links: list[DirectedLink] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kw = tok[0].lower()
        if kw == "node":
            if len(tok) != 3:
                raise TopologyError(f"line {lineno}: expected 'node <id> <PE|P>'")
            try:
                nid = int(tok[1])
                role = NodeRole(tok[2].upper())
            except ValueError:
                raise TopologyError(f"line {lineno}: bad node declaration {line!r}") from None
            if nid < 0:
                raise TopologyError(f"line {lineno}: negative node id {nid}")
            if nid in roles:
                raise TopologyError(f"line {lineno}: duplicate node {nid}")
            roles[nid] = role
        elif kw in ("link", "bilink"):
            if len(tok) != 6:
                raise TopologyError(
                    f"line {lineno}: expected '{kw} <from> <to> <capacity_bps> <delay_s> <metric>'"
                )
            try:
                a, b = int(tok[1]), int(tok[2])
            except ValueError:
                raise TopologyError(f"line {lineno}: bad node reference in {line!r}") from None
            for x in (a, b):
                if x not in roles:
                    raise TopologyError(f"line {lineno}: unknown node {x}")
            if a == b:
                raise TopologyError(f"line {lineno}: self-loop on node {a}")
            cap = _number(tok[3], lineno, "capacity")
            delay = _number(tok[4], lineno, "delay")
            metric = _number(tok[5], lineno, "metric")
            if cap <= 0:
                raise TopologyError(f"line {lineno}: capacity must be positive, got {tok[3]}")
            if delay < 0:
                raise TopologyError(f"line {lineno}: negative delay {tok[4]}")
            if metric != int(metric) or metric < 1:
                raise TopologyError(f"line {lineno}: metric must be an integer >= 1, got {tok[5]}")
            pairs = [(a, b), (b, a)] if kw == "bilink" else [(a, b)]
            for s, d in pairs:
                if (s, d) in seen:
                    raise TopologyError(f"line {lineno}: duplicate link {s}->{d}")
                seen.add((s, d))
                links.append(DirectedLink(s, d, cap, delay, int(metric)))
        else:
            raise TopologyError(f"line {lineno}: unknown keyword {tok[0]!r}")
    if sorted(roles) != list(range(len(roles))):
        raise TopologyError("node ids must be contiguous from 0")
    topo = Topology([roles[i] for i in range(len(roles))], links)
    return topo, Lsdb(topo)


def load_topology(path: str | Path) -> tuple[Topology, Lsdb]:
    return parse_topology(Path(path).read_text(encoding="utf-8"))
