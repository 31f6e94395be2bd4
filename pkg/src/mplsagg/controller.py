"""Measurement and label-allocation logic of the central controller."""

from __future__ import annotations

import enum
import heapq
import ipaddress
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .dataplane import INFINITE, client_network
from .topology import (
    ContractViolation,
    Lsdb,
    MetricClass,
    SptTree,
    Topology,
    reverse_dijkstra,
    set_metric,
    trees_equal,
)

MPLS_LABEL_MIN = 16
MPLS_LABEL_LIMIT = 1 << 20


class ScenarioError(RuntimeError):
    """Fatal condition that aborts a simulation run."""


class LabelPoolExhausted(ScenarioError):
    pass


class Policy(enum.Enum):
    ALWAYS = "ALWAYS"
    ON_TREE_CHANGE = "ON_TREE_CHANGE"


class EpochState(enum.Enum):
    ACTIVE = "ACTIVE"
    DRAINING = "DRAINING"
    RETIRED = "RETIRED"


@dataclass(frozen=True)
class ThresholdConfig:
    warn_th: float
    cong_th: float
    measurement_interval: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.warn_th < self.cong_th < 1.0):
            raise ValueError(
                f"thresholds must satisfy 0 < warn < cong < 1, got warn={self.warn_th} "
                f"cong={self.cong_th}"
            )
        if self.measurement_interval <= 0:
            raise ValueError("measurement interval must be positive")


def classify(utilization: float, cfg: ThresholdConfig) -> MetricClass:
    if utilization <= cfg.warn_th:
        return MetricClass.NORM
    if utilization <= cfg.cong_th:
        return MetricClass.WARN
    return MetricClass.CONG


@dataclass(frozen=True)
class LinkUtilizationSample:
    link: int
    tput: float  # bits/s averaged over the interval
    utilization: float

    @classmethod
    def from_bytes(cls, link: int, nbytes: float, capacity: float, interval: float):
        tput = 8.0 * nbytes / interval
        return cls(link, tput, min(max(tput / capacity, 0.0), 1.0))


class LabelPool:
    """Lowest-free-first allocator over ``[low, high)``."""

    def __init__(self, low: int = MPLS_LABEL_MIN, high: int = MPLS_LABEL_LIMIT):
        if not (0 <= low < high):
            raise ValueError("empty label range")
        self.low, self.high = low, high
        self._next = low
        self._freed: list[int] = []
        self.live: set[int] = set()

    def allocate(self) -> int:
        if self._freed:
            value = heapq.heappop(self._freed)
        elif self._next < self.high:
            value = self._next
            self._next += 1
        else:
            raise LabelPoolExhausted(
                f"label pool exhausted: {len(self.live)} live labels in [{self.low}, {self.high})"
            )
        self.live.add(value)
        return value

    def release(self, value: int) -> None:
        if value not in self.live:
            raise ContractViolation(f"label {value} is not live")
        self.live.remove(value)
        heapq.heappush(self._freed, value)

    def peek(self) -> int:
        """Value the next allocate() would return (without allocating)."""
        if self._freed:
            return self._freed[0]
        if self._next < self.high:
            return self._next
        raise LabelPoolExhausted(f"label pool exhausted: {len(self.live)} live labels")


@dataclass(eq=False)
class LabelEpoch:
    label: int
    dest_pe: int
    epoch: int
    tree: SptTree
    state: EpochState = EpochState.ACTIVE
    created: float = 0.0
    drained_at: Optional[float] = None
    retired_at: Optional[float] = None
    flows: int = 0  # active flows currently tagged with this label
    nodes: frozenset = frozenset()  # switches holding an entry for this label

    def summary(self) -> dict:
        return {
            "label": self.label, "dest_pe": self.dest_pe, "epoch": self.epoch,
            "state": self.state.value, "created": self.created,
            "drained_at": self.drained_at, "retired_at": self.retired_at,
        }


class CommandKind(enum.Enum):
    CFT_REPLACE = "CftReplace"
    P_INSTALL = "PInstall"
    P_DEMOTE = "PDemote"
    P_REMOVE = "PRemove"


@dataclass(frozen=True)
class TableCommand:
    kind: CommandKind
    target_node: int
    label: int
    dest_pe: int
    out_node: Optional[int] = None
    idle_timeout: float = INFINITE
    prefix: Optional[ipaddress.IPv4Network] = None


class MessageLedger:
    """Controller <-> switch message counters, bucketed per simulated second."""

    FIELDS = ("stat_requests", "stat_responses", "bundle_updates", "packet_in", "flow_mods")

    def __init__(self) -> None:
        self.buckets: dict[int, dict[str, int]] = defaultdict(lambda: dict.fromkeys(self.FIELDS, 0))

    def add(self, now: float, name: str, count: int = 1) -> None:
        if count:
            self.buckets[int(math.floor(now))][name] += count

    def total(self, name: str) -> int:
        return sum(b[name] for b in self.buckets.values())

    def messages_in(self, second: int) -> int:
        b = self.buckets.get(second)
        return sum(b.values()) if b else 0

    def count_in(self, second: int, name: str) -> int:
        b = self.buckets.get(second)
        return b[name] if b else 0


def affected_pes(changed_links: Iterable[int], live_epochs: Iterable[LabelEpoch],
                 link_label_activity: Mapping[int, set[int]]) -> set[int]:
    """Destination PEs of live labels seen on any changed link."""
    seen: set[int] = set()
    for link in changed_links:
        seen |= link_label_activity.get(link, set())
    return {e.dest_pe for e in live_epochs
            if e.state is not EpochState.RETIRED and e.label in seen}


class Controller:
    """Measurement Component plus Label Allocator Component."""

    def __init__(self, topology: Topology, lsdb: Lsdb, thresholds: ThresholdConfig,
                 policy: Policy = Policy.ALWAYS, gc_timeout: float = 1.0,
                 pool: LabelPool | None = None):
        if len(topology.pes) < 2:
            raise ScenarioError("at least two PE nodes are required")
        if not (0 < gc_timeout < INFINITE):
            raise ValueError("gc_timeout must be positive and finite")
        self.topology = topology
        self.lsdb = lsdb
        self.thresholds = thresholds
        self.policy = policy
        self.gc_timeout = gc_timeout
        self.pool = pool or LabelPool()
        self.ledger = MessageLedger()
        self.active: dict[int, LabelEpoch] = {}
        self.epochs: dict[int, LabelEpoch] = {}  # non-retired, by label
        self.history: list[LabelEpoch] = []
        self._epoch_counter: dict[int, int] = defaultdict(int)
        self.reallocations = 0

    # Measurement Component -------------------------------------------------

    def measurement_tick(self, samples: list[LinkUtilizationSample], now: float = 0.0
                         ) -> list[tuple[int, MetricClass, MetricClass]]:
        """Reclassify every link; return the actual metric changes."""
        by_link = {s.link: s for s in samples}
        nlinks = len(self.topology.links)
        missing = [i for i in range(nlinks) if i not in by_link]
        if missing:
            raise ContractViolation(f"no utilization sample for links {missing[:5]}")
        changes = []
        for i in range(nlinks):
            old = self.lsdb.current[i]
            new = classify(by_link[i].utilization, self.thresholds)
            if set_metric(self.lsdb, i, new):
                changes.append((i, old, new))
        n = self.topology.num_nodes
        self.ledger.add(now, "stat_requests", n)
        self.ledger.add(now, "stat_responses", n)
        return changes

    # Label Allocator Component -------------------------------------------

    def live_epochs(self) -> list[LabelEpoch]:
        return list(self.epochs.values())

    def affected_pes(self, changed_links: Iterable[int],
                     link_label_activity: Mapping[int, set[int]]) -> set[int]:
        return affected_pes(changed_links, self.epochs.values(), link_label_activity)

    def initial_allocation(self, now: float = 0.0) -> tuple[list[LabelEpoch], list[TableCommand]]:
        return self._allocate(self.topology.pes, now, force=True)

    def reallocate(self, affected: Iterable[int], now: float = 0.0
                   ) -> tuple[list[LabelEpoch], list[TableCommand]]:
        affected = sorted(set(affected))
        for pe in affected:
            if not self.topology.is_pe(pe):
                raise ContractViolation(f"affected node {pe} is not a PE")
        if affected:
            self.reallocations += 1
        return self._allocate(affected, now, force=self.policy is Policy.ALWAYS)

    def _allocate(self, pes: list[int], now: float, force: bool
                  ) -> tuple[list[LabelEpoch], list[TableCommand]]:
        new_epochs: list[LabelEpoch] = []
        commands: list[TableCommand] = []
        for dest in pes:
            tree = reverse_dijkstra(self.topology, self.lsdb, dest)
            old = self.active.get(dest)
            if old is not None and not force and trees_equal(old.tree, tree):
                continue
            label = self.pool.allocate()
            self._epoch_counter[dest] += 1
            nodes = self.tree_nodes(tree)
            epoch = LabelEpoch(label, dest, self._epoch_counter[dest], tree, created=now,
                               nodes=nodes)
            new_epochs.append(epoch)
            self.epochs[label] = epoch
            self.history.append(epoch)
            self.active[dest] = epoch
            prefix = client_network(dest)
            for pe in self.topology.pes:
                if pe != dest and pe in tree.next_hop:
                    commands.append(TableCommand(CommandKind.CFT_REPLACE, pe, label, dest,
                                                 tree.next_hop[pe], INFINITE, prefix))
            for node in sorted(nodes):
                commands.append(TableCommand(CommandKind.P_INSTALL, node, label, dest,
                                             tree.next_hop.get(node), INFINITE))
            if old is not None:
                old.state = EpochState.DRAINING
                old.drained_at = now
                for node in sorted(old.nodes):
                    commands.append(TableCommand(CommandKind.P_DEMOTE, node, old.label, dest,
                                                 idle_timeout=self.gc_timeout))
        self.ledger.add(now, "bundle_updates", len({c.target_node for c in commands}))
        return new_epochs, commands

    def tree_nodes(self, tree: SptTree) -> frozenset:
        """Nodes on some PE-to-root branch; only these need the label."""
        nodes: set[int] = set()
        for pe in self.topology.pes:
            if pe in tree.dist:
                nodes.update(tree.path_to_root(pe))
        return frozenset(nodes)

    def recycle(self, epoch: LabelEpoch, live_entries: int = 0, now: float = 0.0) -> None:
        """Return a fully drained label to the pool."""
        if epoch.state is not EpochState.DRAINING:
            raise ContractViolation(f"label {epoch.label} is {epoch.state.value}, not DRAINING")
        if epoch.flows:
            raise ContractViolation(f"label {epoch.label} still carries {epoch.flows} flows")
        if live_entries:
            raise ContractViolation(f"label {epoch.label} still has {live_entries} table entries")
        epoch.state = EpochState.RETIRED
        epoch.retired_at = now
        del self.epochs[epoch.label]
        self.pool.release(epoch.label)

    def tick(self, samples: list[LinkUtilizationSample],
             link_label_activity: Mapping[int, set[int]], now: float
             ) -> tuple[list[tuple[int, MetricClass, MetricClass]], list[LabelEpoch], list[TableCommand]]:
        """One measurement interval: reclassify, then reallocate as a batch."""
        changes = self.measurement_tick(samples, now)
        if not changes:
            return changes, [], []
        affected = self.affected_pes([c[0] for c in changes], link_label_activity)
        epochs, commands = self.reallocate(affected, now)
        return changes, epochs, commands
