"""Switch state: PE pipeline (DFT -> CFT), label forwarding and idle GC.

Flows are fluid, so there are no per-packet hits. An entry counts as hit for
as long as at least one active flow uses it (``refs > 0``); its idle timer
starts when the last such flow ends.
"""

from __future__ import annotations

import enum
import heapq
import ipaddress
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

INFINITE = math.inf


class FiveTuple(NamedTuple):
    src_addr: int
    dst_addr: int
    src_port: int
    dst_port: int
    proto: str = "TCP"

    def as_text(self) -> str:
        return (
            f"{ipaddress.IPv4Address(self.src_addr)}:{self.src_port}->"
            f"{ipaddress.IPv4Address(self.dst_addr)}:{self.dst_port}/{self.proto}"
        )


class Action(NamedTuple):
    """Push ``label`` and send toward neighbour ``out_node``."""

    label: int
    out_node: int


def client_network(node: int) -> ipaddress.IPv4Network:
    """The client network (SCN and DCN) attached behind PE ``node``."""
    return ipaddress.IPv4Network(f"10.{node}.0.0/16")


@dataclass(slots=True, eq=False)
class DftEntry:
    match: FiveTuple
    action: Action
    idle_timeout: float
    last_hit: float
    refs: int = 0


@dataclass(slots=True, eq=False)
class CftEntry:
    """Coarse rule: destination prefix with optional L4 port refinement.

    ``action is None`` marks the TableMiss entry (send Packet_IN).
    """

    prefix: ipaddress.IPv4Network
    action: Optional[Action]
    dst_port: Optional[int] = None
    priority: int = 0
    idle_timeout: float = INFINITE

    @property
    def table_miss(self) -> bool:
        return self.action is None

    def matches(self, flow: FiveTuple) -> bool:
        net = int(self.prefix.network_address)
        mask = int(self.prefix.netmask)
        if flow.dst_addr & mask != net:
            return False
        return self.dst_port is None or self.dst_port == flow.dst_port

    def rank(self) -> tuple[int, int, int]:
        # longest prefix first, then explicit priority, then port-specific rules
        return (self.prefix.prefixlen, self.priority, self.dst_port is not None)


@dataclass(slots=True, eq=False)
class PEntry:
    label: int
    out_node: Optional[int]  # None: pop and deliver to the local client network
    idle_timeout: float
    last_hit: float
    refs: int = 0


@dataclass(slots=True, eq=False)
class LegacyEntry:
    match: FiveTuple
    out_node: Optional[int]
    idle_timeout: float
    last_hit: float
    refs: int = 0


class Outcome(enum.Enum):
    DFT_HIT = "DftHit"
    CFT_COPIED = "CftCopied"
    PACKET_IN = "PacketIn"
    NO_MATCH = "NoMatch"


class Decision(NamedTuple):
    outcome: Outcome
    action: Optional[Action] = None
    entry: Optional[DftEntry] = None


class Switch:
    """Label table plus idle-timeout bookkeeping shared by all node kinds."""

    def __init__(self, node: int):
        self.node = node
        self.labels: dict[int, PEntry] = {}
        self.faults = 0
        self._expiry: list[tuple[float, int, str, object, float]] = []
        self._seq = itertools.count()

    # idle handling -------------------------------------------------------

    def _schedule(self, table: str, key, entry) -> None:
        if entry.refs == 0 and entry.idle_timeout != INFINITE:
            heapq.heappush(
                self._expiry,
                (entry.last_hit + entry.idle_timeout, next(self._seq), table, key, entry.last_hit),
            )

    def _hit(self, entry, now: float) -> None:
        entry.refs += 1
        entry.last_hit = now

    def _release(self, table: str, key, entry, now: float) -> None:
        if entry.refs <= 0:
            raise RuntimeError(f"node {self.node}: releasing idle entry {key!r}")
        entry.refs -= 1
        entry.last_hit = now
        if entry.refs == 0:
            self._schedule(table, key, entry)

    def gc_tick(self, now: float) -> list[tuple[str, object]]:
        """Remove finite-timeout entries idle for at least their timeout.

        Returns ``(table, entry)`` pairs for everything removed.
        """
        expired = []
        heap = self._expiry
        while heap and heap[0][0] <= now:
            _, _, table, key, stamp = heapq.heappop(heap)
            entries = getattr(self, table)
            entry = entries.get(key)
            if (
                entry is None
                or entry.refs
                or entry.last_hit != stamp
                or entry.idle_timeout == INFINITE
                or now - entry.last_hit < entry.idle_timeout
            ):
                continue  # stale record
            del entries[key]
            expired.append((table, entry))
        return expired

    # label table ---------------------------------------------------------

    def install_label(self, label: int, out_node: Optional[int], now: float) -> None:
        old = self.labels.get(label)
        if old is not None and old.refs:
            raise RuntimeError(f"node {self.node}: reinstalling label {label} with live traffic")
        self.labels[label] = PEntry(label, out_node, INFINITE, now)

    def demote_label(self, label: int, idle_timeout: float, now: float) -> bool:
        entry = self.labels.get(label)
        if entry is None:
            return False
        entry.idle_timeout = idle_timeout
        if entry.refs == 0:
            entry.last_hit = now
            self._schedule("labels", label, entry)
        return True

    def remove_label(self, label: int) -> bool:
        return self.labels.pop(label, None) is not None

    def p_forward(self, label: int, now: float) -> Optional[int]:
        """Output neighbour for ``label``; None (and a fault) if unknown.

        At an egress node the entry pops the label; the returned value is then
        the node itself.
        """
        entry = self.labels.get(label)
        if entry is None:
            self.faults += 1
            return None
        if entry.refs == 0 and entry.last_hit < now:
            entry.last_hit = now
            self._schedule("labels", label, entry)
        return self.node if entry.out_node is None else entry.out_node

    def attach_label(self, label: int, now: float) -> None:
        self._hit(self.labels[label], now)

    def detach_label(self, label: int, now: float) -> None:
        self._release("labels", label, self.labels[label], now)

    def dump(self) -> list[dict]:
        return [
            {"node": self.node, "table": "labels", "label": e.label, "out": e.out_node,
             "idle_timeout": None if e.idle_timeout == INFINITE else e.idle_timeout,
             "refs": e.refs}
            for e in self.labels.values()
        ]


class PeSwitch(Switch):
    """Edge node: detailed flow table in front of the coarse flow table."""

    def __init__(self, node: int, dft_timeout: float = 1.0):
        super().__init__(node)
        if not (0 < dft_timeout < INFINITE):
            raise ValueError("DFT idle timeout must be positive and finite")
        self.dft_timeout = dft_timeout
        self.dft: dict[FiveTuple, DftEntry] = {}
        self.cft: list[CftEntry] = []
        self.packet_in = 0
        self.dft_hits = 0

    def cft_lookup(self, flow: FiveTuple) -> Optional[CftEntry]:
        best = None
        for entry in self.cft:
            if entry.matches(flow) and (best is None or entry.rank() > best.rank()):
                best = entry
        return best

    def replace_cft(self, prefix: ipaddress.IPv4Network, action: Action,
                    dst_port: Optional[int] = None, priority: int = 0) -> None:
        """Install or overwrite the coarse rule for (prefix, dst_port)."""
        for entry in self.cft:
            if entry.prefix == prefix and entry.dst_port == dst_port and not entry.table_miss:
                entry.action = action
                entry.priority = priority
                return
        self.cft.append(CftEntry(prefix, action, dst_port, priority))

    def set_table_miss(self) -> None:
        if not any(e.table_miss for e in self.cft):
            self.cft.append(CftEntry(ipaddress.IPv4Network("0.0.0.0/0"), None, priority=-1))

    def pe_admit(self, flow: FiveTuple, now: float) -> Decision:
        entry = self.dft.get(flow)
        if entry is not None:
            self._hit(entry, now)
            self.dft_hits += 1
            return Decision(Outcome.DFT_HIT, entry.action, entry)
        rule = self.cft_lookup(flow)
        if rule is None:
            return Decision(Outcome.NO_MATCH)
        if rule.table_miss:
            self.packet_in += 1
            return Decision(Outcome.PACKET_IN)
        # switch-local "Insert Flow": copy the coarse action into the DFT
        entry = DftEntry(flow, rule.action, self.dft_timeout, now, refs=1)
        self.dft[flow] = entry
        return Decision(Outcome.CFT_COPIED, rule.action, entry)

    def release_flow(self, flow: FiveTuple, now: float) -> None:
        self._release("dft", flow, self.dft[flow], now)

    def dump(self) -> list[dict]:
        rows = super().dump()
        for e in self.cft:
            rows.append({
                "node": self.node, "table": "cft", "prefix": str(e.prefix), "dst_port": e.dst_port,
                "priority": e.priority,
                "label": None if e.table_miss else e.action.label,
                "out": None if e.table_miss else e.action.out_node,
            })
        for e in self.dft.values():
            rows.append({"node": self.node, "table": "dft", "match": e.match.as_text(),
                         "label": e.action.label, "out": e.action.out_node, "refs": e.refs})
        return rows


class LegacySwitch(Switch):
    """Reactive OpenFlow switch: one exact-match entry per flow."""

    def __init__(self, node: int, idle_timeout: float = 1.0):
        super().__init__(node)
        self.idle_timeout = idle_timeout
        self.flows: dict[FiveTuple, LegacyEntry] = {}
        self.packet_in = 0

    def release_flow(self, flow: FiveTuple, now: float) -> None:
        self._release("flows", flow, self.flows[flow], now)

    def dump(self) -> list[dict]:
        return [{"node": self.node, "table": "flows", "match": e.match.as_text(),
                 "out": e.out_node, "refs": e.refs} for e in self.flows.values()]


def legacy_admit(switches: dict[int, LegacySwitch] | list[LegacySwitch],
                 path: list[int], flow: FiveTuple, now: float) -> int:
    """Reactive set-up along ``path``: each switch raises one Packet_IN.

    The controller answers each with a flow entry, so the caller books one
    FlowMod per Packet_IN as well.
    """
    for i, node in enumerate(path):
        sw = switches[node]
        sw.packet_in += 1
        out = path[i + 1] if i + 1 < len(path) else None
        entry = sw.flows.get(flow)
        if entry is None:
            sw.flows[flow] = LegacyEntry(flow, out, sw.idle_timeout, now, refs=1)
        else:
            entry.out_node = out
            sw._hit(entry, now)
    return len(path)


def dump_tables(switches: Iterable[Switch], now: float) -> str:
    """All table rows as JSON lines, tagged with the dump time."""
    lines = []
    for sw in switches:
        for row in sw.dump():
            row["t"] = now
            lines.append(json.dumps(row, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")
