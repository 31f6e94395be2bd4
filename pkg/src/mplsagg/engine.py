"""Deterministic flow-level simulation of the label mechanism and legacy SDN.

Bandwidth is shared max-min fairly among active flows (the TCP surrogate) and
recomputed at every arrival and completion. Flows that share a path are kept
together as one class: they see the same rate at every instant, so a class
needs only a cumulative per-flow service counter and a heap of the service
levels at which its members finish.
"""

from __future__ import annotations

import enum
import hashlib
import heapq
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import metrics
from .controller import (
    CommandKind,
    Controller,
    EpochState,
    LabelPool,
    LinkUtilizationSample,
    MessageLedger,
    Policy,
    ScenarioError,
    TableCommand,
    ThresholdConfig,
)
from .dataplane import (
    Action,
    DftEntry,
    FiveTuple,
    LegacySwitch,
    Outcome,
    PeSwitch,
    Switch,
    legacy_admit,
)
from .fairshare import water_fill
from .topology import (
    Lsdb,
    MetricValues,
    NodeRole,
    Topology,
    dijkstra,
    forward_path,
    path_links,
)
from .traffic import FlowArrival, TrafficConfig, generate


class Mode(enum.Enum):
    MECHANISM = "MECHANISM"
    LEGACY = "LEGACY"


# kind priorities at equal timestamps
MEASUREMENT, ARRIVAL, COMPLETION, GC, SAMPLE = range(5)

_FINISH_TOL = 1e-6  # bytes


@dataclass
class Scenario:
    topology: Topology
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    mode: Mode = Mode.MECHANISM
    thresholds: ThresholdConfig = field(default_factory=lambda: ThresholdConfig(0.4, 0.8))
    policy: Policy = Policy.ALWAYS
    metric_values: MetricValues = field(default_factory=MetricValues)
    gc_timeout: float = 1.0
    dft_timeout: float = 1.0
    gc_interval: float = 0.1
    access_capacity: float = 1e9
    arrivals: Optional[Sequence[FlowArrival]] = None  # scripted replay
    label_range: tuple[int, int] = (16, 1 << 20)
    check_invariants: bool = False
    trace_epochs: bool = False


@dataclass
class RunResult:
    mode: str
    seed: int
    warn_th: float
    cong_th: float
    policy: str
    sim_time: float
    warmup: float
    num_nodes: int
    num_pes: int
    num_p: int
    flows_arrived: int = 0
    flows_completed: int = 0
    flows_rejected: int = 0
    flows_active_end: int = 0
    tx_bytes: float = 0.0
    rx_bytes: float = 0.0
    avg_tput_mbps: float = 0.0
    packet_in_total: int = 0
    openflow_msgs_per_s: float = 0.0
    packet_in_per_s: float = 0.0
    max_controller_msgs_per_s: int = 0
    max_fri_pct: Optional[float] = None
    sum_dft_mean: float = 0.0
    avg_labels_mean: float = 0.0
    max_labels: float = 0.0
    label_epochs: int = 0
    reallocations: int = 0
    max_live_labels: int = 0
    path_violations: int = 0
    capacity_violations: int = 0
    draining_increases: int = 0
    forwarding_faults: int = 0
    samples: list[dict] = field(default_factory=list)
    epochs: list[dict] = field(default_factory=list)
    per_node_entries_mean: list[float] = field(default_factory=list)
    per_node_packet_in: list[int] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)

    def checksum(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    @classmethod
    def from_json(cls, text: str) -> "RunResult":
        return cls(**json.loads(text))


TIMESERIES_COLUMNS = ("t", "sum_dft_pe", "avg_labels_p", "max_labels_p", "active_flows",
                      "packet_in", "controller_msgs", "rx_bytes", "tx_bytes")


def timeseries_csv(result: RunResult) -> str:
    lines = [",".join(TIMESERIES_COLUMNS)]
    for s in result.samples:
        lines.append(",".join(repr(s[c]) if isinstance(s[c], float) else str(s[c])
                              for c in TIMESERIES_COLUMNS))
    return "\n".join(lines) + "\n"


@dataclass(slots=True, eq=False)
class _Flow:
    fid: int
    tuple: FiveTuple
    size: float
    src: int
    dst: int
    slot: int
    finish: float
    label: int = -1
    nodes: tuple = ()


class _Simulation:
    def __init__(self, sc: Scenario):
        self.sc = sc
        topo = sc.topology
        self.topo = topo
        self.cfg = sc.traffic
        self.pes = topo.pes
        if len(self.pes) < 2:
            raise ScenarioError("at least two PE nodes are required")
        self.p_nodes = topo.p_nodes
        self.mechanism = sc.mode is Mode.MECHANISM
        self.now = 0.0

        # fluid links: core links first, then access in/out per PE
        ncore = len(topo.links)
        self.ncore = ncore
        self.access_in = {pe: ncore + 2 * k for k, pe in enumerate(self.pes)}
        self.access_out = {pe: ncore + 2 * k + 1 for k, pe in enumerate(self.pes)}
        caps = [l.capacity for l in topo.links] + [sc.access_capacity] * (2 * len(self.pes))
        self.capacity = np.array(caps, dtype=float)
        self.loads = np.zeros(len(caps))  # bits/s
        self.link_bytes = np.zeros(len(caps))  # since last measurement tick

        # class storage
        self.width = topo.num_nodes + 2
        self.ncap = 0
        self._grow(64)
        self.free_slots: list[int] = []
        self.nslots = 0
        self.slot_of: dict[tuple, int] = {}
        self.slot_key: list = []
        self.slot_heap: list[list] = []
        self.slot_nodes: list[tuple] = []
        self.slot_label: list[int] = []
        self.seen: dict[tuple, tuple[int, list[int]]] = {}
        self.dirty = False
        self.seq = itertools.count()

        self.flows_active = 0
        self.rx_bytes = 0.0
        self.stats = dict(arrived=0, completed=0, rejected=0, path_violations=0,
                          capacity_violations=0, draining_increases=0)
        self.samples: list[dict] = []
        self.trace: list[tuple[float, int, int, str]] = []

        lsdb = Lsdb(topo, sc.metric_values)
        self.lsdb = lsdb
        if self.mechanism:
            self.switches: dict[int, Switch] = {
                n: PeSwitch(n, sc.dft_timeout) if topo.roles[n] is NodeRole.PE else Switch(n)
                for n in range(topo.num_nodes)
            }
            self.controller = Controller(topo, lsdb, sc.thresholds, sc.policy, sc.gc_timeout,
                                         LabelPool(*sc.label_range))
            self.ledger = self.controller.ledger
            self.label_entries: dict[int, int] = {}
            self.max_live_labels = 0
        else:
            self.switches = {n: LegacySwitch(n, sc.dft_timeout) for n in range(topo.num_nodes)}
            self.controller = None
            self.ledger = MessageLedger()
            self.legacy_paths = {}
            for s in self.pes:
                tree = dijkstra(topo, lsdb, s)
                for d in self.pes:
                    if d != s and d in tree.dist:
                        self.legacy_paths[(s, d)] = tuple(forward_path(tree, d))

    # class storage ---------------------------------------------------------

    def _grow(self, n: int) -> None:
        old = self.ncap
        def ext(arr, fill, shape=None):
            new = np.full((n,) + (shape or ()), fill, dtype=arr.dtype if arr is not None else float)
            if arr is not None:
                new[:old] = arr
            return new
        if old == 0:
            self.counts = np.zeros(n)
            self.links = np.zeros((n, self.width), dtype=np.int64)
            self.lengths = np.zeros(n, dtype=np.int64)
            self.rates = np.zeros(n)  # bits/s per flow
            self.rate_Bps = np.ones(n)  # bytes/s per flow; 1.0 for empty slots
            self.service = np.zeros(n)
            self.head = np.full(n, np.inf)
        else:
            self.counts = ext(self.counts, 0.0)
            self.links = ext(self.links, 0, (self.width,))
            self.lengths = ext(self.lengths, 0)
            self.rates = ext(self.rates, 0.0)
            self.rate_Bps = ext(self.rate_Bps, 1.0)
            self.service = ext(self.service, 0.0)
            self.head = ext(self.head, np.inf)
        self.ncap = n

    def _open_slot(self, key: tuple, nodes: tuple, links: list[int], label: int) -> int:
        if self.free_slots:
            c = self.free_slots.pop()
        else:
            if self.nslots == self.ncap:
                self._grow(self.ncap * 2)
            c = self.nslots
            self.nslots += 1
            self.slot_key.append(None)
            self.slot_heap.append([])
            self.slot_nodes.append(())
            self.slot_label.append(-1)
        self.slot_of[key] = c
        self.slot_key[c] = key
        self.slot_heap[c] = []
        self.slot_nodes[c] = nodes
        self.slot_label[c] = label
        self.links[c, : len(links)] = links
        self.lengths[c] = len(links)
        self.service[c] = 0.0
        self.head[c] = np.inf
        self.counts[c] = 0.0
        if self.mechanism:
            for n in nodes:
                self.switches[n].attach_label(label, self.now)
        return c

    def _close_slot(self, c: int) -> None:
        if self.mechanism:
            label = self.slot_label[c]
            for n in self.slot_nodes[c]:
                self.switches[n].detach_label(label, self.now)
        del self.slot_of[self.slot_key[c]]
        self.slot_key[c] = None
        self.counts[c] = 0.0
        self.lengths[c] = 0
        self.head[c] = np.inf
        self.free_slots.append(c)

    def _recompute(self) -> None:
        n = self.nslots
        water_fill(self.capacity, self.counts[:n], self.links[:n], self.lengths[:n],
                   self.rates[:n], self.loads)
        rb = self.rates[:n] * 0.125
        rb[self.counts[:n] <= 0] = 1.0
        self.rate_Bps[:n] = rb
        self.total_rate = float(self.loads[[self.access_out[pe] for pe in self.pes]].sum())
        self.dirty = False
        if self.sc.check_invariants:
            over = self.loads > self.capacity * (1 + 1e-9)
            if over.any():
                self.stats["capacity_violations"] += int(over.sum())

    # time ------------------------------------------------------------------

    def _advance(self, t: float) -> None:
        dt = t - self.now
        if dt > 0:
            n = self.nslots
            self.service[:n] += self.rate_Bps[:n] * dt
            self.link_bytes += self.loads * (dt * 0.125)
            lo = max(self.now, self.cfg.warmup)
            if t > lo:
                self.rx_bytes += self.total_rate * 0.125 * (t - lo)
        self.now = t

    def _next_completion(self) -> tuple[float, int]:
        n = self.nslots
        if self.flows_active == 0:
            return math.inf, -1
        left = (self.head[:n] - self.service[:n]) / self.rate_Bps[:n]
        c = int(np.argmin(left))
        dt = float(left[c])
        return self.now + max(dt, 0.0), c

    # arrivals --------------------------------------------------------------

    def _mechanism_path(self, src: int, label: int, first_hop: int) -> Optional[tuple]:
        nodes = [src]
        node = first_hop
        for _ in range(self.topo.num_nodes):
            nodes.append(node)
            out = self.switches[node].p_forward(label, self.now)
            if out is None:
                return None
            if out == node:
                return tuple(nodes)
            node = out
        return None

    def _arrive(self, a: FlowArrival) -> None:
        self.stats["arrived"] += 1
        now = self.now
        if self.mechanism:
            sw: PeSwitch = self.switches[a.src_pe]
            dec = sw.pe_admit(a.tuple, now)
            if dec.outcome is Outcome.NO_MATCH:
                self.stats["rejected"] += 1
                return
            if dec.outcome is Outcome.PACKET_IN:
                # controller answers with a detailed entry for the active label
                self.ledger.add(now, "packet_in")
                self.ledger.add(now, "flow_mods")
                epoch = self.controller.active[a.dst_pe]
                action = Action(epoch.label, epoch.tree.next_hop[a.src_pe])
                sw.dft[a.tuple] = DftEntry(a.tuple, action, sw.dft_timeout, now, refs=1)
            else:
                action = dec.action
            label = action.label
            if dec.outcome is not Outcome.DFT_HIT:
                self.label_entries[label] = self.label_entries.get(label, 0) + 1
            key = (label, a.src_pe)
            c = self.slot_of.get(key)
            if c is None:
                nodes = self._mechanism_path(a.src_pe, label, action.out_node)
                if nodes is None or nodes[-1] != a.dst_pe:
                    self.stats["rejected"] += 1
                    sw.release_flow(a.tuple, now)
                    return
                links = ([self.access_in[a.src_pe]] + path_links(self.topo, nodes)
                         + [self.access_out[a.dst_pe]])
                c = self._open_slot(key, nodes, links, label)
                self.seen[key] = (label, links[1:-1])
            epoch = self.controller.epochs[label]
            if epoch.state is EpochState.DRAINING:
                self.stats["draining_increases"] += 1
            epoch.flows += 1
            if self.sc.trace_epochs:
                self.trace.append((now, label, epoch.flows, epoch.state.value))
        else:
            nodes = self.legacy_paths.get((a.src_pe, a.dst_pe))
            if nodes is None:
                self.stats["rejected"] += 1
                return
            n = legacy_admit(self.switches, list(nodes), a.tuple, now)
            self.ledger.add(now, "packet_in", n)
            self.ledger.add(now, "flow_mods", n)
            label = -1
            key = (a.src_pe, a.dst_pe)
            c = self.slot_of.get(key)
            if c is None:
                links = ([self.access_in[a.src_pe]] + path_links(self.topo, nodes)
                         + [self.access_out[a.dst_pe]])
                c = self._open_slot(key, nodes, links, -1)
        flow = _Flow(a.index, a.tuple, a.size, a.src_pe, a.dst_pe, c,
                     self.service[c] + a.size, label, self.slot_nodes[c])
        heapq.heappush(self.slot_heap[c], (flow.finish, flow.fid, flow))
        self.counts[c] += 1.0
        self.head[c] = self.slot_heap[c][0][0]
        self.flows_active += 1
        self.dirty = True

    # completions -----------------------------------------------------------

    def _complete(self, c: int) -> None:
        heap = self.slot_heap[c]
        _, _, flow = heapq.heappop(heap)
        if self.service[c] < flow.finish:
            self.service[c] = flow.finish
        done = [flow]
        while heap and heap[0][0] <= self.service[c] + _FINISH_TOL:
            done.append(heapq.heappop(heap)[2])
        for f in done:
            self._finish_flow(f)
        self.counts[c] -= len(done)
        if heap:
            self.head[c] = heap[0][0]
        else:
            self._close_slot(c)
        self.dirty = True

    def _finish_flow(self, f: _Flow) -> None:
        now = self.now
        self.flows_active -= 1
        self.stats["completed"] += 1
        if self.mechanism:
            sw: PeSwitch = self.switches[f.src]
            entry = sw.dft[f.tuple]
            if not self._label_path_intact(f, entry.action):
                self.stats["path_violations"] += 1
            sw.release_flow(f.tuple, now)
            epoch = self.controller.epochs[f.label]
            epoch.flows -= 1
            if self.sc.trace_epochs:
                self.trace.append((now, f.label, epoch.flows, epoch.state.value))
        else:
            nodes = f.nodes
            for i, n in enumerate(nodes):
                sw = self.switches[n]
                entry = sw.flows.get(f.tuple)
                nxt = nodes[i + 1] if i + 1 < len(nodes) else None
                if entry is None or entry.out_node != nxt:
                    self.stats["path_violations"] += 1
                    continue
                sw.release_flow(f.tuple, now)

    def _label_path_intact(self, f: _Flow, action: Action) -> bool:
        if action.label != f.label or action.out_node != f.nodes[1]:
            return False
        nodes = f.nodes
        for i in range(1, len(nodes)):
            entry = self.switches[nodes[i]].labels.get(f.label)
            if entry is None:
                return False
            want = None if i == len(nodes) - 1 else nodes[i + 1]
            if entry.out_node != want:
                return False
        return True

    # controller ------------------------------------------------------------

    def _apply(self, commands: Iterable[TableCommand]) -> None:
        now = self.now
        for cmd in commands:
            sw = self.switches[cmd.target_node]
            if cmd.kind is CommandKind.CFT_REPLACE:
                sw.replace_cft(cmd.prefix, Action(cmd.label, cmd.out_node))
            elif cmd.kind is CommandKind.P_INSTALL:
                if cmd.label not in sw.labels:
                    self.label_entries[cmd.label] = self.label_entries.get(cmd.label, 0) + 1
                sw.install_label(cmd.label, cmd.out_node, now)
            elif cmd.kind is CommandKind.P_DEMOTE:
                sw.demote_label(cmd.label, cmd.idle_timeout, now)
            elif cmd.kind is CommandKind.P_REMOVE:
                if sw.remove_label(cmd.label):
                    self.label_entries[cmd.label] -= 1
        live = len(self.controller.epochs)
        if live > self.max_live_labels:
            self.max_live_labels = live

    def _measure(self) -> None:
        interval = self.sc.thresholds.measurement_interval
        samples = [LinkUtilizationSample.from_bytes(i, float(self.link_bytes[i]),
                                                    float(self.capacity[i]), interval)
                   for i in range(self.ncore)]
        activity: dict[int, set[int]] = {}
        for label, links in self.seen.values():
            for l in links:
                activity.setdefault(l, set()).add(label)
        _, _, commands = self.controller.tick(samples, activity, self.now)
        self._apply(commands)
        self.link_bytes[:] = 0.0
        self.seen = {}
        for key, c in self.slot_of.items():
            self.seen[key] = (key[0], self.links[c, 1: self.lengths[c] - 1].tolist())

    def _gc(self) -> None:
        now = self.now
        touched = set()
        for sw in self.switches.values():
            for table, entry in sw.gc_tick(now):
                if not self.mechanism:
                    continue
                label = entry.label if table == "labels" else entry.action.label
                self.label_entries[label] -= 1
                touched.add(label)
        for label in sorted(touched):
            if self.label_entries[label] == 0:
                epoch = self.controller.epochs.get(label)
                if epoch is not None and epoch.state is EpochState.DRAINING and epoch.flows == 0:
                    self.controller.recycle(epoch, 0, now)
                    del self.label_entries[label]

    # KPIs ------------------------------------------------------------------

    def _sample(self) -> None:
        t = self.now
        sec = int(round(t)) - 1
        if self.mechanism:
            sum_dft = sum(len(self.switches[pe].dft) for pe in self.pes)
            per_p = [len(self.switches[p].labels) for p in self.p_nodes]
        else:
            sum_dft = sum(len(self.switches[pe].flows) for pe in self.pes)
            per_p = [len(self.switches[p].flows) for p in self.p_nodes]
        per_node = [len(sw.labels) if self.mechanism else len(sw.flows)
                    for _, sw in sorted(self.switches.items())]
        self.samples.append({
            "t": t,
            "sum_dft_pe": sum_dft,
            "labels_per_p": per_p,
            "avg_labels_p": sum(per_p) / len(per_p) if per_p else 0.0,
            "max_labels_p": max(per_p) if per_p else 0,
            "active_flows": self.flows_active,
            "packet_in": self.ledger.count_in(sec, "packet_in"),
            "controller_msgs": self.ledger.messages_in(sec),
            "rx_bytes": self.rx_bytes,
            "tx_bytes": self.rx_bytes,
            "per_node": per_node,
        })
        if self.sc.check_invariants and self.mechanism:
            self._check_label_bound()

    def _check_label_bound(self) -> None:
        bound = len(self.pes) * (self.controller.reallocations + 1)
        for p in self.p_nodes:
            if len(self.switches[p].labels) > bound:
                raise AssertionError(f"P node {p} holds {len(self.switches[p].labels)} > {bound} labels")
        for pe in self.pes:
            actives = [e for e in self.controller.epochs.values()
                       if e.dest_pe == pe and e.state is EpochState.ACTIVE]
            if len(actives) != 1:
                raise AssertionError(f"PE {pe} has {len(actives)} active labels")

    # loop ------------------------------------------------------------------

    def run(self) -> RunResult:
        sc, cfg = self.sc, self.cfg
        end = cfg.sim_time
        periodic: list[tuple[float, int, int]] = []
        if self.mechanism:
            _, cmds = self.controller.initial_allocation(0.0)
            self._apply(cmds)
            mi = sc.thresholds.measurement_interval
            for k in itertools.count(1):
                if k * mi > end + 1e-9:
                    break
                periodic.append((k * mi, MEASUREMENT, k))
        for k in itertools.count(1):
            if k * sc.gc_interval > end + 1e-9:
                break
            periodic.append((k * sc.gc_interval, GC, k))
        for k in itertools.count(1):
            t = cfg.warmup + k
            if t > end + 1e-9:
                break
            periodic.append((t, SAMPLE, k))
        periodic.sort()
        arrivals = iter(sc.arrivals if sc.arrivals is not None
                        else generate(cfg, self.pes))
        nxt = next(arrivals, None)
        pi = 0
        self.total_rate = 0.0
        while True:
            if self.dirty:
                self._recompute()
                if self.sc.check_invariants and self.mechanism:
                    self._check_label_bound()
            best_t, best_k = math.inf, 99
            if pi < len(periodic):
                best_t, best_k = periodic[pi][0], periodic[pi][1]
            if nxt is not None and (nxt.time, ARRIVAL) < (best_t, best_k):
                best_t, best_k = nxt.time, ARRIVAL
            tc, c = self._next_completion()
            if (tc, COMPLETION) < (best_t, best_k):
                best_t, best_k = tc, COMPLETION
            if best_t > end:
                break
            self._advance(best_t)
            if best_k == ARRIVAL:
                self._arrive(nxt)
                nxt = next(arrivals, None)
            elif best_k == COMPLETION:
                self._complete(c)
            else:
                pi += 1
                if best_k == MEASUREMENT:
                    self._measure()
                elif best_k == GC:
                    self._gc()
                else:
                    self._sample()
        self._advance(end)
        return self._result()

    def _result(self) -> RunResult:
        sc, cfg = self.sc, self.cfg
        post = list(self.samples)
        span = cfg.sim_time - cfg.warmup
        first = int(math.floor(cfg.warmup))
        seconds = range(first, int(math.ceil(cfg.sim_time)))
        pkt_in = [self.ledger.count_in(s, "packet_in") for s in seconds]
        msgs = [self.ledger.messages_in(s) for s in seconds]
        all_msgs = [self.ledger.messages_in(s) for s in self.ledger.buckets]
        r = RunResult(
            mode=sc.mode.value, seed=cfg.seed, warn_th=sc.thresholds.warn_th,
            cong_th=sc.thresholds.cong_th, policy=sc.policy.value,
            sim_time=cfg.sim_time, warmup=cfg.warmup, num_nodes=self.topo.num_nodes,
            num_pes=len(self.pes), num_p=len(self.p_nodes),
        )
        r.flows_arrived = self.stats["arrived"]
        r.flows_completed = self.stats["completed"]
        r.flows_rejected = self.stats["rejected"]
        r.flows_active_end = self.flows_active
        r.rx_bytes = self.rx_bytes
        r.tx_bytes = self.rx_bytes
        r.avg_tput_mbps = metrics.avg_throughput_mbps(self.rx_bytes, span)
        r.packet_in_total = self.ledger.total("packet_in")
        r.packet_in_per_s = sum(pkt_in) / len(pkt_in) if pkt_in else 0.0
        r.openflow_msgs_per_s = sum(msgs) / len(msgs) if msgs else 0.0
        r.max_controller_msgs_per_s = max(all_msgs, default=0)
        if post:
            r.sum_dft_mean = sum(s["sum_dft_pe"] for s in post) / len(post)
            r.avg_labels_mean = sum(s["avg_labels_p"] for s in post) / len(post)
            r.max_labels = float(max(s["max_labels_p"] for s in post))
            nn = len(post[0]["per_node"])
            r.per_node_entries_mean = [sum(s["per_node"][i] for s in post) / len(post)
                                       for i in range(nn)]
            ks = [metrics.KpiSample(int(round(s["t"])), s["sum_dft_pe"], s["labels_per_p"],
                                    s["active_flows"]) for s in post]
            if self.mechanism and self.p_nodes and any(k.total_flows > 0 for k in ks):
                r.max_fri_pct = metrics.max_fri(ks)
        for s in post:
            s.pop("per_node")
        r.samples = post
        r.per_node_packet_in = [getattr(self.switches[n], "packet_in", 0)
                                for n in range(self.topo.num_nodes)]
        r.path_violations = self.stats["path_violations"]
        r.capacity_violations = self.stats["capacity_violations"]
        r.draining_increases = self.stats["draining_increases"]
        r.forwarding_faults = sum(sw.faults for sw in self.switches.values())
        if self.mechanism:
            r.label_epochs = len(self.controller.history)
            r.reallocations = self.controller.reallocations
            r.max_live_labels = self.max_live_labels
            r.epochs = [e.summary() for e in self.controller.history]
        return r


def run(scenario: Scenario) -> RunResult:
    """Simulate one scenario to ``sim_time``."""
    return _Simulation(scenario).run()


def simulate(scenario: Scenario) -> tuple[RunResult, "_Simulation"]:
    """Like :func:`run` but also hand back the final simulator state."""
    sim = _Simulation(scenario)
    return sim.run(), sim
