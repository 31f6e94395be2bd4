"""Seeded flow arrivals: Pareto sizes, exponential gaps, uniform PE pairs.

All randomness comes from numpy's PCG64. Each run seed is expanded through a
``SeedSequence`` into independent child streams for gaps, sizes, pairs and
host addresses, so a stream depends on nothing but the seed.
"""

from __future__ import annotations

import csv
import ipaddress
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .dataplane import FiveTuple, client_network

_BLOCK = 4096


@dataclass(frozen=True)
class TrafficConfig:
    pareto_shape: float = 1.5
    mean_size: float = 500e3  # bytes
    mean_interarrival: float = 3e-3  # seconds
    sim_time: float = 100.0
    warmup: float = 10.0
    seed: int = 1
    dst_port: int = 80

    def __post_init__(self) -> None:
        if self.pareto_shape <= 1:
            raise ValueError("Pareto shape must exceed 1 for a finite mean")
        if self.mean_size <= 0 or self.mean_interarrival <= 0:
            raise ValueError("mean size and mean inter-arrival must be positive")
        if not (0 <= self.warmup < self.sim_time):
            raise ValueError("warmup must be shorter than the simulated time")

    @property
    def pareto_scale(self) -> float:
        """Minimum flow size giving the configured mean."""
        return self.mean_size * (self.pareto_shape - 1.0) / self.pareto_shape


@dataclass(frozen=True)
class FlowArrival:
    time: float
    tuple: FiveTuple
    size: float  # bytes
    src_pe: int
    dst_pe: int
    index: int = 0


def derive_seed(seed: int, replication: int) -> int:
    """64-bit seed for replication ``replication`` of base ``seed``."""
    state = np.random.SeedSequence([seed, replication]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def streams(seed: int) -> tuple[np.random.Generator, ...]:
    """Independent generators: gaps, sizes, pairs, hosts."""
    children = np.random.SeedSequence(seed).spawn(4)
    return tuple(np.random.Generator(np.random.PCG64(c)) for c in children)


def draw_interarrivals(rng: np.random.Generator, cfg: TrafficConfig, n: int) -> np.ndarray:
    return rng.exponential(cfg.mean_interarrival, n)


def draw_sizes(rng: np.random.Generator, cfg: TrafficConfig, n: int) -> np.ndarray:
    # inverse transform; 1 - U lies in (0, 1]
    u = 1.0 - rng.random(n)
    return np.ceil(cfg.pareto_scale * u ** (-1.0 / cfg.pareto_shape))


def generate(cfg: TrafficConfig, pes: Sequence[int]) -> Iterator[FlowArrival]:
    """Arrivals in ``[0, sim_time)``, strictly increasing in time."""
    pes = sorted(pes)
    if len(pes) < 2:
        raise ValueError("traffic generation needs at least two PE nodes")
    npairs = len(pes) * (len(pes) - 1)
    base = {pe: int(client_network(pe).network_address) for pe in pes}
    gaps_rng, size_rng, pair_rng, host_rng = streams(cfg.seed)
    t = 0.0
    i = 0
    while True:
        gaps = draw_interarrivals(gaps_rng, cfg, _BLOCK)
        sizes = draw_sizes(size_rng, cfg, _BLOCK)
        pairs = pair_rng.integers(0, npairs, _BLOCK)
        hosts = host_rng.integers(1, 65535, _BLOCK)
        for gap, size, k, host in zip(gaps.tolist(), sizes.tolist(), pairs.tolist(), hosts.tolist()):
            nt = t + gap
            if nt >= cfg.sim_time:
                return
            if nt <= t:  # gap underflow; keep times strictly increasing
                nt = math.nextafter(t, math.inf)
            t = nt
            s, d = divmod(k, len(pes) - 1)
            src, dst = pes[s], pes[d + (d >= s)]
            ft = FiveTuple(
                base[src] + 1 + (i // 64000) % 65534,
                base[dst] + host,
                1024 + i % 64000,
                cfg.dst_port,
            )
            yield FlowArrival(t, ft, size, src, dst, i)
            i += 1


CSV_FIELDS = ("index", "time", "src", "dst", "size", "src_addr", "dst_addr", "src_port",
              "dst_port", "proto")


def write_csv(arrivals: Sequence[FlowArrival], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for a in arrivals:
            ft = a.tuple
            w.writerow([a.index, repr(a.time), a.src_pe, a.dst_pe, repr(a.size),
                        ipaddress.IPv4Address(ft.src_addr), ipaddress.IPv4Address(ft.dst_addr),
                        ft.src_port, ft.dst_port, ft.proto])


def read_csv(path: str | Path) -> list[FlowArrival]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ft = FiveTuple(int(ipaddress.IPv4Address(row["src_addr"])),
                           int(ipaddress.IPv4Address(row["dst_addr"])),
                           int(row["src_port"]), int(row["dst_port"]), row["proto"])
            out.append(FlowArrival(float(row["time"]), ft, float(row["size"]),
                                   int(row["src"]), int(row["dst"]), int(row["index"])))
    return out
