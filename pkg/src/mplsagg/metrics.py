"""KPIs: received-data gain, flow-reduction indicators, confidence intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from scipy import stats


class MetricError(ValueError):
    """A KPI is undefined for the given inputs."""


@dataclass(frozen=True)
class KpiSample:
    t: int
    sum_dft_pe: int
    labels_per_p: Sequence[int]
    total_flows: int


def rx_gain(rx: float, rx_legacy: float) -> float:
    """Percentage gain of received data over the legacy run."""
    if rx_legacy <= 0:
        raise MetricError("legacy Rx must be positive")
    return (rx - rx_legacy) / rx_legacy * 100.0


def max_fri(samples: Iterable[KpiSample]) -> float:
    """Best per-sample reduction of core entries relative to total flows."""
    best = None
    for s in samples:
        if s.total_flows <= 0:
            continue
        if not s.labels_per_p:
            raise MetricError("sample has no P nodes")
        avg = sum(s.labels_per_p) / len(s.labels_per_p)
        v = (1.0 - avg / s.total_flows) * 100.0
        if best is None or v > best:
            best = v
    if best is None:
        raise MetricError("no sample with active flows")
    return best


def cfri(avg_labels_p: float, avg_flows_legacy_p: float) -> float:
    if avg_flows_legacy_p <= 0:
        raise MetricError("legacy per-P average must be positive")
    return (1.0 - avg_labels_p / avg_flows_legacy_p) * 100.0


def message_reduction(mechanism_msgs: float, legacy_msgs: float) -> float:
    if legacy_msgs <= 0:
        raise MetricError("legacy message rate must be positive")
    return (1.0 - mechanism_msgs / legacy_msgs) * 100.0


def avg_throughput_mbps(rx_bytes: float, duration: float) -> float:
    return rx_bytes * 8.0 / duration / 1e6


def confidence_interval(samples: Sequence[float], level: float = 0.95) -> tuple[float, float]:
    """Student-t interval; returns (mean, half width)."""
    n = len(samples)
    if n < 2:
        raise MetricError("need at least two samples for a confidence interval")
    mean = math.fsum(samples) / n
    var = math.fsum((x - mean) ** 2 for x in samples) / (n - 1)
    t = stats.t.ppf(0.5 + level / 2.0, n - 1)
    return mean, float(t * math.sqrt(var / n))


@dataclass
class KpiReport:
    """Cross-replication means and 95% half widths, keyed by KPI name."""

    cong_th: float
    warn_th: float
    mode: str
    replications: int
    values: dict[str, tuple[float, float]] = field(default_factory=dict)

    COLUMNS = ("tx_gb", "rx_gb", "avg_tput_mbps", "rx_gain_pct", "max_fri_pct", "cfri_pct",
               "openflow_msgs_per_s", "sum_dft_mean", "avg_labels_mean", "max_labels_mean")

    def row(self) -> dict[str, object]:
        out: dict[str, object] = {"cong_th": self.cong_th, "warn_th": self.warn_th,
                                  "mode": self.mode, "replications": self.replications}
        for c in self.COLUMNS:
            mean, hw = self.values.get(c, (float("nan"), float("nan")))
            out[c] = mean
            out[c + "_ci"] = hw
        return out


def _ci(values: Sequence[float]) -> tuple[float, float]:
    if len(values) == 1:
        return float(values[0]), 0.0
    return confidence_interval(values)


def summarize(results: Sequence, legacy: Sequence | None = None) -> KpiReport:
    """Fold RunResults (seed-ordered) into a KpiReport.

    With ``legacy`` runs over the same seeds, RxGain and CFRI are computed per
    seed pair and then averaged.
    """
    if not results:
        raise MetricError("no results to summarize")
    first = results[0]
    rep = KpiReport(first.cong_th, first.warn_th, first.mode, len(results))
    col = {
        "tx_gb": [r.tx_bytes / 1e9 for r in results],
        "rx_gb": [r.rx_bytes / 1e9 for r in results],
        "avg_tput_mbps": [r.avg_tput_mbps for r in results],
        "openflow_msgs_per_s": [r.openflow_msgs_per_s for r in results],
        "sum_dft_mean": [r.sum_dft_mean for r in results],
        "avg_labels_mean": [r.avg_labels_mean for r in results],
        "max_labels_mean": [r.max_labels for r in results],
    }
    fri = [r.max_fri_pct for r in results if r.max_fri_pct is not None]
    if fri and first.mode == "MECHANISM":
        col["max_fri_pct"] = fri
    if legacy:
        by_seed = {r.seed: r for r in legacy}
        pairs = [(r, by_seed[r.seed]) for r in results if r.seed in by_seed]
        if len(pairs) != len(results):
            raise MetricError("legacy runs do not cover the same seeds")
        col["rx_gain_pct"] = [rx_gain(r.rx_bytes, l.rx_bytes) for r, l in pairs]
        col["cfri_pct"] = [cfri(r.avg_labels_mean, l.avg_labels_mean) for r, l in pairs]
    for k, v in col.items():
        rep.values[k] = _ci(v)
    return rep
