"""Command-line entry point: run suites, compare them, validate topologies."""

from __future__ import annotations

import argparse
import csv
import functools
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import metrics
from .config import ConfigError, ScenarioConfig, load_config
from .engine import Mode, RunResult, run, timeseries_csv
from .topology import Topology, TopologyError, load_topology

EXIT_OK, EXIT_FAULT, EXIT_INVALID = 0, 1, 2


class RunFault(RuntimeError):
    """A single run raised; the message names its seed and threshold cell."""


@dataclass(frozen=True)
class _Job:
    index: int
    cong: float
    warn: float
    seed: int


@functools.lru_cache(maxsize=4)
def _topology(path: str) -> Topology:
    return load_topology(path)[0]


def _execute(cfg: ScenarioConfig, job: _Job) -> str:
    try:
        topo = _topology(str(cfg.resolve_topology()))
        return run(cfg.scenario(topo, job.cong, job.warn, job.seed)).to_json()
    except Exception as exc:  # reported with the failing cell
        raise RunFault(f"run failed for seed={job.seed} cell=(cong={job.cong}, warn={job.warn}): "
                       f"{type(exc).__name__}: {exc}") from exc


def run_name(mode: str, cong: float, warn: float, index: int) -> str:
    return f"{mode.lower()}_c{cong:g}_w{warn:g}_r{index:02d}"


def run_suite(cfg: ScenarioConfig, jobs: int | None = None, output: str | None = None,
              echo=print) -> list[metrics.KpiReport]:
    """Execute every (threshold pair, replication) run and write all outputs."""
    out = cfg.resolve_output(output)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(cfg.dump())
    seeds = cfg.seeds()
    work = [_Job(i, c, w, s) for c, w in cfg.thresholds for i, s in enumerate(seeds)]
    jobs = max(1, jobs or os.cpu_count() or 1)
    if jobs == 1 or len(work) == 1:
        texts = [_execute(cfg, j) for j in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            texts = list(pool.map(_execute, [cfg] * len(work), work))
    results: dict[tuple[float, float], list[tuple[int, RunResult]]] = {}
    for job, text in zip(work, texts):
        name = run_name(cfg.mode.value, job.cong, job.warn, job.index)
        (runs_dir / f"{name}.json").write_text(text)
        res = RunResult.from_json(text)
        (runs_dir / f"{name}.csv").write_text(timeseries_csv(res))
        results.setdefault((job.cong, job.warn), []).append((job.index, res))
    reports = []
    for cell in cfg.thresholds:
        ordered = [r for _, r in sorted(results[cell], key=lambda x: x[0])]
        reports.append(metrics.summarize(ordered))
    _write_kpi_csv(out / "kpi.csv", reports)
    table = format_reports(reports)
    (out / "summary.txt").write_text(table)
    echo(table, end="")
    return reports


def _write_kpi_csv(path: Path, reports: Sequence[metrics.KpiReport]) -> None:
    rows = [r.row() for r in reports]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def _pm(value: tuple[float, float] | None, digits: int = 2) -> str:
    if value is None or math.isnan(value[0]):
        return "-"
    return f"{value[0]:.{digits}f}±{value[1]:.{digits}f}"


def format_reports(reports: Sequence[metrics.KpiReport]) -> str:
    head = ["CongTh", "WarnTh", "mode", "n", "Rx[GB]", "Tput[Mbps]", "SumDFT(PE)",
            "AvgLabels(P)", "MaxLabels(P)", "maxFRI[%]", "OF msgs/s"]
    rows = []
    for r in reports:
        v = r.values.get
        rows.append([f"{r.cong_th:g}", f"{r.warn_th:g}", r.mode, str(r.replications),
                     _pm(v("rx_gb")), _pm(v("avg_tput_mbps"), 1), _pm(v("sum_dft_mean"), 1),
                     _pm(v("avg_labels_mean"), 1), _pm(v("max_labels_mean"), 1),
                     _pm(v("max_fri_pct")), _pm(v("openflow_msgs_per_s"), 1)])
    return _table(head, rows)


def _table(head: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(head)]
    buf = io.StringIO()
    buf.write("  ".join(h.rjust(w) for h, w in zip(head, widths)) + "\n")
    for row in rows:
        buf.write("  ".join(c.rjust(w) for c, w in zip(row, widths)) + "\n")
    return buf.getvalue()


# comparison -------------------------------------------------------------------

def load_results(directory: str | Path) -> list[RunResult]:
    runs = Path(directory) / "runs"
    files = sorted(runs.glob("*.json"))
    if not files:
        raise ConfigError(f"no run results under {runs}")
    return [RunResult.from_json(f.read_text()) for f in files]


def _cells(results: Sequence[RunResult]) -> dict[tuple[float, float], dict[int, RunResult]]:
    cells: dict[tuple[float, float], dict[int, RunResult]] = {}
    for r in results:
        cells.setdefault((r.cong_th, r.warn_th), {})[r.seed] = r
    return cells


COMPARE_COLUMNS = ("rx_gain_pct", "cfri_pct", "msg_reduction_pct", "msg_reduction_worst_pct",
                   "tput_ratio")


def compare(mechanism: Sequence[RunResult], legacy: Sequence[RunResult]) -> list[dict]:
    """Per-cell paired comparison of two suites run over the same seeds.

    ``msg_reduction_worst_pct`` sets the busiest second of the first suite
    against the average rate of the second.
    """
    a_cells, b_cells = _cells(mechanism), _cells(legacy)
    rows = []
    for cell in sorted(a_cells):
        if cell in b_cells:
            ref = b_cells[cell]
        elif len(b_cells) == 1:
            ref = next(iter(b_cells.values()))
        else:
            raise ConfigError(f"no comparable cell for (cong={cell[0]}, warn={cell[1]})")
        runs = a_cells[cell]
        if set(runs) != set(ref):
            raise ConfigError(f"seed sets differ for cell (cong={cell[0]}, warn={cell[1]}); "
                              "refusing an unpaired comparison")
        cols: dict[str, list[float]] = {c: [] for c in COMPARE_COLUMNS}
        for seed in sorted(runs):
            a, b = runs[seed], ref[seed]
            cols["rx_gain_pct"].append(metrics.rx_gain(a.rx_bytes, b.rx_bytes))
            cols["cfri_pct"].append(metrics.cfri(a.avg_labels_mean, b.avg_labels_mean))
            cols["msg_reduction_pct"].append(
                metrics.message_reduction(a.openflow_msgs_per_s, b.openflow_msgs_per_s))
            cols["msg_reduction_worst_pct"].append(
                metrics.message_reduction(a.max_controller_msgs_per_s, b.openflow_msgs_per_s))
            cols["tput_ratio"].append(a.avg_tput_mbps / b.avg_tput_mbps)
        row: dict[str, object] = {"cong_th": cell[0], "warn_th": cell[1], "replications": len(runs)}
        for c, vals in cols.items():
            mean, hw = metrics.confidence_interval(vals) if len(vals) > 1 else (vals[0], 0.0)
            row[c], row[c + "_ci"] = mean, hw
        rows.append(row)
    return rows


def format_comparison(rows: Sequence[dict]) -> str:
    head = ["CongTh", "WarnTh", "n", "RxGain[%]", "CFRI[%]", "MsgRed[%]", "MsgRedWorst[%]",
            "TputRatio"]
    body = [[f"{r['cong_th']:g}", f"{r['warn_th']:g}", str(r["replications"])]
            + [_pm((r[c], r[c + "_ci"]), 3 if c == "tput_ratio" else 2) for c in COMPARE_COLUMNS]
            for r in rows]
    return _table(head, body)


# topology validation ----------------------------------------------------------

def validate_topology(path: str | Path) -> str:
    topo, _ = load_topology(path)
    unreachable = []
    for s in topo.pes:
        seen, stack = {s}, [s]
        while stack:
            u = stack.pop()
            for li in topo.out_links[u]:
                v = topo.links[li].dst
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        unreachable += [(s, d) for d in topo.pes if d not in seen]
    if unreachable:
        raise TopologyError(f"PE pairs without a path: {unreachable[:5]}")
    return (f"{path}: {topo.num_nodes} nodes, {len(topo.links)} directed links, "
            f"{len(topo.pes)} PE, {len(topo.p_nodes)} P; all PE pairs connected\n")


# argument handling ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mplsagg", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a replication suite")
    r.add_argument("--config", required=True, help="YAML scenario file")
    r.add_argument("--mode", type=str.upper, choices=[m.value for m in Mode])
    r.add_argument("--seed-base", type=int, help="override traffic.seed")
    r.add_argument("--jobs", type=int, help="parallel runs (default: CPU count)")
    r.add_argument("--output-dir", help="override output_dir (also via MPLSAGG_OUTPUT_DIR)")

    c = sub.add_parser("compare", help="paired comparison of two suite directories")
    c.add_argument("mechanism_dir")
    c.add_argument("legacy_dir")
    c.add_argument("--csv", help="also write the comparison rows to this file")

    t = sub.add_parser("topo", help="topology utilities")
    tsub = t.add_subparsers(dest="topo_command", required=True)
    v = tsub.add_parser("validate", help="parse and check a topology file")
    v.add_argument("path")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            overrides = {}
            if args.mode:
                overrides["mode"] = args.mode
            if args.seed_base is not None:
                overrides["traffic"] = {**cfg.to_dict()["traffic"], "seed": args.seed_base}
            if overrides:
                cfg = ScenarioConfig.from_dict({**cfg.to_dict(), **overrides}, cfg.base_dir)
            if args.jobs is not None and args.jobs < 1:
                raise ConfigError("--jobs must be at least 1")
            if not cfg.resolve_topology().exists():
                raise ConfigError(f"topology file not found: {cfg.resolve_topology()}")
            _topology(str(cfg.resolve_topology()))  # fail fast on a bad file
            run_suite(cfg, args.jobs, args.output_dir)
        elif args.command == "compare":
            rows = compare(load_results(args.mechanism_dir), load_results(args.legacy_dir))
            print(format_comparison(rows), end="")
            if args.csv:
                with open(args.csv, "w", newline="") as fh:
                    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
                    w.writeheader()
                    w.writerows(rows)
        else:
            print(validate_topology(args.path), end="")
    except (ConfigError, TopologyError, metrics.MetricError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except RunFault as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
