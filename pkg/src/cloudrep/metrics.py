"""Per-query series, aggregates, strategy comparison and report export."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import List, Tuple

from .costmodel import ZERO_COST, CostBreakdown

SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "tick",
    "query_id",
    "class",
    "t_q_s",
    "cost_cpu",
    "cost_io",
    "cost_bw",
    "cost_storage",
    "cost_total",
    "gb_intradc",
    "gb_interregion",
    "gb_interprovider",
    "replicas",
]


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    """One tick. ``query_cost`` is c_Q; ``overhead`` holds replication and storage charges billed that tick."""

    tick: int
    query_id: int
    kind: str
    origin: Tuple[str, str]
    t_q: float
    query_cost: CostBreakdown
    overhead: CostBreakdown
    gb_intradc: Decimal
    gb_interregion: Decimal
    gb_interprovider: Decimal
    replicas: int

    @property
    def charged(self) -> CostBreakdown:
        return self.query_cost + self.overhead

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "query_id": self.query_id,
            "class": self.kind,
            "origin": list(self.origin),
            "t_q_s": self.t_q,
            "query_cost": self.query_cost.to_dict(),
            "overhead": self.overhead.to_dict(),
            "gb_intradc": str(self.gb_intradc),
            "gb_interregion": str(self.gb_interregion),
            "gb_interprovider": str(self.gb_interprovider),
            "replicas": self.replicas,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Row":
        return cls(
            d["tick"],
            d["query_id"],
            d["class"],
            tuple(d["origin"]),
            d["t_q_s"],
            CostBreakdown.from_dict(d["query_cost"]),
            CostBreakdown.from_dict(d["overhead"]),
            Decimal(d["gb_intradc"]),
            Decimal(d["gb_interregion"]),
            Decimal(d["gb_interprovider"]),
            d["replicas"],
        )


def mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values) if values else 0.0


def compute_aggregates(rows: List[Row]) -> dict:
    total = ZERO_COST
    query_total = ZERO_COST
    for r in rows:
        total = total + r.charged
        query_total = query_total + r.query_cost
    n = len(rows)
    tail = rows[n - n // 4:] if n >= 4 else rows
    return {
        "queries": n,
        "avg_response_time": mean(r.t_q for r in rows),
        "avg_response_time_final_quartile": mean(r.t_q for r in tail),
        "cumulative_bandwidth_cost": total.bandwidth,
        "total_cost": total,
        "query_cost": query_total,
        "final_replicas": rows[-1].replicas if rows else 0,
        "max_replicas": max((r.replicas for r in rows), default=0),
        "gb_intradc": sum((r.gb_intradc for r in rows), Decimal(0)),
        "gb_interregion": sum((r.gb_interregion for r in rows), Decimal(0)),
        "gb_interprovider": sum((r.gb_interprovider for r in rows), Decimal(0)),
    }


def _aggregates_to_json(agg: dict) -> dict:
    out = {}
    for k, v in agg.items():
        if isinstance(v, CostBreakdown):
            out[k] = v.to_dict()
        elif isinstance(v, Decimal):
            out[k] = str(v)
        else:
            out[k] = v
    return out


@dataclass
class SimReport:
    strategy: str
    fingerprint: str
    rows: List[Row] = field(default_factory=list)

    @property
    def aggregates(self) -> dict:
        return compute_aggregates(self.rows)

    def record(self, row: Row) -> None:
        expected = self.rows[-1].tick + 1 if self.rows else 1
        if row.tick != expected:
            raise ReportError(f"out-of-order tick {row.tick}, expected {expected}")
        self.rows.append(row)

    def series(self, name: str) -> list:
        getters = {
            "t_q": lambda r: r.t_q,
            "cost_bw": lambda r: r.charged.bandwidth,
            "query_bw": lambda r: r.query_cost.bandwidth,
            "gb_interprovider": lambda r: r.gb_interprovider,
            "gb_interregion": lambda r: r.gb_interregion,
            "replicas": lambda r: r.replicas,
        }
        return [getters[name](r) for r in self.rows]

    def cumulative_bandwidth(self) -> List[Decimal]:
        out, acc = [], Decimal(0)
        for r in self.rows:
            acc += r.charged.bandwidth
            out.append(acc)
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "strategy": self.strategy,
            "fingerprint": self.fingerprint,
            "aggregates": _aggregates_to_json(self.aggregates),
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ReportError(f"unsupported report schema_version {d.get('schema_version')!r}")
        rep = cls(d["strategy"], d["fingerprint"], [Row.from_dict(r) for r in d["rows"]])
        if _aggregates_to_json(rep.aggregates) != d.get("aggregates"):
            raise ReportError("report aggregates do not match its rows")
        return rep

    def __eq__(self, other):
        if not isinstance(other, SimReport):
            return NotImplemented
        return (self.strategy, self.fingerprint, self.rows) == (other.strategy, other.fingerprint, other.rows)


# -- comparison -------------------------------------------------------------------


def _reduction(new: float, base: float) -> float:
    if base == 0:
        return 0.0
    return 1.0 - new / base


def compare(tcdrm: SimReport, baseline: SimReport) -> dict:
    """Signed reductions of TCDRM relative to the baseline (0.78 means 78% lower)."""
    if tcdrm.fingerprint != baseline.fingerprint:
        raise ReportError(f"fingerprint mismatch: {tcdrm.fingerprint} vs {baseline.fingerprint}")
    if len(tcdrm.rows) != len(baseline.rows):
        raise ReportError("reports cover different numbers of queries")
    a, b = tcdrm.aggregates, baseline.aggregates
    bw_new, bw_base = a["cumulative_bandwidth_cost"], b["cumulative_bandwidth_cost"]
    return {
        "schema_version": SCHEMA_VERSION,
        "fingerprint": tcdrm.fingerprint,
        "strategies": [tcdrm.strategy, baseline.strategy],
        "queries": a["queries"],
        "cumulative_bandwidth_cost": [str(bw_new), str(bw_base)],
        "bandwidth_cost_reduction": 0.0 if bw_base == 0 else float(1 - bw_new / bw_base),
        "total_cost": [str(a["total_cost"].total), str(b["total_cost"].total)],
        "avg_response_time": [a["avg_response_time"], b["avg_response_time"]],
        "response_time_reduction": _reduction(a["avg_response_time"], b["avg_response_time"]),
        "avg_response_time_final_quartile": [
            a["avg_response_time_final_quartile"],
            b["avg_response_time_final_quartile"],
        ],
        "response_time_reduction_final_quartile": _reduction(
            a["avg_response_time_final_quartile"], b["avg_response_time_final_quartile"]
        ),
        "gb_interprovider": [str(a["gb_interprovider"]), str(b["gb_interprovider"])],
        "gb_interregion": [str(a["gb_interregion"]), str(b["gb_interregion"])],
    }


# -- export ------------------------------------------------------------------------


def to_csv(report: SimReport) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION} strategy={report.strategy} fingerprint={report.fingerprint}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        c = r.charged
        w.writerow([
            r.tick, r.query_id, r.kind, repr(r.t_q),
            c.cpu, c.io, c.bandwidth, c.storage, c.total,
            r.gb_intradc, r.gb_interregion, r.gb_interprovider, r.replicas,
        ])
    return buf.getvalue()


def to_json(report: SimReport) -> str:
    return json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n"


def export(report: SimReport, fmt: str, path) -> Path:
    path = Path(path)
    if fmt == "csv":
        text = to_csv(report)
    elif fmt == "json":
        text = to_json(report)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    path.write_text(text)
    return path


def load_report(path) -> SimReport:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ReportError(f"{path}: not a JSON report ({e.msg})") from None
    return SimReport.from_dict(data)
