"""Aggregate raw query measurements into the performance report.

Percentiles use the nearest-rank method (the value at 1-based index
ceil(q*n) of the ascending-sorted sample) so every reported percentile is
a member of the observed sample and cross-language implementations agree
bit-for-bit. Error and timeout measurements are excluded from latency
statistics but included in the counts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .executor import QueryMeasurement

DEFAULT_THRESHOLD_MS = 500.0

_PERCENTILES = (("p50", 0.50), ("p90", 0.90), ("p95", 0.95), ("p99", 0.99), ("max", 1.00))


def nearest_rank(sorted_sample: list[float], q: float) -> float:
    """q-th percentile of an ascending-sorted, non-empty sample."""
    n = len(sorted_sample)
    rank = max(1, math.ceil(q * n))
    return sorted_sample[min(rank, n) - 1]


def _percentile_block(values: list[float]) -> dict | None:
    if not values:
        return None
    ordered = sorted(values)
    return {name: nearest_rank(ordered, q) for name, q in _PERCENTILES}


@dataclass
class PerformanceReport:
    threshold_ms: float
    query_count: int
    ok_count: int
    error_count: int
    timeout_count: int
    query_latency_ms: dict | None
    rows_returned: dict | None
    batch_count: int
    batch_latency_ms: dict | None
    threshold_violation_fraction: float | None
    queries_per_second: float | None
    by_load_group: dict[str, dict] = field(default_factory=dict)
    by_relationship: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "threshold_ms": self.threshold_ms,
            "query_count": self.query_count,
            "ok_count": self.ok_count,
            "error_count": self.error_count,
            "timeout_count": self.timeout_count,
            "query_latency_ms": self.query_latency_ms,
            "rows_returned": self.rows_returned,
            "batch_count": self.batch_count,
            "batch_latency_ms": self.batch_latency_ms,
            "threshold_violation_fraction": self.threshold_violation_fraction,
            "queries_per_second": self.queries_per_second,
            "by_load_group": self.by_load_group,
            "by_relationship": self.by_relationship,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def to_text(self) -> str:
        lines = []
        lines.append(f"queries: {self.query_count} (ok {self.ok_count}, error {self.error_count}, timeout {self.timeout_count})")
        lines.append(f"batches: {self.batch_count}")
        if self.queries_per_second is not None:
            lines.append(f"throughput: {self.queries_per_second:.1f} queries/s")
        if self.query_latency_ms:
            q = self.query_latency_ms
            lines.append(
                f"query latency ms: p50 {q['p50']:.2f}  p90 {q['p90']:.2f}  p95 {q['p95']:.2f}  p99 {q['p99']:.2f}  max {q['max']:.2f}"
            )
        if self.batch_latency_ms:
            b = self.batch_latency_ms
            lines.append(
                f"batch latency ms: p50 {b['p50']:.2f}  p90 {b['p90']:.2f}  p95 {b['p95']:.2f}  p99 {b['p99']:.2f}  max {b['max']:.2f}"
            )
        if self.threshold_violation_fraction is not None:
            lines.append(
                f"batches over {self.threshold_ms:.0f} ms: {self.threshold_violation_fraction:.1%}"
            )
        if self.by_load_group:
            lines.append("")
            lines.append(f"{'load group':<12} {'queries':>8} {'ok':>6} {'p95 ms':>10} {'rows p95':>10}")
            for group, block in self.by_load_group.items():
                p95 = block["query_latency_ms"]["p95"] if block["query_latency_ms"] else float("nan")
                rows = block["rows_returned"]["p95"] if block["rows_returned"] else float("nan")
                lines.append(f"{group:<12} {block['query_count']:>8} {block['ok_count']:>6} {p95:>10.2f} {rows:>10.0f}")
        if self.by_relationship:
            lines.append("")
            lines.append(f"{'relationship':<24} {'queries':>8} {'ok':>6} {'p95 ms':>10}")
            for rel, block in self.by_relationship.items():
                p95 = block["query_latency_ms"]["p95"] if block["query_latency_ms"] else float("nan")
                lines.append(f"{rel:<24} {block['query_count']:>8} {block['ok_count']:>6} {p95:>10.2f}")
        return "\n".join(lines) + "\n"


def _batches(ms: list[QueryMeasurement]) -> dict[int, list[QueryMeasurement]]:
    grouped: dict[int, list[QueryMeasurement]] = {}
    for m in ms:
        grouped.setdefault(m.batch_index, []).append(m)
    return grouped


def _batch_latencies(grouped: dict[int, list[QueryMeasurement]]) -> list[float]:
    """Batch completion = max ok completion minus batch issue; batches with
    no ok query contribute no latency sample."""
    out = []
    for batch in grouped.values():
        issue = min(m.issue_ms for m in batch)
        ok = [m.completion_ms for m in batch if m.outcome == "ok"]
        if ok:
            out.append(max(ok) - issue)
    return out


def _block(ms: list[QueryMeasurement], threshold_ms: float) -> dict:
    ok = [m for m in ms if m.outcome == "ok"]
    grouped = _batches(ms)
    batch_lat = _batch_latencies(grouped)
    violations = sum(1 for v in batch_lat if v > threshold_ms)
    return {
        "query_count": len(ms),
        "ok_count": len(ok),
        "error_count": sum(1 for m in ms if m.outcome == "error"),
        "timeout_count": sum(1 for m in ms if m.outcome == "timeout"),
        "query_latency_ms": _percentile_block([m.completion_ms - m.issue_ms for m in ok]),
        "rows_returned": _rows_block(ok),
        "batch_count": len(grouped),
        "batch_latency_ms": _percentile_block(batch_lat),
        "threshold_violation_fraction": (violations / len(batch_lat)) if batch_lat else None,
    }


def _rows_block(ok: list[QueryMeasurement]) -> dict | None:
    if not ok:
        return None
    block = _percentile_block([float(m.rows_returned) for m in ok])
    block["total"] = sum(m.rows_returned for m in ok)
    return block


def aggregate(ms: list[QueryMeasurement], threshold_ms: float = DEFAULT_THRESHOLD_MS) -> PerformanceReport:
    """Deterministic, permutation-invariant aggregation of raw
    measurements. Empty input yields null metrics and zero counts."""
    ms = sorted(ms, key=lambda m: (m.batch_index, m.issue_ms, m.node, m.detail_level))
    overall = _block(ms, threshold_ms)

    by_group: dict[str, dict] = {}
    for group in sorted({m.load_group for m in ms}):
        by_group[group] = _block([m for m in ms if m.load_group == group], threshold_ms)
    by_rel: dict[str, dict] = {}
    for rel in sorted({m.relationship for m in ms}):
        by_rel[rel] = _block([m for m in ms if m.relationship == rel], threshold_ms)

    qps = None
    if ms:
        duration_ms = max(m.completion_ms for m in ms) - min(m.issue_ms for m in ms)
        if duration_ms > 0:
            qps = len(ms) / (duration_ms / 1000.0)

    return PerformanceReport(
        threshold_ms=threshold_ms,
        query_count=overall["query_count"],
        ok_count=overall["ok_count"],
        error_count=overall["error_count"],
        timeout_count=overall["timeout_count"],
        query_latency_ms=overall["query_latency_ms"],
        rows_returned=overall["rows_returned"],
        batch_count=overall["batch_count"],
        batch_latency_ms=overall["batch_latency_ms"],
        threshold_violation_fraction=overall["threshold_violation_fraction"],
        queries_per_second=qps,
        by_load_group=by_group,
        by_relationship=by_rel,
    )
