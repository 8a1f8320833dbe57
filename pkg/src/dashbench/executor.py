"""Workload execution: batches are issued in schedule order at their
offsets, queries within a batch concurrently (bounded by the connection
pool; fan-out beyond the pool proceeds in waves).

Every query yields exactly one measurement; per-query driver errors are
captured and never abort the run. Timing uses a monotonic clock in ms
relative to the run start. The scheduler tick (sleep granularity and the
documented tolerance on batch issue times) is 10 ms.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .compiler import Workload
from .drivers import Driver, DriverConfig, QueryTimeout, open_driver
from .errors import ConfigError

SCHEDULER_TICK_MS = 10.0


@dataclass
class QueryMeasurement:
    batch_index: int
    batch_timestamp: int
    node: str
    relationship: str
    load_group: str
    detail_level: int
    issue_ms: float
    first_result_ms: float
    completion_ms: float
    rows_returned: int
    outcome: str  # "ok" | "error" | "timeout"
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "batch_index": self.batch_index,
            "batch_timestamp": self.batch_timestamp,
            "node": self.node,
            "relationship": self.relationship,
            "load_group": self.load_group,
            "detail_level": self.detail_level,
            "issue_ms": self.issue_ms,
            "first_result_ms": self.first_result_ms,
            "completion_ms": self.completion_ms,
            "rows_returned": self.rows_returned,
            "outcome": self.outcome,
            "error": self.error,
        }


def batch_offsets(w: Workload, speed: float = float("inf")) -> list[float]:
    """Wall-clock offsets (ms) per batch. Infinite speed is stress mode:
    everything at offset 0."""
    if not w.batches:
        return []
    if speed <= 0:
        raise ConfigError(f"speed must be positive, got {speed}")
    t0 = w.batches[0].timestamp
    if speed == float("inf"):
        return [0.0 for _ in w.batches]
    return [(b.timestamp - t0) / speed for b in w.batches]


class _ConnectionPool:
    """One dedicated connection per worker thread, opened lazily."""

    def __init__(self, driver: Driver):
        self.driver = driver
        self._local = threading.local()
        self._all: list = []
        self._lock = threading.Lock()

    def get(self):
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = self.driver.connect()
            self._local.conn = conn
            with self._lock:
                self._all.append(conn)
        return conn

    def close_all(self) -> None:
        with self._lock:
            for conn in self._all:
                self.driver.close(conn)
            self._all.clear()


def run_workload(
    w: Workload,
    schedule: list[float] | None,
    config: DriverConfig,
) -> list[QueryMeasurement]:
    """Execute a workload against the configured driver and return one
    measurement per query, ordered by (batch index, query index).

    `schedule` gives one wall-clock offset (ms) per batch; None means
    stress mode (all offsets 0). Connectivity is verified before any batch
    runs; after that, per-query failures are recorded, not raised.
    """
    if schedule is None:
        schedule = batch_offsets(w)
    if len(schedule) != len(w.batches):
        raise ConfigError(f"schedule length {len(schedule)} != batch count {len(w.batches)}")

    driver = open_driver(config)
    probe = driver.connect()  # DriverConnectionError here aborts the run
    driver.close(probe)

    pool = _ConnectionPool(driver)
    total = sum(len(b.queries) for b in w.batches)
    # One slot per query, filled by flat index: output order is always
    # (batch index, query index) no matter how completions interleave.
    slots: list[QueryMeasurement | None] = [None] * total
    start = time.perf_counter()

    def to_ms(t: float) -> float:
        return (t - start) * 1000.0

    def work(slot: int, batch_index: int, timestamp: int, query) -> None:
        conn = pool.get()
        issue = time.perf_counter()
        try:
            _, rows, (t_issue, t_first, t_done) = driver.execute(conn, query.sql)
            m = QueryMeasurement(
                batch_index=batch_index,
                batch_timestamp=timestamp,
                node=query.node,
                relationship=query.relationship,
                load_group=query.load_group,
                detail_level=query.detail_level,
                issue_ms=to_ms(t_issue),
                first_result_ms=to_ms(t_first),
                completion_ms=to_ms(t_done),
                rows_returned=len(rows),
                outcome="ok",
            )
        except QueryTimeout as exc:
            now = time.perf_counter()
            m = QueryMeasurement(
                batch_index=batch_index,
                batch_timestamp=timestamp,
                node=query.node,
                relationship=query.relationship,
                load_group=query.load_group,
                detail_level=query.detail_level,
                issue_ms=to_ms(issue),
                first_result_ms=to_ms(now),
                completion_ms=to_ms(now),
                rows_returned=0,
                outcome="timeout",
                error=str(exc),
            )
        except Exception as exc:
            now = time.perf_counter()
            m = QueryMeasurement(
                batch_index=batch_index,
                batch_timestamp=timestamp,
                node=query.node,
                relationship=query.relationship,
                load_group=query.load_group,
                detail_level=query.detail_level,
                issue_ms=to_ms(issue),
                first_result_ms=to_ms(now),
                completion_ms=to_ms(now),
                rows_returned=0,
                outcome="error",
                error=f"{type(exc).__name__}: {exc}",
            )
        slots[slot] = m

    executor = ThreadPoolExecutor(max_workers=config.pool_size)
    futures = []
    flat = 0
    try:
        for batch_index, (batch, offset) in enumerate(zip(w.batches, schedule)):
            while True:
                remaining_s = offset / 1000.0 - (time.perf_counter() - start)
                if remaining_s <= 0:
                    break
                time.sleep(min(remaining_s, SCHEDULER_TICK_MS / 1000.0))
            for query in batch.queries:
                futures.append(executor.submit(work, flat, batch_index, batch.timestamp, query))
                flat += 1
        for f in futures:
            f.result()
    finally:
        executor.shutdown(wait=True)
        pool.close_all()
        driver.shutdown()

    return [m for m in slots if m is not None]


def measurements_to_jsonl(ms: list[QueryMeasurement]) -> str:
    return "".join(json.dumps(m.to_dict()) + "\n" for m in ms)


def write_measurements(ms: list[QueryMeasurement], path: str | Path) -> None:
    Path(path).write_text(measurements_to_jsonl(ms), encoding="utf-8")


def read_measurements(path: str | Path) -> list[QueryMeasurement]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        out.append(QueryMeasurement(**obj))
    return out
