"""Pluggable DBMS drivers: SQLite, DuckDB and PostgreSQL.

A driver exposes connect / execute(sql) -> (rows, timings) / close; adding
a DBMS means implementing that trio plus a config stanza. Timing points
are taken on a monotonic clock inside execute so the executor measures the
same phases for every backend: issue, first result ready, fetch complete.
"""

from __future__ import annotations

import csv
import importlib
import os
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DriverConnectionError, HeaderMismatch
from .specs import CATEGORICAL, DatabaseSpec

DRIVER_KINDS = ("sqlite", "duckdb", "postgresql")

# Environment variables override file/flag credentials for the server DBMS.
_PG_ENV = {
    "host": "PGHOST",
    "port": "PGPORT",
    "user": "PGUSER",
    "password": "PGPASSWORD",
    "database": "PGDATABASE",
}


@dataclass
class DriverConfig:
    kind: str
    database: str | None = None  # file path for embedded engines, dbname for PostgreSQL
    host: str | None = None
    port: int | None = None
    user: str | None = None
    password: str | None = None
    pool_size: int = 4
    per_query_timeout_ms: int | None = None

    def validate(self) -> None:
        if self.kind not in DRIVER_KINDS:
            raise ConfigError(f"unknown driver kind {self.kind!r}; expected one of {DRIVER_KINDS}")
        if self.pool_size < 1:
            raise ConfigError("pool_size must be >= 1")
        if self.per_query_timeout_ms is not None and self.per_query_timeout_ms <= 0:
            raise ConfigError("per_query_timeout_ms must be positive")
        if self.kind in ("sqlite", "duckdb") and not self.database:
            raise ConfigError(f"{self.kind} driver needs a database path")

    def apply_env(self, env: dict[str, str] | None = None) -> "DriverConfig":
        """Overlay PostgreSQL credentials from the environment (env wins)."""
        if self.kind != "postgresql":
            return self
        env = os.environ if env is None else env
        for attr, var in _PG_ENV.items():
            if var in env and env[var] != "":
                value: object = env[var]
                if attr == "port":
                    value = int(env[var])
                setattr(self, attr, value)
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "DriverConfig":
        known = {"kind", "database", "host", "port", "user", "password", "pool_size", "per_query_timeout_ms"}
        extra = d.keys() - known
        if extra:
            raise ConfigError(f"unknown driver key(s): {', '.join(sorted(extra))}")
        cfg = cls(**d)
        cfg.validate()
        return cfg


class QueryTimeout(Exception):
    """Raised inside a driver when the per-query watchdog fired."""


class Driver:
    """Base driver; subclasses implement the raw connection trio."""

    kind: str = ""

    def __init__(self, config: DriverConfig):
        config.validate()
        self.config = config
        self._lock = threading.Lock()
        self._default_conn = None

    # -- subclass surface ---------------------------------------------------

    def _open(self):
        raise NotImplementedError

    def _interrupt(self, conn) -> None:
        raise NotImplementedError

    def _close(self, conn) -> None:
        conn.close()

    # -- shared machinery ---------------------------------------------------

    def connect(self):
        try:
            return self._open()
        except Exception as exc:
            raise DriverConnectionError(f"{self.kind}: cannot connect: {exc}") from exc

    def close(self, conn) -> None:
        try:
            self._close(conn)
        except Exception:
            pass

    def execute(self, conn, sql: str):
        """Run one statement; returns (columns, rows, (issue, first, done))
        with perf_counter timing points in seconds."""
        timed_out = threading.Event()
        timer = None
        if self.config.per_query_timeout_ms is not None:
            def _fire():
                timed_out.set()
                try:
                    self._interrupt(conn)
                except Exception:
                    pass
            timer = threading.Timer(self.config.per_query_timeout_ms / 1000.0, _fire)
            timer.daemon = True
            timer.start()
        try:
            issue = time.perf_counter()
            cursor = conn.execute(sql)
            first = time.perf_counter()
            rows = cursor.fetchall()
            done = time.perf_counter()
        except Exception as exc:
            if timed_out.is_set():
                raise QueryTimeout(str(exc)) from exc
            raise
        finally:
            if timer is not None:
                timer.cancel()
        columns = [d[0] for d in cursor.description] if cursor.description else []
        return columns, [tuple(r) for r in rows], (issue, first, done)

    def query(self, sql: str):
        """Convenience single-threaded query on a lazily opened shared
        connection; used for sampling, equivalence oracles and loading."""
        with self._lock:
            if self._default_conn is None:
                self._default_conn = self.connect()
            columns, rows, _ = self.execute(self._default_conn, sql)
            return columns, rows

    def run_script(self, statements: list[str]) -> None:
        with self._lock:
            if self._default_conn is None:
                self._default_conn = self.connect()
            for stmt in statements:
                self._default_conn.execute(stmt)
            self._commit(self._default_conn)

    def executemany(self, sql: str, rows) -> None:
        with self._lock:
            if self._default_conn is None:
                self._default_conn = self.connect()
            self._default_conn.executemany(sql, rows)
            self._commit(self._default_conn)

    def _commit(self, conn) -> None:
        commit = getattr(conn, "commit", None)
        if commit is not None:
            commit()

    def shutdown(self) -> None:
        with self._lock:
            if self._default_conn is not None:
                self.close(self._default_conn)
                self._default_conn = None

    @property
    def placeholder(self) -> str:
        return "?"


class SqliteDriver(Driver):
    kind = "sqlite"

    def __init__(self, config: DriverConfig):
        super().__init__(config)
        import sqlite3

        self._sqlite3 = sqlite3
        self._uri = config.database
        self._root = None
        if config.database == ":memory:":
            # A plain :memory: database is private to one connection; use a
            # named shared-cache database and pin it open for the driver's
            # lifetime so the pool sees one store.
            self._uri = f"file:dashbench-{uuid.uuid4().hex}?mode=memory&cache=shared"
            self._root = self._sqlite3.connect(self._uri, uri=True, check_same_thread=False)

    def _open(self):
        uri = self._uri.startswith("file:")
        return self._sqlite3.connect(self._uri, uri=uri, check_same_thread=False)

    def _interrupt(self, conn) -> None:
        conn.interrupt()


class DuckDbDriver(Driver):
    kind = "duckdb"

    def __init__(self, config: DriverConfig):
        super().__init__(config)
        try:
            self._duckdb = importlib.import_module("duckdb")
        except ImportError as exc:
            raise ConfigError("duckdb driver selected but the duckdb package is not installed") from exc
        self._root = None
        self._root_lock = threading.Lock()

    def _root_conn(self):
        with self._root_lock:
            if self._root is None:
                self._root = self._duckdb.connect(self.config.database)
            return self._root

    def _open(self):
        # One process-level connection; per-thread handles are duplicates.
        return self._root_conn().cursor()

    def _interrupt(self, conn) -> None:
        conn.interrupt()

    def shutdown(self) -> None:
        super().shutdown()
        with self._root_lock:
            if self._root is not None:
                self._root.close()
                self._root = None


class _PgConnection:
    """Adapter giving psycopg2 connections the execute/executemany shape
    the shared driver machinery expects."""

    def __init__(self, raw):
        self.raw = raw

    def execute(self, sql: str, params=None):
        cursor = self.raw.cursor()
        cursor.execute(sql, params)
        return cursor

    def executemany(self, sql: str, rows):
        cursor = self.raw.cursor()
        cursor.executemany(sql, rows)
        return cursor

    def commit(self):
        self.raw.commit()

    def close(self):
        self.raw.close()


class PostgresDriver(Driver):
    kind = "postgresql"

    def __init__(self, config: DriverConfig):
        super().__init__(config)
        try:
            self._psycopg2 = importlib.import_module("psycopg2")
        except ImportError as exc:
            raise ConfigError("postgresql driver selected but psycopg2 is not installed") from exc

    def _open(self):
        cfg = self.config
        raw = self._psycopg2.connect(
            host=cfg.host or "localhost",
            port=cfg.port or 5432,
            user=cfg.user,
            password=cfg.password,
            dbname=cfg.database,
        )
        raw.autocommit = True
        if cfg.per_query_timeout_ms is not None:
            cur = raw.cursor()
            cur.execute(f"SET statement_timeout = {int(cfg.per_query_timeout_ms)}")
            cur.close()
        return _PgConnection(raw)

    def _interrupt(self, conn) -> None:
        conn.raw.cancel()

    @property
    def placeholder(self) -> str:
        return "%s"


_DRIVERS = {
    "sqlite": SqliteDriver,
    "duckdb": DuckDbDriver,
    "postgresql": PostgresDriver,
}


def open_driver(config: DriverConfig) -> Driver:
    config.validate()
    return _DRIVERS[config.kind](config)


def load_dataset(driver: Driver, db: DatabaseSpec, table: str, csv_path: str | Path) -> int:
    """(Re)create `table` from a CSV whose header matches the database
    spec's attribute names exactly; returns the inserted row count.
    Categorical columns map to TEXT, numerical to DOUBLE PRECISION."""
    if table not in db.tables:
        raise ConfigError(f"table {table!r} is not in the database spec")
    attrs = db.tables[table]
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [a for a in attrs if a not in header]
        extra = [h for h in header if h not in attrs]
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"missing column(s) {missing}")
            if extra:
                parts.append(f"unexpected column(s) {extra}")
            raise HeaderMismatch(f"CSV header does not match table {table!r}: " + "; ".join(parts))
        rows = []
        for record in reader:
            row = []
            for attr, kind in attrs.items():
                value = record[attr]
                if value == "" or value is None:
                    row.append(None)
                elif kind == CATEGORICAL:
                    row.append(value)
                else:
                    row.append(float(value))
            rows.append(tuple(row))

    columns = ", ".join(
        f"{attr} {'TEXT' if kind == CATEGORICAL else 'DOUBLE PRECISION'}"
        for attr, kind in attrs.items()
    )
    driver.run_script([
        f"DROP TABLE IF EXISTS {table}",
        f"CREATE TABLE {table} ({columns})",
    ])
    if rows:
        placeholders = ", ".join([driver.placeholder] * len(attrs))
        driver.executemany(f"INSERT INTO {table} VALUES ({placeholders})", rows)
    return len(rows)
