"""Synthetic interaction generation (two-state bursty user model) and
replay scheduling for observed logs.

The generator alternates goal-refinement bursts with static think time:
pick a small weighted subset of widgets, fire a geometric-length burst of
events on it with short uniform gaps, then idle for a lognormal think
period and redraw the subset.

Streams are fully determined by the seed. The generator identity is part
of the external contract: PCG64 uniform doubles, Box-Muller normals and
inversion-sampled geometrics — library defaults are deliberately not used
for the derived draws.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainMissing
from .specs import (
    CATEGORICAL,
    AttributeRef,
    Composition,
    DatabaseSpec,
    FieldPredicate,
    InteractionEvent,
    InterfaceSpec,
    Predicate,
    RelationshipSpec,
    event_to_json_line,
)

# z such that P(Z < z) = 0.01 for a standard normal; used by the
# configuration check that think time clears the intra-burst gap ceiling.
_Z01 = -2.3263478740408408

SUPPORTED_RNGS = ("pcg64",)


@dataclass
class UserModelConfig:
    seed: int = 0
    n_interactions: int = 100
    burst_length_p: float = 0.25
    think_time_log_mu: float = math.log(8000.0)
    think_time_log_sigma: float = 0.6
    intra_burst_gap_ms: tuple[float, float] = (200.0, 1200.0)
    widget_subset_size: int = 3
    widget_weights: dict[str, float] | None = None
    rng: str = "pcg64"
    start_timestamp_ms: int = 1_600_000_000_000

    def validate(self) -> None:
        if self.rng not in SUPPORTED_RNGS:
            raise ConfigError(f"unsupported rng {self.rng!r}; the stream contract supports {SUPPORTED_RNGS}")
        if not (0.0 < self.burst_length_p <= 1.0):
            raise ConfigError(f"burst_length_p must be in (0, 1], got {self.burst_length_p}")
        if self.widget_subset_size < 1:
            raise ConfigError("widget_subset_size must be >= 1")
        if self.n_interactions < 0:
            raise ConfigError("n_interactions must be >= 0")
        lo, hi = self.intra_burst_gap_ms
        if lo < 0 or hi < lo:
            raise ConfigError(f"intra_burst_gap_ms must satisfy 0 <= lo <= hi, got [{lo}, {hi}]")
        if self.think_time_log_sigma < 0:
            raise ConfigError("think_time_log_sigma must be >= 0")
        if self.widget_weights is not None:
            if any(w < 0 for w in self.widget_weights.values()):
                raise ConfigError("widget weights must be >= 0")
            if not any(w > 0 for w in self.widget_weights.values()):
                raise ConfigError("at least one widget weight must be > 0")

    def think_floor_exceeds_gap(self) -> bool:
        """True when the 1st percentile of the think-time lognormal clears
        the intra-burst gap ceiling; think gaps are then clamped above it."""
        p1 = math.exp(self.think_time_log_mu + self.think_time_log_sigma * _Z01)
        return p1 > self.intra_burst_gap_ms[1]

    @classmethod
    def from_dict(cls, d: dict) -> "UserModelConfig":
        known = {
            "seed", "n_interactions", "burst_length_p", "think_time_log_mu",
            "think_time_log_sigma", "intra_burst_gap_ms", "widget_subset_size",
            "widget_weights", "rng", "start_timestamp_ms",
        }
        extra = d.keys() - known
        if extra:
            raise ConfigError(f"unknown user-model key(s): {', '.join(sorted(extra))}")
        kwargs = dict(d)
        if "intra_burst_gap_ms" in kwargs:
            lo, hi = kwargs["intra_burst_gap_ms"]
            kwargs["intra_burst_gap_ms"] = (float(lo), float(hi))
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "UserModelConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class Domains:
    """Sampled value domains: distinct values for categorical attributes,
    (min, max) for numerical ones. File entries may key either
    "table.attribute" or a bare attribute name."""

    values: dict[str, list] = dc_field(default_factory=dict)
    ranges: dict[str, tuple[float, float]] = dc_field(default_factory=dict)

    def _key(self, ref: AttributeRef) -> str | None:
        for key in (f"{ref.table}.{ref.attribute}", ref.attribute):
            if key in self.values or key in self.ranges:
                return key
        return None

    def categorical(self, ref: AttributeRef) -> list:
        key = self._key(ref)
        if key is None or key not in self.values:
            raise DomainMissing(f"no value domain for categorical attribute {ref.table}.{ref.attribute}")
        return self.values[key]

    def numerical(self, ref: AttributeRef) -> tuple[float, float]:
        key = self._key(ref)
        if key is None or key not in self.ranges:
            raise DomainMissing(f"no min/max domain for numerical attribute {ref.table}.{ref.attribute}")
        return self.ranges[key]

    def has(self, ref: AttributeRef) -> bool:
        return self._key(ref) is not None

    @classmethod
    def from_dict(cls, d: dict) -> "Domains":
        dom = cls()
        for key, entry in d.items():
            if not isinstance(entry, dict):
                raise ConfigError(f"domain entry {key!r} must be an object")
            if "values" in entry:
                if not entry["values"]:
                    raise ConfigError(f"domain {key!r} has an empty value list")
                dom.values[key] = list(entry["values"])
            elif "min" in entry and "max" in entry:
                lo, hi = float(entry["min"]), float(entry["max"])
                if hi < lo:
                    raise ConfigError(f"domain {key!r} has max < min")
                dom.ranges[key] = (lo, hi)
            else:
                raise ConfigError(f"domain {key!r} needs either 'values' or 'min'/'max'")
        return dom

    @classmethod
    def from_file(cls, path: str | Path) -> "Domains":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def sample_domains(driver, db: DatabaseSpec) -> Domains:
    """Build domains with a sampling pass over a live database: SELECT
    DISTINCT for categorical attributes, MIN/MAX for numerical ones."""
    dom = Domains()
    for table, attrs in db.tables.items():
        for attr, kind in attrs.items():
            key = f"{table}.{attr}"
            if kind == CATEGORICAL:
                _, rows = driver.query(f"SELECT DISTINCT {attr} FROM {table}")
                dom.values[key] = sorted(r[0] for r in rows if r[0] is not None)
            else:
                _, rows = driver.query(f"SELECT MIN({attr}) AS lo, MAX({attr}) AS hi FROM {table}")
                lo, hi = rows[0]
                if lo is not None and hi is not None:
                    dom.ranges[key] = (float(lo), float(hi))
    return dom


# -- deterministic draws -----------------------------------------------------

class _Stream:
    """All randomness flows through PCG64 uniform doubles so the stream is
    reproducible from the documented algorithm alone."""

    def __init__(self, seed: int):
        self._rng = np.random.Generator(np.random.PCG64(seed))

    def uniform(self) -> float:
        return float(self._rng.random())

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + self.uniform() * (hi - lo)

    def index(self, n: int) -> int:
        return min(int(self.uniform() * n), n - 1)

    def geometric(self, p: float) -> int:
        if p >= 1.0:
            return 1
        u = self.uniform()
        return 1 + int(math.floor(math.log1p(-u) / math.log1p(-p)))

    def normal(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        if u1 <= 0.0:
            u1 = 5e-324
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def weighted_subset(self, names: list[str], weights: list[float], k: int) -> list[str]:
        pool = list(zip(names, weights))
        chosen: list[str] = []
        for _ in range(k):
            total = sum(w for _, w in pool)
            if total <= 0:
                # only zero-weight candidates left; fall back to uniform
                idx = self.index(len(pool))
            else:
                r = self.uniform() * total
                acc = 0.0
                idx = len(pool) - 1
                for i, (_, w) in enumerate(pool):
                    acc += w
                    if r < acc:
                        idx = i
                        break
            chosen.append(pool.pop(idx)[0])
        return chosen


def _sample_predicate(stream: _Stream, ref: AttributeRef, kind: str, domains: Domains) -> FieldPredicate:
    if kind == CATEGORICAL:
        values = domains.categorical(ref)
        if stream.uniform() < 0.7 or len(values) == 1:
            return FieldPredicate(field=ref.attribute, op="equal", value=values[stream.index(len(values))])
        size = 1 + stream.index(min(3, len(values)))
        picked: list = []
        remaining = list(values)
        for _ in range(size):
            picked.append(remaining.pop(stream.index(len(remaining))))
        return FieldPredicate(field=ref.attribute, op="oneOf", value=tuple(picked))
    lo, hi = domains.numerical(ref)
    if stream.uniform() < 0.7:
        a = stream.uniform_in(lo, hi)
        b = stream.uniform_in(lo, hi)
        if a > b:
            a, b = b, a
        return FieldPredicate(field=ref.attribute, op="range", value=(a, b))
    op = ("lt", "lte", "gt", "gte")[stream.index(4)]
    return FieldPredicate(field=ref.attribute, op=op, value=stream.uniform_in(lo, hi))


def _event_parameters(stream: _Stream, rel: RelationshipSpec, db: DatabaseSpec, domains: Domains) -> Predicate | None:
    preds = [
        _sample_predicate(stream, ref, db.kind_of(ref.table, ref.attribute), domains)
        for ref in rel.attribute
    ]
    if not preds:
        return None
    if len(preds) == 1:
        return preds[0]
    return Composition(op="and", children=tuple(preds))


def simulate_interactions(
    iface: InterfaceSpec,
    domains: Domains,
    cfg: UserModelConfig,
) -> list[InteractionEvent]:
    """Generate cfg.n_interactions events with strictly increasing
    timestamps, fully determined by cfg.seed."""
    cfg.validate()
    db = iface.db
    rels_by_widget: dict[str, list[RelationshipSpec]] = {}
    for rel in iface.relationships:
        rels_by_widget.setdefault(rel.source, []).append(rel)
    eligible = [w for w in iface.widgets if w.name in rels_by_widget]
    if not eligible:
        raise ConfigError("no widget sources any relationship; nothing to simulate")
    k = cfg.widget_subset_size
    if k > len(eligible):
        raise ConfigError(f"widget_subset_size {k} exceeds the {len(eligible)} widgets that source relationships")
    if cfg.widget_weights is not None:
        unknown = cfg.widget_weights.keys() - {w.name for w in eligible}
        if unknown:
            raise ConfigError(f"widget_weights name unknown or relationship-less widget(s): {sorted(unknown)}")
    for w in eligible:
        for ref in w.attribute:
            if not domains.has(ref):
                raise DomainMissing(f"widget {w.name!r} needs a domain for {ref.table}.{ref.attribute}")

    names = [w.name for w in eligible]
    weights = [
        (cfg.widget_weights or {}).get(name, 1.0 if cfg.widget_weights is None else 0.0)
        for name in names
    ]
    clamp_think = cfg.think_floor_exceeds_gap()
    gap_lo, gap_hi = cfg.intra_burst_gap_ms

    stream = _Stream(cfg.seed)
    events: list[InteractionEvent] = []
    t = cfg.start_timestamp_ms
    while len(events) < cfg.n_interactions:
        subset = stream.weighted_subset(names, weights, k)
        burst_len = stream.geometric(cfg.burst_length_p)
        for j in range(burst_len):
            if len(events) >= cfg.n_interactions:
                break
            widget = subset[stream.index(len(subset))]
            rels = rels_by_widget[widget]
            rel = rels[stream.index(len(rels))]
            params = _event_parameters(stream, rel, db, domains)
            events.append(InteractionEvent(relationship=rel.name, timestamp=t, parameters=params))
            if len(events) >= cfg.n_interactions:
                break
            if j < burst_len - 1:
                t += max(1, round(stream.uniform_in(gap_lo, gap_hi)))
        if len(events) < cfg.n_interactions:
            think = round(math.exp(cfg.think_time_log_mu + cfg.think_time_log_sigma * stream.normal()))
            if clamp_think:
                think = max(think, int(gap_hi) + 1)
            t += max(1, think)
    return events


def replay_schedule(events: list[InteractionEvent], speed: float) -> list[tuple[InteractionEvent, float]]:
    """Wall-clock offsets for a timestamp-sorted event list. speed scales
    time linearly; math.inf collapses every offset to 0 (stress mode)."""
    if not events:
        return []
    if speed <= 0:
        raise ConfigError(f"replay speed must be positive, got {speed}")
    t0 = events[0].timestamp
    if math.isinf(speed):
        return [(ev, 0.0) for ev in events]
    return [(ev, (ev.timestamp - t0) / speed) for ev in events]


def events_to_jsonl(events: list[InteractionEvent]) -> str:
    return "".join(event_to_json_line(ev) + "\n" for ev in events)


def write_events(events: list[InteractionEvent], path: str | Path) -> None:
    Path(path).write_text(events_to_jsonl(events), encoding="utf-8")
