"""Compile dirty nodes into SQL and assemble timestamped query batches.

The emitted dialect is the intersection accepted verbatim by SQLite,
DuckDB and PostgreSQL: single-table SELECT / WHERE / GROUP BY with the
aggregates SUM, AVG, MIN, MAX, COUNT plus BETWEEN, IN and IS NOT NULL.
Compilation is deterministic: identical graph state and event yield
byte-identical SQL.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .errors import DashbenchError, EmptyFieldList, SchemaError, WorkloadError
from .graph import (
    InterfaceGraph,
    Node,
    apply_data_manipulation,
    apply_interface_manipulation,
)
from .specs import (
    MANY_HIGH,
    SINGLE_LOW,
    AttributeRef,
    Composition,
    FieldPredicate,
    InteractionEvent,
    Predicate,
    WIDGET_LOAD_GROUPS,
)


@dataclass(frozen=True)
class CompiledQuery:
    node: str
    sql: str
    relationship: str  # triggering relationship name or manipulation kind
    load_group: str
    detail_level: int

    def to_dict(self) -> dict:
        return {
            "node": self.node,
            "sql": self.sql,
            "relationship": self.relationship,
            "load_group": self.load_group,
            "detail_level": self.detail_level,
        }


@dataclass(frozen=True)
class QueryBatch:
    timestamp: int
    queries: tuple[CompiledQuery, ...]

    def to_dict(self) -> dict:
        return {"timestamp": self.timestamp, "queries": [q.to_dict() for q in self.queries]}


@dataclass
class Workload:
    batches: list[QueryBatch]
    provenance: dict = dc_field(default_factory=dict)
    # (event index, message) pairs collected in lenient mode
    errors: list[tuple[int, str]] = dc_field(default_factory=list)

    def query_count(self) -> int:
        return sum(len(b.queries) for b in self.batches)


@dataclass(frozen=True)
class CompileOptions:
    # Number of simultaneous aggregation levels for many-query widgets
    # (level 0 plus detail_levels-1 coarser re-aggregations).
    detail_levels: int = 2


def _sql_literal(value) -> str:
    if isinstance(value, str):
        escaped = value.replace("'", "''")
        return f"'{escaped}'"
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("value", f"cannot render {value!r} as a SQL literal")
    return repr(value)


def translate_predicate(p: Predicate) -> str:
    """Render a predicate as a SQL boolean expression. Compositions come
    back parenthesized so callers can join them blindly."""
    if isinstance(p, Composition):
        if p.op == "not":
            inner = translate_predicate(p.children[0])
            if inner.startswith("("):
                return f"NOT {inner}"
            return f"NOT ({inner})"
        joiner = " AND " if p.op == "and" else " OR "
        return "(" + joiner.join(translate_predicate(c) for c in p.children) + ")"
    col = p.field
    if p.op == "equal":
        return f"{col} = {_sql_literal(p.value)}"
    if p.op == "lt":
        return f"{col} < {_sql_literal(p.value)}"
    if p.op == "lte":
        return f"{col} <= {_sql_literal(p.value)}"
    if p.op == "gt":
        return f"{col} > {_sql_literal(p.value)}"
    if p.op == "gte":
        return f"{col} >= {_sql_literal(p.value)}"
    if p.op == "range":
        lo, hi = p.value
        return f"{col} BETWEEN {_sql_literal(lo)} AND {_sql_literal(hi)}"
    if p.op == "oneOf":
        items = ", ".join(_sql_literal(v) for v in p.value)
        return f"{col} IN ({items})"
    if p.op == "valid":
        return f"{col} IS NOT NULL"
    raise SchemaError("op", f"unknown predicate operator {p.op!r}")


def compile_node(n: Node, grouping_override: tuple[AttributeRef, ...] | None = None) -> str:
    """Assemble the single SELECT that refreshes one node.

    SELECT lists the plain (non-aggregated) fields verbatim in declaration
    order, then each aggregated field as AGG(col) AS agg_col. FROM uses the
    table of the first field. WHERE conjoins all node filters ordered by
    relationship name. GROUP BY repeats the plain fields iff any
    aggregation is present. A grouping override substitutes the plain
    fields wholesale (coarser detail levels).
    """
    if not n.fields:
        raise EmptyFieldList(f"node {n.name!r} has no fields to select")
    plain = [f.ref for f in n.fields if f.aggregation is None]
    aggregated = [f for f in n.fields if f.aggregation is not None]
    group_refs = list(grouping_override) if grouping_override is not None else plain

    select_parts = [ref.attribute for ref in group_refs]
    for f in aggregated:
        col = f.ref.attribute
        select_parts.append(f"{f.aggregation}({col}) AS {f.aggregation.lower()}_{col}")
    if not select_parts:
        raise EmptyFieldList(f"node {n.name!r} compiles to an empty SELECT list")

    sql = f"SELECT {', '.join(select_parts)} FROM {n.fields[0].ref.table}"
    conjuncts = [
        translate_predicate(pred)
        for _, pred in sorted(n.filters.items())
        if pred is not None
    ]
    if conjuncts:
        sql += " WHERE " + " AND ".join(conjuncts)
    if aggregated and group_refs:
        sql += " GROUP BY " + ", ".join(ref.attribute for ref in group_refs)
    return sql


def _trigger_of(g: InterfaceGraph, ev: InteractionEvent) -> tuple[str, str]:
    """(label, load group) of the interaction that produced the batch."""
    if ev.is_manipulation:
        # Structural edits recompile each touched node once.
        return ev.relationship.kind, SINGLE_LOW
    rel = g.relationship(ev.relationship)
    source = g.nodes[rel.source]
    return ev.relationship, WIDGET_LOAD_GROUPS[source.widget_class]


def compile_interaction(
    g: InterfaceGraph,
    ev: InteractionEvent,
    dirty: list[str],
    options: CompileOptions = CompileOptions(),
) -> QueryBatch:
    """One CompiledQuery per dirty node per detail level, all stamped with
    the interaction's timestamp.

    Single-query triggers emit level 0 only. Many-query triggers (brush,
    zoom) emit levels 0..L-1 per node; level k>0 substitutes the node's
    configured coarser grouping attributes, falling back to the base
    grouping when the node declares fewer levels.
    """
    label, load_group = _trigger_of(g, ev)
    levels = options.detail_levels if load_group == MANY_HIGH else 1
    queries: list[CompiledQuery] = []
    for name in dirty:
        node = g.nodes[name]
        for k in range(levels):
            override = None
            if k > 0 and k - 1 < len(node.levels):
                override = node.levels[k - 1]
            queries.append(
                CompiledQuery(
                    node=name,
                    sql=compile_node(node, grouping_override=override),
                    relationship=label,
                    load_group=load_group,
                    detail_level=k,
                )
            )
    return QueryBatch(timestamp=ev.timestamp, queries=tuple(queries))


def spec_digests(*documents: str) -> list[str]:
    return [hashlib.sha256(doc.encode("utf-8")).hexdigest() for doc in documents]


def generate_workload(
    g: InterfaceGraph,
    events: list[InteractionEvent],
    options: CompileOptions = CompileOptions(),
    lenient: bool = False,
    provenance: dict | None = None,
) -> Workload:
    """Apply each event to the graph in order, compile the dirty nodes and
    append one batch per event.

    In strict mode the first failing event aborts with its index attached;
    in lenient mode the event is skipped, the error recorded and prior
    batches preserved.
    """
    workload = Workload(batches=[], provenance=dict(provenance or {}))
    for i, ev in enumerate(events):
        try:
            if ev.is_manipulation:
                dirty = apply_interface_manipulation(g, ev.relationship)
            else:
                dirty = apply_data_manipulation(g, ev)
            batch = compile_interaction(g, ev, dirty, options)
        except DashbenchError as exc:
            if lenient:
                workload.errors.append((i, f"{type(exc).__name__}: {exc}"))
                continue
            raise WorkloadError(i, exc) from exc
        workload.batches.append(batch)
    return workload


# -- workload file format (JSONL, one batch per line) -----------------------

def workload_to_jsonl(w: Workload) -> str:
    return "".join(json.dumps(b.to_dict()) + "\n" for b in w.batches)


def write_workload(w: Workload, path: str | Path) -> None:
    Path(path).write_text(workload_to_jsonl(w), encoding="utf-8")


def read_workload(path: str | Path) -> Workload:
    text = Path(path).read_text(encoding="utf-8")
    batches = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        obj = json.loads(line)
        queries = tuple(
            CompiledQuery(
                node=q["node"],
                sql=q["sql"],
                relationship=q["relationship"],
                load_group=q["load_group"],
                detail_level=q["detail_level"],
            )
            for q in obj["queries"]
        )
        batches.append(QueryBatch(timestamp=obj["timestamp"], queries=queries))
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Workload(batches=batches, provenance={"mode": "file", "source_digest": digest})
