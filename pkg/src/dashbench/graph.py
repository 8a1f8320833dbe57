"""Directed interface graph: widget nodes act on visualization nodes along
relationship edges; interactions mark nodes dirty.

The graph is a single mutable state machine (one writer at a time).
`snapshot()` produces an immutable structural copy usable for comparisons
and for forked read-only consumers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError, UnknownElement, UnknownRelationship, WildcardViolation
from .specs import (
    AttributeRef,
    FieldSpec,
    InteractionEvent,
    InterfaceManipulation,
    InterfaceSpec,
    Predicate,
    RelationshipSpec,
    TargetRef,
    VisualizationSpec,
    WidgetSpec,
    WildcardSpec,
    predicate_to_dict,
)


@dataclass
class Node:
    name: str
    roles: set[str]  # subset of {"widget", "visualization"}
    fields: list[FieldSpec]
    filters: dict[str, Predicate | None] = field(default_factory=dict)
    widget_class: str | None = None
    widget_data_backed: bool = False
    widget_attributes: tuple[AttributeRef, ...] = ()
    wildcard: WildcardSpec | None = None
    levels: tuple[tuple[AttributeRef, ...], ...] = ()

    @property
    def data_backed(self) -> bool:
        # Visualizations are always backed by a query; a pure widget only
        # when its option list is populated from the database.
        return "visualization" in self.roles or self.widget_data_backed


@dataclass
class Edge:
    relationship: str
    source: str
    target: str
    shared_attributes: tuple[AttributeRef, ...]


@dataclass
class _RelationshipRecord:
    name: str
    source: str
    attribute: tuple[AttributeRef, ...]
    targets: list[TargetRef]


class InterfaceGraph:
    """Mutable materialization of an InterfaceSpec.

    generation counts interface manipulations; at generation 0 the graph
    mirrors the parsed spec exactly and all filters are empty.
    """

    def __init__(self, iface: InterfaceSpec, spec_log_dir: str | Path | None = None):
        self.db = iface.db
        self.generation = 0
        self.spec_log_dir = Path(spec_log_dir) if spec_log_dir is not None else None
        self.nodes: dict[str, Node] = {}
        self.edges: list[Edge] = []
        self._relationships: dict[str, _RelationshipRecord] = {}
        # declaration order, so reconstructed spec documents mirror the source
        self._viz_order = [v.name for v in iface.visualizations]
        self._widget_order = [w.name for w in iface.widgets]

        for viz in iface.visualizations:
            self.nodes[viz.name] = Node(
                name=viz.name,
                roles={"visualization"},
                fields=list(viz.fields),
                wildcard=viz.wildcard,
                levels=viz.levels,
            )
        for w in iface.widgets:
            node = self.nodes.get(w.name)
            if node is None:
                node = Node(
                    name=w.name,
                    roles={"widget"},
                    fields=[FieldSpec(ref=r) for r in w.attribute],
                )
                self.nodes[w.name] = node
            else:
                node.roles.add("widget")
            node.widget_class = w.widget_class
            node.widget_data_backed = w.data_backed
            node.widget_attributes = w.attribute
        for rel in iface.relationships:
            self._add_relationship_record(rel)

    # -- structure ---------------------------------------------------------

    def _add_relationship_record(self, rel: RelationshipSpec) -> None:
        self._relationships[rel.name] = _RelationshipRecord(
            name=rel.name,
            source=rel.source,
            attribute=rel.attribute,
            targets=list(rel.targets),
        )
        for t in rel.targets:
            self.edges.append(
                Edge(relationship=rel.name, source=rel.source, target=t.name, shared_attributes=rel.attribute)
            )

    def relationship(self, name: str) -> _RelationshipRecord | None:
        return self._relationships.get(name)

    def relationship_names(self) -> list[str]:
        return list(self._relationships)

    def snapshot(self) -> dict:
        """Deep structural state, comparable with ==."""
        return {
            "generation": self.generation,
            "nodes": {
                n.name: {
                    "roles": sorted(n.roles),
                    "fields": [f.to_dict() for f in n.fields],
                    "filters": {k: predicate_to_dict(v) for k, v in n.filters.items()},
                    "widget_class": n.widget_class,
                    "widget_data_backed": n.widget_data_backed,
                    "widget_attributes": [a.to_dict() for a in n.widget_attributes],
                    "wildcard": n.wildcard.to_dict() if n.wildcard else None,
                    "levels": [[a.to_dict() for a in lvl] for lvl in n.levels],
                }
                for n in self.nodes.values()
            },
            "edges": [
                {
                    "relationship": e.relationship,
                    "source": e.source,
                    "target": e.target,
                    "shared_attributes": [a.to_dict() for a in e.shared_attributes],
                }
                for e in self.edges
            ],
            "relationships": [
                {
                    "name": r.name,
                    "source": r.source,
                    "attribute": [a.to_dict() for a in r.attribute],
                    "targets": [t.to_dict() for t in r.targets],
                }
                for r in self._relationships.values()
            ],
        }

    def to_interface_spec(self) -> InterfaceSpec:
        """Reconstruct the current interface state as a spec document."""
        vizzes = tuple(
            VisualizationSpec(
                name=n.name,
                fields=tuple(n.fields),
                data_backed=True,
                wildcard=n.wildcard,
                levels=n.levels,
            )
            for n in (self.nodes[name] for name in self._viz_order)
        )
        widgets = tuple(
            WidgetSpec(
                name=n.name,
                widget_class=n.widget_class,
                attribute=n.widget_attributes,
                data_backed=n.widget_data_backed,
            )
            for n in (self.nodes[name] for name in self._widget_order)
        )
        rels = tuple(
            RelationshipSpec(name=r.name, source=r.source, attribute=r.attribute, targets=tuple(r.targets))
            for r in self._relationships.values()
        )
        return InterfaceSpec(visualizations=vizzes, widgets=widgets, relationships=rels, db=self.db)

    def _log_spec(self) -> None:
        if self.spec_log_dir is None:
            return
        self.spec_log_dir.mkdir(parents=True, exist_ok=True)
        path = self.spec_log_dir / f"spec-{self.generation}.json"
        path.write_text(json.dumps(self.to_interface_spec().to_dict(), indent=2) + "\n", encoding="utf-8")


def build_graph(iface: InterfaceSpec, spec_log_dir: str | Path | None = None) -> InterfaceGraph:
    """Materialize a validated interface spec as a graph (generation 0)."""
    return InterfaceGraph(iface, spec_log_dir=spec_log_dir)


def apply_data_manipulation(g: InterfaceGraph, ev: InteractionEvent) -> list[str]:
    """Replace the relationship's filter on every target and return the
    dirty set: targets in edge declaration order, the source last when it
    is itself data-backed."""
    assert not ev.is_manipulation
    rel = g.relationship(ev.relationship)
    if rel is None:
        raise UnknownRelationship(f"relationship {ev.relationship!r} is not in the interface")
    dirty: list[str] = []
    for edge in g.edges:
        if edge.relationship != rel.name:
            continue
        g.nodes[edge.target].filters[rel.name] = ev.parameters
        if edge.target not in dirty:
            dirty.append(edge.target)
    source = g.nodes[rel.source]
    if source.data_backed and source.fields and source.name not in dirty:
        dirty.append(source.name)
    return dirty


def _relationship_dirty(g: InterfaceGraph, source: str, targets: list[str]) -> list[str]:
    # Dirty = nodes that now require fresh data: the targets (their filter
    # provenance changed), plus the source only when it is itself backed by
    # a query. Targets first, source last.
    dirty: list[str] = []
    for t in targets:
        if t not in dirty:
            dirty.append(t)
    src = g.nodes[source]
    if src.data_backed and src.fields and source not in dirty:
        dirty.append(source)
    return dirty


def _gate(node: Node, m: InterfaceManipulation) -> None:
    wc = node.wildcard
    if m.kind in ("encode_field", "remove_field"):
        if wc is None or m.field.ref not in wc.allowed_fields:
            raise WildcardViolation(
                f"{m.kind} of {m.field.ref.attribute!r} on {node.name!r} is not allowed by its wildcard"
            )
    else:
        if wc is None or not wc.allow_new_relationships:
            raise WildcardViolation(f"{m.kind} on {node.name!r} is not allowed by its wildcard")


def apply_interface_manipulation(g: InterfaceGraph, m: InterfaceManipulation) -> list[str]:
    """Mutate the graph if the target element's wildcard permits the
    manipulation. Denied manipulations are strict no-ops. Permitted ones
    bump the generation and log the revised interface spec."""
    node = g.nodes.get(m.target)
    if node is None:
        raise UnknownElement(f"element {m.target!r} is not in the interface")
    _gate(node, m)

    if m.kind == "encode_field":
        ref = m.field.ref
        tables = {f.ref.table for f in node.fields}
        if tables and ref.table not in tables:
            raise SchemaError("field", f"cannot encode {ref.attribute!r}: table {ref.table!r} differs from node table")
        if m.field.aggregation and g.db.kind_of(ref.table, ref.attribute) != "numerical":
            raise SchemaError("field", f"aggregation requires a numerical attribute, {ref.attribute!r} is categorical")
        dirty = [node.name]
        existing = next((i for i, f in enumerate(node.fields) if f.ref == ref), None)
        if existing is None:
            node.fields.append(m.field)
        else:
            node.fields[existing] = m.field

    elif m.kind == "remove_field":
        ref = m.field.ref
        idx = next((i for i, f in enumerate(node.fields) if f.ref == ref), None)
        if idx is None:
            raise SchemaError("field", f"{ref.attribute!r} is not encoded on {node.name!r}")
        if "visualization" in node.roles and len(node.fields) == 1:
            raise SchemaError("field", f"removing {ref.attribute!r} would leave {node.name!r} with no fields")
        node.fields.pop(idx)
        dirty = [node.name]

    elif m.kind == "add_relationship":
        rel = m.relationship
        if rel.name in g._relationships:
            raise SchemaError("relationship", f"relationship {rel.name!r} already exists")
        party = {rel.source} | {t.name for t in rel.targets}
        if m.target not in party:
            raise SchemaError("relationship", f"manipulation target {m.target!r} is not part of the new relationship")
        src = g.nodes.get(rel.source)
        if src is None or "widget" not in src.roles:
            raise UnknownElement(f"relationship source {rel.source!r} is not a widget")
        src_attrs = set(src.widget_attributes)
        for ref in rel.attribute:
            if ref not in src_attrs:
                raise SchemaError("relationship", f"attribute {ref.attribute!r} is not listed by source widget {rel.source!r}")
        for t in rel.targets:
            tgt = g.nodes.get(t.name)
            if tgt is None or "visualization" not in tgt.roles:
                raise UnknownElement(f"relationship target {t.name!r} is not a visualization")
            # filters compile to bare columns on the target's table
            target_table = tgt.fields[0].ref.table
            for ref in rel.attribute:
                if not g.db.has_attribute(target_table, ref.attribute):
                    raise SchemaError(
                        "relationship",
                        f"attribute {ref.attribute!r} does not exist in target table {target_table!r}",
                    )
        g._add_relationship_record(rel)
        dirty = _relationship_dirty(g, rel.source, [t.name for t in rel.targets])

    else:  # remove_relationship
        rel = g._relationships.get(m.relationship_name)
        if rel is None:
            raise UnknownRelationship(f"relationship {m.relationship_name!r} is not in the interface")
        party = {rel.source} | {t.name for t in rel.targets}
        if m.target not in party:
            raise SchemaError("relationship", f"manipulation target {m.target!r} is not part of {rel.name!r}")
        g.edges = [e for e in g.edges if e.relationship != rel.name]
        for n in g.nodes.values():
            n.filters.pop(rel.name, None)
        del g._relationships[rel.name]
        dirty = _relationship_dirty(g, rel.source, [t.name for t in rel.targets])

    g.generation += 1
    g._log_spec()
    return dirty
