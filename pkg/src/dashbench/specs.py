"""Parsers and canonical in-memory model for the three specification
documents: database spec (.json), interface spec (.json) and interaction
log (.jsonl).

Parsing is pure and reentrant; parsed specs are frozen dataclasses that
are safe to share read-only.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import (
    DanglingReference,
    IllFormedEvent,
    SchemaError,
    SpecSyntaxError,
    UnsupportedPredicate,
)

NUMERICAL = "numerical"
CATEGORICAL = "categorical"
ATTRIBUTE_KINDS = (NUMERICAL, CATEGORICAL)

AGGREGATIONS = ("SUM", "AVG", "MIN", "MAX", "COUNT")

# Load groups: widget taxonomy by the computational load placed on the DBMS.
SINGLE_LOW = "SingleLow"
SINGLE_HIGH = "SingleHigh"
MANY_HIGH = "ManyHigh"

WIDGET_LOAD_GROUPS = {
    "radio_button": SINGLE_LOW,
    "checkbox": SINGLE_LOW,
    "list_box": SINGLE_LOW,
    "numeric_incrementer": SINGLE_LOW,
    "dropdown_list": SINGLE_LOW,
    "textbox": SINGLE_LOW,
    "next_button": SINGLE_LOW,
    "slider": SINGLE_HIGH,
    "hover": SINGLE_HIGH,
    "panning": SINGLE_HIGH,
    "brush": MANY_HIGH,
    "zoom_qualitative": MANY_HIGH,
    "zoom_quantitative": MANY_HIGH,
}

WIDGET_CLASSES = tuple(WIDGET_LOAD_GROUPS)

FIELD_OPS = ("equal", "lt", "lte", "gt", "gte", "range", "oneOf", "valid")
NUMERIC_OPS = ("lt", "lte", "gt", "gte", "range")
COMPOSITION_OPS = ("and", "or", "not")

MANIPULATION_KINDS = (
    "encode_field",
    "remove_field",
    "add_relationship",
    "remove_relationship",
)

# Bare identifiers only; anything else is rejected at validation time so the
# emitted SQL never needs dialect-specific quoting.
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _loads(document: str, what: str):
    try:
        return json.loads(document)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(f"{what}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _require_keys(obj: dict, allowed: set[str], required: set[str], path: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(path, f"expected an object, got {type(obj).__name__}")
    missing = required - obj.keys()
    if missing:
        raise SchemaError(path, f"missing key(s): {', '.join(sorted(missing))}")
    extra = obj.keys() - allowed
    if extra:
        raise SchemaError(path, f"unknown key(s): {', '.join(sorted(extra))}")


# ---------------------------------------------------------------------------
# Database spec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatabaseSpec:
    """Tables and their attributes, each typed numerical or categorical."""

    tables: dict[str, dict[str, str]]

    def has_attribute(self, table: str, attribute: str) -> bool:
        return attribute in self.tables.get(table, {})

    def kind_of(self, table: str, attribute: str) -> str:
        return self.tables[table][attribute]

    def to_dict(self) -> dict:
        return {"tables": {t: dict(attrs) for t, attrs in self.tables.items()}}


def parse_database_spec(document: str) -> DatabaseSpec:
    """Parse and validate a database specification document."""
    data = _loads(document, "database spec")
    _require_keys(data, {"tables"}, {"tables"}, "$")
    tables = data["tables"]
    if not isinstance(tables, dict) or not tables:
        raise SchemaError("tables", "at least one table is required")
    out: dict[str, dict[str, str]] = {}
    for tname, attrs in tables.items():
        tpath = f"tables.{tname}"
        if not _IDENT_RE.match(tname):
            raise SchemaError(tpath, f"table name {tname!r} is not a bare identifier")
        if not isinstance(attrs, dict) or not attrs:
            raise SchemaError(tpath, "each table needs at least one attribute")
        cols: dict[str, str] = {}
        for aname, kind in attrs.items():
            apath = f"{tpath}.{aname}"
            if not _IDENT_RE.match(aname):
                raise SchemaError(apath, f"attribute name {aname!r} is not a bare identifier")
            if kind not in ATTRIBUTE_KINDS:
                raise SchemaError(apath, f"unknown attribute kind {kind!r} (expected one of {ATTRIBUTE_KINDS})")
            cols[aname] = kind
        out[tname] = cols
    return DatabaseSpec(tables=out)


# ---------------------------------------------------------------------------
# Interface spec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AttributeRef:
    """A (table, attribute) pair that must resolve against the database spec."""

    table: str
    attribute: str

    def to_dict(self) -> dict:
        return {"table": self.table, "attribute": self.attribute}


@dataclass(frozen=True)
class FieldSpec:
    """A visualization field: an attribute plus an optional aggregation."""

    ref: AttributeRef
    aggregation: str | None = None

    def to_dict(self) -> dict:
        d = self.ref.to_dict()
        if self.aggregation is not None:
            d["aggregation"] = self.aggregation
        return d


@dataclass(frozen=True)
class WildcardSpec:
    """How much of an element may be restructured at runtime."""

    allowed_fields: tuple[AttributeRef, ...] = ()
    allow_new_relationships: bool = False

    def to_dict(self) -> dict:
        return {
            "allowed_fields": [r.to_dict() for r in self.allowed_fields],
            "allow_new_relationships": self.allow_new_relationships,
        }


@dataclass(frozen=True)
class VisualizationSpec:
    name: str
    fields: tuple[FieldSpec, ...]
    data_backed: bool = True
    wildcard: WildcardSpec | None = None
    # Coarser grouping attribute sets for detail levels 1..n, used when a
    # many-query widget triggers simultaneous multi-level aggregation.
    levels: tuple[tuple[AttributeRef, ...], ...] = ()

    def to_dict(self) -> dict:
        d: dict = {"name": self.name, "fields": [f.to_dict() for f in self.fields]}
        if self.wildcard is not None:
            d["wildcard"] = self.wildcard.to_dict()
        if self.levels:
            d["levels"] = [[r.to_dict() for r in level] for level in self.levels]
        return d


@dataclass(frozen=True)
class WidgetSpec:
    name: str
    widget_class: str
    attribute: tuple[AttributeRef, ...]
    data_backed: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "widget_class": self.widget_class,
            "attribute": [r.to_dict() for r in self.attribute],
            "data_backed": self.data_backed,
        }


@dataclass(frozen=True)
class TargetRef:
    type: str  # "visualization" or "widget" (dual-role elements)
    name: str

    def to_dict(self) -> dict:
        return {"type": self.type, "name": self.name}


@dataclass(frozen=True)
class RelationshipSpec:
    name: str
    source: str
    attribute: tuple[AttributeRef, ...]
    targets: tuple[TargetRef, ...]

    def attribute_names(self) -> tuple[str, ...]:
        return tuple(r.attribute for r in self.attribute)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "source": self.source,
            "attribute": [r.to_dict() for r in self.attribute],
            "targets": [t.to_dict() for t in self.targets],
        }


@dataclass(frozen=True)
class InterfaceSpec:
    visualizations: tuple[VisualizationSpec, ...]
    widgets: tuple[WidgetSpec, ...]
    relationships: tuple[RelationshipSpec, ...]
    db: DatabaseSpec

    def visualization(self, name: str) -> VisualizationSpec | None:
        return next((v for v in self.visualizations if v.name == name), None)

    def widget(self, name: str) -> WidgetSpec | None:
        return next((w for w in self.widgets if w.name == name), None)

    def relationship(self, name: str) -> RelationshipSpec | None:
        return next((r for r in self.relationships if r.name == name), None)

    def roles_of(self, name: str) -> set[str]:
        roles = set()
        if self.visualization(name) is not None:
            roles.add("visualization")
        if self.widget(name) is not None:
            roles.add("widget")
        return roles

    def dual_role_names(self) -> set[str]:
        return {v.name for v in self.visualizations} & {w.name for w in self.widgets}

    def to_dict(self) -> dict:
        return {
            "visualizations": [v.to_dict() for v in self.visualizations],
            "widgets": [w.to_dict() for w in self.widgets],
            "relationships": [r.to_dict() for r in self.relationships],
        }


def _parse_attribute_ref(obj, db: DatabaseSpec, path: str) -> AttributeRef:
    _require_keys(obj, {"table", "attribute"}, {"table", "attribute"}, path)
    table, attribute = obj["table"], obj["attribute"]
    if table not in db.tables:
        raise DanglingReference(path, f"table {table!r} is not in the database spec")
    if attribute not in db.tables[table]:
        raise DanglingReference(path, f"attribute {attribute!r} is not in table {table!r}")
    return AttributeRef(table=table, attribute=attribute)


def _parse_field(obj, db: DatabaseSpec, path: str) -> FieldSpec:
    _require_keys(obj, {"table", "attribute", "aggregation"}, {"table", "attribute"}, path)
    ref = _parse_attribute_ref({"table": obj["table"], "attribute": obj["attribute"]}, db, path)
    agg = obj.get("aggregation")
    if agg is not None:
        if agg not in AGGREGATIONS:
            raise SchemaError(path, f"unknown aggregation {agg!r} (expected one of {AGGREGATIONS})")
        if db.kind_of(ref.table, ref.attribute) != NUMERICAL:
            raise SchemaError(path, f"aggregation {agg} requires a numerical attribute, {ref.attribute!r} is categorical")
    return FieldSpec(ref=ref, aggregation=agg)


def _parse_wildcard(obj, db: DatabaseSpec, path: str) -> WildcardSpec:
    _require_keys(obj, {"allowed_fields", "allow_new_relationships"}, set(), path)
    refs = tuple(
        _parse_attribute_ref(r, db, f"{path}.allowed_fields[{i}]")
        for i, r in enumerate(obj.get("allowed_fields", []))
    )
    allow = obj.get("allow_new_relationships", False)
    if not isinstance(allow, bool):
        raise SchemaError(f"{path}.allow_new_relationships", "expected a boolean")
    return WildcardSpec(allowed_fields=refs, allow_new_relationships=allow)


def _parse_visualization(obj, db: DatabaseSpec, path: str) -> VisualizationSpec:
    _require_keys(obj, {"name", "fields", "data_backed", "wildcard", "levels"}, {"name", "fields"}, path)
    name = obj["name"]
    fields_json = obj["fields"]
    if not isinstance(fields_json, list) or not fields_json:
        raise SchemaError(f"{path}.fields", "a visualization needs at least one field")
    fields = tuple(_parse_field(f, db, f"{path}.fields[{i}]") for i, f in enumerate(fields_json))
    tables = {f.ref.table for f in fields}
    if len(tables) > 1:
        raise SchemaError(f"{path}.fields", f"fields span multiple tables {sorted(tables)}; joins are not supported")
    if obj.get("data_backed", True) is not True:
        raise SchemaError(f"{path}.data_backed", "visualizations are always data-backed")
    wildcard = _parse_wildcard(obj["wildcard"], db, f"{path}.wildcard") if "wildcard" in obj else None
    levels: tuple[tuple[AttributeRef, ...], ...] = ()
    if "levels" in obj:
        if not any(f.aggregation for f in fields):
            raise SchemaError(f"{path}.levels", "detail levels require at least one aggregated field")
        parsed = []
        for i, level in enumerate(obj["levels"]):
            lpath = f"{path}.levels[{i}]"
            if not isinstance(level, list):
                raise SchemaError(lpath, "each level is a list of attribute refs")
            refs = tuple(_parse_attribute_ref(r, db, f"{lpath}[{j}]") for j, r in enumerate(level))
            for ref in refs:
                if ref.table not in tables:
                    raise SchemaError(lpath, f"level attribute {ref.attribute!r} is not in table {next(iter(tables))!r}")
            parsed.append(refs)
        levels = tuple(parsed)
    return VisualizationSpec(name=name, fields=fields, data_backed=True, wildcard=wildcard, levels=levels)


def _parse_widget(obj, db: DatabaseSpec, path: str) -> WidgetSpec:
    _require_keys(obj, {"name", "widget_class", "attribute", "data_backed"}, {"name", "widget_class", "attribute"}, path)
    wclass = obj["widget_class"]
    if wclass not in WIDGET_CLASSES:
        raise SchemaError(f"{path}.widget_class", f"unknown widget class {wclass!r}")
    attrs = tuple(
        _parse_attribute_ref(r, db, f"{path}.attribute[{i}]")
        for i, r in enumerate(obj["attribute"])
    )
    data_backed = obj.get("data_backed", False)
    if not isinstance(data_backed, bool):
        raise SchemaError(f"{path}.data_backed", "expected a boolean")
    return WidgetSpec(name=obj["name"], widget_class=wclass, attribute=attrs, data_backed=data_backed)


def _parse_relationship(
    obj,
    db: DatabaseSpec,
    iface_names: dict[str, set[str]],
    widgets: dict[str, WidgetSpec],
    vizzes: dict[str, VisualizationSpec],
    path: str,
) -> RelationshipSpec:
    _require_keys(obj, {"name", "source", "attribute", "targets"}, {"name", "source", "attribute", "targets"}, path)
    name, source = obj["name"], obj["source"]
    if source not in iface_names or "widget" not in iface_names[source]:
        raise DanglingReference(f"{path}.source", f"{source!r} is not a widget or dual-role element")
    attrs = tuple(
        _parse_attribute_ref(r, db, f"{path}.attribute[{i}]")
        for i, r in enumerate(obj["attribute"])
    )
    source_attrs = set(widgets[source].attribute)
    for i, ref in enumerate(attrs):
        if ref not in source_attrs:
            raise DanglingReference(
                f"{path}.attribute[{i}]",
                f"attribute {ref.attribute!r} is not listed by source widget {source!r}",
            )
    targets = []
    seen_targets: set[str] = set()
    for i, t in enumerate(obj["targets"]):
        tpath = f"{path}.targets[{i}]"
        _require_keys(t, {"type", "name"}, {"type", "name"}, tpath)
        if t["type"] not in ("visualization", "widget"):
            raise SchemaError(tpath, f"unknown target type {t['type']!r}")
        tname = t["name"]
        if tname not in iface_names or "visualization" not in iface_names[tname]:
            raise DanglingReference(tpath, f"{tname!r} is not a visualization or dual-role element")
        if tname in seen_targets:
            raise SchemaError(tpath, f"duplicate target {tname!r} in one relationship")
        seen_targets.add(tname)
        # The filter compiles to a bare column reference, so the shared
        # attribute must exist (with the same kind) in every target's table.
        target_table = vizzes[tname].fields[0].ref.table
        for ref in attrs:
            if not db.has_attribute(target_table, ref.attribute):
                raise DanglingReference(tpath, f"attribute {ref.attribute!r} does not exist in target table {target_table!r}")
            if db.kind_of(target_table, ref.attribute) != db.kind_of(ref.table, ref.attribute):
                raise SchemaError(tpath, f"attribute {ref.attribute!r} kind differs between source and target tables")
        targets.append(TargetRef(type=t["type"], name=tname))
    return RelationshipSpec(name=name, source=source, attribute=attrs, targets=tuple(targets))


def parse_interface_spec(document: str, db: DatabaseSpec) -> InterfaceSpec:
    """Parse and cross-check an interface specification against a validated
    database spec. Elements appearing in both the visualization and widget
    lists are flagged dual-role."""
    data = _loads(document, "interface spec")
    _require_keys(
        data,
        {"visualizations", "widgets", "relationships"},
        {"visualizations", "widgets", "relationships"},
        "$",
    )
    vizzes: list[VisualizationSpec] = []
    for i, v in enumerate(data["visualizations"]):
        viz = _parse_visualization(v, db, f"visualizations[{i}]")
        if any(existing.name == viz.name for existing in vizzes):
            raise SchemaError(f"visualizations[{i}]", f"duplicate visualization name {viz.name!r}")
        vizzes.append(viz)

    widgets: list[WidgetSpec] = []
    for i, w in enumerate(data["widgets"]):
        widget = _parse_widget(w, db, f"widgets[{i}]")
        if any(existing.name == widget.name for existing in widgets):
            raise SchemaError(f"widgets[{i}]", f"duplicate widget name {widget.name!r}")
        widgets.append(widget)

    names: dict[str, set[str]] = {}
    for v in vizzes:
        names.setdefault(v.name, set()).add("visualization")
    for w in widgets:
        names.setdefault(w.name, set()).add("widget")

    widget_by_name = {w.name: w for w in widgets}
    viz_by_name = {v.name: v for v in vizzes}
    rels: list[RelationshipSpec] = []
    for i, r in enumerate(data["relationships"]):
        rel = _parse_relationship(r, db, names, widget_by_name, viz_by_name, f"relationships[{i}]")
        if any(existing.name == rel.name for existing in rels):
            raise SchemaError(f"relationships[{i}]", f"duplicate relationship name {rel.name!r}")
        rels.append(rel)

    return InterfaceSpec(
        visualizations=tuple(vizzes),
        widgets=tuple(widgets),
        relationships=tuple(rels),
        db=db,
    )


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldPredicate:
    field: str
    op: str  # one of FIELD_OPS
    value: object = None


@dataclass(frozen=True)
class Composition:
    op: str  # one of COMPOSITION_OPS
    children: tuple["Predicate", ...]


Predicate = FieldPredicate | Composition


def _check_scalar(value, path: str):
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise SchemaError(path, f"predicate values must be strings or numbers, got {type(value).__name__}")


def parse_predicate(obj, path: str = "parameters") -> Predicate | None:
    """Parse the Vega-Lite-style predicate form. Returns None for an empty
    object (a parameterless interaction)."""
    if isinstance(obj, str):
        raise UnsupportedPredicate(f"{path}: Vega expression strings are not supported")
    if not isinstance(obj, dict):
        raise SchemaError(path, f"expected a predicate object, got {type(obj).__name__}")
    if not obj:
        return None
    if "param" in obj or "selection" in obj:
        raise UnsupportedPredicate(f"{path}: selection (parameter) predicates are not supported")
    for comp in COMPOSITION_OPS:
        if comp in obj:
            if len(obj) != 1:
                raise SchemaError(path, f"composition {comp!r} cannot carry extra keys")
            if comp == "not":
                child = parse_predicate(obj["not"], f"{path}.not")
                if child is None:
                    raise SchemaError(f"{path}.not", "'not' needs a predicate")
                return Composition(op="not", children=(child,))
            children_json = obj[comp]
            if not isinstance(children_json, list) or not children_json:
                raise SchemaError(f"{path}.{comp}", f"{comp!r} needs a non-empty list of predicates")
            children = []
            for i, c in enumerate(children_json):
                child = parse_predicate(c, f"{path}.{comp}[{i}]")
                if child is None:
                    raise SchemaError(f"{path}.{comp}[{i}]", "empty predicate in composition")
                children.append(child)
            return Composition(op=comp, children=tuple(children))
    if "field" not in obj:
        raise SchemaError(path, "field predicate needs a 'field' key")
    ops = [k for k in obj if k in FIELD_OPS]
    if len(ops) != 1 or len(obj) != 2:
        raise SchemaError(path, f"field predicate needs exactly one operator from {FIELD_OPS}")
    op = ops[0]
    fname = obj["field"]
    if not isinstance(fname, str):
        raise SchemaError(f"{path}.field", "field name must be a string")
    raw = obj[op]
    if op == "range":
        if not isinstance(raw, list) or len(raw) != 2:
            raise SchemaError(f"{path}.range", "range carries exactly two values")
        lo, hi = raw
        for v in (lo, hi):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SchemaError(f"{path}.range", "range bounds must be numbers")
        if lo > hi:
            raise SchemaError(f"{path}.range", f"range low {lo} exceeds high {hi}")
        return FieldPredicate(field=fname, op="range", value=(lo, hi))
    if op == "oneOf":
        if not isinstance(raw, list) or not raw:
            raise SchemaError(f"{path}.oneOf", "oneOf carries at least one value")
        for i, v in enumerate(raw):
            _check_scalar(v, f"{path}.oneOf[{i}]")
        return FieldPredicate(field=fname, op="oneOf", value=tuple(raw))
    if op == "valid":
        if raw is not True:
            raise SchemaError(f"{path}.valid", "valid carries no value (use true)")
        return FieldPredicate(field=fname, op="valid", value=None)
    if op in NUMERIC_OPS:
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise SchemaError(f"{path}.{op}", f"{op} requires a numeric value")
        return FieldPredicate(field=fname, op=op, value=raw)
    _check_scalar(raw, f"{path}.{op}")
    return FieldPredicate(field=fname, op=op, value=raw)


def predicate_to_dict(p: Predicate | None):
    if p is None:
        return {}
    if isinstance(p, Composition):
        if p.op == "not":
            return {"not": predicate_to_dict(p.children[0])}
        return {p.op: [predicate_to_dict(c) for c in p.children]}
    if p.op == "valid":
        return {"field": p.field, "valid": True}
    value = list(p.value) if isinstance(p.value, tuple) else p.value
    return {"field": p.field, p.op: value}


def predicate_fields(p: Predicate | None) -> set[str]:
    if p is None:
        return set()
    if isinstance(p, Composition):
        out: set[str] = set()
        for c in p.children:
            out |= predicate_fields(c)
        return out
    return {p.field}


def validate_predicate_kinds(p: Predicate | None, rel: RelationshipSpec, db: DatabaseSpec) -> None:
    """Numeric comparison operators may only touch numerical attributes."""
    if p is None:
        return
    if isinstance(p, Composition):
        for c in p.children:
            validate_predicate_kinds(c, rel, db)
        return
    ref = next((r for r in rel.attribute if r.attribute == p.field), None)
    if ref is None:
        raise SchemaError("parameters", f"field {p.field!r} is not in relationship {rel.name!r}")
    if p.op in NUMERIC_OPS and db.kind_of(ref.table, ref.attribute) != NUMERICAL:
        raise SchemaError("parameters", f"operator {p.op!r} requires a numerical attribute, {p.field!r} is categorical")


# ---------------------------------------------------------------------------
# Interaction log
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InterfaceManipulation:
    """A structural change to the interface, gated by wildcards."""

    kind: str  # one of MANIPULATION_KINDS
    target: str
    field: FieldSpec | None = None
    relationship: RelationshipSpec | None = None
    relationship_name: str | None = None

    def to_dict(self) -> dict:
        d: dict = {"manipulation": self.kind, "target": self.target}
        if self.field is not None:
            d["field"] = self.field.to_dict()
        if self.relationship is not None:
            d["relationship"] = self.relationship.to_dict()
        if self.relationship_name is not None:
            d["relationship_name"] = self.relationship_name
        return d


@dataclass(frozen=True)
class InteractionEvent:
    """One logged user action: a relationship (or interface manipulation),
    a ms-since-epoch timestamp and predicate parameters."""

    relationship: str | InterfaceManipulation
    timestamp: int
    parameters: Predicate | None
    # Set by the Tableau converter when a value had to be left unresolved;
    # not part of the wire format.
    needs_value: bool = field(default=False, compare=False)

    @property
    def is_manipulation(self) -> bool:
        return isinstance(self.relationship, InterfaceManipulation)

    def to_dict(self) -> dict:
        rel = self.relationship.to_dict() if self.is_manipulation else self.relationship
        return {
            "relationship": rel,
            "timestamp": self.timestamp,
            "parameters": predicate_to_dict(self.parameters),
        }


def event_to_json_line(ev: InteractionEvent) -> str:
    return json.dumps(ev.to_dict())


def _parse_manipulation(obj, db: DatabaseSpec, line: int) -> InterfaceManipulation:
    allowed = {"manipulation", "target", "field", "relationship", "relationship_name"}
    _require_keys(obj, allowed, {"manipulation", "target"}, f"line {line}: relationship")
    kind = obj["manipulation"]
    if kind not in MANIPULATION_KINDS:
        raise IllFormedEvent(line, f"unknown manipulation kind {kind!r}")
    target = obj["target"]
    fieldspec = None
    relspec = None
    relname = None
    if kind in ("encode_field", "remove_field"):
        if "field" not in obj:
            raise IllFormedEvent(line, f"{kind} needs a 'field' payload")
        fieldspec = _parse_field(obj["field"], db, f"line {line}: field")
    elif kind == "add_relationship":
        if "relationship" not in obj:
            raise IllFormedEvent(line, "add_relationship needs a 'relationship' payload")
        # Structural parse only; graph application re-validates against the
        # current (possibly already manipulated) interface state.
        r = obj["relationship"]
        _require_keys(r, {"name", "source", "attribute", "targets"}, {"name", "source", "attribute", "targets"}, f"line {line}: relationship")
        attrs = tuple(
            _parse_attribute_ref(a, db, f"line {line}: relationship.attribute[{i}]")
            for i, a in enumerate(r["attribute"])
        )
        targets = []
        for i, t in enumerate(r["targets"]):
            _require_keys(t, {"type", "name"}, {"type", "name"}, f"line {line}: relationship.targets[{i}]")
            targets.append(TargetRef(type=t["type"], name=t["name"]))
        relspec = RelationshipSpec(name=r["name"], source=r["source"], attribute=attrs, targets=tuple(targets))
    elif kind == "remove_relationship":
        if "relationship_name" not in obj:
            raise IllFormedEvent(line, "remove_relationship needs a 'relationship_name' payload")
        relname = obj["relationship_name"]
    return InterfaceManipulation(kind=kind, target=target, field=fieldspec, relationship=relspec, relationship_name=relname)


def parse_interaction_log(stream: str, iface: InterfaceSpec) -> list[InteractionEvent]:
    """Parse a JSON-Lines interaction log, validating each event against the
    named relationship's attribute list.

    Interface manipulations are applied to a lightweight view of the
    relationship set so that later events may legally reference
    relationships added earlier in the same log.
    """
    db = iface.db
    events: list[InteractionEvent] = []
    # name -> attribute-name set, kept current as manipulations stream by
    rel_view: dict[str, RelationshipSpec] = {r.name: r for r in iface.relationships}
    element_names = {v.name for v in iface.visualizations} | {w.name for w in iface.widgets}
    last_ts: int | None = None
    for lineno, rawline in enumerate(stream.splitlines(), 1):
        if not rawline.strip():
            continue
        try:
            obj = json.loads(rawline)
        except json.JSONDecodeError as exc:
            raise IllFormedEvent(lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise IllFormedEvent(lineno, "each line must be a JSON object")
        keys = set(obj.keys())
        if keys != {"relationship", "timestamp", "parameters"}:
            raise IllFormedEvent(lineno, f"expected exactly keys relationship/timestamp/parameters, got {sorted(keys)}")
        ts = obj["timestamp"]
        if isinstance(ts, bool) or not isinstance(ts, int):
            raise IllFormedEvent(lineno, "timestamp must be an integer (ms since UNIX epoch)")
        if last_ts is not None and ts < last_ts:
            raise IllFormedEvent(lineno, f"timestamp {ts} decreases (previous {last_ts})")
        try:
            params = parse_predicate(obj["parameters"], "parameters")
        except UnsupportedPredicate as exc:
            raise UnsupportedPredicate(f"line {lineno}: {exc}") from exc
        except SchemaError as exc:
            raise IllFormedEvent(lineno, str(exc)) from exc

        rel_field = obj["relationship"]
        if isinstance(rel_field, dict):
            try:
                manip = _parse_manipulation(rel_field, db, lineno)
            except (SchemaError, DanglingReference) as exc:
                raise IllFormedEvent(lineno, str(exc)) from exc
            if params is not None:
                raise IllFormedEvent(lineno, "interface manipulations carry empty parameters")
            if manip.target not in element_names:
                raise IllFormedEvent(lineno, f"manipulation targets unknown element {manip.target!r}")
            if manip.kind == "add_relationship":
                rel_view[manip.relationship.name] = manip.relationship
            elif manip.kind == "remove_relationship":
                rel_view.pop(manip.relationship_name, None)
            events.append(InteractionEvent(relationship=manip, timestamp=ts, parameters=None))
        elif isinstance(rel_field, str):
            rel = rel_view.get(rel_field)
            if rel is None:
                raise IllFormedEvent(lineno, f"unknown relationship {rel_field!r}")
            covered = predicate_fields(params)
            declared = set(rel.attribute_names())
            if covered != declared:
                missing = declared - covered
                extra = covered - declared
                parts = []
                if missing:
                    parts.append(f"missing parameter(s) {sorted(missing)}")
                if extra:
                    parts.append(f"unknown parameter(s) {sorted(extra)}")
                raise IllFormedEvent(lineno, f"relationship {rel_field!r}: " + "; ".join(parts))
            try:
                validate_predicate_kinds(params, rel, db)
            except SchemaError as exc:
                raise IllFormedEvent(lineno, str(exc)) from exc
            events.append(InteractionEvent(relationship=rel_field, timestamp=ts, parameters=params))
        else:
            raise IllFormedEvent(lineno, "relationship must be a name or a manipulation object")
        last_ts = ts
    return events


def classify_widget(w: WidgetSpec) -> str:
    """Total, pure mapping from widget class to load group."""
    return WIDGET_LOAD_GROUPS[w.widget_class]
