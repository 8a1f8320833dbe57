"""Translate raw Tableau interaction logs into the benchmark's interaction
log format, resolving relationships through the interface spec.

Tableau log layouts vary by product version, so the paths to the log name,
interacted field, value and timestamp are adapter configuration. Log names
that imply a widget class narrow the candidate source widgets before the
field lookup; remaining ambiguity is broken by widget declaration order.
Records that cannot be matched land in `skipped` with a reason - the
conversion never aborts on a bad record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .errors import SchemaError, SpecSyntaxError
from .specs import (
    NUMERICAL,
    Composition,
    FieldPredicate,
    InteractionEvent,
    InterfaceSpec,
    Predicate,
    RelationshipSpec,
    WidgetSpec,
    validate_predicate_kinds,
)

# Name -> widget class mappings that ship with the converter; extensible
# through the adapter config.
DEFAULT_NAME_MAP = {
    "tabdoc:quantitative-quick-filter-edit": "slider",
}

_SYNTH_BASE_TS = 1_600_000_000_000
_SYNTH_STEP_MS = 1000

# Widget classes whose two-element list values read as a numeric interval
# rather than a membership list.
_RANGE_CLASSES = {"slider", "brush", "zoom_qualitative", "zoom_quantitative", "panning"}


@dataclass
class TableauAdapterConfig:
    name_path: str = "name"
    field_path: str = "field"
    value_path: str = "value"
    timestamp_path: str = "timestamp"
    name_to_widget_class: dict[str, str] = dc_field(default_factory=lambda: dict(DEFAULT_NAME_MAP))

    @classmethod
    def from_dict(cls, d: dict) -> "TableauAdapterConfig":
        cfg = cls()
        for key in ("name_path", "field_path", "value_path", "timestamp_path"):
            if key in d:
                setattr(cfg, key, d[key])
        if "name_to_widget_class" in d:
            cfg.name_to_widget_class.update(d["name_to_widget_class"])
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "TableauAdapterConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _dig(record: dict, dotted: str):
    current = record
    for part in dotted.split("."):
        if not isinstance(current, dict) or part not in current:
            return None
        current = current[part]
    return current


def _predicate_from_value(fname: str, value, kind: str, widget_class: str) -> FieldPredicate:
    if isinstance(value, dict):
        # explicit operator spec, as used in value maps
        ops = [k for k in ("equal", "range", "oneOf", "lt", "lte", "gt", "gte", "valid") if k in value]
        if len(ops) != 1:
            raise SchemaError("value", f"value spec for {fname!r} needs exactly one operator")
        op = ops[0]
        raw = value[op]
        if op == "range":
            lo, hi = raw
            return FieldPredicate(field=fname, op="range", value=(lo, hi) if lo <= hi else (hi, lo))
        if op == "oneOf":
            return FieldPredicate(field=fname, op="oneOf", value=tuple(raw))
        if op == "valid":
            return FieldPredicate(field=fname, op="valid", value=None)
        return FieldPredicate(field=fname, op=op, value=raw)
    if isinstance(value, list):
        if (
            len(value) == 2
            and kind == NUMERICAL
            and widget_class in _RANGE_CLASSES
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
        ):
            lo, hi = value
            return FieldPredicate(field=fname, op="range", value=(lo, hi) if lo <= hi else (hi, lo))
        return FieldPredicate(field=fname, op="oneOf", value=tuple(value))
    return FieldPredicate(field=fname, op="equal", value=value)


def _pick_relationship(
    iface: InterfaceSpec,
    fname: str,
    widget_class: str | None,
) -> tuple[WidgetSpec, RelationshipSpec] | None:
    """First (declaration order) widget listing the field, narrowed by
    class when the log name implied one, that sources a relationship
    carrying the field."""
    for widget in iface.widgets:
        if widget_class is not None and widget.widget_class != widget_class:
            continue
        if fname not in {r.attribute for r in widget.attribute}:
            continue
        for rel in iface.relationships:
            if rel.source == widget.name and fname in rel.attribute_names():
                return widget, rel
    return None


def parse_tableau_log(
    raw: str,
    iface: InterfaceSpec,
    value_map: dict | None = None,
    adapter: TableauAdapterConfig | None = None,
) -> tuple[list[InteractionEvent], list[tuple[int, str]]]:
    """Convert raw Tableau JSONL into benchmark events.

    value_map supplies values the logs do not contain, keyed
    value_map[relationship][field] -> value spec. Relationship attributes
    with no value from either the record or the map become valid-operator
    placeholders and the event is flagged needs_value.

    Returns (events, skipped) with len(events) + len(skipped) equal to the
    number of input records.
    """
    adapter = adapter or TableauAdapterConfig()
    value_map = value_map or {}
    if not isinstance(raw, str):
        raise SpecSyntaxError("tableau log: expected text input")

    events: list[InteractionEvent] = []
    skipped: list[tuple[int, str]] = []
    last_ts = None
    synth_ts = _SYNTH_BASE_TS

    for lineno, line in enumerate(raw.splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            skipped.append((lineno, f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(record, dict):
            skipped.append((lineno, "record is not a JSON object"))
            continue

        name = _dig(record, adapter.name_path)
        fname = _dig(record, adapter.field_path)
        if not isinstance(fname, str) or not fname:
            skipped.append((lineno, "no interacted field in record"))
            continue
        widget_class = adapter.name_to_widget_class.get(name) if isinstance(name, str) else None

        match = _pick_relationship(iface, fname, widget_class)
        if match is None:
            skipped.append((lineno, f"no matching relationship for field {fname!r}"))
            continue
        widget, rel = match

        record_value = _dig(record, adapter.value_path)
        rel_values = value_map.get(rel.name, {})
        preds: list[Predicate] = []
        needs_value = False
        try:
            for ref in rel.attribute:
                kind = iface.db.kind_of(ref.table, ref.attribute)
                if ref.attribute == fname and record_value is not None:
                    preds.append(_predicate_from_value(ref.attribute, record_value, kind, widget.widget_class))
                elif ref.attribute in rel_values:
                    preds.append(_predicate_from_value(ref.attribute, rel_values[ref.attribute], kind, widget.widget_class))
                else:
                    preds.append(FieldPredicate(field=ref.attribute, op="valid", value=None))
                    needs_value = True
        except (SchemaError, TypeError, ValueError) as exc:
            skipped.append((lineno, f"cannot build parameters: {exc}"))
            continue

        params: Predicate | None
        if not preds:
            params = None
        elif len(preds) == 1:
            params = preds[0]
        else:
            params = Composition(op="and", children=tuple(preds))
        try:
            validate_predicate_kinds(params, rel, iface.db)
        except SchemaError as exc:
            skipped.append((lineno, f"invalid value for relationship {rel.name!r}: {exc}"))
            continue

        ts = _dig(record, adapter.timestamp_path)
        if isinstance(ts, bool) or not isinstance(ts, int):
            ts = synth_ts
            synth_ts += _SYNTH_STEP_MS
        if last_ts is not None and ts < last_ts:
            ts = last_ts  # out-of-order raw records are clamped, not dropped
        last_ts = ts

        events.append(
            InteractionEvent(relationship=rel.name, timestamp=ts, parameters=params, needs_value=needs_value)
        )
    return events, skipped
