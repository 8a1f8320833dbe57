import json

from dashbench.specs import FieldPredicate, parse_interaction_log
from dashbench.simulate import events_to_jsonl
from dashbench.tableau import TableauAdapterConfig, parse_tableau_log

from conftest import read_fixture


def load_fixture_conversion(tableau_iface, value_map=True):
    raw = read_fixture("tableau", "raw_log.jsonl")
    vm = json.loads(read_fixture("tableau", "value_map.json")) if value_map else None
    return parse_tableau_log(raw, tableau_iface, value_map=vm)


def test_twenty_record_fixture(tableau_iface):
    events, skipped = load_fixture_conversion(tableau_iface)
    assert len(events) == 18
    assert len(skipped) == 2
    raw_lines = [l for l in read_fixture("tableau", "raw_log.jsonl").splitlines() if l.strip()]
    assert len(events) + len(skipped) == len(raw_lines)
    reasons = {line: reason for line, reason in skipped}
    assert 7 in reasons and "customer" in reasons[7]
    assert 13 in reasons and "field" in reasons[13]


def test_all_events_revalidate(tableau_iface):
    events, _ = load_fixture_conversion(tableau_iface)
    reparsed = parse_interaction_log(events_to_jsonl(events), tableau_iface)
    assert len(reparsed) == len(events)


def test_slider_log_name_narrows_class(tableau_iface):
    # price is listed by both the dropdown (declared first) and the slider;
    # the quantitative-quick-filter-edit name must pick the slider
    line = '{"name": "tabdoc:quantitative-quick-filter-edit", "field": "price", "value": [10, 50], "timestamp": 1}'
    events, skipped = parse_tableau_log(line, tableau_iface)
    assert not skipped
    assert events[0].relationship == "price_slide_filter"
    assert events[0].parameters == FieldPredicate(field="price", op="range", value=(10, 50))


def test_unnarrowed_name_uses_declaration_order(tableau_iface):
    line = '{"name": "tabdoc:select", "field": "price", "value": 5, "timestamp": 1}'
    events, _ = parse_tableau_log(line, tableau_iface)
    assert events[0].relationship == "price_drop_filter"  # dropdown declared first


def test_slider_range_event_from_fixture(tableau_iface):
    events, _ = load_fixture_conversion(tableau_iface)
    week_ranges = [ev for ev in events if ev.relationship == "week_filter"]
    assert week_ranges
    assert all(ev.parameters.op == "range" for ev in week_ranges)


def test_value_map_substitution(tableau_iface):
    events, _ = load_fixture_conversion(tableau_iface)
    # record 9 (ts 1700000016000) lacks a value; the map supplies "east"
    (ev,) = [ev for ev in events if ev.timestamp == 1700000016000]
    assert ev.relationship == "region_filter"
    assert ev.parameters == FieldPredicate("region", "equal", "east")
    assert not any(e.needs_value for e in events)


def test_needs_value_placeholder_without_map(tableau_iface):
    events, skipped = load_fixture_conversion(tableau_iface, value_map=False)
    assert len(events) == 18 and len(skipped) == 2
    flagged = [ev for ev in events if ev.needs_value]
    assert len(flagged) == 1
    assert flagged[0].parameters == FieldPredicate(field="region", op="valid", value=None)
    # placeholders still validate
    parse_interaction_log(events_to_jsonl(events), tableau_iface)


def test_unmatched_field_skipped(tableau_iface):
    line = '{"name": "tabdoc:select", "field": "ghost", "value": 1, "timestamp": 1}'
    events, skipped = parse_tableau_log(line, tableau_iface)
    assert events == []
    assert skipped == [(1, "no matching relationship for field 'ghost'")]


def test_determinism(tableau_iface):
    a, sa = load_fixture_conversion(tableau_iface)
    b, sb = load_fixture_conversion(tableau_iface)
    assert a == b and sa == sb


def test_adapter_paths():
    # records with nested layout, custom paths
    adapter = TableauAdapterConfig.from_dict(
        {"name_path": "meta.name", "field_path": "meta.field", "value_path": "payload.value"}
    )
    assert adapter.name_to_widget_class["tabdoc:quantitative-quick-filter-edit"] == "slider"
    from dashbench.specs import parse_database_spec, parse_interface_spec

    db = parse_database_spec(read_fixture("tableau", "database.json"))
    iface = parse_interface_spec(read_fixture("tableau", "interface.json"), db)
    line = json.dumps(
        {"meta": {"name": "tabdoc:select", "field": "region"}, "payload": {"value": "west"}, "timestamp": 3}
    )
    events, skipped = parse_tableau_log(line, iface, adapter=adapter)
    assert not skipped
    assert events[0].parameters == FieldPredicate("region", "equal", "west")


def test_synthesized_timestamps_non_decreasing(tableau_iface):
    events, _ = load_fixture_conversion(tableau_iface)
    assert all(b.timestamp >= a.timestamp for a, b in zip(events, events[1:]))
