import json

import pytest

from dashbench.compiler import (
    CompileOptions,
    compile_interaction,
    compile_node,
    generate_workload,
    read_workload,
    translate_predicate,
    workload_to_jsonl,
    write_workload,
)
from dashbench.errors import EmptyFieldList, WildcardViolation, WorkloadError
from dashbench.graph import Node, apply_data_manipulation, build_graph
from dashbench.specs import (
    AttributeRef,
    Composition,
    FieldPredicate,
    FieldSpec,
    parse_interaction_log,
)

import oracle
from randgen import sqlite_query, sqlite_table


def ref(attr, table="covid"):
    return AttributeRef(table=table, attribute=attr)


def viz_node(fields, filters=None, name="v"):
    return Node(name=name, roles={"visualization"}, fields=fields, filters=filters or {})


# -- compile_node ------------------------------------------------------------

def test_compile_aggregated_node():
    n = viz_node([FieldSpec(ref("county")), FieldSpec(ref("positive_cases"), "SUM")])
    assert (
        compile_node(n)
        == "SELECT county, SUM(positive_cases) AS sum_positive_cases FROM covid GROUP BY county"
    )


def test_compile_plain_node():
    n = viz_node([FieldSpec(ref("date"))])
    assert compile_node(n) == "SELECT date FROM covid"


def test_compile_with_filter():
    n = viz_node(
        [FieldSpec(ref("date"))],
        filters={"r": FieldPredicate(field="county", op="equal", value="Montgomery")},
    )
    assert compile_node(n) == "SELECT date FROM covid WHERE county = 'Montgomery'"


def test_conjuncts_ordered_by_relationship_name():
    n = viz_node(
        [FieldSpec(ref("date"))],
        filters={
            "zeta": FieldPredicate(field="a", op="equal", value=1),
            "alpha": FieldPredicate(field="b", op="equal", value=2),
        },
    )
    assert compile_node(n) == "SELECT date FROM covid WHERE b = 2 AND a = 1"


def test_none_filters_skipped():
    n = viz_node([FieldSpec(ref("date"))], filters={"r": None})
    assert compile_node(n) == "SELECT date FROM covid"


def test_grouping_override_substitutes_plain_fields():
    n = viz_node([FieldSpec(ref("county")), FieldSpec(ref("value"), "SUM")])
    assert compile_node(n, grouping_override=(ref("date"),)) == (
        "SELECT date, SUM(value) AS sum_value FROM covid GROUP BY date"
    )
    assert compile_node(n, grouping_override=()) == "SELECT SUM(value) AS sum_value FROM covid"


def test_empty_field_list_rejected():
    with pytest.raises(EmptyFieldList):
        compile_node(viz_node([]))


def test_derived_examples_agree_with_oracle():
    rows = [
        {"county": "Montgomery", "positive_cases": 3.0, "date": "d1", "value": 1.0},
        {"county": "Montgomery", "positive_cases": 4.0, "date": "d1", "value": 2.0},
        {"county": "Baltimore", "positive_cases": 7.0, "date": "d2", "value": 5.0},
    ]
    db_doc = {
        "tables": {
            "covid": {
                "county": "categorical",
                "date": "categorical",
                "positive_cases": "numerical",
                "value": "numerical",
            }
        }
    }
    from dashbench.specs import parse_database_spec

    db = parse_database_spec(json.dumps(db_doc))
    conn = sqlite_table(rows, db, "covid")
    cases = [
        viz_node([FieldSpec(ref("county")), FieldSpec(ref("positive_cases"), "SUM")]),
        viz_node([FieldSpec(ref("date"))]),
        viz_node(
            [FieldSpec(ref("date"))],
            filters={"r": FieldPredicate(field="county", op="equal", value="Montgomery")},
        ),
    ]
    for node in cases:
        cols, got = sqlite_query(conn, compile_node(node))
        expected = oracle.run_plan(rows, node.fields, node.filters.values())
        oracle.assert_same_results(expected, cols, got)


# -- translate_predicate -----------------------------------------------------

def test_translate_range():
    p = FieldPredicate(field="longitude", op="range", value=(-79.5, -75.0))
    assert translate_predicate(p) == "longitude BETWEEN -79.5 AND -75.0"


def test_translate_oneof():
    p = FieldPredicate(field="county", op="oneOf", value=("Baltimore", "Montgomery"))
    assert translate_predicate(p) == "county IN ('Baltimore', 'Montgomery')"


def test_translate_not_valid():
    p = Composition(op="not", children=(FieldPredicate(field="deaths", op="valid", value=None),))
    assert translate_predicate(p) == "NOT (deaths IS NOT NULL)"


def test_translate_comparison_ops():
    assert translate_predicate(FieldPredicate("x", "lt", 5)) == "x < 5"
    assert translate_predicate(FieldPredicate("x", "lte", 5)) == "x <= 5"
    assert translate_predicate(FieldPredicate("x", "gt", 5)) == "x > 5"
    assert translate_predicate(FieldPredicate("x", "gte", 5)) == "x >= 5"
    assert translate_predicate(FieldPredicate("x", "equal", 5)) == "x = 5"


def test_translate_quote_doubling():
    p = FieldPredicate(field="county", op="equal", value="o'brien")
    assert translate_predicate(p) == "county = 'o''brien'"


def test_translate_nested_composition():
    p = Composition(
        op="or",
        children=(
            Composition(
                op="and",
                children=(
                    FieldPredicate("a", "equal", 1),
                    FieldPredicate("b", "gt", 2),
                ),
            ),
            FieldPredicate("c", "valid", None),
        ),
    )
    assert translate_predicate(p) == "((a = 1 AND b > 2) OR c IS NOT NULL)"


# -- compile_interaction -----------------------------------------------------

def test_covid_radio_batch(covid_iface, covid_events):
    g = build_graph(covid_iface)
    ev = covid_events[0]
    dirty = apply_data_manipulation(g, ev)
    batch = compile_interaction(g, ev, dirty)
    assert batch.timestamp == ev.timestamp
    assert len(batch.queries) == 2
    assert [q.node for q in batch.queries] == ["line_graph", "heat_map"]
    assert all(q.detail_level == 0 for q in batch.queries)
    assert all(q.load_group == "SingleLow" for q in batch.queries)


def test_brush_emits_detail_levels(brush_iface, brush_events):
    g = build_graph(brush_iface)
    ev = brush_events[3]
    dirty = apply_data_manipulation(g, ev)
    batch = compile_interaction(g, ev, dirty, CompileOptions(detail_levels=2))
    # dirty = [line_graph, heat_map(dual-role source)], 2 levels each
    assert [(q.node, q.detail_level) for q in batch.queries] == [
        ("line_graph", 0),
        ("line_graph", 1),
        ("heat_map", 0),
        ("heat_map", 1),
    ]
    assert all(q.load_group == "ManyHigh" for q in batch.queries)
    # level 1 uses the configured coarser grouping (overview: no GROUP BY)
    assert "GROUP BY" not in batch.queries[1].sql
    assert "GROUP BY" in batch.queries[0].sql


def test_empty_dirty_set_still_batches(covid_iface, covid_events):
    g = build_graph(covid_iface)
    batch = compile_interaction(g, covid_events[0], [])
    assert batch.queries == ()
    assert batch.timestamp == covid_events[0].timestamp


def test_level_fallback_reuses_base_grouping(covid_db):
    # a ManyHigh trigger on a node with no configured levels re-issues the
    # base grouping at level 1
    doc = json.loads((__import__("conftest").FIXTURES / "covid_brush" / "interface.json").read_text())
    for viz in doc["visualizations"]:
        viz.pop("levels", None)
    from dashbench.specs import parse_interface_spec

    iface = parse_interface_spec(json.dumps(doc), covid_db)
    g = build_graph(iface)
    line = (
        '{"relationship":"brushfilter1","timestamp":1,'
        '"parameters":{"and":[{"field":"longitude","range":[-79.5,-75.0]},'
        '{"field":"latitude","range":[37.9,39.7]}]}}'
    )
    (ev,) = parse_interaction_log(line, iface)
    dirty = apply_data_manipulation(g, ev)
    batch = compile_interaction(g, ev, dirty)
    line_queries = [q for q in batch.queries if q.node == "line_graph"]
    assert len(line_queries) == 2
    assert line_queries[0].sql == line_queries[1].sql


# -- generate_workload -------------------------------------------------------

def test_covid_workload_counts(covid_iface, covid_events):
    g = build_graph(covid_iface)
    w = generate_workload(g, covid_events)
    assert len(w.batches) == 3
    assert w.query_count() == 6


def test_empty_workload(covid_iface):
    g = build_graph(covid_iface)
    w = generate_workload(g, [])
    assert w.batches == []


def manipulation_line(ts=1610000009000):
    return json.dumps(
        {
            "relationship": {
                "manipulation": "encode_field",
                "target": "heat_map",
                "field": {"table": "covid", "attribute": "county"},
            },
            "timestamp": ts,
            "parameters": {},
        }
    )


def test_strict_mode_reports_event_index(covid_iface, covid_events):
    from conftest import read_fixture

    log = read_fixture("covid", "interactions.jsonl") + manipulation_line() + "\n"
    events = parse_interaction_log(log, covid_iface)
    g = build_graph(covid_iface)
    with pytest.raises(WorkloadError) as exc:
        generate_workload(g, events)
    assert exc.value.index == 3
    assert isinstance(exc.value.cause, WildcardViolation)


def test_lenient_mode_preserves_prior_batches(covid_iface):
    from conftest import read_fixture

    log = read_fixture("covid", "interactions.jsonl") + manipulation_line() + "\n"
    events = parse_interaction_log(log, covid_iface)
    g = build_graph(covid_iface)
    w = generate_workload(g, events, lenient=True)
    assert len(w.batches) == 3
    assert len(w.errors) == 1
    assert w.errors[0][0] == 3


def test_interface_manipulation_compiles_batch(covid_iface):
    # permitted encode_field on line_graph produces a one-query batch
    line = json.dumps(
        {
            "relationship": {
                "manipulation": "encode_field",
                "target": "line_graph",
                "field": {"table": "covid", "attribute": "county"},
            },
            "timestamp": 1610000009000,
            "parameters": {},
        }
    )
    events = parse_interaction_log(line, covid_iface)
    g = build_graph(covid_iface)
    w = generate_workload(g, events)
    assert len(w.batches) == 1
    (q,) = w.batches[0].queries
    assert q.node == "line_graph"
    assert q.relationship == "encode_field"
    assert "county" in q.sql


def test_compilation_deterministic(covid_iface, covid_events):
    def compile_all():
        g = build_graph(covid_iface)
        return workload_to_jsonl(generate_workload(g, covid_events))

    assert compile_all() == compile_all()


def test_workload_round_trip(tmp_path, covid_iface, covid_events):
    g = build_graph(covid_iface)
    w = generate_workload(g, covid_events)
    path = tmp_path / "w.jsonl"
    write_workload(w, path)
    again = read_workload(path)
    assert again.batches == w.batches
    # a second write is byte-identical
    path2 = tmp_path / "w2.jsonl"
    write_workload(again, path2)
    assert path.read_bytes() == path2.read_bytes()
