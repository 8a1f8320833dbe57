"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line (see conftest). Tolerances are pinned here, not calibrated later."""

import csv
import json
import random
import time

import pytest

from dashbench.cli import main as cli_main
from dashbench.compiler import (
    CompileOptions,
    compile_interaction,
    compile_node,
    generate_workload,
    translate_predicate,
    workload_to_jsonl,
)
from dashbench.equivalence import EQUIVALENT, result_multiset, sql_equivalent
from dashbench.errors import WildcardViolation
from dashbench.executor import QueryMeasurement
from dashbench.graph import apply_data_manipulation, apply_interface_manipulation, build_graph
from dashbench.report import aggregate
from dashbench.simulate import Domains, UserModelConfig, events_to_jsonl, simulate_interactions
from dashbench.specs import (
    AttributeRef,
    FieldSpec,
    InterfaceManipulation,
    parse_interaction_log,
    parse_interface_spec,
)
from dashbench.tableau import parse_tableau_log

import oracle
from conftest import FIXTURES, read_fixture
from randgen import rand_interface_and_event, rand_node, rand_table, sqlite_query, sqlite_table

COVID = FIXTURES / "covid"


# 1 ---------------------------------------------------------------------------

def test_covid_linked_view_query_count(covid_iface, covid_events):
    started = time.perf_counter()
    g = build_graph(covid_iface)
    for ev in covid_events:
        dirty = apply_data_manipulation(g, ev)
        batch = compile_interaction(g, ev, dirty)
        assert len(batch.queries) == 2  # two requests per radio interaction
        assert {q.node for q in batch.queries} == {"line_graph", "heat_map"}
        assert all(q.node != "text_box" for q in batch.queries)
    assert time.perf_counter() - started < 1.0


# 2 ---------------------------------------------------------------------------

def test_compiler_matches_oracle_on_200_random_configs():
    started = time.perf_counter()
    rng = random.Random(20240)
    for case in range(200):
        db, table, rows = rand_table(rng, max_rows=1000, max_cols=6)
        node = rand_node(rng, db, table)
        sql = compile_node(node)
        conn = sqlite_table(rows, db, table)
        cols, got = sqlite_query(conn, sql)
        conn.close()
        expected = oracle.run_plan(rows, node.fields, node.filters.values())
        avg_cols = {f"avg_{f.ref.attribute}" for f in node.fields if f.aggregation == "AVG"}
        oracle.assert_same_results(expected, cols, got, avg_columns=avg_cols, rel_tol=1e-9)
    assert time.perf_counter() - started < 30.0


# 3 ---------------------------------------------------------------------------

def test_query_count_law_500_cases():
    rng = random.Random(777)
    single = {"SingleLow", "SingleHigh"}
    for case in range(500):
        iface, event_dict = rand_interface_and_event(rng)
        levels = rng.choice([1, 2, 3])
        g = build_graph(iface)
        (ev,) = parse_interaction_log(json.dumps(event_dict) + "\n", iface)
        dirty = apply_data_manipulation(g, ev)
        batch = compile_interaction(g, ev, dirty, CompileOptions(detail_levels=levels))
        group = batch.queries[0].load_group if batch.queries else None
        expected = sum(1 if group in single else levels for _ in dirty)
        assert len(batch.queries) == expected, f"case {case}: {len(batch.queries)} != {expected}"


# 4 ---------------------------------------------------------------------------

def _permuted_variant(node, rng):
    """Semantically identical SQL with shuffled conjuncts, shuffled GROUP
    BY, lower-cased keywords and ragged whitespace."""
    plain = [f.ref.attribute for f in node.fields if f.aggregation is None]
    aggregated = [f for f in node.fields if f.aggregation is not None]
    select_parts = list(plain) + [
        f"{f.aggregation}({f.ref.attribute}) as {f.aggregation.lower()}_{f.ref.attribute}" for f in aggregated
    ]
    sql = f"select  {', '.join(select_parts)}  from {node.fields[0].ref.table}"
    conjuncts = [translate_predicate(p) for _, p in sorted(node.filters.items()) if p is not None]
    rng.shuffle(conjuncts)
    if conjuncts:
        sql += " where " + " and ".join(conjuncts)
    group = list(plain)
    rng.shuffle(group)
    if aggregated and group:
        sql += " group by " + ",  ".join(group)
    return sql


def test_equivalence_checker_soundness_200_random_queries():
    rng = random.Random(440)
    for case in range(200):
        db, table, rows = rand_table(rng, max_rows=200, max_cols=5)
        node_a = rand_node(rng, db, table)
        node_b = rand_node(rng, db, table)
        sql_a = compile_node(node_a)
        sql_b = compile_node(node_b)
        permuted = _permuted_variant(node_a, rng)
        conn = sqlite_table(rows, db, table)

        def multiset(sql):
            cols, got = sqlite_query(conn, sql)
            return result_multiset(cols, got)

        # permuted-conjunct pairs are always stage-1 equivalent, and the
        # oracle backs the verdict (non-vacuous soundness)
        assert sql_equivalent(sql_a, permuted) == EQUIVALENT
        assert multiset(sql_a) == multiset(permuted), f"case {case}: permuted results differ"
        # stage-1 "equivalent" on arbitrary pairs always agrees with the oracle
        if sql_equivalent(sql_a, sql_b) == EQUIVALENT:
            assert multiset(sql_a) == multiset(sql_b), f"case {case}: stage-1 equivalent but results differ"
        conn.close()


# 5 ---------------------------------------------------------------------------

def test_determinism_simulate_and_compile(tmp_path, covid_iface, covid_events):
    domains = Domains.from_file(COVID / "domains.json")
    cfg_kwargs = dict(seed=42, n_interactions=100, widget_subset_size=1)
    a = events_to_jsonl(simulate_interactions(covid_iface, domains, UserModelConfig(**cfg_kwargs)))
    b = events_to_jsonl(simulate_interactions(covid_iface, domains, UserModelConfig(**cfg_kwargs)))
    assert a.encode() == b.encode()

    first = workload_to_jsonl(generate_workload(build_graph(covid_iface), covid_events))
    second = workload_to_jsonl(generate_workload(build_graph(covid_iface), covid_events))
    assert first.encode() == second.encode()


# 6 ---------------------------------------------------------------------------

def test_wildcard_gating(tmp_path, covid_iface):
    g = build_graph(covid_iface, spec_log_dir=tmp_path)
    before = g.snapshot()
    denied = InterfaceManipulation(
        kind="encode_field",
        target="heat_map",
        field=FieldSpec(ref=AttributeRef(table="covid", attribute="county")),
    )
    with pytest.raises(WildcardViolation):
        apply_interface_manipulation(g, denied)
    assert g.snapshot() == before
    assert g.generation == 0

    permitted = InterfaceManipulation(
        kind="encode_field",
        target="line_graph",
        field=FieldSpec(ref=AttributeRef(table="covid", attribute="county")),
    )
    apply_interface_manipulation(g, permitted)
    assert g.generation == 1
    logged = tmp_path / "spec-1.json"
    assert logged.exists()
    reparsed = parse_interface_spec(logged.read_text(), covid_iface.db)
    assert any(f.ref.attribute == "county" for f in reparsed.visualization("line_graph").fields)


# 7 ---------------------------------------------------------------------------

def _meas(batch, latency, outcome="ok"):
    return QueryMeasurement(
        batch_index=batch,
        batch_timestamp=batch,
        node="v",
        relationship="r",
        load_group="SingleLow",
        detail_level=0,
        issue_ms=0.0,
        first_result_ms=latency / 2,
        completion_ms=latency,
        rows_returned=1,
        outcome=outcome,
    )


def test_report_correctness():
    ms = [_meas(i, float(i + 1)) for i in range(10)]
    assert aggregate(ms).query_latency_ms["p50"] == 5.0

    two = [_meas(0, 400.0), _meas(1, 600.0)]
    assert aggregate(two, threshold_ms=500.0).threshold_violation_fraction == 0.5

    rng = random.Random(100)
    mixed = [
        _meas(i % 9, float(rng.randint(1, 900)), outcome=rng.choice(["ok", "ok", "error"]))
        for i in range(80)
    ]
    baseline = aggregate(mixed).to_dict()
    for _ in range(100):
        rng.shuffle(mixed)
        assert aggregate(mixed).to_dict() == baseline


# 8 ---------------------------------------------------------------------------

def test_tableau_conversion(tableau_iface):
    raw = read_fixture("tableau", "raw_log.jsonl")
    value_map = json.loads(read_fixture("tableau", "value_map.json"))
    events, skipped = parse_tableau_log(raw, tableau_iface, value_map=value_map)
    assert len(events) == 18
    assert len(skipped) == 2
    reparsed = parse_interaction_log(events_to_jsonl(events), tableau_iface)
    assert len(reparsed) == 18
    assert any("tabdoc:quantitative-quick-filter-edit" in line for line in raw.splitlines())


# 9 ---------------------------------------------------------------------------

def _covid_rows():
    with open(COVID / "covid.csv", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for rec in reader:
            rows.append(
                {
                    "date": rec["date"],
                    "county": rec["county"],
                    "metric": rec["metric"],
                    "value": float(rec["value"]),
                    "longitude": float(rec["longitude"]),
                    "latitude": float(rec["latitude"]),
                }
            )
        return rows


def _oracle_row_counts(covid_iface, covid_events):
    rows = _covid_rows()
    g = build_graph(covid_iface)
    counts = []
    for ev in covid_events:
        dirty = apply_data_manipulation(g, ev)
        for name in dirty:
            node = g.nodes[name]
            counts.append(len(oracle.run_plan(rows, node.fields, node.filters.values())))
    return counts


def _run_driver_end_to_end(tmp_path, kind, suffix, covid_iface, covid_events):
    db_file = str(tmp_path / f"covid.{suffix}")
    assert (
        cli_main(
            [
                "load",
                "--database", str(COVID / "database.json"),
                "--driver", kind,
                "--db", db_file,
                "--table", "covid",
                "--csv", str(COVID / "covid.csv"),
            ]
        )
        == 0
    )
    report_path = tmp_path / f"report-{kind}.json"
    ms_path = tmp_path / f"ms-{kind}.jsonl"
    assert (
        cli_main(
            [
                "run",
                "--database", str(COVID / "database.json"),
                "--interface", str(COVID / "interface.json"),
                "--log", str(COVID / "interactions.jsonl"),
                "--driver", kind,
                "--db", db_file,
                "--out", str(report_path),
                "--measurements", str(ms_path),
            ]
        )
        == 0
    )
    report = json.loads(report_path.read_text())
    assert report["error_count"] == 0 and report["timeout_count"] == 0
    measured = [json.loads(l)["rows_returned"] for l in ms_path.read_text().splitlines()]
    assert measured == _oracle_row_counts(covid_iface, covid_events)


def test_executor_integration_sqlite(tmp_path, covid_iface, covid_events):
    started = time.perf_counter()
    _run_driver_end_to_end(tmp_path, "sqlite", "db", covid_iface, covid_events)
    assert time.perf_counter() - started < 60.0


def test_executor_integration_duckdb(tmp_path, covid_iface, covid_events):
    pytest.importorskip("duckdb", reason="duckdb wheel not installed in this environment")
    started = time.perf_counter()
    _run_driver_end_to_end(tmp_path, "duckdb", "duckdb", covid_iface, covid_events)
    assert time.perf_counter() - started < 60.0


# 10 --------------------------------------------------------------------------

def test_desk_scale_throughput():
    # 20-node graph: 10 widgets fanning out to 10 visualizations
    rng = random.Random(5)
    vizzes = [
        {
            "name": f"viz{i}",
            "fields": [
                {"table": "t", "attribute": f"c{i % 4}"},
                {"table": "t", "attribute": "m", "aggregation": "SUM"},
            ],
        }
        for i in range(10)
    ]
    widgets = [
        {
            "name": f"w{i}",
            "widget_class": "checkbox",
            "attribute": [{"table": "t", "attribute": f"c{i % 4}"}],
        }
        for i in range(10)
    ]
    rels = [
        {
            "name": f"rel{i}",
            "source": f"w{i}",
            "attribute": [{"table": "t", "attribute": f"c{i % 4}"}],
            "targets": [
                {"type": "visualization", "name": f"viz{j}"} for j in sorted(rng.sample(range(10), 3))
            ],
        }
        for i in range(10)
    ]
    from dashbench.specs import parse_database_spec

    db = parse_database_spec(json.dumps({
        "tables": {"t": {"c0": "categorical", "c1": "categorical", "c2": "categorical",
                          "c3": "categorical", "m": "numerical"}}
    }))
    iface = parse_interface_spec(
        json.dumps({"visualizations": vizzes, "widgets": widgets, "relationships": rels}), db
    )
    lines = []
    ts = 1_600_000_000_000
    for i in range(1000):
        rel = rels[rng.randrange(10)]
        attr = rel["attribute"][0]["attribute"]
        lines.append(json.dumps({
            "relationship": rel["name"],
            "timestamp": ts,
            "parameters": {"field": attr, "equal": f"v{rng.randrange(20)}"},
        }))
        ts += rng.randint(1, 50)
    events = parse_interaction_log("\n".join(lines) + "\n", iface)
    assert len(events) == 1000
    g = build_graph(iface)
    started = time.perf_counter()
    w = generate_workload(g, events)
    elapsed = time.perf_counter() - started
    assert len(w.batches) == 1000
    assert elapsed < 5.0, f"compiled 1000 interactions in {elapsed:.2f}s"
