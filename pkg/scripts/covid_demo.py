#!/usr/bin/env python3
"""End-to-end demo on the bundled COVID dashboard fixture.

Loads the CSV into a throwaway SQLite database, replays the recorded radio
interactions through the graph and compiler, executes the workload and
prints the performance report.

Run:  python3 scripts/covid_demo.py [--driver sqlite|duckdb]
"""

import argparse
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dashbench.compiler import generate_workload
from dashbench.drivers import DriverConfig, load_dataset, open_driver
from dashbench.executor import batch_offsets, run_workload
from dashbench.graph import build_graph
from dashbench.report import aggregate
from dashbench.specs import parse_database_spec, parse_interaction_log, parse_interface_spec

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "covid"


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--driver", choices=["sqlite", "duckdb"], default="sqlite")
    ap.add_argument("--speed", type=float, default=None, help="replay speed; default stress mode")
    args = ap.parse_args()

    db = parse_database_spec((FIXTURES / "database.json").read_text())
    iface = parse_interface_spec((FIXTURES / "interface.json").read_text(), db)
    events = parse_interaction_log((FIXTURES / "interactions.jsonl").read_text(), iface)

    with tempfile.TemporaryDirectory() as tmp:
        cfg = DriverConfig(kind=args.driver, database=str(Path(tmp) / f"covid.{args.driver}"))
        driver = open_driver(cfg)
        rows = load_dataset(driver, db, "covid", FIXTURES / "covid.csv")
        driver.shutdown()
        print(f"loaded {rows} rows into {args.driver}", file=sys.stderr)

        workload = generate_workload(build_graph(iface), events)
        print(f"compiled {len(workload.batches)} batches / {workload.query_count()} queries", file=sys.stderr)
        for batch in workload.batches:
            for q in batch.queries:
                print(f"  [{batch.timestamp}] {q.node}: {q.sql}", file=sys.stderr)

        speed = float("inf") if args.speed is None else args.speed
        measurements = run_workload(workload, batch_offsets(workload, speed), cfg)
        print(aggregate(measurements).to_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
