#!/usr/bin/env python3
"""Synthetic-workload experiment: simulate a bursty user on the COVID
dashboard, compile the interactions, execute them stress-mode against
SQLite and print how the load splits across widget groups.

Run:  python3 scripts/simulate_and_run.py [--n 500] [--seed 42]
"""

import argparse
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dashbench.compiler import generate_workload
from dashbench.drivers import DriverConfig, load_dataset, open_driver
from dashbench.executor import run_workload
from dashbench.graph import build_graph
from dashbench.report import aggregate
from dashbench.simulate import UserModelConfig, sample_domains, simulate_interactions
from dashbench.specs import parse_database_spec, parse_interface_spec

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    db = parse_database_spec((FIXTURES / "covid" / "database.json").read_text())
    # the brush variant gives the simulator both a SingleLow and a ManyHigh widget
    iface = parse_interface_spec((FIXTURES / "covid_brush" / "interface.json").read_text(), db)

    with tempfile.TemporaryDirectory() as tmp:
        cfg = DriverConfig(kind="sqlite", database=str(Path(tmp) / "covid.db"), pool_size=8)
        driver = open_driver(cfg)
        load_dataset(driver, db, "covid", FIXTURES / "covid" / "covid.csv")
        domains = sample_domains(driver, db)
        driver.shutdown()

        model = UserModelConfig(seed=args.seed, n_interactions=args.n, widget_subset_size=2)
        events = simulate_interactions(iface, domains, model)
        span_s = (events[-1].timestamp - events[0].timestamp) / 1000.0
        print(f"simulated {len(events)} events spanning {span_s:.0f}s of user time", file=sys.stderr)

        workload = generate_workload(build_graph(iface), events)
        print(f"compiled {workload.query_count()} queries in {len(workload.batches)} batches", file=sys.stderr)

        measurements = run_workload(workload, None, cfg)  # stress mode
        print(aggregate(measurements).to_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
