"""Command-line pipeline orchestration.

Subcommands: validate, compile (dry run, no DBMS), simulate,
parse-tableau, load, run, check-equiv, serve. Outputs go to files named by
flags; progress and errors go to stderr. Exit codes: 0 success, 1
validation errors, 2 execution errors, 64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import compiler, equivalence, report as report_mod, simulate as sim
from .drivers import DriverConfig, load_dataset, open_driver
from .errors import DashbenchError, DriverConnectionError
from .executor import batch_offsets, run_workload, write_measurements
from .graph import build_graph
from .specs import parse_database_spec, parse_interaction_log, parse_interface_spec
from .tableau import TableauAdapterConfig, parse_tableau_log

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_EXECUTION = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--database", help="database spec (.json)")
    p.add_argument("--interface", help="interface spec (.json)")


def _add_driver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--driver", choices=["sqlite", "duckdb", "postgresql"], help="DBMS driver")
    p.add_argument("--db", help="database file path (embedded) or database name (postgresql)")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--user")
    p.add_argument("--password")
    p.add_argument("--pool-size", type=int, dest="pool_size")
    p.add_argument("--timeout-ms", type=int, dest="timeout_ms", help="per-query timeout")


def build_parser() -> _Parser:
    parser = _Parser(prog="dashbench", description=__doc__)
    parser.add_argument("--config", help="JSON config file merged with flags (flags win)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[], help="validate spec documents")
    _add_spec_flags(p)
    p.add_argument("--log", help="interaction log (.jsonl) to validate as well")

    p = sub.add_parser("compile", help="compile an interaction log into a workload (no DBMS touched)")
    _add_spec_flags(p)
    p.add_argument("--log", required=False)
    p.add_argument("--out", help="workload output (.jsonl)")
    p.add_argument("--spec-log", dest="spec_log", help="directory for revised interface specs")
    p.add_argument("--levels", type=int, help="simultaneous aggregation levels for many-query widgets")
    p.add_argument("--lenient", action="store_true", help="skip failing events instead of aborting")

    p = sub.add_parser("simulate", help="generate a synthetic interaction log")
    _add_spec_flags(p)
    _add_driver_flags(p)
    p.add_argument("--model", help="user model config (.json)")
    p.add_argument("--domains", help="value domains file (.json); wins over DB sampling")
    p.add_argument("--out", help="interaction log output (.jsonl)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--n", type=int, help="override the config interaction count")

    p = sub.add_parser("parse-tableau", help="convert raw Tableau logs to benchmark events")
    _add_spec_flags(p)
    p.add_argument("--raw", help="raw Tableau log (.jsonl)")
    p.add_argument("--adapter", help="adapter config (.json): record paths and name map")
    p.add_argument("--value-map", dest="value_map", help="values for interactions the logs omit (.json)")
    p.add_argument("--out", help="benchmark interaction log output (.jsonl)")
    p.add_argument("--skipped", help="skipped-records report output (.json)")

    p = sub.add_parser("load", help="load a CSV fixture into the target DBMS")
    _add_spec_flags(p)
    _add_driver_flags(p)
    p.add_argument("--table", help="target table name")
    p.add_argument("--csv", help="CSV file matching the table's attributes")

    p = sub.add_parser("run", help="execute a workload and report performance")
    _add_spec_flags(p)
    _add_driver_flags(p)
    p.add_argument("--workload", help="precompiled workload (.jsonl); alternative to specs + log")
    p.add_argument("--log", help="interaction log (.jsonl)")
    p.add_argument("--speed", type=float, help="replay speed factor (default: stress mode)")
    p.add_argument("--stress", action="store_true", help="ignore timestamps, issue everything immediately")
    p.add_argument("--threshold", type=float, help="interactivity threshold in ms (default 500)")
    p.add_argument("--levels", type=int)
    p.add_argument("--out", help="report output (.json)")
    p.add_argument("--measurements", help="raw measurement output (.jsonl)")
    p.add_argument("--text", action="store_true", help="also print the human-readable table to stdout")

    p = sub.add_parser("check-equiv", help="check two SQL files for equivalence")
    p.add_argument("sql_a")
    p.add_argument("sql_b")
    _add_driver_flags(p)

    p = sub.add_parser("serve", help="serve the playground endpoints (GET /spec, POST /log, POST /query)")
    _add_spec_flags(p)
    _add_driver_flags(p)
    p.add_argument("--hostname", default=None, help="bind address (default 127.0.0.1)")
    p.add_argument("--serve-port", dest="serve_port", type=int, help="bind port (default 8080)")
    p.add_argument("--log-out", dest="log_out", help="session interaction log path")
    p.add_argument("--static", help="directory with the playground frontend build")
    p.add_argument("--levels", type=int)

    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    cfg = json.loads(_read(args.config))
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            continue
        current = getattr(args, attr)
        if current is None or current is False:
            setattr(args, attr, value)
    return args


def _require(args, *names) -> None:
    missing = [n for n in names if getattr(args, n, None) in (None, False)]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        print(f"dashbench {args.command}: missing required flag(s): {flags}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_specs(args):
    db = parse_database_spec(_read(args.database))
    iface = parse_interface_spec(_read(args.interface), db)
    return db, iface


def _driver_config(args) -> DriverConfig:
    cfg = DriverConfig(
        kind=args.driver,
        database=args.db,
        host=args.host,
        port=args.port,
        user=args.user,
        password=args.password,
        pool_size=args.pool_size or 4,
        per_query_timeout_ms=args.timeout_ms,
    )
    cfg.apply_env()
    cfg.validate()
    return cfg


def _compile_options(args) -> compiler.CompileOptions:
    levels = getattr(args, "levels", None)
    if levels is None:
        return compiler.CompileOptions()
    return compiler.CompileOptions(detail_levels=levels)


def _cmd_validate(args) -> int:
    _require(args, "database", "interface")
    db, iface = _load_specs(args)
    n_events = 0
    if args.log:
        n_events = len(parse_interaction_log(_read(args.log), iface))
    _log(
        f"ok: {len(db.tables)} table(s), {len(iface.visualizations)} visualization(s), "
        f"{len(iface.widgets)} widget(s), {len(iface.relationships)} relationship(s)"
        + (f", {n_events} event(s)" if args.log else "")
    )
    return EXIT_OK


def _cmd_compile(args) -> int:
    _require(args, "database", "interface", "log", "out")
    _, iface = _load_specs(args)
    events = parse_interaction_log(_read(args.log), iface)
    g = build_graph(iface, spec_log_dir=args.spec_log)
    provenance = {
        "mode": "replay",
        "digests": compiler.spec_digests(_read(args.database), _read(args.interface), _read(args.log)),
    }
    workload = compiler.generate_workload(
        g, events, options=_compile_options(args), lenient=args.lenient, provenance=provenance
    )
    compiler.write_workload(workload, args.out)
    for index, message in workload.errors:
        _log(f"event {index}: skipped: {message}")
    _log(f"compiled {len(workload.batches)} batch(es), {workload.query_count()} quer(ies) -> {args.out}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    _require(args, "database", "interface", "model", "out")
    _, iface = _load_specs(args)
    cfg = sim.UserModelConfig.from_file(args.model)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.n is not None:
        cfg.n_interactions = args.n
    if args.domains:
        domains = sim.Domains.from_file(args.domains)
    elif args.driver:
        driver = open_driver(_driver_config(args))
        try:
            domains = sim.sample_domains(driver, iface.db)
        finally:
            driver.shutdown()
    else:
        print("dashbench simulate: need --domains or a --driver to sample them from", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    events = sim.simulate_interactions(iface, domains, cfg)
    sim.write_events(events, args.out)
    _log(f"simulated {len(events)} event(s) with seed {cfg.seed} -> {args.out}")
    return EXIT_OK


def _cmd_parse_tableau(args) -> int:
    _require(args, "database", "interface", "raw", "out")
    _, iface = _load_specs(args)
    adapter = TableauAdapterConfig.from_file(args.adapter) if args.adapter else None
    value_map = json.loads(_read(args.value_map)) if args.value_map else None
    events, skipped = parse_tableau_log(_read(args.raw), iface, value_map=value_map, adapter=adapter)
    sim.write_events(events, args.out)
    needing = sum(1 for ev in events if ev.needs_value)
    if args.skipped:
        Path(args.skipped).write_text(
            json.dumps([{"line": line, "reason": reason} for line, reason in skipped], indent=2) + "\n",
            encoding="utf-8",
        )
    for line, reason in skipped:
        _log(f"line {line}: skipped: {reason}")
    _log(f"converted {len(events)} event(s) ({needing} needing values), skipped {len(skipped)} -> {args.out}")
    return EXIT_OK


def _cmd_load(args) -> int:
    _require(args, "database", "driver", "table", "csv")
    db = parse_database_spec(_read(args.database))
    driver = open_driver(_driver_config(args))
    try:
        count = load_dataset(driver, db, args.table, args.csv)
    finally:
        driver.shutdown()
    _log(f"loaded {count} row(s) into {args.table}")
    print(count)
    return EXIT_OK


def _cmd_run(args) -> int:
    _require(args, "driver", "out")
    if args.workload:
        workload = compiler.read_workload(args.workload)
    else:
        _require(args, "database", "interface", "log")
        _, iface = _load_specs(args)
        events = parse_interaction_log(_read(args.log), iface)
        g = build_graph(iface)
        workload = compiler.generate_workload(g, events, options=_compile_options(args))
    speed = float("inf") if (args.stress or args.speed is None) else args.speed
    schedule = batch_offsets(workload, speed)
    measurements = run_workload(workload, schedule, _driver_config(args))
    if args.measurements:
        write_measurements(measurements, args.measurements)
    threshold = args.threshold if args.threshold is not None else report_mod.DEFAULT_THRESHOLD_MS
    rep = report_mod.aggregate(measurements, threshold_ms=threshold)
    payload = rep.to_dict()
    # wall clock once per run, provenance only (durations use the monotonic clock)
    payload["wall_clock_utc"] = datetime.now(timezone.utc).isoformat()
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if args.text:
        print(rep.to_text(), end="")
    errors = rep.error_count + rep.timeout_count
    _log(f"executed {rep.query_count} quer(ies) in {rep.batch_count} batch(es), {errors} failure(s) -> {args.out}")
    return EXIT_OK


def _cmd_check_equiv(args) -> int:
    sql_a = _read(args.sql_a)
    sql_b = _read(args.sql_b)
    driver = None
    if args.driver:
        driver = open_driver(_driver_config(args))
    try:
        verdict = equivalence.sql_equivalent(sql_a, sql_b, db=driver)
    finally:
        if driver is not None:
            driver.shutdown()
    print(verdict)
    return EXIT_OK


def _cmd_serve(args) -> int:
    _require(args, "database", "interface", "driver")
    from .server import serve  # deferred: fastapi/uvicorn are an extra

    db, iface = _load_specs(args)
    serve(
        iface,
        _driver_config(args),
        host=args.hostname or "127.0.0.1",
        port=args.serve_port or 8080,
        log_path=args.log_out,
        static_dir=args.static,
        options=_compile_options(args),
    )
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "compile": _cmd_compile,
    "simulate": _cmd_simulate,
    "parse-tableau": _cmd_parse_tableau,
    "load": _cmd_load,
    "run": _cmd_run,
    "check-equiv": _cmd_check_equiv,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _merge_config(args)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except DriverConnectionError as exc:
        print(f"dashbench: execution error: {exc}", file=sys.stderr)
        return EXIT_EXECUTION
    except DashbenchError as exc:
        print(f"dashbench: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"dashbench: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # driver/runtime failures
        print(f"dashbench: execution error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EXECUTION


if __name__ == "__main__":
    sys.exit(main())
