"""dashbench: model and measure the DBMS query load of interactive
visualization dashboards."""

__version__ = "0.1.0"

from .compiler import (  # noqa: F401
    CompiledQuery,
    CompileOptions,
    QueryBatch,
    Workload,
    compile_interaction,
    compile_node,
    generate_workload,
    read_workload,
    translate_predicate,
    write_workload,
)
from .equivalence import sql_equivalent  # noqa: F401
from .graph import (  # noqa: F401
    InterfaceGraph,
    apply_data_manipulation,
    apply_interface_manipulation,
    build_graph,
)
from .report import PerformanceReport, aggregate  # noqa: F401
from .simulate import (  # noqa: F401
    Domains,
    UserModelConfig,
    replay_schedule,
    sample_domains,
    simulate_interactions,
)
from .specs import (  # noqa: F401
    DatabaseSpec,
    InteractionEvent,
    InterfaceSpec,
    classify_widget,
    parse_database_spec,
    parse_interaction_log,
    parse_interface_spec,
)
from .tableau import parse_tableau_log  # noqa: F401
