"""Random geometric graphs on the unit torus with independent edge thinning.

The model G(n, r, p): drop n uniform points on the torus, connect pairs at
wrapped distance <= r, then keep each edge independently with probability p.
Kept edges carry channel labels from a two-channel decomposition of p, which
the constructive Hamiltonicity routine consumes.
"""

from gnrp.experiments import (
    GridKind,
    NoCrossing,
    SweepConfig,
    SweepSummary,
    Theorem,
    TrialRecord,
    UndefinedFormula,
    formula_ratio,
    formula_value,
    run_sweep,
    threshold_crossing,
    write_records_csv,
    write_summary_json,
)
from gnrp.generator import (
    GnrpInstance,
    ModelParams,
    channel_probabilities,
    generate,
    load_json,
    trial_seed,
)
from gnrp.geometry import (
    CellGrid,
    GridMode,
    TorusPoint,
    build_grid,
    build_grid_even,
    cell_of,
    snake_order,
    torus_distance,
)
from gnrp.graph_core import (
    DisconnectedError,
    Graph,
    components,
    degree_report,
    diameter_exact,
    is_connected,
    isolated_count,
)
from gnrp.hamilton import (
    HamFailure,
    HamiltonCertificate,
    HamStage,
    hamilton_constructive,
    hamilton_exact_small,
    verify_hamilton,
)
from gnrp.solvers import (
    BudgetExceeded,
    CliqueResult,
    ColoringResult,
    IndependenceResult,
    alpha_lower_spaced_cells,
    alpha_upper_cellsum,
    chromatic_sandwich,
    clique_block_scan,
    clique_lower_dense_cell,
    dsatur,
    max_clique_exact,
    mis_exact,
    palette_coloring,
    verify_clique,
    verify_coloring,
    verify_independent,
)

__all__ = [
    "BudgetExceeded",
    "CellGrid",
    "CliqueResult",
    "ColoringResult",
    "DisconnectedError",
    "GnrpInstance",
    "Graph",
    "GridKind",
    "GridMode",
    "HamFailure",
    "HamStage",
    "HamiltonCertificate",
    "IndependenceResult",
    "ModelParams",
    "NoCrossing",
    "SweepConfig",
    "SweepSummary",
    "Theorem",
    "TorusPoint",
    "TrialRecord",
    "UndefinedFormula",
    "alpha_lower_spaced_cells",
    "alpha_upper_cellsum",
    "build_grid",
    "build_grid_even",
    "cell_of",
    "channel_probabilities",
    "chromatic_sandwich",
    "clique_block_scan",
    "clique_lower_dense_cell",
    "components",
    "degree_report",
    "diameter_exact",
    "dsatur",
    "formula_ratio",
    "formula_value",
    "generate",
    "hamilton_constructive",
    "hamilton_exact_small",
    "is_connected",
    "isolated_count",
    "load_json",
    "max_clique_exact",
    "mis_exact",
    "palette_coloring",
    "run_sweep",
    "snake_order",
    "threshold_crossing",
    "torus_distance",
    "trial_seed",
    "verify_clique",
    "verify_coloring",
    "verify_hamilton",
    "verify_independent",
    "write_records_csv",
    "write_summary_json",
]

__version__ = "0.1.0"
