"""Monte Carlo experiments over the loss estimators."""

from .engine import (
    EstimatorStats,
    McSummary,
    PointSummary,
    SelectionTable,
    run_mse_experiment,
    run_point,
    run_selection_experiment,
)
from .report import grid_rows, improvement_grid, selection_rows, summary_rows, to_csv
from .spec import (
    EstimatorSpec,
    ExperimentSpec,
    GridPoint,
    bundled_specs,
    load_spec,
    spec_from_dict,
)

__all__ = [
    "EstimatorSpec",
    "EstimatorStats",
    "ExperimentSpec",
    "GridPoint",
    "McSummary",
    "PointSummary",
    "SelectionTable",
    "bundled_specs",
    "grid_rows",
    "improvement_grid",
    "load_spec",
    "run_mse_experiment",
    "run_point",
    "run_selection_experiment",
    "selection_rows",
    "spec_from_dict",
    "summary_rows",
    "to_csv",
]
