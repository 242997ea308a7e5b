"""Mean-vector tests for high-dimensional repeated-measures designs."""

from .data import Dataset, from_long, from_wide, read_long_csv, read_wide_csv
from .distributions import pearson_pvalue, pearson_quantile
from .engine import TestResult, run_grouped, run_single
from .exceptions import (
    BudgetError,
    DataError,
    DegenerateError,
    DimensionError,
    HdrmError,
    SampleSizeError,
)
from .hypotheses import HypothesisSpec, ProjectionPair, build_grouped, build_single

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "DataError",
    "Dataset",
    "DegenerateError",
    "DimensionError",
    "HdrmError",
    "HypothesisSpec",
    "ProjectionPair",
    "SampleSizeError",
    "TestResult",
    "build_grouped",
    "build_single",
    "from_long",
    "from_wide",
    "pearson_pvalue",
    "pearson_quantile",
    "read_long_csv",
    "read_wide_csv",
    "run_grouped",
    "run_single",
]
