"""(p,q)-deformed Bernstein-type operators on ``[0, b_n]``: evaluation, moments, error bounds and convergence sweeps."""
from .operator import (
    BasisExpansion,
    NormalizationMode,
    OperatorConfig,
    TargetFunction,
    basis,
    classical_stancu_chlodowsky,
    evaluate,
    evaluate_grid,
    node,
    raw_weight,
)
from .pq_core import (
    PQParams,
    falling_product,
    log_falling_product,
    pq_binomial,
    pq_factorial,
    pq_integer,
)

__all__ = [
    "BasisExpansion",
    "NormalizationMode",
    "OperatorConfig",
    "PQParams",
    "TargetFunction",
    "basis",
    "classical_stancu_chlodowsky",
    "evaluate",
    "evaluate_grid",
    "falling_product",
    "log_falling_product",
    "node",
    "pq_binomial",
    "pq_factorial",
    "pq_integer",
    "raw_weight",
]
