"""Sublinear-expectation limit theorem toolkit (Python bindings)."""

from gcltlab._core import (
    GuardError,
    MeasureSet,
    ValidationError,
    capacity_interval,
    centered_sum_sup,
    clt_converge,
    example51_set,
    example52_set,
    example53_set,
    example_5_3,
    g_expect,
    lln_converge,
    mean_interval,
    normal_expect,
    run_cli,
    sup_expect_sum,
    tree_g_expect,
    upper_expect,
    variance_bounds,
)

__all__ = [
    "GuardError",
    "MeasureSet",
    "ValidationError",
    "capacity_interval",
    "centered_sum_sup",
    "clt_converge",
    "example51_set",
    "example52_set",
    "example53_set",
    "example_5_3",
    "g_expect",
    "lln_converge",
    "mean_interval",
    "normal_expect",
    "run_cli",
    "sup_expect_sum",
    "tree_g_expect",
    "upper_expect",
    "variance_bounds",
]
