"""Python interface to the hammersim simulator core."""

from ._core import (
    BudgetError,
    CalibrationError,
    ChipProfile,
    ConfigError,
    Error,
    LayoutError,
    calibrate,
    classify_chip,
    effective_disturbance,
    expected_flips,
    feasibility_csv,
    format_profile,
    hammer_budget,
    load_profile,
    mfh_anchors,
    parse_profile,
    preset_names,
    preset_profile,
    run_attack,
    sample_flips,
    sweep_csv,
)

__all__ = [
    "BudgetError",
    "CalibrationError",
    "ChipProfile",
    "ConfigError",
    "Error",
    "LayoutError",
    "calibrate",
    "classify_chip",
    "effective_disturbance",
    "expected_flips",
    "feasibility_csv",
    "format_profile",
    "hammer_budget",
    "load_profile",
    "mfh_anchors",
    "parse_profile",
    "preset_names",
    "preset_profile",
    "run_attack",
    "sample_flips",
    "sweep_csv",
]
