"""Bounded intuition/deliberation networks for syllogistic response distributions."""
from .dataset import HumanMatrix, load_table, to_targets, validate_report
from .models import (
    DirectMLP,
    DirectMLPRegressor,
    DualPathModel,
    DualPathRegressor,
    TrainConfig,
    build_direct,
    build_dualpath,
)
from .syllogism import RESPONSES, encode, encode_all, enumerate_syllogisms, parse_code

__all__ = [
    "RESPONSES",
    "DirectMLP",
    "DirectMLPRegressor",
    "DualPathModel",
    "DualPathRegressor",
    "HumanMatrix",
    "TrainConfig",
    "build_direct",
    "build_dualpath",
    "encode",
    "encode_all",
    "enumerate_syllogisms",
    "load_table",
    "parse_code",
    "to_targets",
    "validate_report",
]
