"""Menetrey-Willam concrete plasticity with an implicit return to the apex."""

from .driver import (LoadingProgram, ControlStep, Control, StepRecord,
                     run_program, scenario, SCENARIOS)
from .return_mapping import (InternalState, Mode, StepResult, Tolerances,
                             integrate_step)
from .surface import TABLE1, MaterialParams
from .tensors import ElasticModuli, HWCoords, invariants, to_hw

__all__ = [
    "Control", "ControlStep", "ElasticModuli", "HWCoords", "InternalState",
    "LoadingProgram", "MaterialParams", "Mode", "SCENARIOS", "StepRecord",
    "StepResult", "TABLE1", "Tolerances", "integrate_step", "invariants",
    "run_program", "scenario", "to_hw",
]
