"""Terminating mod-9 forms of Collatz trajectories: classification, a
six-state machine over the units mod 9, range sweeps and set analysis."""

from .analysis import (
    Factorization,
    build_set,
    factor_report,
    factorize,
    gap_progression_report,
    power2_exponent_scan,
)
from .classifier import Classification, classify, classify_range, classify_trace
from .core import (
    FORMS,
    POWER2_CYCLE,
    CollatzError,
    Form,
    Mod4Class,
    StepCapExceeded,
    collatz_step,
    compressed_step,
    form_of,
    mod4_class,
    mod4_reduce,
    power_of_two_exponent,
)
from .fsm import FsmState, fsm_enter, fsm_step, fsm_trace, state_of
from .sweep import FrequencyTable, emit_table3, merge

__all__ = [
    "FORMS",
    "POWER2_CYCLE",
    "Classification",
    "CollatzError",
    "Factorization",
    "Form",
    "FrequencyTable",
    "FsmState",
    "Mod4Class",
    "StepCapExceeded",
    "build_set",
    "classify",
    "classify_range",
    "classify_trace",
    "collatz_step",
    "compressed_step",
    "emit_table3",
    "factor_report",
    "factorize",
    "form_of",
    "fsm_enter",
    "fsm_step",
    "fsm_trace",
    "gap_progression_report",
    "merge",
    "mod4_class",
    "mod4_reduce",
    "power2_exponent_scan",
    "power_of_two_exponent",
    "state_of",
]
