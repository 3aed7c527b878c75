"""Clifford+T synthesis of n-controlled Toffoli gates with one clean ancilla."""

from .analysis import (ComparisonRow, ResourceReport, check_bounds, compare_table,
                       count_resources, t_depth)
from .circuit_core import (AccountingMode, Circuit, CircuitError, Condition, GateKind,
                           Instruction, append, new_circuit, validate)
from .primitives import MacroCost, MacroGate, expand, macro_cost, macro_unitary, verify_macro
from .sim import cnx_oracle, run_branches, verify_cnx
from .synthesis import (SynthesisMethod, SynthesisRequest, SynthesisResult,
                        predicted_cost, synthesize)

__version__ = "0.1.0"
