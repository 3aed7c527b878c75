"""CⁿX synthesis with one clean ancilla.

Qubit layout for n controls: controls ``0..n-1``, target ``n``, clean
ancilla ``n+1``.

All three methods share the same skeleton.  A first relative-phase gate
computes the AND of the leading controls into the ancilla.  In the branch
where that AND is 1 those controls are known to be |1>, so after an X flip
they serve as clean scratch qubits ("conditionally clean").  The remaining
controls are folded into one of them by a recursive ladder, a central CCX
hits the target, and everything is mirrored back.  The dynamic methods
drop the coherent uncompute of the ancilla gate and instead measure the
ancilla in the X basis, then repair the phase kickback on the measured
branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .circuit_core import (AccountingMode, Circuit, Condition, GateKind,
                           Instruction)
from .primitives import MacroCost, MacroGate, expand


class SynthesisMethod(str, Enum):
    STATIC_BASELINE = "static"
    DYNAMIC_CCIX = "ccix"
    DYNAMIC_MIXED = "mixed"

    @classmethod
    def parse(cls, text: str) -> "SynthesisMethod":
        aliases = {"static": cls.STATIC_BASELINE, "staticbaseline": cls.STATIC_BASELINE,
                   "ccix": cls.DYNAMIC_CCIX, "dynamicccix": cls.DYNAMIC_CCIX,
                   "mixed": cls.DYNAMIC_MIXED, "dynamicmixed": cls.DYNAMIC_MIXED}
        key = text.replace("_", "").replace("-", "").lower()
        if key not in aliases:
            raise ValueError(f"unknown method {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class SynthesisRequest:
    n: int
    method: SynthesisMethod = SynthesisMethod.DYNAMIC_MIXED

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 controls, got n={self.n}")


# -- trace items ----------------------------------------------------------------

@dataclass(frozen=True)
class MacroStep:
    macro: MacroGate
    block: int
    condition: Optional[Condition] = None

    def expand(self) -> list:
        return expand(self.macro, self.condition, self.block)


@dataclass(frozen=True)
class PrimitiveStep:
    instruction: Instruction

    def expand(self) -> list:
        return [self.instruction]


@dataclass(frozen=True)
class Correction:
    """Measurement-conditioned phase repair, e.g. ``CZ`` or ``CX.CC(iZ)``."""
    label: str
    condition: Condition
    steps: tuple

    def expand(self) -> list:
        return [ins for step in self.steps for ins in step.expand()]


TraceItem = Union[MacroStep, PrimitiveStep, Correction]


@dataclass
class SynthesisResult:
    n: int
    method: SynthesisMethod
    circuit: Circuit
    macro_trace: list

    @property
    def ancilla(self) -> int:
        return self.n + 1

    @property
    def target(self) -> int:
        return self.n

    def macros(self) -> list:
        """All macro gates in trace order, including those inside corrections."""
        out = []
        for item in self.macro_trace:
            steps = item.steps if isinstance(item, Correction) else (item,)
            out += [s.macro for s in steps if isinstance(s, MacroStep)]
        return out


class _Builder:
    def __init__(self, n: int, method: SynthesisMethod, num_clbits: int):
        roles = [f"c{i + 1}" for i in range(n)] + ["t", "anc"]
        self.circuit = Circuit(n + 2, num_clbits, roles=roles)
        self.trace = []
        self._next_block = 0

    def _push(self, item):
        self.circuit.extend(item.expand())
        self.trace.append(item)
        return item

    def _macro_step(self, macro, condition=None):
        step = MacroStep(macro, self._next_block, condition)
        self._next_block += 1
        return step

    def macro(self, macro: MacroGate):
        return self._push(self._macro_step(macro))

    def gate(self, kind, *qubits, condition=None, writes=None):
        return self._push(PrimitiveStep(Instruction(GateKind(kind), qubits, writes, condition)))

    def correction(self, label, condition, parts):
        steps = []
        for p in parts:
            if isinstance(p, MacroGate):
                steps.append(self._macro_step(p, condition))
            else:
                steps.append(PrimitiveStep(p.with_tags(condition=condition)))
        return self._push(Correction(label, condition, tuple(steps)))


# -- ladders ------------------------------------------------------------------
# A ladder is a list of ops: ("X", q) flips or MacroGate instances.  Each
# helper appends the compute side and returns the qubit that ends up
# holding the AND of ``leaves`` in the current branch.

def _flip_into(ops, q, macro):
    ops.append(("X", q))
    ops.append(macro)
    return q


def _ccix_ladder(leaves, clean, ops):
    """Chain of CC(iX) gates; each world offers exactly two clean qubits."""
    p, q = clean
    if len(leaves) == 1:
        return leaves[0]
    _flip_into(ops, p, MacroGate("CCiX", leaves[:2], p))
    if len(leaves) == 2:
        return p
    rest = _ccix_ladder(leaves[2:], leaves[:2], ops)
    return _flip_into(ops, q, MacroGate("CCiX", (p, rest), q))


def _mixed_ladder(leaves, clean, ops):
    """Greedy C3(iX) pairing on disjoint qubits, CC(iX) for the leftovers.

    ``clean`` holds at least three conditionally clean qubits.  Two blocks
    are computed side by side into ``clean[0]`` and ``clean[1]``; once both
    are 1 their six inputs are clean too, so the remaining leaves recurse
    into that branch and the three partial results merge into ``clean[2]``.
    """
    m = len(leaves)
    k0, k1, k2 = clean[:3]
    if m == 1:
        return leaves[0]
    if m == 2:
        return _flip_into(ops, k0, MacroGate("CCiX", leaves, k0))
    if m == 3:
        return _flip_into(ops, k0, MacroGate("C3iX", leaves, k0))
    if m <= 6:
        first = leaves[:3] if m >= 5 else leaves[:2]
        second = leaves[len(first):]
        _flip_into(ops, k0, MacroGate("C3iX" if len(first) == 3 else "CCiX", first, k0))
        _flip_into(ops, k1, MacroGate("C3iX" if len(second) == 3 else "CCiX", second, k1))
        return _flip_into(ops, k2, MacroGate("CCiX", (k0, k1), k2))
    _flip_into(ops, k0, MacroGate("C3iX", leaves[:3], k0))
    _flip_into(ops, k1, MacroGate("C3iX", leaves[3:6], k1))
    rest = _mixed_ladder(leaves[6:], leaves[:6], ops)
    return _flip_into(ops, k2, MacroGate("C3iX", (k0, k1, rest), k2))


def _compute_side(n: int, method: SynthesisMethod):
    """Return (ops, reg) where ops[0] computes into the ancilla and ``reg``
    holds the AND of the other controls."""
    anc = n + 1
    controls = list(range(n))
    if method is SynthesisMethod.DYNAMIC_MIXED and n >= 4:
        ops = [MacroGate("C3iX", controls[:3], anc)]
        reg = _mixed_ladder(controls[3:], controls[:3], ops)
    else:
        ops = [MacroGate("CCiX", controls[:2], anc)]
        reg = _ccix_ladder(controls[2:], controls[:2], ops)
    return ops, reg


def _emit(b: _Builder, op, inverse=False):
    if isinstance(op, MacroGate):
        b.macro(op.inverse() if inverse else op)
    else:
        b.gate(*op)


def synthesize(request) -> SynthesisResult:
    """Build the CⁿX circuit for ``request`` (a SynthesisRequest or an int n)."""
    if isinstance(request, int):
        request = SynthesisRequest(request)
    n, method = request.n, request.method
    anc, target = n + 1, n
    dynamic = method is not SynthesisMethod.STATIC_BASELINE and n >= 3
    b = _Builder(n, method, 1 if dynamic else 0)

    if n == 2:
        b.macro(MacroGate("CCX", (0, 1), target))
        return SynthesisResult(n, method, b.circuit, b.trace)

    ops, reg = _compute_side(n, method)
    for op in ops:
        _emit(b, op)
    b.macro(MacroGate("CCX", (anc, reg), target))

    if not dynamic:
        for op in reversed(ops):
            _emit(b, op, inverse=True)
        return SynthesisResult(n, method, b.circuit, b.trace)

    # the ancilla now holds i^p |p>; strip the i, then measure in the X basis
    b.gate("Sdg", anc)
    b.gate("MeasureH", anc, writes=0)
    for op in reversed(ops[1:]):
        _emit(b, op, inverse=True)
    one, zero = Condition(0, 1), Condition(0, 0)
    first = ops[0]
    if first.name == "CCiX":
        x, y = first.controls
        b.correction("CZ", one, [Instruction(GateKind.H, (y,)),
                                 Instruction(GateKind.CX, (x, y)),
                                 Instruction(GateKind.H, (y,))])
    else:
        # C3(iX) leaves S^dag(y).CS(x,y) on the controls of the ancilla gate
        x, y, z = first.controls
        b.gate("S", y)
        b.correction("CSdg", zero, [MacroGate("CSdg", (x,), y)])
        b.correction("CX.CCiZ", one, [MacroGate("CCiZ_dg", (x, y), z),
                                      Instruction(GateKind.X, (z,)),
                                      Instruction(GateKind.CX, (x, z))])
    # the measured ancilla sits in |M_H>; return it to |0>
    b.gate("X", anc, condition=one)
    return SynthesisResult(n, method, b.circuit, b.trace)


# -- closed forms ----------------------------------------------------------------

def mixed_depth_bound(n: int) -> int:
    """Reduced serial T-depth of the mixed ladder, worst case."""
    return ((2 * n - 6) * 4 + 3 + 4
            - 2 * ((n - 3) // 6) * 8
            - 2 * (1 if n % 6 in (1, 2) else 0) * 4)


def predicted_cost(n: int, method: SynthesisMethod,
                   mode: AccountingMode = AccountingMode.WORST_CASE) -> MacroCost:
    """Closed-form CX, T-count and serial (or reduced) T-depth."""
    if n < 4:
        raise ValueError("closed forms hold for n >= 4")
    method = SynthesisMethod(method)
    mode = AccountingMode(mode)
    if method is SynthesisMethod.STATIC_BASELINE:
        return MacroCost(6 * n - 5, 8 * n - 9, 8 * n - 13)
    if mode is AccountingMode.STATIC_ONLY:
        raise ValueError("dynamic closed forms need WorstCase or BestCase")
    worst = mode is AccountingMode.WORST_CASE
    if method is SynthesisMethod.DYNAMIC_CCIX:
        # (2n-5) CC(iX) + CCX, plus the H.CX.H correction when M_H = 1
        return MacroCost(6 * n - 7 if worst else 6 * n - 8, 8 * n - 13, 8 * n - 17)
    # (2n-6) CC(iX) units + CCX + CX.CC(iZ) (4,4,4) or CS^dag (2,3,2)
    if worst:
        return MacroCost(6 * n - 7, 8 * n - 13, mixed_depth_bound(n))
    return MacroCost(6 * n - 9, 8 * n - 14, mixed_depth_bound(n) - 2)


def macro_trace(n: int, method: SynthesisMethod) -> list:
    return synthesize(SynthesisRequest(n, method)).macro_trace
