"""Circuit intermediate representation.

A circuit is a flat list of primitive Clifford+T instructions plus a
Hadamard-basis measurement, reset and single-bit classical conditions.
Multi-qubit relative-phase gates only exist as macro expansions (see
:mod:`toffoli_forge.primitives`); the optional ``block`` tag on an
instruction records which macro instance it came from so the scheduler can
treat the macro as one unit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional


class CircuitError(ValueError):
    """Raised when an instruction would break a circuit invariant."""


class GateKind(str, Enum):
    X = "X"
    H = "H"
    S = "S"
    SDG = "Sdg"
    T = "T"
    TDG = "Tdg"
    CX = "CX"
    CZ = "CZ"
    MEASURE_H = "MeasureH"
    RESET = "Reset"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.CX, GateKind.CZ) else 1

    @property
    def is_t(self) -> bool:
        return self in (GateKind.T, GateKind.TDG)


_BY_NAME = {k.value: k for k in GateKind}

# inverse of each unitary kind; all others are self-inverse
_INVERSE = {GateKind.S: GateKind.SDG, GateKind.SDG: GateKind.S,
            GateKind.T: GateKind.TDG, GateKind.TDG: GateKind.T}


class AccountingMode(str, Enum):
    """Which classically conditioned instructions count as executed.

    WorstCase assumes every measured bit reads 1 (the costlier M_H=1
    correction), BestCase assumes 0, StaticOnly drops conditioned gates.
    """
    WORST_CASE = "worst"
    BEST_CASE = "best"
    STATIC_ONLY = "static"

    def includes(self, instr: "Instruction") -> bool:
        if instr.condition is None:
            return True
        if self is AccountingMode.STATIC_ONLY:
            return False
        assumed = 1 if self is AccountingMode.WORST_CASE else 0
        return instr.condition.value == assumed


@dataclass(frozen=True)
class Condition:
    clbit: int
    value: int

    def __post_init__(self):
        if self.value not in (0, 1):
            raise CircuitError(f"condition value must be 0 or 1, got {self.value}")


@dataclass(frozen=True)
class Instruction:
    kind: GateKind
    qubits: tuple
    writes: Optional[int] = None
    condition: Optional[Condition] = None
    block: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))

    def inverse(self) -> "Instruction":
        if self.kind in (GateKind.MEASURE_H, GateKind.RESET):
            raise CircuitError(f"{self.kind.value} has no inverse")
        return Instruction(_INVERSE.get(self.kind, self.kind), self.qubits,
                           condition=self.condition, block=self.block)

    def with_tags(self, condition: Optional[Condition] = None,
                  block: Optional[int] = None) -> "Instruction":
        return Instruction(self.kind, self.qubits, self.writes,
                           condition if condition is not None else self.condition,
                           block if block is not None else self.block)

    def to_text(self) -> str:
        parts = [self.kind.value] + [f"q{q}" for q in self.qubits]
        if self.writes is not None:
            parts += ["->", f"c{self.writes}"]
        if self.condition is not None:
            parts += ["if", f"c{self.condition.clbit}=={self.condition.value}"]
        if self.block is not None:
            parts.append(f"@b{self.block}")
        return " ".join(parts)


def gate(kind, *qubits, condition: Optional[Condition] = None) -> Instruction:
    """Shorthand constructor: ``gate("CX", 0, 1)``."""
    return Instruction(GateKind(kind), qubits, condition=condition)


def measure_h(qubit: int, clbit: int) -> Instruction:
    return Instruction(GateKind.MEASURE_H, (qubit,), writes=clbit)


def _instruction_problems(instr: Instruction, num_qubits: int, num_clbits: int,
                          written: set) -> list:
    problems = []
    if len(instr.qubits) != instr.kind.arity:
        problems.append(f"{instr.kind.value} expects {instr.kind.arity} qubit(s), "
                        f"got {len(instr.qubits)}")
    for q in instr.qubits:
        if not 0 <= q < num_qubits:
            problems.append(f"qubit index {q} out of range")
    if len(set(instr.qubits)) != len(instr.qubits):
        problems.append("duplicate qubit in instruction")
    if instr.kind is GateKind.MEASURE_H:
        if instr.writes is None:
            problems.append("MeasureH must write a clbit")
        elif not 0 <= instr.writes < num_clbits:
            problems.append(f"clbit index {instr.writes} out of range")
        elif instr.writes in written:
            problems.append("duplicate clbit write")
        if instr.condition is not None:
            problems.append("conditioned measurement")
    elif instr.writes is not None:
        problems.append(f"{instr.kind.value} cannot write a clbit")
    if instr.condition is not None:
        c = instr.condition.clbit
        if not 0 <= c < num_clbits:
            problems.append(f"clbit index {c} out of range")
        elif c not in written:
            problems.append("condition on unwritten clbit")
    return problems


@dataclass
class Circuit:
    num_qubits: int
    num_clbits: int = 0
    instructions: list = field(default_factory=list)
    roles: Optional[list] = None

    def __post_init__(self):
        if self.num_qubits < 1 or self.num_clbits < 0:
            raise CircuitError("need num_qubits >= 1 and num_clbits >= 0")
        self.instructions = list(self.instructions)

    def __len__(self):
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def _written(self) -> set:
        return {i.writes for i in self.instructions if i.kind is GateKind.MEASURE_H}

    def append(self, instr: Instruction) -> "Circuit":
        problems = _instruction_problems(instr, self.num_qubits, self.num_clbits,
                                         self._written())
        if problems:
            raise CircuitError("; ".join(problems))
        self.instructions.append(instr)
        return self

    def extend(self, instrs: Iterable[Instruction]) -> "Circuit":
        for instr in instrs:
            self.append(instr)
        return self

    def role_map(self) -> list:
        """Role label per qubit; unassigned qubits default to controls."""
        if self.roles is not None:
            return list(self.roles)
        return [f"c{i + 1}" for i in range(self.num_qubits)]

    def set_roles(self, roles: list) -> "Circuit":
        self.roles = list(roles)
        return self

    def qubits_with_role(self, prefix: str) -> list:
        return [q for q, r in enumerate(self.role_map()) if r.startswith(prefix)]

    def validate(self) -> list:
        violations = []
        written = set()
        for pos, instr in enumerate(self.instructions):
            for p in _instruction_problems(instr, self.num_qubits, self.num_clbits, written):
                violations.append(f"instruction {pos}: {p}")
            if instr.kind is GateKind.MEASURE_H and instr.writes is not None:
                written.add(instr.writes)
        violations += _role_problems(self.roles, self.num_qubits)
        violations += _block_problems(self.instructions)
        return violations

    def is_valid(self) -> bool:
        return not self.validate()

    # -- serialization -------------------------------------------------

    def to_text(self) -> str:
        lines = [f"qubits {self.num_qubits} clbits {self.num_clbits}"]
        if self.roles is not None:
            lines.append("roles " + ",".join(self.roles))
        lines += [i.to_text() for i in self.instructions]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [" ".join(l.split()) for l in text.splitlines()]
        lines = [l for l in lines if l and not l.startswith("#")]
        if not lines:
            raise CircuitError("empty circuit text")
        m = re.fullmatch(r"qubits (\d+) clbits (\d+)", lines[0])
        if not m:
            raise CircuitError(f"bad header: {lines[0]!r}")
        circ = cls(int(m.group(1)), int(m.group(2)))
        body = lines[1:]
        if body and body[0].startswith("roles "):
            circ.roles = body[0][len("roles "):].split(",")
            body = body[1:]
        for line in body:
            circ.append(_parse_instruction(line))
        return circ

    def to_qasm(self) -> str:
        return to_qasm(self)


_INSTR_RE = re.compile(
    r"(?P<kind>\w+)(?P<qubits>(?: q\d+)+)"
    r"(?: -> c(?P<writes>\d+))?"
    r"(?: if c(?P<cbit>\d+)==(?P<cval>[01]))?"
    r"(?: @b(?P<block>\d+))?")


def _parse_instruction(line: str) -> Instruction:
    m = _INSTR_RE.fullmatch(line)
    if not m or m.group("kind") not in _BY_NAME:
        raise CircuitError(f"cannot parse instruction: {line!r}")
    qubits = [int(t[1:]) for t in m.group("qubits").split()]
    cond = None
    if m.group("cbit") is not None:
        cond = Condition(int(m.group("cbit")), int(m.group("cval")))
    writes = int(m.group("writes")) if m.group("writes") is not None else None
    block = int(m.group("block")) if m.group("block") is not None else None
    return Instruction(_BY_NAME[m.group("kind")], qubits, writes, cond, block)


def _role_problems(roles, num_qubits) -> list:
    if roles is None:
        return []
    problems = []
    if len(roles) != num_qubits or len(set(roles)) != len(roles):
        problems.append("role_map must name every qubit exactly once")
    controls = sorted(int(r[1:]) for r in roles if re.fullmatch(r"c\d+", r))
    if controls != list(range(1, len(controls) + 1)):
        problems.append("role_map controls must be c1..cn")
    if "t" not in roles:
        problems.append("role_map incomplete: no target")
    unknown = [r for r in roles if r not in ("t", "anc") and not re.fullmatch(r"c\d+", r)]
    if unknown:
        problems.append(f"unknown roles {unknown}")
    return problems


def _block_problems(instructions) -> list:
    # a macro block must be one contiguous run under a single condition
    problems = []
    seen = set()
    prev = None
    for pos, instr in enumerate(instructions):
        b = instr.block
        if b is not None and b != prev:
            if b in seen:
                problems.append(f"instruction {pos}: block {b} is not contiguous")
            seen.add(b)
            cond = instr.condition
        if b is not None and instr.condition != cond:
            problems.append(f"instruction {pos}: block {b} mixes conditions")
        prev = b
    return problems


def new_circuit(num_qubits: int, num_clbits: int = 0) -> Circuit:
    return Circuit(num_qubits, num_clbits)


def append(circuit: Circuit, instr: Instruction) -> Circuit:
    return circuit.append(instr)


def validate(circuit: Circuit) -> list:
    return circuit.validate()


# -- OpenQASM 3 export ------------------------------------------------------

_QASM_NAME = {GateKind.X: "x", GateKind.H: "h", GateKind.S: "s", GateKind.SDG: "sdg",
              GateKind.T: "t", GateKind.TDG: "tdg", GateKind.CX: "cx", GateKind.CZ: "cz"}


def _qasm_body(instr: Instruction) -> list:
    q = instr.qubits
    if instr.kind is GateKind.MEASURE_H:
        return [f"h q[{q[0]}];", f"c[{instr.writes}] = measure q[{q[0]}];"]
    if instr.kind is GateKind.RESET:
        return [f"reset q[{q[0]}];"]
    return [f"{_QASM_NAME[instr.kind]} " + ", ".join(f"q[{i}]" for i in q) + ";"]


def to_qasm(circuit: Circuit) -> str:
    lines = ["OPENQASM 3.0;", 'include "stdgates.inc";',
             f"qubit[{circuit.num_qubits}] q;"]
    if circuit.num_clbits:
        lines.append(f"bit[{circuit.num_clbits}] c;")
    instrs = circuit.instructions
    pos = 0
    while pos < len(instrs):
        instr = instrs[pos]
        if instr.condition is None:
            lines += _qasm_body(instr)
            pos += 1
            continue
        # gather the run of instructions conditioned on this clbit
        clbit = instr.condition.clbit
        end = pos
        while end < len(instrs) and instrs[end].condition is not None \
                and instrs[end].condition.clbit == clbit:
            end += 1
        runs = []
        for i in instrs[pos:end]:
            if runs and runs[-1][0] == i.condition.value:
                runs[-1][1].append(i)
            else:
                runs.append((i.condition.value, [i]))
        while runs:
            value, body = runs.pop(0)
            lines.append(f"if (c[{clbit}] == {value}) {{")
            lines += ["  " + l for i in body for l in _qasm_body(i)]
            if runs and runs[0][0] != value:
                lines.append("} else {")
                lines += ["  " + l for i in runs.pop(0)[1] for l in _qasm_body(i)]
            lines.append("}")
        pos = end
    return "\n".join(lines) + "\n"
