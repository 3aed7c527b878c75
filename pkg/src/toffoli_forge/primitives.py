"""Clifford+T macros: exact and relative-phase Toffolis plus correction gadgets.

Each macro is a template over local roles (controls ``c0, c1, ...`` and a
target ``t``).  ``expand`` maps the template onto circuit qubits and
``verify_macro`` checks the expansion against its defining contract with a
dense unitary.

Local qubit order for dense matrices: control ``i`` is bit ``i`` and the
target is the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .circuit_core import Condition, GateKind, Instruction

CONTROL_COUNT = {"CCX": 2, "CCiX": 2, "CCiX_dg": 2, "C3iX": 3, "C3iX_dg": 3,
                 "CCiZ": 2, "CCiZ_dg": 2, "CSdg": 1}
MACRO_NAMES = tuple(CONTROL_COUNT)

INVERSE_NAME = {"CCX": "CCX", "CCiX": "CCiX_dg", "CCiX_dg": "CCiX",
                "C3iX": "C3iX_dg", "C3iX_dg": "C3iX",
                "CCiZ": "CCiZ_dg", "CCiZ_dg": "CCiZ"}


@dataclass(frozen=True)
class MacroCost:
    cx: int
    t_count: int
    t_depth: int

    def __add__(self, other):
        return MacroCost(self.cx + other.cx, self.t_count + other.t_count,
                         self.t_depth + other.t_depth)

    def __mul__(self, k: int):
        return MacroCost(self.cx * k, self.t_count * k, self.t_depth * k)

    __rmul__ = __mul__

    def as_tuple(self):
        return (self.cx, self.t_count, self.t_depth)


_CCIX_COST = MacroCost(3, 4, 4)
DECLARED_COST = {
    "CCX": MacroCost(7, 7, 3),
    "CCiX": _CCIX_COST,
    "CCiX_dg": _CCIX_COST,
    "C3iX": 2 * _CCIX_COST,
    "C3iX_dg": 2 * _CCIX_COST,
    "CCiZ": _CCIX_COST,
    "CCiZ_dg": _CCIX_COST,
    "CSdg": MacroCost(2, 3, 2),
}


@dataclass(frozen=True)
class MacroGate:
    name: str
    controls: tuple
    target: int

    def __post_init__(self):
        if self.name not in CONTROL_COUNT:
            raise ValueError(f"unknown macro {self.name!r}")
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if len(self.controls) != CONTROL_COUNT[self.name]:
            raise ValueError(f"{self.name} takes {CONTROL_COUNT[self.name]} controls")
        qs = self.controls + (self.target,)
        if len(set(qs)) != len(qs):
            raise ValueError(f"{self.name}: qubits must be distinct")

    @property
    def qubits(self) -> tuple:
        return self.controls + (self.target,)

    def inverse(self) -> "MacroGate":
        return MacroGate(INVERSE_NAME[self.name], self.controls, self.target)


# -- templates --------------------------------------------------------------
# Roles: integers are control positions, "t" is the target.

# Relative-phase Toffoli: H-frame Margolus ladder.  The extra X in the
# H-frame turns the all-ones block from i*Y-like into exactly i*X.
_CCIX = [("H", "t"), ("X", "t"), ("T", "t"), ("CX", 1, "t"), ("Tdg", "t"),
         ("CX", 0, "t"), ("T", "t"), ("CX", 1, "t"), ("Tdg", "t"), ("H", "t")]

_C3IX = [("Sdg", 1), ("H", "t"), ("X", "t"),
         ("T", "t"), ("CX", 2, "t"), ("Tdg", "t"), ("H", "t"),
         ("CX", 0, "t"), ("T", "t"), ("CX", 1, "t"), ("Tdg", "t"),
         ("CX", 0, "t"), ("T", "t"), ("CX", 1, "t"), ("Tdg", "t"),
         ("H", "t"), ("T", "t"), ("CX", 2, "t"), ("Tdg", "t"), ("H", "t")]

# exact Toffoli at T-depth 3
_CCX = [("H", "t"), ("T", 0), ("T", 1), ("T", "t"),
        ("CX", 0, "t"), ("Tdg", "t"), ("CX", 1, "t"), ("CX", 0, 1), ("CX", "t", 0),
        ("Tdg", 0), ("Tdg", 1), ("T", "t"),
        ("CX", "t", 0), ("CX", 1, "t"), ("CX", 0, 1), ("H", "t")]

# CCiX conjugated by H on the target; the two inner H gates cancel
_CCIZ = _CCIX[1:-1]

# controlled S-dagger; the "target" is just the second qubit of a diagonal
_CSDG = [("Tdg", 0), ("Tdg", "t"), ("CX", 0, "t"), ("T", "t"), ("CX", 0, "t")]


def _invert(template):
    swap = {"T": "Tdg", "Tdg": "T", "S": "Sdg", "Sdg": "S"}
    return [(swap.get(op[0], op[0]),) + tuple(op[1:]) for op in reversed(template)]


_TEMPLATES = {
    "CCX": _CCX,
    "CCiX": _CCIX,
    "CCiX_dg": _invert(_CCIX),
    "C3iX": _C3IX,
    "C3iX_dg": _invert(_C3IX),
    "CCiZ": _CCIZ,
    "CCiZ_dg": _invert(_CCIZ),
    "CSdg": _CSDG,
}


def expand(macro: MacroGate, condition: Optional[Condition] = None,
           block: Optional[int] = None) -> list:
    """Primitive instruction sequence realizing ``macro`` on circuit qubits."""
    def q(role):
        return macro.target if role == "t" else macro.controls[role]

    return [Instruction(GateKind(op[0]), [q(r) for r in op[1:]],
                        condition=condition, block=block)
            for op in _TEMPLATES[macro.name]]


def local_macro(name: str) -> MacroGate:
    k = CONTROL_COUNT[name]
    return MacroGate(name, tuple(range(k)), k)


def count_cost(instrs) -> MacroCost:
    """Direct enumeration of CX, T and serial T-depth of a gate list."""
    depth = {}
    cx = t = 0
    for ins in instrs:
        base = max((depth.get(q, 0) for q in ins.qubits), default=0)
        if ins.kind.is_t:
            base += 1
            t += 1
        elif ins.kind is GateKind.CX:
            cx += 1
        for q in ins.qubits:
            depth[q] = base
    return MacroCost(cx, t, max(depth.values(), default=0))


def macro_cost(name: str) -> MacroCost:
    if name not in DECLARED_COST:
        raise ValueError(f"unknown macro {name!r}")
    return DECLARED_COST[name]


# -- dense unitaries ----------------------------------------------------------

_ONE_QUBIT = {
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    GateKind.S: np.diag([1, 1j]),
    GateKind.SDG: np.diag([1, -1j]),
    GateKind.T: np.diag([1, np.exp(1j * np.pi / 4)]),
    GateKind.TDG: np.diag([1, np.exp(-1j * np.pi / 4)]),
}


def sequence_unitary(instrs, num_qubits: int) -> np.ndarray:
    """Dense unitary of an unconditioned gate list (qubit 0 = LSB)."""
    dim = 1 << num_qubits
    u = np.eye(dim, dtype=complex)
    idx = np.arange(dim)
    for ins in instrs:
        if ins.kind in _ONE_QUBIT:
            (q,) = ins.qubits
            m = _ONE_QUBIT[ins.kind]
            bit = (idx >> q) & 1
            partner = idx ^ (1 << q)
            # row r of new U mixes rows r and r^bit
            u = m[bit, bit][:, None] * u + m[bit, 1 - bit][:, None] * u[partner]
        elif ins.kind is GateKind.CX:
            c, t = ins.qubits
            perm = np.where((idx >> c) & 1, idx ^ (1 << t), idx)
            u = u[perm]
        elif ins.kind is GateKind.CZ:
            c, t = ins.qubits
            sign = np.where(((idx >> c) & 1) & ((idx >> t) & 1), -1, 1)
            u = sign[:, None] * u
        else:
            raise ValueError(f"{ins.kind.value} has no unitary")
    return u


def macro_unitary(name: str, num_controls: Optional[int] = None) -> np.ndarray:
    """Defining unitary of a macro, with no relative phases."""
    if name not in CONTROL_COUNT:
        raise ValueError(f"unknown macro {name!r}")
    k = CONTROL_COUNT[name]
    if num_controls is not None and num_controls != k:
        raise ValueError(f"{name} has {k} controls, not {num_controls}")
    dim = 1 << (k + 1)
    u = np.eye(dim, dtype=complex)
    ones = (1 << k) - 1
    lo, hi = ones, ones | (1 << k)
    u[np.ix_([lo, hi], [lo, hi])] = _all_ones_block(name)
    return u


def _all_ones_block(name: str) -> np.ndarray:
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.diag([1, -1]).astype(complex)
    return {"CCX": x, "CCiX": 1j * x, "CCiX_dg": -1j * x, "C3iX": 1j * x,
            "C3iX_dg": -1j * x, "CCiZ": 1j * z, "CCiZ_dg": -1j * z,
            "CSdg": np.diag([1, -1j])}[name]


def control_blocks(u: np.ndarray, k: int) -> dict:
    """Split a (k+1)-qubit unitary into its 2x2 target blocks per control value.

    Returns ``{(c, c'): block}``; only ``c == c'`` should be nonzero for a
    controlled gate.
    """
    blocks = {}
    for c in range(1 << k):
        for d in range(1 << k):
            rows = [c, c | (1 << k)]
            cols = [d, d | (1 << k)]
            blocks[c, d] = u[np.ix_(rows, cols)]
    return blocks


@dataclass
class MacroReport:
    name: str
    checks: dict = field(default_factory=dict)
    cost: Optional[MacroCost] = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def failed(self) -> list:
        return [k for k, ok in self.checks.items() if not ok]


def _exact_cc_iz_correction(name: str) -> tuple:
    """X_t . CX(c0, t) after CCiZ(_dg) gives the exact diagonal CC(+-iZ)."""
    m = local_macro(name)
    tail = [Instruction(GateKind.X, [m.target]),
            Instruction(GateKind.CX, [m.controls[0], m.target])]
    u = sequence_unitary(expand(m) + tail, 3)
    return u, macro_unitary(name)


def verify_macro(name: str, tol: float = 1e-12) -> MacroReport:
    """Check the expansion of ``name`` against its contract.

    (a) all-ones control block equals the defining block;
    (b) every other control block is a unit-modulus diagonal (identity for
        CCX; unit-modulus monomial for CCiZ, whose exact form is checked
        separately as ``corrected_exact``);
    (c) expansion followed by the inverse expansion is the identity;
    (d) enumerated costs equal the declared ones.
    """
    report = MacroReport(name)
    if name not in CONTROL_COUNT:
        report.checks["known_name"] = False
        return report
    k = CONTROL_COUNT[name]
    m = local_macro(name)
    instrs = expand(m)
    u = sequence_unitary(instrs, k + 1)
    blocks = control_blocks(u, k)
    ones = (1 << k) - 1

    report.checks["all_ones_block"] = bool(
        np.allclose(blocks[ones, ones], _all_ones_block(name), atol=tol, rtol=0))

    off_ok = all(np.abs(b).max() < tol for (c, d), b in blocks.items() if c != d)
    diag_ok = True
    for c in range(ones):
        b = blocks[c, c]
        if name == "CCX":
            diag_ok &= bool(np.allclose(b, np.eye(2), atol=tol, rtol=0))
        elif name in ("CCiZ", "CCiZ_dg"):
            mags = np.abs(b)
            diag_ok &= bool(np.allclose(mags, np.eye(2), atol=tol)
                            or np.allclose(mags, 1 - np.eye(2), atol=tol))
        else:
            diag_ok &= bool(abs(b[0, 1]) < tol and abs(b[1, 0]) < tol
                            and np.allclose(np.abs(np.diag(b)), 1, atol=tol))
    report.checks["other_blocks"] = bool(off_ok and diag_ok)

    if name in ("CCiZ", "CCiZ_dg"):
        got, want = _exact_cc_iz_correction(name)
        report.checks["corrected_exact"] = bool(np.allclose(got, want, atol=tol, rtol=0))

    if name in INVERSE_NAME:
        inv_instrs = expand(m.inverse())
    else:
        inv_instrs = [ins.inverse() for ins in reversed(instrs)]
    ident = sequence_unitary(instrs + inv_instrs, k + 1)
    report.checks["inverse_identity"] = bool(
        np.linalg.norm(ident - np.eye(1 << (k + 1))) < tol)

    report.cost = count_cost(instrs)
    report.checks["cost"] = report.cost == macro_cost(name)
    return report
