"""Statevector simulation of dynamic circuits and the CⁿX verifier.

States are complex numpy arrays of length ``2**num_qubits`` with qubit 0 as
the least significant bit.  Measurements are never sampled: every outcome
is followed as its own branch, carrying its unnormalized amplitude.

Internally the dense engine works on a batch: an array of shape
``(2,) * num_qubits + (batch,)`` where axis ``k`` is qubit
``num_qubits - 1 - k``.  Basis-state inputs for large registers go through
a sparse engine instead, which tracks only nonzero amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .circuit_core import Circuit, GateKind, Instruction

PRUNE = 1e-14
EXHAUSTIVE_CAP = 10

_R2 = 1 / math.sqrt(2)
_PHASE = {GateKind.S: 1j, GateKind.SDG: -1j,
          GateKind.T: complex(_R2, _R2), GateKind.TDG: complex(_R2, -_R2)}


class SimulationError(ValueError):
    pass


@dataclass
class BranchResult:
    outcomes: dict
    state: np.ndarray
    probability: float

    @property
    def key(self) -> str:
        return "".join(str(self.outcomes[k]) for k in sorted(self.outcomes))


# -- dense batched engine ------------------------------------------------------

def _index(nq: int, fixed: dict) -> tuple:
    idx = [slice(None)] * (nq + 1)
    for q, bit in fixed.items():
        idx[nq - 1 - q] = bit
    return tuple(idx)


def _apply_dense(arr: np.ndarray, instr: Instruction) -> None:
    """Apply a unitary instruction in place, ignoring any condition."""
    nq = arr.ndim - 1
    kind, qs = instr.kind, instr.qubits
    if kind in _PHASE:
        arr[_index(nq, {qs[0]: 1})] *= _PHASE[kind]
    elif kind is GateKind.X:
        s0, s1 = _index(nq, {qs[0]: 0}), _index(nq, {qs[0]: 1})
        tmp = arr[s0].copy()
        arr[s0] = arr[s1]
        arr[s1] = tmp
    elif kind is GateKind.H:
        s0, s1 = _index(nq, {qs[0]: 0}), _index(nq, {qs[0]: 1})
        a0, a1 = arr[s0].copy(), arr[s1].copy()
        arr[s0] = (a0 + a1) * _R2
        arr[s1] = (a0 - a1) * _R2
    elif kind is GateKind.CX:
        c, t = qs
        s0, s1 = _index(nq, {c: 1, t: 0}), _index(nq, {c: 1, t: 1})
        tmp = arr[s0].copy()
        arr[s0] = arr[s1]
        arr[s1] = tmp
    elif kind is GateKind.CZ:
        arr[_index(nq, {qs[0]: 1, qs[1]: 1})] *= -1
    else:
        raise SimulationError(f"{kind.value} is not a unitary gate")


def _condition_met(instr: Instruction, outcomes: dict) -> bool:
    if instr.condition is None:
        return True
    c = instr.condition.clbit
    if c not in outcomes:
        raise SimulationError(f"condition on unassigned clbit c{c}")
    return outcomes[c] == instr.condition.value


def _split(arr: np.ndarray, q: int):
    """Project qubit q onto 0 and 1; returns the two branch arrays."""
    nq = arr.ndim - 1
    zero, one = arr.copy(), arr
    zero[_index(nq, {q: 1})] = 0
    one[_index(nq, {q: 0})] = 0
    return zero, one


def _weight(arr: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(arr.reshape(-1, arr.shape[-1])) ** 2, axis=0)


def _run_dense(circuit: Circuit, arr: np.ndarray) -> list:
    """Depth-first branch enumeration over a batch; returns (outcomes, arr)."""
    done = []
    stack = [(0, {}, arr)]
    instrs = circuit.instructions
    nq = circuit.num_qubits
    while stack:
        pos, outcomes, cur = stack.pop()
        while pos < len(instrs):
            ins = instrs[pos]
            pos += 1
            if ins.kind is GateKind.MEASURE_H:
                _apply_dense(cur, Instruction(GateKind.H, ins.qubits))
                zero, one = _split(cur, ins.qubits[0])
                pending = []
                for bit, br in ((0, zero), (1, one)):
                    if _weight(br).max() >= PRUNE:
                        pending.append((pos, {**outcomes, ins.writes: bit}, br))
                if not pending:
                    cur = None
                    break
                stack += pending[1:][::-1]
                pos, outcomes, cur = pending[0]
            elif ins.kind is GateKind.RESET:
                zero, one = _split(cur, ins.qubits[0])
                s0, s1 = _index(nq, {ins.qubits[0]: 0}), _index(nq, {ins.qubits[0]: 1})
                one[s0], one[s1] = one[s1].copy(), 0
                if _weight(one).max() >= PRUNE:
                    stack.append((pos, dict(outcomes), one))
                cur = zero
            elif _condition_met(ins, outcomes):
                _apply_dense(cur, ins)
        if cur is not None and _weight(cur).max() >= PRUNE:
            done.append((outcomes, cur))
    return done


def _to_batch(states: np.ndarray, nq: int) -> np.ndarray:
    """(batch, 2**nq) flat states -> engine layout."""
    return np.ascontiguousarray(states.T).reshape((2,) * nq + (states.shape[0],))


def _from_batch(arr: np.ndarray) -> np.ndarray:
    return arr.reshape(-1, arr.shape[-1]).T


def _num_qubits_of(state: np.ndarray) -> int:
    nq = int(round(math.log2(len(state))))
    if 1 << nq != len(state):
        raise SimulationError("state length must be a power of two")
    return nq


def apply(state: np.ndarray, instr: Instruction, clbits: Optional[dict] = None) -> np.ndarray:
    """Apply one unitary instruction to a flat state; returns a new array."""
    if instr.kind in (GateKind.MEASURE_H, GateKind.RESET):
        raise SimulationError("use run_branches for measurement and reset")
    state = np.asarray(state, dtype=complex)
    nq = _num_qubits_of(state)
    if max(instr.qubits) >= nq:
        raise SimulationError("instruction qubit outside the state")
    if not _condition_met(instr, clbits or {}):
        return state.copy()
    arr = _to_batch(state[None, :].copy(), nq)
    _apply_dense(arr, instr)
    return _from_batch(arr)[0].copy()


def run_branches(circuit: Circuit, state: np.ndarray) -> list:
    state = np.asarray(state, dtype=complex)
    if len(state) != 1 << circuit.num_qubits:
        raise SimulationError(f"state has {len(state)} amplitudes, circuit needs "
                              f"{1 << circuit.num_qubits}")
    arr = _to_batch(state[None, :].copy(), circuit.num_qubits)
    out = []
    for outcomes, br in _run_dense(circuit, arr):
        vec = _from_batch(br)[0].copy()
        out.append(BranchResult(outcomes, vec, float(np.vdot(vec, vec).real)))
    return out


# -- sparse engine for basis inputs ------------------------------------------

def _apply_sparse(amps: dict, instr: Instruction) -> dict:
    kind, qs = instr.kind, instr.qubits
    if kind in _PHASE:
        m = 1 << qs[0]
        ph = _PHASE[kind]
        return {i: (a * ph if i & m else a) for i, a in amps.items()}
    if kind is GateKind.X:
        m = 1 << qs[0]
        return {i ^ m: a for i, a in amps.items()}
    if kind is GateKind.CX:
        mc, mt = 1 << qs[0], 1 << qs[1]
        return {(i ^ mt if i & mc else i): a for i, a in amps.items()}
    if kind is GateKind.CZ:
        m = (1 << qs[0]) | (1 << qs[1])
        return {i: (-a if i & m == m else a) for i, a in amps.items()}
    if kind is GateKind.H:
        m = 1 << qs[0]
        out = {}
        for i, a in amps.items():
            a = a * _R2
            lo = i & ~m
            out[lo] = out.get(lo, 0) + a
            out[lo | m] = out.get(lo | m, 0) + (-a if i & m else a)
        return {i: a for i, a in out.items() if abs(a) > 1e-15}
    raise SimulationError(f"{kind.value} is not a unitary gate")


def run_branches_sparse(circuit: Circuit, basis_index: int) -> list:
    """Branch enumeration from one basis state; states as {index: amp}."""
    done = []
    stack = [(0, {}, {basis_index: 1 + 0j})]
    instrs = circuit.instructions
    while stack:
        pos, outcomes, amps = stack.pop()
        while pos < len(instrs):
            ins = instrs[pos]
            pos += 1
            if ins.kind in (GateKind.MEASURE_H, GateKind.RESET):
                m = 1 << ins.qubits[0]
                if ins.kind is GateKind.MEASURE_H:
                    amps = _apply_sparse(amps, Instruction(GateKind.H, ins.qubits))
                zero = {i: a for i, a in amps.items() if not i & m}
                one = {i: a for i, a in amps.items() if i & m}
                if ins.kind is GateKind.RESET:
                    one = {i ^ m: a for i, a in one.items()}
                    if sum(abs(a) ** 2 for a in one.values()) >= PRUNE:
                        stack.append((pos, dict(outcomes), one))
                    amps = zero
                    continue
                alive = [(b, br) for b, br in ((0, zero), (1, one))
                         if sum(abs(a) ** 2 for a in br.values()) >= PRUNE]
                for b, br in alive[1:]:
                    stack.append((pos, {**outcomes, ins.writes: b}, br))
                if not alive:
                    amps = {}
                    break
                outcomes = {**outcomes, ins.writes: alive[0][0]}
                amps = alive[0][1]
            elif _condition_met(ins, outcomes):
                amps = _apply_sparse(amps, ins)
        if sum(abs(a) ** 2 for a in amps.values()) >= PRUNE:
            done.append((outcomes, amps))
    return done


# -- oracle and verifier ------------------------------------------------------

def cnx_oracle(n: int, basis_index: int) -> int:
    """Flip bit ``n`` (the target) iff bits ``0..n-1`` (controls) are all 1."""
    if not 0 <= basis_index < 1 << (n + 1):
        raise ValueError(f"basis index {basis_index} out of range for n={n}")
    mask = (1 << n) - 1
    if basis_index & mask == mask:
        return basis_index ^ (1 << n)
    return basis_index


def cnx_apply(n: int, state: np.ndarray) -> np.ndarray:
    """CⁿX on a state over controls+target (length 2**(n+1))."""
    out = np.asarray(state, dtype=complex).copy()
    mask = (1 << n) - 1
    lo, hi = mask, mask | (1 << n)
    out[lo], out[hi] = state[hi], state[lo]
    return out


@dataclass
class VerificationReport:
    n: int
    method: Optional[str]
    max_deviation: float
    per_branch_phase: dict
    passed: bool
    tolerance: float
    basis_inputs: int = 0
    random_states: int = 0
    problems: list = field(default_factory=list)

    def summary(self) -> str:
        phases = ", ".join(f"{k or '-'}: {complex(round(v.real, 12), round(v.imag, 12))}"
                           for k, v in sorted(self.per_branch_phase.items()))
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} n={self.n} method={self.method} "
                f"max_deviation={self.max_deviation:.3e} "
                f"basis_inputs={self.basis_inputs} random_states={self.random_states} "
                f"branch_phases[{phases}]")


class _Tracker:
    def __init__(self):
        self.max_dev = 0.0
        self.ref_phase = {}
        self.problems = []

    def note(self, dev: float, what: str, tol: float):
        if dev > self.max_dev:
            self.max_dev = dev
        if dev >= tol and len(self.problems) < 20:
            self.problems.append(f"{what}: deviation {dev:.3e}")

    def phase(self, key: str, amp: complex, what: str, tol: float):
        ph = amp / abs(amp)
        ref = self.ref_phase.setdefault(key, ph)
        self.note(abs(ph - ref), f"{what}: branch {key or '-'} phase", tol)


def _branch_key(outcomes: dict) -> str:
    return "".join(str(outcomes[k]) for k in sorted(outcomes))


def _check_basis_dense(circuit, n, inputs, tracker, tol):
    nq = circuit.num_qubits
    chunk = max(1, (1 << 21) >> nq)
    for start in range(0, len(inputs), chunk):
        batch = inputs[start:start + chunk]
        arr = np.zeros((1 << nq, len(batch)), dtype=complex)
        arr[batch, np.arange(len(batch))] = 1
        arr = arr.reshape((2,) * nq + (len(batch),))
        total = np.zeros(len(batch))
        for outcomes, br in _run_dense(circuit, arr):
            flat = br.reshape(-1, len(batch))
            w = _weight(br)
            total += w
            key = _branch_key(outcomes)
            for col, i in enumerate(batch):
                if w[col] < PRUNE:
                    continue
                j = cnx_oracle(n, i)
                amp = flat[j, col]
                resid = math.sqrt(max(w[col] - abs(amp) ** 2, 0.0))
                tracker.note(resid, f"basis {i}: branch {key or '-'} leaks", tol)
                if abs(amp) > tol:
                    tracker.phase(key, amp, f"basis {i}", tol)
        for col, i in enumerate(batch):
            tracker.note(abs(total[col] - 1), f"basis {i}: branch probabilities", tol)


def _check_basis_sparse(circuit, n, inputs, tracker, tol):
    for i in inputs:
        j = cnx_oracle(n, i)
        total = 0.0
        for outcomes, amps in run_branches_sparse(circuit, i):
            w = sum(abs(a) ** 2 for a in amps.values())
            total += w
            key = _branch_key(outcomes)
            amp = amps.get(j, 0j)
            resid = math.sqrt(max(w - abs(amp) ** 2, 0.0))
            tracker.note(resid, f"basis {i}: branch {key or '-'} leaks", tol)
            if abs(amp) > tol:
                tracker.phase(key, amp, f"basis {i}", tol)
        tracker.note(abs(total - 1), f"basis {i}: branch probabilities", tol)


def haar_states(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(count, dim)) + 1j * rng.normal(size=(count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _check_random_states(circuit, n, count, rng, tracker, tol):
    nq = circuit.num_qubits
    sub = 1 << (n + 1)
    psi = haar_states(sub, count, rng)
    full = np.zeros((count, 1 << nq), dtype=complex)
    full[:, :sub] = psi  # remaining qubits (ancilla) in |0>
    want = np.zeros_like(full)
    for k in range(count):
        want[k, :sub] = cnx_apply(n, psi[k])
    total = np.zeros(count)
    for outcomes, br in _run_dense(circuit, _to_batch(full, nq)):
        got = _from_batch(br)
        w = _weight(br)
        total += w
        key = _branch_key(outcomes)
        for k in range(count):
            if w[k] < PRUNE:
                continue
            unit = got[k] / math.sqrt(w[k])
            inner = np.vdot(want[k], unit)
            phase = inner / abs(inner) if abs(inner) > 0 else 1.0
            dev = float(np.linalg.norm(unit - phase * want[k]))
            tracker.note(dev, f"random state {k}: branch {key or '-'}", tol)
    for k in range(count):
        tracker.note(abs(total[k] - 1), f"random state {k}: branch probabilities", tol)


def verify_circuit(circuit: Circuit, n: int, tolerance: float = 1e-10, *,
                   method: Optional[str] = None, exhaustive_cap: int = EXHAUSTIVE_CAP,
                   basis_samples: int = 256, random_states: int = 20,
                   seed: int = 0) -> VerificationReport:
    """Check that every branch of ``circuit`` implements CⁿX with clean ancillas.

    Qubits ``0..n-1`` are controls, ``n`` is the target, any higher qubits
    must start and end in |0>.
    """
    problems = circuit.validate()
    if problems:
        return VerificationReport(n, method, float("inf"), {}, False, tolerance,
                                  problems=problems)
    if circuit.num_qubits < n + 1:
        raise ValueError("circuit too small for n controls and a target")
    rng = np.random.default_rng(seed)
    tracker = _Tracker()
    space = 1 << (n + 1)
    if n <= exhaustive_cap:
        inputs = list(range(space))
        _check_basis_dense(circuit, n, inputs, tracker, tolerance)
    else:
        inputs = sorted(rng.choice(space, size=min(basis_samples, space),
                                   replace=False).tolist())
        _check_basis_sparse(circuit, n, inputs, tracker, tolerance)
    _check_random_states(circuit, n, random_states, rng, tracker, tolerance)
    passed = tracker.max_dev < tolerance
    return VerificationReport(n, method, tracker.max_dev, dict(tracker.ref_phase),
                              passed, tolerance, len(inputs), random_states,
                              tracker.problems)


def verify_cnx(result, tolerance: float = 1e-10, **kwargs) -> VerificationReport:
    """Verify a SynthesisResult against the CⁿX oracle."""
    return verify_circuit(result.circuit, result.n, tolerance,
                          method=result.method.value, **kwargs)
