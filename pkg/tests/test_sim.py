import cmath
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toffoli_forge.circuit_core import (Circuit, Condition, GateKind, Instruction, gate,
                                        measure_h)
from toffoli_forge.sim import (SimulationError, apply, cnx_apply, cnx_oracle, haar_states,
                               run_branches, run_branches_sparse, verify_circuit, verify_cnx)
from toffoli_forge.synthesis import SynthesisMethod, SynthesisRequest, synthesize

from mutations import mutate
from strategies import circuits

STATIC, CCIX, MIXED = SynthesisMethod


def ket(nq, idx):
    v = np.zeros(1 << nq, dtype=complex)
    v[idx] = 1
    return v


def test_t_on_zero_and_one():
    assert np.allclose(apply(ket(1, 0), gate("T", 0)), ket(1, 0))
    assert np.allclose(apply(ket(1, 1), gate("T", 0)), cmath.exp(1j * math.pi / 4) * ket(1, 1))


def test_gate_matrices():
    h = apply(ket(1, 1), gate("H", 0))
    assert np.allclose(h, [1 / math.sqrt(2), -1 / math.sqrt(2)])
    assert np.allclose(apply(ket(1, 1), gate("S", 0)), 1j * ket(1, 1))
    assert np.allclose(apply(ket(1, 1), gate("Sdg", 0)), -1j * ket(1, 1))
    # qubit 0 is the least significant bit
    assert np.allclose(apply(ket(2, 0b01), gate("CX", 0, 1)), ket(2, 0b11))
    assert np.allclose(apply(ket(2, 0b10), gate("CX", 0, 1)), ket(2, 0b10))
    assert np.allclose(apply(ket(2, 0b11), gate("CZ", 0, 1)), -ket(2, 0b11))


def test_conditioned_gate_respects_clbit():
    psi = ket(2, 0b11)
    cz = gate("CZ", 0, 1, condition=Condition(0, 1))
    assert np.allclose(apply(psi, cz, {0: 0}), psi)
    assert np.allclose(apply(psi, cz, {0: 1}), -psi)
    with pytest.raises(SimulationError):
        apply(psi, cz, {})


def test_apply_rejects_measurement():
    with pytest.raises(SimulationError):
        apply(ket(1, 0), measure_h(0, 0))


def test_measure_zero_state_gives_two_branches():
    c = Circuit(1, 1)
    c.append(measure_h(0, 0))
    branches = run_branches(c, ket(1, 0))
    assert sorted(b.outcomes[0] for b in branches) == [0, 1]
    assert all(abs(b.probability - 0.5) < 1e-12 for b in branches)


def test_measure_plus_state_gives_one_branch():
    c = Circuit(1, 1)
    c.append(measure_h(0, 0))
    plus = np.array([1, 1]) / math.sqrt(2)
    (b,) = run_branches(c, plus)
    assert b.outcomes == {0: 0} and abs(b.probability - 1) < 1e-12


def test_reset_returns_qubit_to_zero():
    c = Circuit(2, 0)
    c.extend([gate("H", 0), gate("CX", 0, 1), Instruction(GateKind.RESET, [0])])
    branches = run_branches(c, ket(2, 0))
    assert abs(sum(b.probability for b in branches) - 1) < 1e-12
    for b in branches:
        assert all(abs(a) < 1e-12 for i, a in enumerate(b.state) if i & 1)


def test_run_branches_dimension_check():
    with pytest.raises(SimulationError):
        run_branches(Circuit(2), ket(1, 0))


def test_dynamic_ccix_on_all_ones():
    res = synthesize(SynthesisRequest(4, CCIX))
    nq = res.circuit.num_qubits
    start = 0b01111
    branches = run_branches(res.circuit, ket(nq, start))
    assert len(branches) == 2
    for b in branches:
        amp = b.state[0b11111]
        assert abs(abs(amp) ** 2 - b.probability) < 1e-12


def test_static_has_single_branch():
    res = synthesize(SynthesisRequest(5, STATIC))
    psi = haar_states(1 << res.circuit.num_qubits, 1, np.random.default_rng(1))[0]
    (b,) = run_branches(res.circuit, psi)
    assert abs(b.probability - 1) < 1e-12


@settings(max_examples=100, deadline=None)
@given(circuits(dynamic=False, max_qubits=5), st.integers(0, 2 ** 31))
def test_unitary_circuits_preserve_norm(circ, seed):
    psi = haar_states(1 << circ.num_qubits, 1, np.random.default_rng(seed))[0]
    (b,) = run_branches(circ, psi)
    assert abs(np.linalg.norm(b.state) - 1) < 1e-12


@settings(max_examples=150, deadline=None)
@given(circuits(max_qubits=5), st.integers(0, 2 ** 31))
def test_branch_probabilities_sum_to_one(circ, seed):
    psi = haar_states(1 << circ.num_qubits, 1, np.random.default_rng(seed))[0]
    total = sum(b.probability for b in run_branches(circ, psi))
    assert abs(total - 1) < 1e-10


@settings(max_examples=150, deadline=None)
@given(circuits(max_qubits=5), st.data())
def test_sparse_and_dense_engines_agree(circ, data):
    idx = data.draw(st.integers(0, (1 << circ.num_qubits) - 1))
    dense = {tuple(sorted(b.outcomes.items())): b.state
             for b in run_branches(circ, ket(circ.num_qubits, idx))}
    sparse = {}
    for outcomes, amps in run_branches_sparse(circ, idx):
        vec = np.zeros(1 << circ.num_qubits, dtype=complex)
        for i, a in amps.items():
            vec[i] = a
        sparse[tuple(sorted(outcomes.items()))] = vec
    assert dense.keys() == sparse.keys()
    for k in dense:
        assert np.allclose(dense[k], sparse[k], atol=1e-12)


def test_oracle_examples():
    assert cnx_oracle(2, 0b011) == 0b111   # c=11, t=0 -> t=1
    assert cnx_oracle(2, 0b010) == 0b010
    assert cnx_oracle(4, 0b11111) == 0b01111
    with pytest.raises(ValueError):
        cnx_oracle(2, 8)


@given(st.integers(1, 12), st.data())
def test_oracle_is_an_involution(n, data):
    i = data.draw(st.integers(0, (1 << (n + 1)) - 1))
    assert cnx_oracle(n, cnx_oracle(n, i)) == i


@given(st.integers(1, 8), st.data())
def test_oracle_flips_only_on_all_ones(n, data):
    i = data.draw(st.integers(0, (1 << (n + 1)) - 1))
    controls = [(i >> k) & 1 for k in range(n)]
    flipped = cnx_oracle(n, i) != i
    assert flipped == all(controls)


def test_cnx_apply_matches_oracle():
    n = 3
    psi = haar_states(1 << (n + 1), 1, np.random.default_rng(3))[0]
    out = cnx_apply(n, psi)
    for i in range(1 << (n + 1)):
        assert out[cnx_oracle(n, i)] == psi[i]


def test_verify_n2_single_branch_phase_one():
    rep = verify_cnx(synthesize(SynthesisRequest(2, STATIC)))
    assert rep.passed
    assert list(rep.per_branch_phase) == [""]
    assert abs(rep.per_branch_phase[""] - 1) < 1e-10


def test_verify_n5_mixed_exhaustive():
    rep = verify_cnx(synthesize(SynthesisRequest(5, MIXED)), 1e-10)
    assert rep.passed and rep.basis_inputs == 64
    assert sorted(rep.per_branch_phase) == ["0", "1"]


@pytest.mark.parametrize("n", range(2, 8))
@pytest.mark.parametrize("method", list(SynthesisMethod))
def test_verify_small(n, method):
    rep = verify_cnx(synthesize(SynthesisRequest(n, method)))
    assert rep.passed, rep.problems


def test_verify_sampled_path():
    rep = verify_cnx(synthesize(SynthesisRequest(7, MIXED)), exhaustive_cap=5,
                     basis_samples=64, random_states=5)
    assert rep.passed and rep.basis_inputs == 64


@pytest.mark.parametrize("method", list(SynthesisMethod))
def test_every_branch_gives_the_same_logical_state(method):
    res = synthesize(SynthesisRequest(5, method))
    nq = res.circuit.num_qubits
    for idx in range(1 << 6):
        states = [b.state / math.sqrt(b.probability) for b in run_branches(res.circuit, ket(nq, idx))]
        for s in states[1:]:
            assert abs(abs(np.vdot(states[0], s)) - 1) < 1e-10


def test_t_flip_mutation_fails_phase_check():
    res = synthesize(SynthesisRequest(4, CCIX))
    instrs = list(res.circuit.instructions)
    pos = next(i for i, ins in enumerate(instrs) if ins.kind is GateKind.T)
    instrs[pos] = instrs[pos].inverse()
    bad = Circuit(res.circuit.num_qubits, res.circuit.num_clbits, instrs, res.circuit.roles)
    rep = verify_circuit(bad, 4)
    assert not rep.passed and rep.max_deviation > 0.1


def test_random_mutations_detected():
    rng = random.Random(7)
    caught = 0
    for _ in range(10):
        res = synthesize(SynthesisRequest(rng.randint(3, 5), rng.choice(list(SynthesisMethod))))
        bad, _ = mutate(res.circuit, rng)
        caught += not verify_circuit(bad, res.n).passed
    assert caught >= 9


def test_verify_reports_invalid_circuit():
    c = Circuit(3)
    c.instructions.append(gate("CX", 0, 0))
    rep = verify_circuit(c, 2)
    assert not rep.passed and rep.problems


def test_inputs_are_not_modified():
    psi = ket(2, 0b11)
    apply(psi, gate("CZ", 0, 1))
    c = Circuit(2)
    c.append(gate("X", 0))
    run_branches(c, psi)
    assert np.array_equal(psi, ket(2, 0b11))
