from collections import Counter

import pytest

from toffoli_forge.circuit_core import AccountingMode, GateKind
from toffoli_forge.primitives import MacroGate
from toffoli_forge.synthesis import (Correction, MacroStep, PrimitiveStep, SynthesisMethod,
                                     SynthesisRequest, mixed_depth_bound, predicted_cost,
                                     synthesize)

METHODS = list(SynthesisMethod)
STATIC, CCIX, MIXED = METHODS


def result(n, method):
    return synthesize(SynthesisRequest(n, method))


def static_macros(res):
    """Macro names outside the measurement-conditioned corrections."""
    return Counter(s.macro.name.replace("_dg", "") for s in res.macro_trace
                   if isinstance(s, MacroStep))


@pytest.mark.parametrize("method", METHODS)
def test_n2_is_bare_ccx(method):
    res = result(2, method)
    assert [m.name for m in res.macros()] == ["CCX"]
    kinds = Counter(i.kind for i in res.circuit)
    assert kinds[GateKind.CX] == 7
    assert kinds[GateKind.T] + kinds[GateKind.TDG] == 7


def test_rejects_n_below_two():
    with pytest.raises(ValueError):
        SynthesisRequest(1, STATIC)
    with pytest.raises(ValueError):
        synthesize(1)


@pytest.mark.parametrize("n", range(3, 17))
def test_static_macro_counts(n):
    assert static_macros(result(n, STATIC)) == Counter({"CCiX": 2 * n - 4, "CCX": 1})


@pytest.mark.parametrize("n", range(3, 17))
def test_dynamic_ccix_macro_counts(n):
    res = result(n, CCIX)
    assert static_macros(res) == Counter({"CCiX": 2 * n - 5, "CCX": 1})
    corrections = [s for s in res.macro_trace if isinstance(s, Correction)]
    assert [c.label for c in corrections] == ["CZ"]


def test_n4_dynamic_ccix_shape():
    res = result(4, CCIX)
    assert static_macros(res) == Counter({"CCiX": 3, "CCX": 1})
    kinds = [i.kind for i in res.circuit]
    assert kinds.count(GateKind.MEASURE_H) == 1
    anc = res.ancilla
    prims = [s.instruction for s in res.macro_trace if isinstance(s, PrimitiveStep)]
    assert any(i.kind is GateKind.SDG and i.qubits == (anc,) for i in prims)


def test_n15_dynamic_ccix_has_25_ccix():
    assert static_macros(result(15, CCIX)) == Counter({"CCiX": 25, "CCX": 1})


def test_n15_mixed_structure():
    assert static_macros(result(15, MIXED)) == Counter({"C3iX": 11, "CCiX": 2, "CCX": 1})


def test_n4_mixed_uses_one_c3ix():
    res = result(4, MIXED)
    assert static_macros(res) == Counter({"C3iX": 1, "CCX": 1})
    labels = [c.label for c in res.macro_trace if isinstance(c, Correction)]
    assert labels == ["CSdg", "CX.CCiZ"]


@pytest.mark.parametrize("n", range(4, 17))
def test_mixed_units(n):
    # C3(iX) counts as two CC(iX) units
    c = static_macros(result(n, MIXED))
    assert 2 * c["C3iX"] + c["CCiX"] == 2 * n - 6
    assert c["CCX"] == 1


@pytest.mark.parametrize("n", range(2, 17))
@pytest.mark.parametrize("method", METHODS)
def test_measurement_counts(n, method):
    measures = sum(i.kind is GateKind.MEASURE_H for i in result(n, method).circuit)
    expected = 0 if method is STATIC or n == 2 else 1
    assert measures == expected


@pytest.mark.parametrize("n", range(2, 17))
@pytest.mark.parametrize("method", METHODS)
def test_trace_expands_to_circuit(n, method):
    res = result(n, method)
    flat = [ins for item in res.macro_trace for ins in item.expand()]
    assert flat == res.circuit.instructions
    assert res.circuit.validate() == []


def _inverse_step(a, b):
    if isinstance(a, MacroStep) and isinstance(b, MacroStep):
        return a.macro.inverse() == b.macro
    if isinstance(a, PrimitiveStep) and isinstance(b, PrimitiveStep):
        return a.instruction.inverse() == b.instruction
    return False


@pytest.mark.parametrize("n", range(3, 17))
def test_static_trace_is_a_palindrome(n):
    trace = result(n, STATIC).macro_trace
    mid = len(trace) // 2
    assert isinstance(trace[mid], MacroStep) and trace[mid].macro.name == "CCX"
    assert len(trace) == 2 * mid + 1
    for a, b in zip(trace[:mid], reversed(trace[mid + 1:])):
        assert _inverse_step(a, b)


@pytest.mark.parametrize("n", range(3, 17))
@pytest.mark.parametrize("method", METHODS)
def test_compute_side_targets_consumed_controls(n, method):
    """Every compute gate after the first writes onto a control already used."""
    res = result(n, method)
    used = set()
    for step in res.macro_trace:
        if not isinstance(step, MacroStep) or step.macro.name == "CCX":
            if isinstance(step, MacroStep):
                break
            continue
        m = step.macro
        if used:
            assert m.target in used
        else:
            assert m.target == res.ancilla
        used |= set(m.controls)


def test_mixed_pairs_are_disjoint_and_adjacent():
    trace = [s for s in result(15, MIXED).macro_trace if isinstance(s, MacroStep)]
    c3 = [i for i, s in enumerate(trace) if s.macro.name == "C3iX"]
    pairs = [(i, j) for i, j in zip(c3, c3[1:]) if j == i + 1
             and not set(trace[i].macro.qubits) & set(trace[j].macro.qubits)]
    assert len(pairs) >= 2


@pytest.mark.parametrize("n, method, expected", [
    (4, STATIC, (19, 23, 19)),
    (16, CCIX, (89, 115, 111)),
    (10, MIXED, (53, 67, 47)),
])
def test_predicted_cost_examples(n, method, expected):
    assert predicted_cost(n, method, AccountingMode.WORST_CASE).as_tuple() == expected


@pytest.mark.parametrize("n", range(4, 17))
def test_predicted_cost_closed_forms(n):
    assert predicted_cost(n, STATIC).as_tuple() == (6 * n - 5, 8 * n - 9, 8 * n - 13)
    assert predicted_cost(n, CCIX).as_tuple()[:2] == (6 * n - 7, 8 * n - 13)
    assert predicted_cost(n, MIXED).as_tuple()[:2] == (6 * n - 7, 8 * n - 13)
    best = AccountingMode.BEST_CASE
    assert predicted_cost(n, CCIX, best).as_tuple()[:2] == (6 * n - 8, 8 * n - 13)
    assert predicted_cost(n, MIXED, best).as_tuple()[:2] == (6 * n - 9, 8 * n - 14)


def test_predicted_cost_needs_ladder_regime():
    with pytest.raises(ValueError):
        predicted_cost(3, STATIC)


def test_mixed_bound_values():
    # (2n-6)*4 + 7 - 16*floor((n-3)/6) - 8*[n mod 6 in {1,2}]
    assert [mixed_depth_bound(n) for n in range(4, 17)] == \
        [15, 23, 31, 31, 39, 39, 47, 55, 63, 63, 71, 71, 79]


def test_method_parse():
    assert SynthesisMethod.parse("Dynamic-Mixed") is MIXED
    assert SynthesisMethod.parse("static") is STATIC
    with pytest.raises(ValueError):
        SynthesisMethod.parse("quantum")


def test_int_request_defaults_to_mixed():
    assert synthesize(5).method is MIXED


def test_macros_include_corrections():
    names = [m.name for m in result(4, MIXED).macros()]
    assert names == ["C3iX", "CCX", "CSdg", "CCiZ_dg"]
    assert isinstance(result(4, MIXED).macros()[0], MacroGate)
