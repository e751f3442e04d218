import json

import pytest

from derandshadows.ansatz import (
    Circuit,
    EnsembleSpec,
    GateOption,
    Kind,
    SlotRef,
    assign,
    circuits_from_json,
    circuits_to_json,
    coupling_map,
    default_slot_order,
    init_ensemble,
    layer_pairs,
    realize_fixed_circuit,
    validate_slot_order,
)
from derandshadows.clifford import conjugate
from derandshadows.errors import DomainError, ParseError, StateError
from derandshadows.pauli import parse_pauli


def test_init_slot_counts():
    s = init_ensemble(8, 3)
    assert len(s.t) == 12 and len(s.s) == 32
    s = init_ensemble(2, 0)
    assert len(s.t) == 0 and len(s.s) == 2
    s = init_ensemble(5, 1)
    assert len(s.t) == 2
    assert coupling_map(s, 1) == [(1, 2), (3, 4)]
    with pytest.raises(DomainError):
        init_ensemble(0, 1)


def test_coupling_maps():
    s = init_ensemble(4, 2)
    assert coupling_map(s, 2) == [(1, 2), (3, 4)]
    assert coupling_map(s, 1) == [(2, 3), (4, 1)]
    assert coupling_map(init_ensemble(3, 1), 1) == [(1, 2)]
    with pytest.raises(DomainError):
        coupling_map(s, 3)


@pytest.mark.parametrize("n", range(2, 17))
@pytest.mark.parametrize("d", range(0, 5))
def test_slot_counts_and_disjoint_pairs(n, d):
    s = init_ensemble(n, d)
    assert len(s.t) == d * (n // 2) and len(s.s) == (d + 1) * n
    for layer in range(d):
        pairs = layer_pairs(n, d, layer)
        flat = [q for p in pairs for q in p]
        assert len(flat) == len(set(flat))
        if layer + 1 < d:
            nxt = layer_pairs(n, d, layer + 1)
            assert pairs[0][0] != nxt[0][0]  # one-site offset between neighbours


def test_assign_is_pure_and_checked():
    s = init_ensemble(4, 1)
    slot = SlotRef(Kind.TWO, 0, 1)
    s2 = assign(s, slot, 2)
    assert s2.get(slot) == 2 and s.get(slot) == 0
    s3 = assign(s2, SlotRef(Kind.SINGLE, 1, 3), GateOption(Kind.SINGLE, 6))
    assert s3.single_code(1, 3) == 6
    assert assign(s3, slot, 0).get(slot) == 0
    with pytest.raises(DomainError):
        assign(s, slot, GateOption(Kind.SINGLE, 2))
    with pytest.raises(DomainError):
        assign(s, slot, 4)
    with pytest.raises(DomainError):
        assign(s, SlotRef(Kind.SINGLE, 0, 7), 1)


def test_default_and_custom_order():
    order = default_slot_order(4, 2)
    assert [o.label() for o in order[:4]] == ["T2.1", "T2.2", "T1.1", "T1.2"]
    assert order[4].label() == "S1.1" and order[-1].label() == "S3.4"
    with pytest.raises(DomainError):
        validate_slot_order(order[::-1], 4, 2)
    with pytest.raises(DomainError):
        validate_slot_order(order[:-1], 4, 2)


def test_realize_single_permutations():
    expect = {1: ("X", "Y", "Z"), 2: ("Z", "Y", "X"), 3: ("Y", "X", "Z"), 4: ("X", "Z", "Y"), 5: ("Z", "X", "Y"), 6: ("Y", "Z", "X")}
    for code, images in expect.items():
        spec = EnsembleSpec(1, 0, (), (code,))
        circ = realize_fixed_circuit(spec)
        got = tuple(str(conjugate(circ, parse_pauli(a))) for a in "XYZ")
        assert got == images


def test_realize_identity_and_errors():
    spec = EnsembleSpec(3, 1, (1,), (1,) * 6)
    circ = realize_fixed_circuit(spec)
    assert all(g.name in ("I", "I2") for g in circ.gates)
    with pytest.raises(StateError):
        realize_fixed_circuit(init_ensemble(3, 1))


def test_cnot_control_is_lower_index():
    spec = EnsembleSpec(4, 2, (2, 2, 1, 1), (1,) * 12)
    gates = [g for g in realize_fixed_circuit(spec).gates if g.name == "CNOT"]
    assert sorted(g.qubits for g in gates) == [(0, 3), (1, 2)]


def test_json_roundtrip():
    specs = [EnsembleSpec(2, 1, (2,), (1, 1, 2, 4)), init_ensemble(2, 1)]
    text = circuits_to_json(specs, {"seed": 1}, cost=0.5)
    data = json.loads(text)
    assert "gates" in data["circuits"][0] and "gates" not in data["circuits"][1]
    assert data["circuits"][0]["gates"][0]["qubits"] == [1]
    assert circuits_from_json(text) == specs
    with pytest.raises(ParseError):
        circuits_from_json("{nope")
    with pytest.raises(ParseError):
        circuits_from_json('{"circuits": [{"n": 2}]}')


def test_circuit_inverse():
    spec = EnsembleSpec(2, 1, (2,), (5, 6, 3, 4))
    circ = realize_fixed_circuit(spec)
    inv = circ.inverse()
    assert isinstance(inv, Circuit)
    for label in ("XI", "YZ", "ZX"):
        p = parse_pauli(label)
        assert conjugate(inv, conjugate(circ, p)) == p
