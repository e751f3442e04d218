"""Brickwork measurement ansatz, gate catalog and slot bookkeeping.

Layout (``n`` qubits, ``d`` two-qubit layers)::

    S_1  T_1  S_2  T_2  ...  T_d  S_{d+1}  measure

``S_l`` is a layer of single-qubit gates on every qubit and ``T_l`` a layer of
nearest-neighbour two-qubit gates.  ``T_d`` (next to the measurement) couples
(1,2), (3,4), ...; every layer further away is shifted by one site relative to
its successor, with the periodic pair (n,1) when ``n`` is even.

Internally layers and qubits are 0-based; :func:`coupling_map` and the circuit
JSON speak 1-based indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

from .errors import DomainError, ParseError, StateError

__all__ = [
    "Kind",
    "GateOption",
    "EnsembleSpec",
    "SlotRef",
    "Gate",
    "Circuit",
    "TWO_QUBIT_NAMES",
    "SINGLE_QUBIT_NAMES",
    "SINGLE_QUBIT_DECOMPOSITION",
    "init_ensemble",
    "coupling_map",
    "layer_pairs",
    "assign",
    "default_slot_order",
    "realize_fixed_circuit",
    "circuits_to_json",
    "circuits_from_json",
]


class Kind(str, Enum):
    TWO = "two_qubit"
    SINGLE = "single_qubit"


TWO_QUBIT_NAMES = {0: "CL4", 1: "I2", 2: "CNOT", 3: "SWAP"}
# Fixed representatives of each single-qubit Pauli permutation.
SINGLE_QUBIT_NAMES = {0: "CL2", 1: "I", 2: "H", 3: "S", 4: "SX", 5: "CXZY", 6: "CXYZ"}
# Time-ordered H/S decompositions of the named single-qubit gates.
SINGLE_QUBIT_DECOMPOSITION = {
    "I": (),
    "H": ("H",),
    "S": ("S",),
    "SX": ("H", "S", "H"),
    "CXZY": ("H", "S"),
    "CXYZ": ("S", "H"),
}
_CODE_RANGE = {Kind.TWO: range(0, 4), Kind.SINGLE: range(0, 7)}


@dataclass(frozen=True)
class GateOption:
    kind: Kind
    code: int

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.code not in _CODE_RANGE[self.kind]:
            raise DomainError(f"{self.kind.value} code {self.code} out of range")

    @property
    def name(self) -> str:
        table = TWO_QUBIT_NAMES if self.kind is Kind.TWO else SINGLE_QUBIT_NAMES
        return table[self.code]


class SlotRef(NamedTuple):
    """One assignable entry: ``layer`` and ``position`` are 0-based.

    Two-qubit slots: ``layer`` in ``[0, d)`` and ``position`` indexes the pair
    list of that layer.  Single-qubit slots: ``layer`` in ``[0, d]`` and
    ``position`` is the qubit.
    """

    kind: Kind
    layer: int
    position: int

    def label(self) -> str:
        tag = "T" if self.kind is Kind.TWO else "S"
        return f"{tag}{self.layer + 1}.{self.position + 1}"


@dataclass(frozen=True)
class EnsembleSpec:
    """Gate-code assignment of one measurement.  Code 0 means still random."""

    n: int
    d: int
    t: tuple
    s: tuple

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("qubit count must be at least 1")
        if self.d < 0:
            raise DomainError("depth must be non-negative")
        t, s = tuple(int(v) for v in self.t), tuple(int(v) for v in self.s)
        if len(t) != self.d * (self.n // 2):
            raise DomainError(f"t must have {self.d * (self.n // 2)} entries, got {len(t)}")
        if len(s) != (self.d + 1) * self.n:
            raise DomainError(f"s must have {(self.d + 1) * self.n} entries, got {len(s)}")
        if any(v not in _CODE_RANGE[Kind.TWO] for v in t):
            raise DomainError("two-qubit code out of range")
        if any(v not in _CODE_RANGE[Kind.SINGLE] for v in s):
            raise DomainError("single-qubit code out of range")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "s", s)

    @property
    def gates_per_layer(self) -> int:
        return self.n // 2

    @property
    def is_deterministic(self) -> bool:
        return 0 not in self.t and 0 not in self.s

    @property
    def singles_all_random(self) -> bool:
        return all(v == 0 for v in self.s)

    def two_code(self, layer: int, position: int) -> int:
        return self.t[layer * self.gates_per_layer + position]

    def single_code(self, layer: int, qubit: int) -> int:
        return self.s[layer * self.n + qubit]

    def get(self, slot: SlotRef) -> int:
        if slot.kind is Kind.TWO:
            return self.two_code(slot.layer, slot.position)
        return self.single_code(slot.layer, slot.position)

    def slots(self) -> list[SlotRef]:
        return default_slot_order(self.n, self.d)

    def to_dict(self) -> dict:
        out = {"n": self.n, "d": self.d, "t": list(self.t), "s": list(self.s)}
        if self.is_deterministic:
            out["gates"] = [g.to_dict() for g in realize_fixed_circuit(self).gates]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleSpec":
        try:
            return cls(int(data["n"]), int(data["d"]), tuple(data["t"]), tuple(data["s"]))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed circuit record: {exc}") from None


def init_ensemble(n: int, d: int) -> EnsembleSpec:
    """All-random spec of the given shape."""
    if n < 1:
        raise DomainError("qubit count must be at least 1")
    if d < 0:
        raise DomainError("depth must be non-negative")
    return EnsembleSpec(n, d, (0,) * (d * (n // 2)), (0,) * ((d + 1) * n))


def layer_pairs(n: int, d: int, layer: int) -> list[tuple[int, int]]:
    """0-based pair list of two-qubit layer ``layer`` (0 = farthest from measurement)."""
    if not 0 <= layer < d:
        raise DomainError(f"layer {layer + 1} outside 1..{d}")
    offset = (d - 1 - layer) % 2
    pairs = []
    for g in range(n // 2):
        a = offset + 2 * g
        b = a + 1
        if b == n:
            b = 0
        pairs.append((a, b))
    return pairs


def coupling_map(spec: EnsembleSpec, layer: int) -> list[tuple[int, int]]:
    """1-based qubit pairs of the 1-based two-qubit ``layer``."""
    return [(a + 1, b + 1) for a, b in layer_pairs(spec.n, spec.d, layer - 1)]


def assign(spec: EnsembleSpec, slot: SlotRef, option: GateOption | int) -> EnsembleSpec:
    """Return a copy of ``spec`` with one slot set to ``option``."""
    if not isinstance(option, GateOption):
        option = GateOption(slot.kind, int(option))
    if option.kind is not slot.kind:
        raise DomainError(f"{option.kind.value} option for a {slot.kind.value} slot")
    if slot.kind is Kind.TWO:
        if not (0 <= slot.layer < spec.d and 0 <= slot.position < spec.gates_per_layer):
            raise DomainError(f"no two-qubit slot {slot.label()}")
        t = list(spec.t)
        t[slot.layer * spec.gates_per_layer + slot.position] = option.code
        return EnsembleSpec(spec.n, spec.d, tuple(t), spec.s)
    if not (0 <= slot.layer <= spec.d and 0 <= slot.position < spec.n):
        raise DomainError(f"no single-qubit slot {slot.label()}")
    s = list(spec.s)
    s[slot.layer * spec.n + slot.position] = option.code
    return EnsembleSpec(spec.n, spec.d, spec.t, tuple(s))


def default_slot_order(n: int, d: int) -> list[SlotRef]:
    """Two-qubit slots from the measurement side inwards, then single-qubit
    slots from the state side outwards."""
    order = [
        SlotRef(Kind.TWO, layer, pos)
        for layer in range(d - 1, -1, -1)
        for pos in range(n // 2)
    ]
    order += [SlotRef(Kind.SINGLE, layer, q) for layer in range(d + 1) for q in range(n)]
    return order


def validate_slot_order(order: Sequence[SlotRef], n: int, d: int) -> list[SlotRef]:
    """Check that ``order`` is a permutation of all slots with two-qubit slots first."""
    order = [SlotRef(Kind(k), int(l), int(p)) for k, l, p in order]
    if sorted(order) != sorted(default_slot_order(n, d)):
        raise DomainError("slot order must list every slot exactly once")
    seen_single = False
    for slot in order:
        if slot.kind is Kind.SINGLE:
            seen_single = True
        elif seen_single:
            raise DomainError("two-qubit slots must precede single-qubit slots")
    return order


# ---------------------------------------------------------------- circuits


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple  # 0-based
    layer: int  # 0-based index of the S or T layer it belongs to

    def to_dict(self) -> dict:
        return {"layer": self.layer + 1, "qubits": [q + 1 for q in self.qubits], "name": self.name}

    @classmethod
    def from_dict(cls, data: dict) -> "Gate":
        return cls(str(data["name"]), tuple(int(q) - 1 for q in data["qubits"]), int(data["layer"]) - 1)


@dataclass(frozen=True)
class Circuit:
    """Explicit time-ordered Clifford gate list on ``n`` qubits."""

    n: int
    gates: tuple

    def inverse(self) -> "Circuit":
        inv = []
        for g in reversed(self.gates):
            if len(g.qubits) == 2:
                inv.append(g)
            else:
                for prim in reversed(SINGLE_QUBIT_DECOMPOSITION.get(g.name, (g.name,))):
                    inv.append(Gate({"S": "SDG", "SDG": "S"}.get(prim, prim), g.qubits, g.layer))
        return Circuit(self.n, tuple(inv))

    def key(self) -> tuple:
        return (self.n, tuple((g.name, g.qubits) for g in self.gates))


def realize_fixed_circuit(spec: EnsembleSpec) -> Circuit:
    """Concrete gate list of a deterministic spec, in time order."""
    if not spec.is_deterministic:
        raise StateError("spec still contains random (code 0) entries")
    gates = []
    for layer in range(spec.d + 1):
        for q in range(spec.n):
            gates.append(Gate(SINGLE_QUBIT_NAMES[spec.single_code(layer, q)], (q,), layer))
        if layer == spec.d:
            break
        for pos, (a, b) in enumerate(layer_pairs(spec.n, spec.d, layer)):
            code = spec.two_code(layer, pos)
            name = TWO_QUBIT_NAMES[code]
            if name == "CNOT":
                pair = (min(a, b), max(a, b))  # control on the lower index
            else:
                pair = (a, b)
            gates.append(Gate(name, pair, layer))
    return Circuit(spec.n, tuple(gates))


def circuits_to_json(specs: Iterable[EnsembleSpec], manifest: dict | None = None, **extra) -> str:
    payload = {}
    if manifest is not None:
        payload["manifest"] = manifest
    payload.update(extra)
    payload["circuits"] = [s.to_dict() for s in specs]
    return json.dumps(payload, indent=1)


def circuits_from_json(text: str) -> list[EnsembleSpec]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"circuit file is not valid JSON: {exc}") from None
    records = data["circuits"] if isinstance(data, dict) else data
    return [EnsembleSpec.from_dict(r) for r in records]
