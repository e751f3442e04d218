"""Exact Clifford conjugation and a small dense statevector backend."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .ansatz import SINGLE_QUBIT_DECOMPOSITION, Circuit, Gate
from .errors import DimensionError, DomainError, ParseError, ResourceError, UnsupportedError
from .pauli import PauliString, WeightedPauliSet

__all__ = [
    "CliffordTableau",
    "StateVector",
    "MeasurementRecord",
    "conjugate",
    "conjugate_batch",
    "diagonalizes",
    "apply_circuit",
    "sample_measurement",
    "sample_records",
    "sample_indices",
    "outcome_distributions",
    "make_rng",
    "GroundState",
    "gate_unitary",
    "ground_state",
    "hamiltonian_matrix",
    "expectation",
    "read_outcomes",
    "write_outcomes",
    "MAX_STATEVECTOR_QUBITS",
]

MAX_STATEVECTOR_QUBITS = 14
_PRIMITIVES = {"H", "S", "SDG", "CNOT", "SWAP", "I", "I2"}


def _primitive_sequence(gate: Gate):
    if gate.name in SINGLE_QUBIT_DECOMPOSITION:
        return [(p, gate.qubits) for p in SINGLE_QUBIT_DECOMPOSITION[gate.name]]
    if gate.name not in _PRIMITIVES:
        raise UnsupportedError(f"gate {gate.name!r} is not a fixed Clifford")
    return [(gate.name, gate.qubits)]


# ------------------------------------------------------------ conjugation


def _conj_bits(name: str, qubits, x: int, z: int, flip: int):
    """Apply one primitive to integer masks; ``flip`` counts sign flips mod 2."""
    if name in ("I", "I2"):
        return x, z, flip
    if name == "H":
        (q,) = qubits
        xb, zb = (x >> q) & 1, (z >> q) & 1
        flip ^= xb & zb
        if xb != zb:
            x ^= 1 << q
            z ^= 1 << q
        return x, z, flip
    if name == "S":
        (q,) = qubits
        xb, zb = (x >> q) & 1, (z >> q) & 1
        flip ^= xb & zb
        z ^= xb << q
        return x, z, flip
    if name == "SDG":
        (q,) = qubits
        xb, zb = (x >> q) & 1, (z >> q) & 1
        flip ^= xb & (zb ^ 1)
        z ^= xb << q
        return x, z, flip
    if name == "CNOT":
        c, t = qubits
        xc, zc, xt, zt = (x >> c) & 1, (z >> c) & 1, (x >> t) & 1, (z >> t) & 1
        flip ^= xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        z ^= zt << c
        return x, z, flip
    if name == "SWAP":
        a, b = qubits
        for m in (0, 1):
            v = x if m == 0 else z
            ba, bb = (v >> a) & 1, (v >> b) & 1
            if ba != bb:
                v ^= (1 << a) | (1 << b)
            if m == 0:
                x = v
            else:
                z = v
        return x, z, flip
    raise UnsupportedError(f"gate {name!r} is not a fixed Clifford")


def conjugate(circuit: Circuit, p: PauliString) -> PauliString:
    """Return ``U p U^dagger`` for the circuit unitary ``U``."""
    if circuit.n != p.n:
        raise DimensionError(f"circuit has {circuit.n} qubits, Pauli has {p.n}")
    x, z, flip = p.x_mask, p.z_mask, 0
    for gate in circuit.gates:
        for name, qubits in _primitive_sequence(gate):
            x, z, flip = _conj_bits(name, qubits, x, z, flip)
    return PauliString(p.n, x, z, p.phase + 2 * flip)


def diagonalizes(circuit: Circuit, p: PauliString) -> bool:
    return conjugate(circuit, p).x_mask == 0


def conjugate_batch(circuit: Circuit, x: np.ndarray, z: np.ndarray):
    """Vectorised conjugation of many Hermitian Paulis.

    ``x`` and ``z`` are ``(m, n)`` 0/1 arrays.  Returns new ``(x, z)`` arrays
    and a length-``m`` array of signs (+1/-1).
    """
    x = np.array(x, dtype=np.uint8, copy=True)
    z = np.array(z, dtype=np.uint8, copy=True)
    flip = np.zeros(x.shape[0], dtype=np.uint8)
    for gate in circuit.gates:
        for name, qs in _primitive_sequence(gate):
            if name in ("I", "I2"):
                continue
            if name == "H":
                q = qs[0]
                flip ^= x[:, q] & z[:, q]
                x[:, q], z[:, q] = z[:, q].copy(), x[:, q].copy()
            elif name == "S":
                q = qs[0]
                flip ^= x[:, q] & z[:, q]
                z[:, q] ^= x[:, q]
            elif name == "SDG":
                q = qs[0]
                flip ^= x[:, q] & (z[:, q] ^ 1)
                z[:, q] ^= x[:, q]
            elif name == "CNOT":
                c, t = qs
                flip ^= x[:, c] & z[:, t] & (x[:, t] ^ z[:, c] ^ 1)
                x[:, t] ^= x[:, c]
                z[:, c] ^= z[:, t]
            elif name == "SWAP":
                a, b = qs
                x[:, [a, b]] = x[:, [b, a]]
                z[:, [a, b]] = z[:, [b, a]]
    return x, z, 1 - 2 * flip.astype(np.int8)


@dataclass(frozen=True)
class CliffordTableau:
    """Images of the generators ``X_k`` and ``Z_k`` under conjugation."""

    n: int
    x_images: tuple
    z_images: tuple

    @classmethod
    def from_circuit(cls, circuit: Circuit) -> "CliffordTableau":
        n = circuit.n
        xs = tuple(conjugate(circuit, PauliString(n, 1 << k, 0)) for k in range(n))
        zs = tuple(conjugate(circuit, PauliString(n, 0, 1 << k)) for k in range(n))
        return cls(n, xs, zs)

    def apply(self, p: PauliString) -> PauliString:
        """Conjugate by multiplying generator images (a route independent of gate rules)."""
        from .pauli import multiply

        out = PauliString(self.n, 0, 0, p.phase)
        for k in range(self.n):
            xb, zb = (p.x_mask >> k) & 1, (p.z_mask >> k) & 1
            if xb and zb:
                # Y = i X Z
                out = multiply(out, PauliString(self.n, 0, 0, 1))
            if xb:
                out = multiply(out, self.x_images[k])
            if zb:
                out = multiply(out, self.z_images[k])
        return out


# ------------------------------------------------------------ statevector

_SQ2 = 1 / np.sqrt(2)
_MATS = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
}
for _name, _seq in SINGLE_QUBIT_DECOMPOSITION.items():
    _m = np.eye(2, dtype=complex)
    for _p in _seq:
        _m = _MATS[_p] @ _m
    _MATS.setdefault(_name, _m)
_CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
_SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


def gate_unitary(name: str) -> np.ndarray:
    """Dense matrix of a named gate (first listed qubit is the leftmost factor)."""
    if name in _MATS:
        return _MATS[name]
    if name == "CNOT":
        return _CNOT
    if name == "SWAP":
        return _SWAP
    if name == "I2":
        return np.eye(4, dtype=complex)
    raise UnsupportedError(f"gate {name!r} has no fixed unitary")


@dataclass
class StateVector:
    """Dense pure state; qubit 0 is the most significant bit of the index."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n > MAX_STATEVECTOR_QUBITS:
            raise ResourceError(f"statevector limited to {MAX_STATEVECTOR_QUBITS} qubits")
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if a.size != 2**self.n:
            raise DimensionError(f"expected {2**self.n} amplitudes, got {a.size}")
        norm = np.linalg.norm(a)
        if abs(norm - 1) > 1e-10:
            raise DomainError(f"state norm {norm} differs from 1")
        self.amplitudes = a

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        a = np.zeros(2**n, dtype=complex)
        a[0] = 1
        return cls(n, a)

    @classmethod
    def random(cls, n: int, rng) -> "StateVector":
        rng = np.random.default_rng(rng)
        a = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        return cls(n, a / np.linalg.norm(a))

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()


def apply_circuit(circuit: Circuit, state: StateVector) -> StateVector:
    if circuit.n != state.n:
        raise DimensionError(f"circuit has {circuit.n} qubits, state has {state.n}")
    n = state.n
    psi = state.amplitudes.reshape((2,) * n)
    for gate in circuit.gates:
        if gate.name in ("I", "I2"):
            continue
        u = gate_unitary(gate.name)
        qs = list(gate.qubits)
        k = len(qs)
        u = u.reshape((2,) * (2 * k))
        psi = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), qs))
        psi = np.moveaxis(psi, list(range(k)), qs)
    return StateVector(n, psi.reshape(-1))


class MeasurementRecord(NamedTuple):
    index: int  # circuit index
    bits: str

    def validate(self, n: int) -> None:
        if len(self.bits) != n or set(self.bits) - {"0", "1"}:
            raise DimensionError(f"bitstring {self.bits!r} is not {n} bits")


def _bitstrings(indices: np.ndarray, n: int) -> list[str]:
    return [format(int(i), f"0{n}b") for i in indices]


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator used for every sampling stream."""
    return np.random.Generator(np.random.Philox(seed))


def sample_measurement(circuit: Circuit, state: StateVector, seed) -> MeasurementRecord:
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    probs = apply_circuit(circuit, state).probabilities()
    idx = int(np.searchsorted(np.cumsum(probs), rng.random() * probs.sum(), side="right"))
    idx = min(idx, probs.size - 1)
    return MeasurementRecord(0, format(idx, f"0{state.n}b"))


def outcome_distributions(circuits: Sequence[Circuit], state: StateVector):
    """Born distribution per distinct circuit; returns (cdfs, circuit -> row)."""
    keys = {}
    rows = []
    cdfs = []
    for c in circuits:
        k = c.key()
        if k not in keys:
            keys[k] = len(cdfs)
            cdf = np.cumsum(apply_circuit(c, state).probabilities())
            cdfs.append(cdf / cdf[-1])
        rows.append(keys[k])
    return np.array(cdfs), np.array(rows, dtype=np.intp)


def sample_indices(cdfs: np.ndarray, rows: np.ndarray, rng) -> np.ndarray:
    """One outcome index per shot.  Shot ``i`` always consumes the ``i``-th
    uniform draw, so the result does not depend on how shots are grouped."""
    u = rng.random(rows.size)
    out = np.empty(rows.size, dtype=np.int64)
    for r in np.unique(rows):
        sel = rows == r
        out[sel] = np.searchsorted(cdfs[r], u[sel], side="right")
    return np.minimum(out, cdfs.shape[1] - 1)


def sample_records(circuits: Sequence[Circuit], state: StateVector, seed) -> list[MeasurementRecord]:
    """One shot per circuit, in circuit order."""
    for c in circuits:
        if c.n != state.n:
            raise DimensionError(f"circuit has {c.n} qubits, state has {state.n}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    cdfs, rows = outcome_distributions(circuits, state)
    idx = sample_indices(cdfs, rows, rng)
    return [MeasurementRecord(i, b) for i, b in enumerate(_bitstrings(idx, state.n))]


# ------------------------------------------------------------ Hamiltonians


def _big_endian_mask(mask: int, n: int) -> int:
    out = 0
    for k in range(n):
        if (mask >> k) & 1:
            out |= 1 << (n - 1 - k)
    return out


def _pauli_action(p: PauliString):
    """(target index array, coefficient array) with ``P|b> = coef[b] |target[b]>``."""
    n = p.n
    b = np.arange(2**n, dtype=np.int64)
    xm = _big_endian_mask(p.x_mask, n)
    zm = _big_endian_mask(p.z_mask, n)
    parity = np.zeros(b.size, dtype=np.int64)
    v = b & zm
    while np.any(v):
        parity ^= v & 1
        v >>= 1
    ny = (p.x_mask & p.z_mask).bit_count()
    coef = (1j ** ((p.phase + ny) % 4)) * (1 - 2 * parity)
    return b ^ xm, coef


def expectation(p: PauliString, state: StateVector) -> float:
    """Exact ``<psi|P|psi>`` (real part)."""
    if p.n != state.n:
        raise DimensionError("Pauli and state sizes differ")
    target, coef = _pauli_action(p)
    psi = state.amplitudes
    return float(np.real(np.vdot(psi[target], coef * psi)))


def hamiltonian_matrix(h: WeightedPauliSet, sparse: bool = False):
    n = h.n
    if n > MAX_STATEVECTOR_QUBITS:
        raise ResourceError(f"dense Hamiltonians limited to {MAX_STATEVECTOR_QUBITS} qubits")
    dim = 2**n
    rows, cols, vals = [], [], []
    for term in h:
        target, coef = _pauli_action(term.pauli)
        rows.append(target)
        cols.append(np.arange(dim))
        vals.append(term.coefficient * coef)
    if not rows:
        rows, cols, vals = [np.zeros(0, int)], [np.zeros(0, int)], [np.zeros(0)]
    from scipy import sparse as sp

    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()
    return m if sparse else m.toarray()


@dataclass
class GroundState:
    state: StateVector
    energy: float
    degenerate: bool
    gap: float


def ground_state(h: WeightedPauliSet, degeneracy_tol: float = 1e-8) -> GroundState:
    """Lowest eigenpair of ``sum c_P P``; flags a degenerate ground space."""
    n = h.n
    if n > MAX_STATEVECTOR_QUBITS:
        raise ResourceError(f"ground states limited to {MAX_STATEVECTOR_QUBITS} qubits")
    if n <= 10:
        evals, evecs = np.linalg.eigh(hamiltonian_matrix(h))
        vals, vec = evals[:2], evecs[:, 0]
    else:
        from scipy.sparse.linalg import eigsh

        evals, evecs = eigsh(hamiltonian_matrix(h, sparse=True), k=2, which="SA")
        order = np.argsort(evals)
        vals, vec = evals[order], evecs[:, order[0]]
    # fix global phase for reproducibility
    j = int(np.argmax(np.abs(vec)))
    vec = vec * np.exp(-1j * np.angle(vec[j]))
    vec = vec / np.linalg.norm(vec)
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else float("inf")
    return GroundState(StateVector(n, vec), float(vals[0]), gap < degeneracy_tol, gap)


# ------------------------------------------------------------ outcome files


def write_outcomes(records: Sequence[MeasurementRecord], path=None, header: str | None = None) -> str:
    lines = []
    if header:
        lines += ["# " + line for line in header.splitlines()]
    lines += [f"{r.index}\t{r.bits}" for r in records]
    text = "\n".join(lines) + "\n"
    if path is not None:
        from pathlib import Path

        Path(path).write_text(text)
    return text


def read_outcomes(text: str, source: str = "<string>") -> list[MeasurementRecord]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 2 or not parts[0].isdigit() or set(parts[1]) - {"0", "1"}:
            raise ParseError(f"{source}:{lineno}: expected '<circuit_index>\\t<bitstring>'")
        out.append(MeasurementRecord(int(parts[0]), parts[1]))
    return out
