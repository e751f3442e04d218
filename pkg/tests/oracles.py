"""Independent dense references used by the tests.

Nothing here imports the library's conjugation, contraction or sampling
code: gates are built as explicit matrices and weights are averaged over
enumerated Clifford group elements.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
LETTER = {"I": I2, "X": X, "Y": Y, "Z": Z}

# time-ordered primitive words, then composed right-to-left
SINGLE = {
    "I": I2,
    "H": H,
    "S": S,
    "SDG": S.conj().T,
    "SX": H @ S @ H,
    "CXZY": S @ H,
    "CXYZ": H @ S,
}


def pauli_matrix(label: str) -> np.ndarray:
    """Site 0 is the leftmost tensor factor."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, LETTER[ch])
    return out


def embed_single(u: np.ndarray, q: int, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k in range(n):
        out = np.kron(out, u if k == q else I2)
    return out


def permutation_gate(n: int, fn) -> np.ndarray:
    """Unitary sending basis state with bit tuple ``b`` to ``fn(b)``."""
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        bits = [(idx >> (n - 1 - k)) & 1 for k in range(n)]
        new = fn(bits)
        j = sum(b << (n - 1 - k) for k, b in enumerate(new))
        out[j, idx] = 1
    return out


def cnot(c: int, t: int, n: int) -> np.ndarray:
    def fn(b):
        b = list(b)
        b[t] ^= b[c]
        return b

    return permutation_gate(n, fn)


def swap(a: int, b: int, n: int) -> np.ndarray:
    def fn(bits):
        bits = list(bits)
        bits[a], bits[b] = bits[b], bits[a]
        return bits

    return permutation_gate(n, fn)


def circuit_unitary(circuit) -> np.ndarray:
    n = circuit.n
    u = np.eye(2**n, dtype=complex)
    for g in circuit.gates:
        if g.name in ("I2",):
            continue
        if g.name == "CNOT":
            m = cnot(g.qubits[0], g.qubits[1], n)
        elif g.name == "SWAP":
            m = swap(g.qubits[0], g.qubits[1], n)
        else:
            m = embed_single(SINGLE[g.name], g.qubits[0], n)
        u = m @ u
    return u


def all_labels(n: int):
    return ["".join(t) for t in itertools.product("IXYZ", repeat=n)]


@lru_cache(maxsize=None)
def _pauli_stack(n: int):
    labels = all_labels(n)
    return labels, np.array([pauli_matrix(l) for l in labels])


def identify(m: np.ndarray, n: int):
    """Return ``(phase, label)`` with ``m == phase * P(label)``."""
    labels, stack = _pauli_stack(n)
    coeffs = np.einsum("kij,ji->k", stack, m) / 2**n
    k = int(np.argmax(np.abs(coeffs)))
    c = coeffs[k]
    if abs(abs(c) - 1) > 1e-9 or not np.allclose(m, c * stack[k]):
        raise AssertionError("not a Pauli")
    return complex(np.round(c.real, 9) + 1j * np.round(c.imag, 9)), labels[k]


def conjugate_dense(circuit, label: str):
    u = circuit_unitary(circuit)
    return identify(u @ pauli_matrix(label) @ u.conj().T, circuit.n)


def diag_weight(u: np.ndarray, p: np.ndarray) -> float:
    """(1/2^n) sum_b <b|U P U^dag|b>^2."""
    m = u @ p @ u.conj().T
    d = np.real(np.diag(m))
    return float(np.sum(d**2) / len(d))


@lru_cache(maxsize=None)
def single_cliffords() -> tuple:
    """The 6 single-qubit Cliffords modulo Paulis and phases, as unitaries."""
    reps = {}
    frontier = [I2]
    while frontier:
        nxt = []
        for u in frontier:
            for g in (H, S):
                v = g @ u
                key = tuple(identify(v @ P @ v.conj().T, 1)[1] for P in (X, Z))
                if key not in reps:
                    reps[key] = v
                    nxt.append(v)
        frontier = nxt
    assert len(reps) == 6
    return tuple(reps.values())


@lru_cache(maxsize=None)
def two_qubit_cliffords() -> tuple:
    """The 720 elements of Sp(4,2), as 4x4 unitary representatives."""
    gens = [np.kron(H, I2), np.kron(I2, H), np.kron(S, I2), np.kron(I2, S), cnot(0, 1, 2)]
    gen_p = [pauli_matrix(s) for s in ("XI", "IX", "ZI", "IZ")]
    reps = {}
    start = np.eye(4, dtype=complex)
    frontier = [start]
    reps[tuple(identify(P, 2)[1] for P in gen_p)] = start
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                v = g @ u
                key = tuple(identify(v @ P @ v.conj().T, 2)[1] for P in gen_p)
                if key not in reps:
                    reps[key] = v
                    nxt.append(v)
        frontier = nxt
    assert len(reps) == 720
    return tuple(reps.values())
