"""Pauli weights of (partially random) brickwork ensembles.

The weight ``p(P)`` is the probability that a circuit drawn from the ensemble
rotates ``P`` into an I/Z string.  It is obtained by pushing the doubled Pauli
``P (x) P`` through column-stochastic transfer matrices, one per gate, and
contracting with the measurement covector.

The network has a fixed brickwork shape, so it is contracted with a staircase
schedule: single-qubit gates are folded into the two-qubit gate that follows
them, the circuit is cut into ``n/2`` diagonal slices, and each slice becomes a
small matrix-valued function of the two input sites it touches.  The weight of
any Pauli is then a trace of a product of ``n/2`` such matrices, which batches
over many Paulis as a gather followed by stacked matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .ansatz import (
    SINGLE_QUBIT_DECOMPOSITION,
    SINGLE_QUBIT_NAMES,
    EnsembleSpec,
    GateOption,
    Kind,
    coupling_map,
    layer_pairs,
    realize_fixed_circuit,
)
from .errors import DimensionError, DomainError, ResourceError, UnsupportedError
from .pauli import PauliString

__all__ = [
    "TransferTensor",
    "ContractionPlan",
    "PauliBatch",
    "transfer_tensor",
    "measurement_vector",
    "pauli_weight",
    "pauli_weights",
    "pauli_weight_dense",
    "build_plan",
    "MAX_DENSE_QUBITS",
]

MAX_DENSE_QUBITS = 12
BASES = ("pauli", "signature")

# Pauli basis order I, X, Y, Z.  Two-site index = 4 * first + second.
_PAULI_MATS = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class TransferTensor:
    basis: str
    arity: str  # "single" or "two"
    matrix: np.ndarray


def _basis_check(basis: str) -> None:
    if basis not in BASES:
        raise DomainError(f"unknown basis {basis!r}")


def measurement_vector(basis: str = "pauli") -> np.ndarray:
    """Covector selecting the doubled-Pauli components a Z measurement learns."""
    _basis_check(basis)
    if basis == "pauli":
        return np.array([1.0, 0.0, 0.0, 1.0])
    return np.array([1.0, 1.0 / 3.0])


def _trace_rule(u: np.ndarray) -> np.ndarray:
    """``M[P', P] = |tr(P' U P U^dagger)| / 2^q`` rounded to an exact 0/1 permutation."""
    q = int(round(np.log2(u.shape[0])))
    basis = _PAULI_MATS if q == 1 else np.array([np.kron(a, b) for a in _PAULI_MATS for b in _PAULI_MATS])
    images = np.einsum("ij,pjk,lk->pil", u, basis, u.conj())
    m = np.abs(np.einsum("qij,pji->qp", basis, images)) / 2**q
    perm = np.rint(m)
    if not np.allclose(m, perm, atol=1e-9) or not np.all(perm.sum(axis=0) == 1):
        raise UnsupportedError("unitary is not a Clifford")
    return perm


def _single_unitary(code: int) -> np.ndarray:
    from .clifford import gate_unitary

    return gate_unitary(SINGLE_QUBIT_NAMES[code])


@lru_cache(maxsize=None)
def _single_pauli(code: int) -> np.ndarray:
    if code == 0:
        m = np.zeros((4, 4))
        m[0, 0] = 1.0
        m[1:, 1:] = 1.0 / 3.0
        return m
    return _trace_rule(_single_unitary(code))


@lru_cache(maxsize=None)
def _two_pauli(code: int, reverse: bool = False) -> np.ndarray:
    """Two-qubit Pauli-basis matrix; ``reverse`` puts the CNOT control on the second site."""
    from .clifford import gate_unitary

    if code == 0:
        m = np.zeros((16, 16))
        m[0, 0] = 1.0
        m[1:, 1:] = 1.0 / 15.0
        return m
    name = {1: "I2", 2: "CNOT", 3: "SWAP"}[code]
    u = gate_unitary(name)
    if reverse:
        u = _SWAP_U @ u @ _SWAP_U
    return _trace_rule(u)


_SWAP_U = np.eye(4, dtype=complex)[[0, 2, 1, 3]]

# Signature basis: index 0 = identity, 1 = any non-identity Pauli.
_SIG_SINGLE_TWIRL = np.eye(2)
_SIG_TWO = {
    0: np.array(
        [
            [1, 0, 0, 0],
            [0, 1 / 5, 1 / 5, 1 / 5],
            [0, 1 / 5, 1 / 5, 1 / 5],
            [0, 3 / 5, 3 / 5, 3 / 5],
        ]
    ),
    1: np.eye(4),
    2: np.array(
        [
            [1, 0, 0, 0],
            [0, 1 / 3, 0, 2 / 9],
            [0, 0, 1 / 3, 2 / 9],
            [0, 2 / 3, 2 / 3, 5 / 9],
        ]
    ),
    3: np.eye(4)[[0, 2, 1, 3]],
}


def transfer_tensor(option: GateOption, basis: str = "pauli", reverse: bool = False) -> TransferTensor:
    """Column-stochastic transfer matrix of one catalog gate.

    The signature basis assumes every single-qubit gate is a twirl, so only
    single-qubit option 0 is accepted there.
    """
    _basis_check(basis)
    if option.kind is Kind.SINGLE:
        if basis == "signature":
            if option.code != 0:
                raise UnsupportedError("signature basis needs twirled single-qubit gates")
            return TransferTensor(basis, "single", _SIG_SINGLE_TWIRL.copy())
        return TransferTensor(basis, "single", _single_pauli(option.code).copy())
    if basis == "signature":
        return TransferTensor(basis, "two", _SIG_TWO[option.code].copy())
    return TransferTensor(basis, "two", _two_pauli(option.code, reverse).copy())


# ------------------------------------------------------------------ batches

_XZ_TO_PAULI = np.array([0, 1, 3, 2], dtype=np.intp)  # index x + 2z -> I,X,Y,Z


class PauliBatch:
    """A fixed list of same-size Paulis in array form, reused across many specs."""

    def __init__(self, paulis: Sequence[PauliString], n: int | None = None):
        paulis = list(paulis)
        if n is None:
            if not paulis:
                raise DomainError("empty Pauli batch needs an explicit qubit count")
            n = paulis[0].n
        for p in paulis:
            if p.n != n:
                raise DimensionError(f"Pauli has {p.n} qubits, expected {n}")
        self.n = n
        self.paulis = paulis
        m = len(paulis)
        x = np.zeros((m, n), dtype=np.uint8)
        z = np.zeros((m, n), dtype=np.uint8)
        for i, p in enumerate(paulis):
            for k in range(n):
                x[i, k] = (p.x_mask >> k) & 1
                z[i, k] = (p.z_mask >> k) & 1
        self.x, self.z = x, z
        self.sites = _XZ_TO_PAULI[x + 2 * z.astype(np.intp)]
        self.support = (x | z).astype(np.intp)
        self._padded = {}

    def __len__(self) -> int:
        return len(self.paulis)

    def subset(self, index) -> "PauliBatch":
        out = PauliBatch.__new__(PauliBatch)
        out.n = self.n
        idx = np.asarray(index)
        out.paulis = [self.paulis[i] for i in np.arange(len(self.paulis))[idx]]
        out.x, out.z = self.x[idx], self.z[idx]
        out.sites, out.support = self.sites[idx], self.support[idx]
        out._padded = {}
        return out

    def padded(self, basis: str) -> np.ndarray:
        """Site indices in ``basis``, with one extra identity column for odd n."""
        if basis not in self._padded:
            arr = self.sites if basis == "pauli" else self.support
            if self.n % 2:
                arr = np.concatenate([arr, np.zeros((arr.shape[0], 1), dtype=np.intp)], axis=1)
            self._padded[basis] = arr
        return self._padded[basis]


def _as_batch(paulis, n: int) -> PauliBatch:
    if isinstance(paulis, PauliBatch):
        if paulis.n != n:
            raise DimensionError(f"batch has {paulis.n} qubits, spec has {n}")
        return paulis
    return PauliBatch(list(paulis), n)


# ------------------------------------------------------------- contraction


@dataclass
class ContractionPlan:
    """Staircase decomposition of one spec.

    ``slices[j]`` has shape ``(k*k, D, D)``: for each input pair index it
    holds the matrix that slice ``j`` contributes to the trace product.
    ``inputs[j]`` are the two (padded) sites feeding slice ``j``.
    """

    basis: str
    n: int
    d: int
    slices: list
    inputs: list
    site_factors: np.ndarray | None = None  # depth-0 per-site covectors

    @property
    def bond_dimension(self) -> int:
        return 1 if not self.slices else self.slices[0].shape[1]

    def evaluate(self, batch: PauliBatch) -> np.ndarray:
        idx = batch.padded(self.basis)
        if self.d == 0:
            f = self.site_factors
            out = np.ones(idx.shape[0])
            for q in range(self.n):
                out = out * f[q][idx[:, q]]
            return out
        k = 4 if self.basis == "pauli" else 2
        acc = None
        for j, (a, b) in enumerate(self.inputs):
            mats = self.slices[j][idx[:, a] * k + idx[:, b]]
            acc = mats if acc is None else np.matmul(acc, mats)
        if acc.shape[1] == 1:
            return acc[:, 0, 0].copy()
        return np.trace(acc, axis1=1, axis2=2)


def _gate_matrix(spec: EnsembleSpec, basis: str, layer: int, lo: int, hi: int, pair_code) -> np.ndarray:
    """Gate on padded sites (lo, hi) of two-qubit layer ``layer``, with the
    single-qubit gates of the preceding single layer folded in."""
    n = spec.n
    if basis == "signature":
        return _SIG_TWO[1] if pair_code is None else _SIG_TWO[pair_code[0]]
    if pair_code is None:
        g = np.eye(16)
    else:
        code, reverse = pair_code
        g = _two_pauli(code, reverse)
    s_lo = _single_pauli(spec.single_code(layer, lo)) if lo < n else np.eye(4)
    s_hi = _single_pauli(spec.single_code(layer, hi)) if hi < n else np.eye(4)
    return g @ np.kron(s_lo, s_hi)


def build_plan(spec: EnsembleSpec, basis: str | None = None) -> ContractionPlan:
    """Contract every slice of ``spec`` into its matrix form."""
    if basis is None:
        basis = "signature" if spec.singles_all_random else "pauli"
    _basis_check(basis)
    if basis == "signature" and not spec.singles_all_random:
        raise UnsupportedError("signature basis needs twirled single-qubit gates")
    n, d = spec.n, spec.d
    k = 4 if basis == "pauli" else 2
    v = measurement_vector(basis)

    if basis == "pauli":
        meas = [_single_pauli(spec.single_code(d, q)).T @ v for q in range(n)]
    else:
        meas = [v] * n

    if d == 0:
        factors = np.array(meas)
        if n % 2:
            factors = np.concatenate([factors, np.eye(k)[:1]])
        return ContractionPlan(basis, n, d, [], [], factors)

    npad = n + (n % 2)
    meas = meas + [v] * (npad - n)
    # gate code lookup per (layer, lower site)
    codes = []
    for layer in range(d):
        table = {}
        for pos, (a, b) in enumerate(layer_pairs(n, d, layer)):
            c = spec.two_code(layer, pos)
            table[a] = (c, c == 2 and b < a)
        codes.append(table)

    slices, inputs = [], []
    for j in range(npad // 2):
        gates = []
        for layer in range(d):
            lo = (2 * j + d - 1 - layer) % npad
            hi = (lo + 1) % npad
            g = _gate_matrix(spec, basis, layer, lo, hi, codes[layer].get(lo))
            gates.append(g.reshape(k, k, k, k))  # [out_lo, out_hi, in_lo, in_hi]
        lo_top = (2 * j) % npad
        m_lo, m_hi = meas[lo_top], meas[lo_top + 1]
        first = gates[0]
        if d == 1:
            vals = np.einsum("o,q,oqab->ab", m_lo, m_hi, first).reshape(k * k, 1, 1)
        else:
            # r[A, L, C, x]: x is the lower output that feeds the next gate's upper input
            r = first.reshape(k, k, k * k).transpose(2, 1, 0)[:, None, :, :]
            for g in gates[1:-1]:
                r = np.einsum("oqbx,alcx->albcqo", g, r)
                a_, l_, b_, c_, q_, o_ = r.shape
                r = r.reshape(a_, l_ * b_, c_ * q_, o_)
            top = np.einsum("o,q,oqbx->bx", m_lo, m_hi, gates[-1])
            vals = np.einsum("bx,alcx->albc", top, r)
            a_, l_, b_, c_ = vals.shape
            vals = vals.reshape(a_, l_ * b_, c_)
        slices.append(np.ascontiguousarray(vals))
        q1 = (2 * j + d - 1) % npad
        inputs.append((q1, (q1 + 1) % npad))
    return ContractionPlan(basis, n, d, slices, inputs)


def _deterministic_weights(spec: EnsembleSpec, batch: PauliBatch) -> np.ndarray:
    from .clifford import conjugate_batch

    x, _, _ = conjugate_batch(realize_fixed_circuit(spec), batch.x, batch.z)
    return (~x.any(axis=1)).astype(float)


def pauli_weights(spec: EnsembleSpec, paulis, basis: str | None = None) -> np.ndarray:
    """Weights of many Paulis under one spec.

    With ``basis=None`` deterministic specs use exact symplectic conjugation,
    fully single-twirled specs use the signature basis and everything else
    the Pauli basis.
    """
    batch = _as_batch(paulis, spec.n)
    if len(batch) == 0:
        return np.zeros(0)
    if basis is None and spec.is_deterministic:
        return _deterministic_weights(spec, batch)
    plan = build_plan(spec, basis)
    return plan.evaluate(batch)


def pauli_weight(spec: EnsembleSpec, p: PauliString, basis: str | None = None) -> float:
    """Probability that a circuit drawn from ``spec`` diagonalizes ``p``."""
    if p.n != spec.n:
        raise DimensionError(f"spec has {spec.n} qubits, Pauli has {p.n}")
    return float(pauli_weights(spec, [p], basis)[0])


# ------------------------------------------------------------------- oracle


def pauli_weight_dense(spec: EnsembleSpec, p: PauliString) -> float:
    """Reference weight by propagating the full ``4**n`` doubled-Pauli distribution."""
    n, d = spec.n, spec.d
    if p.n != n:
        raise DimensionError(f"spec has {n} qubits, Pauli has {p.n}")
    if n > MAX_DENSE_QUBITS:
        raise ResourceError(f"dense oracle limited to {MAX_DENSE_QUBITS} qubits")
    state = np.zeros((4,) * n)
    state[tuple(int(_XZ_TO_PAULI[((p.x_mask >> k) & 1) + 2 * ((p.z_mask >> k) & 1)]) for k in range(n))] = 1.0

    def apply(mat, axes):
        nonlocal state
        m = mat.reshape((4,) * (2 * len(axes)))
        state = np.tensordot(m, state, axes=(list(range(len(axes), 2 * len(axes))), axes))
        state = np.moveaxis(state, list(range(len(axes))), axes)

    for layer in range(d + 1):
        for q in range(n):
            apply(transfer_tensor(GateOption(Kind.SINGLE, spec.single_code(layer, q))).matrix, [q])
        if layer == d:
            break
        for pos, (a, b) in enumerate(coupling_map(spec, layer + 1)):
            a, b = a - 1, b - 1
            code = spec.two_code(layer, pos)
            mat = transfer_tensor(GateOption(Kind.TWO, code)).matrix
            # the catalog matrix puts the CNOT control first
            axes = [min(a, b), max(a, b)] if code == 2 else [a, b]
            apply(mat, axes)
    v = measurement_vector("pauli")
    for _ in range(n):
        state = np.tensordot(state, v, axes=([0], [0]))
    return float(state)
