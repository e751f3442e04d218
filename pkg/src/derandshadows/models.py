"""Benchmark problems and baseline measurement strategies."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .ansatz import SINGLE_QUBIT_NAMES, Circuit, EnsembleSpec, Gate, layer_pairs
from .derandomize import direct_spec
from .errors import DomainError
from .pauli import PauliString, WeightedPauliSet, multiply, parse_pauli, parse_pauli_list

__all__ = [
    "HubbardParams",
    "hubbard_hamiltonian",
    "square_hamiltonian",
    "naive_grouping_bases",
    "basis_diagonalizes",
    "shallow_shadows_sample",
    "direct_measurement_plan",
    "load_dataset",
    "DATASETS",
]

DATASETS = ("h2", "bell", "random30")


def load_dataset(name: str) -> WeightedPauliSet:
    """Bundled Pauli lists: ``h2`` (4-qubit molecular Hamiltonian), ``bell``,
    ``random30`` (30 random 8-qubit strings)."""
    if name not in DATASETS:
        raise DomainError(f"unknown dataset {name!r}; choose from {DATASETS}")
    text = resources.files("derandshadows.data").joinpath(f"{name}.paulis").read_text()
    return parse_pauli_list(text, source=name)


@dataclass(frozen=True)
class HubbardParams:
    L: int
    J: float = 1.0
    U: float = 1.0

    def __post_init__(self):
        if self.L < 2:
            raise DomainError("need at least two fermionic sites")

    @property
    def n_qubits(self) -> int:
        return 2 * self.L


def _string(n: int, letters: dict) -> PauliString:
    chars = ["I"] * n
    for k, ch in letters.items():
        chars[k] = ch
    return parse_pauli("".join(chars))


def hubbard_hamiltonian(p: HubbardParams) -> WeightedPauliSet:
    """Open Fermi-Hubbard chain after Jordan-Wigner, spin-interleaved ordering.

    Hopping: ``-J/2 (X_{i-1} Z_i X_{i+1} + Y_{i-1} Z_i Y_{i+1})`` for
    ``i = 2..N-1``.  Interaction: ``U/4 (1 - Z_{2i-1})(1 - Z_{2i})`` on each
    site.
    """
    n = p.n_qubits
    terms = []
    for i in range(1, n - 1):  # 0-based centre
        for a in "XY":
            terms.append((_string(n, {i - 1: a, i: "Z", i + 1: a}), -p.J / 2))
    for site in range(p.L):
        a, b = 2 * site, 2 * site + 1
        q = p.U / 4
        terms += [
            (_string(n, {}), q),
            (_string(n, {a: "Z"}), -q),
            (_string(n, {b: "Z"}), -q),
            (_string(n, {a: "Z", b: "Z"}), q),
        ]
    return WeightedPauliSet.from_terms(terms, n=n)


def square_hamiltonian(h: WeightedPauliSet, tol: float = 1e-12) -> WeightedPauliSet:
    """``H^2`` as a merged sum of Hermitian Paulis.

    Products of anticommuting pairs come with imaginary phases that cancel
    between ``PQ`` and ``QP``; accumulation is done in complex arithmetic
    and the imaginary remainder is checked to vanish.
    """
    items = [(t.pauli.x_mask, t.pauli.z_mask, (t.pauli.x_mask & t.pauli.z_mask).bit_count(), t.coefficient) for t in h]
    acc: dict = {}
    units = (1, 1j, -1, -1j)
    for x1, z1, y1, c1 in items:
        for x2, z2, y2, c2 in items:
            x3, z3 = x1 ^ x2, z1 ^ z2
            ph = (y1 + y2 - (x3 & z3).bit_count() + 2 * (z1 & x2).bit_count()) % 4
            key = (x3, z3)
            acc[key] = acc.get(key, 0) + c1 * c2 * units[ph]
    scale = max((abs(c) for c in h.coefficients), default=1.0) ** 2
    out = WeightedPauliSet(h.n, tol=tol)
    for (x, z), c in acc.items():
        if abs(c.imag if isinstance(c, complex) else 0.0) > 1e-9 * max(scale, 1.0):
            raise ArithmeticError("H^2 has a non-Hermitian remainder")
        re = c.real if isinstance(c, complex) else float(c)
        if abs(re) >= tol:
            out._terms[(x, z)] = (re, 1.0)
    return out


# ------------------------------------------------------------ baselines


def _hop_letters(N: int, centre: int, a: str) -> dict:
    return {centre - 1: a, centre: "Z", centre + 1: a}


def naive_grouping_bases(N: int) -> list[str]:
    """Product bases (one X/Y/Z letter per site) covering every term of ``H^2``
    for the Hubbard chain on ``N`` qubits.

    Families, in emission order:

    * the all-Z basis;
    * one hopping string ``aZa`` (a in X, Y) swept over every centre, Z elsewhere;
    * four uniform period-2 patterns (letter times parity) for products of
      equal-letter hops whose centres share parity;
    * an anchored hop ``AZA`` swept over every centre on a period-2 background
      of letter ``B``, for (A, B, parity) in {(X, Y, same), (X, X, opposite),
      (X, Y, opposite), (Y, Y, opposite)};
    * the four products of adjacent hops, swept over every window, Z elsewhere.

    This gives ``10N - 19`` bases.
    """
    if N < 4 or N % 2:
        raise DomainError("naive grouping needs an even qubit count N >= 4")
    out = ["Z" * N]

    def emit(letters: dict, background=None):
        chars = list(background or "Z" * N)
        for k, ch in letters.items():
            chars[k] = ch
        out.append("".join(chars))

    centres = range(1, N - 1)
    for c in centres:
        for a in "XY":
            emit(_hop_letters(N, c, a))
    for a in "XY":
        for parity in (0, 1):
            out.append("".join("Z" if k % 2 == parity else a for k in range(N)))
    for A, B, same in (("X", "Y", True), ("X", "X", False), ("X", "Y", False), ("Y", "Y", False)):
        for c in centres:
            zpar = c % 2 if same else 1 - c % 2
            background = "".join("Z" if k % 2 == zpar else B for k in range(N))
            emit(_hop_letters(N, c, A), background)
    for c in range(1, N - 2):
        for A in "XY":
            for B in "XY":
                prod = multiply(_string(N, _hop_letters(N, c, A)), _string(N, _hop_letters(N, c + 1, B)))
                emit({k: prod.letter(k) for k in range(c - 1, c + 3)})
    return out


def basis_diagonalizes(basis: str, p: PauliString) -> bool:
    """A single-qubit basis string (letters X/Y/Z per site) measures ``p`` when
    every non-identity letter of ``p`` matches the basis letter."""
    for k in range(p.n):
        ch = p.letter(k)
        if ch != "I" and ch != basis[k]:
            return False
    return True


def shallow_shadows_sample(n: int, d: int, N: int, seed) -> list[Circuit]:
    """``N`` circuits drawn i.i.d. from the all-random brickwork ensemble.

    Every twirled gate is replaced by a uniformly random element of its
    local Clifford group modulo Paulis: one of the six single-qubit
    permutations, or one of the 720 two-qubit symplectic maps written as a
    word in H, S and CNOT.  Some two-qubit maps are not reachable with one
    catalog gate plus local dressing, so the result is an explicit gate list
    rather than an :class:`EnsembleSpec`.
    """
    from .clifford import make_rng

    if n < 1 or d < 0 or N < 0:
        raise DomainError("need n >= 1, d >= 0, N >= 0")
    rng = make_rng(seed)
    words = _two_qubit_words()
    out = []
    for _ in range(N):
        gates = []
        for layer in range(d + 1):
            for q in range(n):
                code = int(rng.integers(1, 7))
                gates.append(Gate(SINGLE_QUBIT_NAMES[code], (q,), layer))
            if layer == d:
                break
            for a, b in layer_pairs(n, d, layer):
                for name, which in words[int(rng.integers(len(words)))]:
                    qs = (a, b) if which == "ab" else ((a,) if which == "a" else (b,))
                    gates.append(Gate(name, qs, layer))
        out.append(Circuit(n, tuple(gates)))
    return out


_WORDS = None


def _two_qubit_words():
    """Shortest H/S/CNOT word for each of the 720 two-qubit symplectic maps."""
    global _WORDS
    if _WORDS is not None:
        return _WORDS
    from .clifford import _conj_bits

    gens = [("H", "a"), ("H", "b"), ("S", "a"), ("S", "b"), ("CNOT", "ab")]
    qubits = {"a": (0,), "b": (1,), "ab": (0, 1)}
    start = ((1, 0), (2, 0), (0, 1), (0, 2))  # images of X_a, X_b, Z_a, Z_b
    seen = {start: ()}
    frontier = [start]
    while frontier:
        nxt = []
        for state in frontier:
            for name, which in gens:
                img = tuple(_conj_bits(name, qubits[which], x, z, 0)[:2] for x, z in state)
                if img not in seen:
                    seen[img] = seen[state] + ((name, which),)
                    nxt.append(img)
        frontier = nxt
    if len(seen) != 720:
        raise ArithmeticError(f"generated {len(seen)} two-qubit maps, expected 720")
    _WORDS = [seen[k] for k in sorted(seen)]
    return _WORDS


def direct_measurement_plan(paulis: WeightedPauliSet, per_observable: int, d: int = 0) -> list[EnsembleSpec]:
    """``per_observable`` copies of a product-basis measurement for each Pauli."""
    if per_observable < 1:
        raise DomainError("per-observable count must be at least 1")
    out = []
    for p in paulis.paulis:
        out += [direct_spec(p, d)] * per_observable
    return out
