"""Pauli-string algebra in the symplectic (bit-mask) representation.

Site ``k`` (0-based) of a :class:`PauliString` is stored in bit ``k`` of the
``x_mask`` and ``z_mask`` integers.  The operator represented is

    i**phase * sigma(x_0, z_0) (x) ... (x) sigma(x_{n-1}, z_{n-1})

with sigma(0,0)=I, sigma(1,0)=X, sigma(1,1)=Y, sigma(0,1)=Z.  Text forms are
read left to right, so the first character is site 0 (site 1 to users).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DimensionError, DomainError, ParseError

__all__ = [
    "PauliString",
    "WeightedPauli",
    "WeightedPauliSet",
    "parse_pauli",
    "multiply",
    "commutes",
    "support_weight",
    "read_pauli_list",
    "write_pauli_list",
    "parse_pauli_list",
]

_LETTERS = "IXYZ"
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_SIGN_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_SIGN_VALUE = {0: 1, 1: 1j, 2: -1, 3: -1j}


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator with a unit phase ``i**phase``."""

    n: int
    x_mask: int
    z_mask: int
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("qubit count must be non-negative")
        limit = 1 << self.n
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise DomainError(f"masks do not fit in {self.n} bits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_string(cls, text: str) -> "PauliString":
        return parse_pauli(text)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @property
    def sign(self) -> complex:
        """Unit prefactor as a Python number (1, 1j, -1 or -1j)."""
        return _SIGN_VALUE[self.phase]

    @property
    def masks(self) -> tuple[int, int]:
        return (self.x_mask, self.z_mask)

    def letter(self, k: int) -> str:
        x = (self.x_mask >> k) & 1
        z = (self.z_mask >> k) & 1
        return "IXZY"[x | (z << 1)]

    def __str__(self) -> str:
        return "".join(self.letter(k) for k in range(self.n))

    def to_string(self, with_sign: bool = False) -> str:
        body = str(self)
        return _SIGN_TEXT[self.phase] + body if with_sign else body

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def hermitian(self) -> "PauliString":
        """Same masks with the phase reset to +1."""
        return PauliString(self.n, self.x_mask, self.z_mask, 0)

    def is_diagonal(self) -> bool:
        """True when the string contains only I and Z."""
        return self.x_mask == 0

    def to_matrix(self):
        """Dense ``2**n`` matrix (site 0 is the leftmost tensor factor)."""
        import numpy as np

        single = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.ones((1, 1), dtype=complex)
        for ch in str(self):
            out = np.kron(out, single[ch])
        return self.sign * out


def parse_pauli(text: str) -> PauliString:
    """Parse a string over ``IXYZ`` into a :class:`PauliString` with sign +1.

    Raises:
        ParseError: on an empty string or an invalid character; the message
            names the 1-based position.
    """
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}")
    if not text:
        raise ParseError("empty Pauli string")
    x = z = 0
    for k, ch in enumerate(text):
        try:
            bx, bz = _BITS[ch]
        except KeyError:
            raise ParseError(
                f"invalid character {ch!r} at position {k + 1} in {text!r}"
            ) from None
        x |= bx << k
        z |= bz << k
    return PauliString(len(text), x, z, 0)


def _check_same_n(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Operator product ``a·b`` with exact phase tracking."""
    _check_same_n(a, b)
    x1, z1, x2, z2 = a.x_mask, a.z_mask, b.x_mask, b.z_mask
    # Reorder Z^{z1} X^{x2} into X^{x2} Z^{z1}: each overlap contributes -1.
    # Y = i X Z, so the Hermitian forms carry i^{popcount(x&z)} each.
    ya = (x1 & z1).bit_count()
    yb = (x2 & z2).bit_count()
    x3, z3 = x1 ^ x2, z1 ^ z2
    y3 = (x3 & z3).bit_count()
    swaps = (z1 & x2).bit_count()
    phase = a.phase + b.phase + ya + yb - y3 + 2 * swaps
    return PauliString(a.n, x3, z3, phase)


def commutes(a: PauliString, b: PauliString) -> bool:
    """Symplectic commutation test."""
    _check_same_n(a, b)
    return ((a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()) % 2 == 0


def support_weight(p: PauliString) -> int:
    """Number of non-identity sites."""
    return (p.x_mask | p.z_mask).bit_count()


@dataclass(frozen=True)
class WeightedPauli:
    pauli: PauliString
    coefficient: float = 1.0
    cost_weight: float = 1.0

    def __post_init__(self):
        if not self.cost_weight >= 0 or math.isnan(self.cost_weight):
            raise DomainError("cost weight must be non-negative")


@dataclass
class WeightedPauliSet:
    """A sum of distinct Hermitian Pauli strings with real coefficients.

    Adding a string that is already present sums the coefficients (and cost
    weights); terms whose merged coefficient drops below ``tol`` are removed.
    """

    n: int
    _terms: dict = field(default_factory=dict, repr=False)
    tol: float = 1e-12

    @classmethod
    def from_terms(
        cls,
        terms: Iterable,
        n: int | None = None,
        tol: float = 1e-12,
        drop_small: bool = True,
    ) -> "WeightedPauliSet":
        """Build from ``(pauli, coefficient)`` pairs, plain Paulis or strings."""
        items = []
        for t in terms:
            if isinstance(t, WeightedPauli):
                items.append(t)
            elif isinstance(t, (PauliString, str)):
                items.append(WeightedPauli(_as_pauli(t), 1.0))
            else:
                p, c = t[0], t[1]
                w = t[2] if len(t) > 2 else 1.0
                items.append(WeightedPauli(_as_pauli(p), float(c), float(w)))
        if n is None:
            if not items:
                raise DomainError("cannot infer qubit count of an empty set")
            n = items[0].pauli.n
        out = cls(n, tol=tol)
        for wp in items:
            out.add(wp, drop_small=False)
        if drop_small:
            out.prune()
        return out

    def add(self, term: WeightedPauli, drop_small: bool = True) -> None:
        p = term.pauli
        if p.n != self.n:
            raise DimensionError(f"term has {p.n} qubits, set has {self.n}")
        if p.phase not in (0, 2):
            raise DomainError(f"non-Hermitian Pauli {p.to_string(True)} in a real sum")
        coef = term.coefficient * (-1 if p.phase == 2 else 1)
        key = p.masks
        if key in self._terms:
            c0, w0 = self._terms[key]
            self._terms[key] = (c0 + coef, w0 + term.cost_weight)
        else:
            self._terms[key] = (coef, term.cost_weight)
        if drop_small and abs(self._terms[key][0]) < self.tol:
            del self._terms[key]

    def prune(self) -> None:
        for key in [k for k, (c, _) in self._terms.items() if abs(c) < self.tol]:
            del self._terms[key]

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[WeightedPauli]:
        for (x, z), (c, w) in self._terms.items():
            yield WeightedPauli(PauliString(self.n, x, z), c, w)

    def __contains__(self, p) -> bool:
        return _as_pauli(p).masks in self._terms

    @property
    def terms(self) -> list[WeightedPauli]:
        return list(self)

    @property
    def paulis(self) -> list[PauliString]:
        return [PauliString(self.n, x, z) for (x, z) in self._terms]

    @property
    def coefficients(self) -> list[float]:
        return [c for (c, _) in self._terms.values()]

    @property
    def cost_weights(self) -> list[float]:
        return [w for (_, w) in self._terms.values()]

    def coefficient(self, p) -> float:
        return self._terms.get(_as_pauli(p).masks, (0.0, 0.0))[0]

    def with_weights(self, rule: str = "uniform") -> "WeightedPauliSet":
        """Copy with cost weights reset: ``uniform`` (all 1) or ``abs-coeff``."""
        if rule not in ("uniform", "abs-coeff"):
            raise DomainError(f"unknown weight rule {rule!r}")
        out = WeightedPauliSet(self.n, tol=self.tol)
        for (key, (c, _)) in self._terms.items():
            out._terms[key] = (c, 1.0 if rule == "uniform" else abs(c))
        return out

    def scaled(self, factor: float) -> "WeightedPauliSet":
        out = WeightedPauliSet(self.n, tol=self.tol)
        for (key, (c, w)) in self._terms.items():
            out._terms[key] = (c * factor, w)
        return out

    def one_norm(self) -> float:
        return math.fsum(abs(c) for (c, _) in self._terms.values())


def _as_pauli(p) -> PauliString:
    return parse_pauli(p) if isinstance(p, str) else p


def parse_pauli_list(text: str, source: str = "<string>") -> WeightedPauliSet:
    """Parse the ``<coefficient> <IXYZ-string>`` line format."""
    terms = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) == 1:
            coef, label = 1.0, parts[0]
        elif len(parts) == 2:
            try:
                coef = float(parts[0])
            except ValueError:
                raise ParseError(f"{source}:{lineno}: bad coefficient {parts[0]!r}") from None
            label = parts[1]
        else:
            raise ParseError(f"{source}:{lineno}: expected '<coefficient> <pauli>'")
        try:
            p = parse_pauli(label)
        except ParseError as exc:
            raise ParseError(f"{source}:{lineno}: {exc}") from None
        if n is None:
            n = p.n
        elif p.n != n:
            raise ParseError(f"{source}:{lineno}: length {p.n} differs from {n}")
        terms.append((p, coef))
    if n is None:
        raise ParseError(f"{source}: no Pauli terms found")
    return WeightedPauliSet.from_terms(terms, n=n)


def read_pauli_list(path) -> WeightedPauliSet:
    path = Path(path)
    return parse_pauli_list(path.read_text(), source=str(path))


def write_pauli_list(paulis: WeightedPauliSet, path=None) -> str:
    lines = [f"{t.coefficient:.17g} {t.pauli}" for t in paulis]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
