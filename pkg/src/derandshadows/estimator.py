"""Pauli expectation estimates from measurement records, plus their guarantees.

A deterministic Clifford circuit ``U`` either maps ``P`` to ``s * Z_A`` (a
signed Z-string on support ``A``) or to something with an X component.  In
the first case one shot ``b`` contributes ``s * (-1)^{|b & A|}``; otherwise it
contributes nothing.  The estimate is the mean over contributing shots.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ansatz import Circuit, EnsembleSpec, realize_fixed_circuit
from .clifford import MeasurementRecord, conjugate_batch
from .errors import DimensionError, DomainError
from .pauli import PauliString, WeightedPauliSet, _as_pauli

__all__ = [
    "MeasurementPlan",
    "EstimationReport",
    "as_circuits",
    "bits_matrix",
    "estimate",
    "estimate_all",
    "estimate_scalar",
    "build_report",
    "confidence_bound",
    "is_vacuous",
    "precision_for_confidence",
    "variance_bound",
    "mse",
]


def as_circuits(circuits: Sequence[Circuit | EnsembleSpec]) -> list[Circuit]:
    """Realize specs as gate lists; circuits pass through."""
    return [realize_fixed_circuit(c) if isinstance(c, EnsembleSpec) else c for c in circuits]


def bits_matrix(bits: Sequence[str], n: int) -> np.ndarray:
    arr = np.frombuffer("".join(bits).encode(), dtype=np.uint8)
    if arr.size != len(bits) * n:
        raise DimensionError(f"bitstrings are not all {n} bits long")
    return (arr - ord("0")).reshape(len(bits), n)


class MeasurementPlan:
    """Per-circuit diagonalization data for a fixed list of Paulis.

    Distinct circuits are conjugated once.  ``hit[r, k]`` says whether circuit
    structure ``r`` measures Pauli ``k``; ``zmask`` and ``sign`` give the
    resulting Z-string.
    """

    def __init__(self, circuits: Sequence[Circuit | EnsembleSpec], paulis: Sequence[PauliString]):
        self.circuits = as_circuits(circuits)
        self.paulis = [_as_pauli(p) for p in paulis]
        if not self.circuits:
            raise DomainError("no circuits")
        self.n = self.circuits[0].n
        for c in self.circuits:
            if c.n != self.n:
                raise DimensionError("circuits disagree on the qubit count")
        for p in self.paulis:
            if p.n != self.n:
                raise DimensionError(f"Pauli {p} has {p.n} qubits, circuits have {self.n}")
        x0 = np.array([[(p.x_mask >> k) & 1 for k in range(self.n)] for p in self.paulis], dtype=np.uint8)
        z0 = np.array([[(p.z_mask >> k) & 1 for k in range(self.n)] for p in self.paulis], dtype=np.uint8)
        x0 = x0.reshape(len(self.paulis), self.n)
        z0 = z0.reshape(len(self.paulis), self.n)
        keys: dict = {}
        hit, zmask, sign, rows = [], [], [], []
        for c in self.circuits:
            key = c.key()
            if key not in keys:
                keys[key] = len(hit)
                x, z, s = conjugate_batch(c, x0, z0)
                hit.append(~x.any(axis=1))
                zmask.append(z)
                sign.append(s)
            rows.append(keys[key])
        self.rows = np.array(rows, dtype=np.intp)
        self.hit = np.array(hit, dtype=bool)
        self.zmask = np.array(zmask, dtype=np.uint8)
        self.sign = np.array(sign, dtype=np.int8)

    @property
    def hits(self) -> np.ndarray:
        """Hitting count per Pauli, one shot per circuit."""
        return self.hit[self.rows].sum(axis=0)

    def shot_values(self, indices: np.ndarray, bits: np.ndarray) -> np.ndarray:
        """``(shots, m)`` array of per-shot values in {-1, 0, +1}."""
        indices = np.asarray(indices, dtype=np.intp)
        if indices.size and (indices.min() < 0 or indices.max() >= len(self.circuits)):
            raise DimensionError("record index outside the circuit list")
        if bits.ndim != 2 or bits.shape[1] != self.n:
            raise DimensionError(f"outcomes must have {self.n} bits")
        r = self.rows[indices]
        parity = np.einsum("sn,smn->sm", bits.astype(np.int64), self.zmask[r].astype(np.int64)) & 1
        vals = self.sign[r].astype(np.int64) * (1 - 2 * parity)
        return np.where(self.hit[r], vals, 0)

    def estimates(self, indices: np.ndarray, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Mean values and hit counts; Paulis never hit get 0."""
        vals = self.shot_values(indices, bits)
        hits = self.hit[self.rows[np.asarray(indices, dtype=np.intp)]].sum(axis=0)
        total = vals.sum(axis=0)
        est = np.divide(total, hits, out=np.zeros(len(self.paulis)), where=hits > 0)
        return est, hits

    def from_records(self, records: Sequence[MeasurementRecord]) -> tuple[np.ndarray, np.ndarray]:
        if not records:
            return np.zeros(len(self.paulis)), np.zeros(len(self.paulis), dtype=np.int64)
        idx = np.array([r.index for r in records], dtype=np.intp)
        return self.estimates(idx, bits_matrix([r.bits for r in records], self.n))


def estimate_all(circuits, records: Sequence[MeasurementRecord], paulis) -> tuple[np.ndarray, np.ndarray]:
    """Estimates and hit counts for every Pauli in ``paulis``."""
    plist = paulis.paulis if isinstance(paulis, WeightedPauliSet) else list(paulis)
    return MeasurementPlan(circuits, plist).from_records(records)


def estimate(circuits, records: Sequence[MeasurementRecord], p) -> float:
    est, _ = estimate_all(circuits, records, [_as_pauli(p)])
    return float(est[0])


# ------------------------------------------------------------ guarantees


def confidence_bound(h: float, epsilon: float) -> float:
    """Failure probability bound ``2 exp(-eps^2 h / 2)``; values above 1 are vacuous."""
    if h < 0:
        raise DomainError("hitting count must be non-negative")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    return 2.0 * math.exp(-(epsilon**2) * h / 2.0)


def is_vacuous(bound: float) -> bool:
    return bound >= 1.0


def precision_for_confidence(h: float, delta: float) -> float:
    """Precision reached with probability ``1 - delta`` after ``h`` hits."""
    if not h > 0:
        raise DomainError("precision is undefined for a Pauli that was never measured")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    return math.sqrt(2.0 * math.log(2.0 / delta) / h)


def variance_bound(N: int, h: float) -> float:
    if not h > 0:
        raise DomainError("variance bound needs h > 0")
    return N / h


def mse(true_value: float, estimates: Sequence[float]) -> float:
    arr = np.asarray(estimates, dtype=float)
    if arr.size == 0:
        raise DomainError("empty estimate list")
    return float(np.mean((true_value - arr) ** 2))


# ------------------------------------------------------------ reports


@dataclass
class EstimationReport:
    paulis: list
    estimates: np.ndarray
    hits: np.ndarray
    epsilon: float
    shots: int
    coefficients: np.ndarray | None = None
    true_values: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def confidence(self) -> np.ndarray:
        return np.array([confidence_bound(float(h), self.epsilon) for h in self.hits])

    @property
    def vacuous(self) -> np.ndarray:
        return self.confidence >= 1.0

    @property
    def variance_bounds(self) -> np.ndarray:
        h = self.hits.astype(float)
        return np.divide(self.shots, h, out=np.full(h.shape, np.inf), where=h > 0)

    @property
    def unmeasured(self) -> list:
        return [p for p, h in zip(self.paulis, self.hits) if h == 0]

    def lookup(self, p) -> float:
        key = _as_pauli(p).hermitian()
        for q, e in zip(self.paulis, self.estimates):
            if q.hermitian() == key:
                return float(e)
        raise DomainError(f"{p} is not in the report")

    def scalar(self):
        """``(value, bound)`` for the coefficients attached to the report."""
        if self.coefficients is None:
            return None
        c = np.asarray(self.coefficients, dtype=float)
        return float(np.dot(c, self.estimates)), self.epsilon * float(np.abs(c).sum())

    def rows(self) -> list[dict]:
        out = []
        conf, var = self.confidence, self.variance_bounds
        for k, p in enumerate(self.paulis):
            row = {
                "pauli": str(p),
                "estimate": float(self.estimates[k]),
                "hits": int(self.hits[k]),
                "confidence_bound": float(conf[k]),
                "vacuous": bool(conf[k] >= 1.0),
                "variance_bound": float(var[k]),
                "unmeasured": bool(self.hits[k] == 0),
            }
            if self.coefficients is not None:
                row["coefficient"] = float(self.coefficients[k])
            if self.true_values is not None:
                row["true_value"] = float(self.true_values[k])
                row["error"] = float(self.estimates[k] - self.true_values[k])
            out.append(row)
        return out

    def to_json(self) -> str:
        payload = {"meta": self.meta, "epsilon": self.epsilon, "shots": self.shots, "paulis": self.rows()}
        sc = self.scalar()
        if sc is not None:
            payload["scalar"] = {"value": sc[0], "error_bound": sc[1]}
            if self.true_values is not None:
                exact = float(np.dot(self.coefficients, self.true_values))
                payload["scalar"].update(true_value=exact, error=sc[0] - exact)
        return json.dumps(payload, indent=1)

    def to_csv(self) -> str:
        rows = self.rows()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["pauli"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()


def build_report(
    circuits,
    records: Sequence[MeasurementRecord],
    paulis: WeightedPauliSet,
    epsilon: float,
    true_values: Sequence[float] | None = None,
    meta: dict | None = None,
) -> EstimationReport:
    est, hits = estimate_all(circuits, records, paulis)
    return EstimationReport(
        paulis=paulis.paulis,
        estimates=est,
        hits=np.asarray(hits, dtype=np.int64),
        epsilon=epsilon,
        shots=len(records),
        coefficients=np.array(paulis.coefficients, dtype=float),
        true_values=None if true_values is None else np.asarray(true_values, dtype=float),
        meta=meta or {},
    )


def estimate_scalar(terms: WeightedPauliSet, report: EstimationReport) -> tuple[float, float]:
    """``sum_P c_P * o(P)`` and its error bound ``eps * sum_P |c_P|``.

    The bound holds with probability at least one minus the final cost.
    """
    value = 0.0
    parts = []
    for t in terms:
        parts.append(t.coefficient * report.lookup(t.pauli))
    value = math.fsum(parts)
    return value, report.epsilon * terms.one_norm()
