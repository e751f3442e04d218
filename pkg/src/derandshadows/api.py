"""Estimator-style front end: ``fit`` designs measurements, ``transform`` estimates.

>>> from derandshadows.api import DerandomizedShadows
>>> est = DerandomizedShadows(depth=1, shots=100, weights="abs-coeff")
>>> est.fit(["0.5 ZZ", "0.2 XX"]).circuits_  # doctest: +SKIP
"""

from __future__ import annotations

from numbers import Integral, Real
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .clifford import MeasurementRecord, StateVector, sample_records
from .derandomize import (
    DEFAULT_EPSILON,
    CostParams,
    RunConfig,
    derandomize,
    derandomize_best_order,
    derandomize_self_consistent,
    derandomize_until_covered,
)
from .errors import DimensionError, DomainError
from .estimator import EstimationReport, MeasurementPlan, as_circuits, bits_matrix, build_report
from .pauli import PauliString, WeightedPauliSet, parse_pauli_list, read_pauli_list

__all__ = ["DerandomizedShadows", "check_paulis", "check_records", "check_scalar"]


def check_scalar(value, name: str, kind=Real, low=None, high=None, allow_none: bool = False):
    """Type and range check in the spirit of ``sklearn.utils.check_scalar``."""
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, kind):
        raise DomainError(f"{name} must be {kind.__name__}, got {type(value).__name__}")
    if low is not None and value < low:
        raise DomainError(f"{name} must be >= {low}, got {value}")
    if high is not None and value > high:
        raise DomainError(f"{name} must be <= {high}, got {value}")
    return value


def check_paulis(X) -> WeightedPauliSet:
    """Accept a WeightedPauliSet, a path, Pauli-list text, or a sequence of
    strings / PauliStrings / ``(coefficient, string)`` pairs."""
    if isinstance(X, WeightedPauliSet):
        out = X
    elif isinstance(X, Path):
        out = read_pauli_list(X)
    elif isinstance(X, str):
        out = parse_pauli_list(X)
    else:
        lines = []
        for item in X:
            if isinstance(item, PauliString):
                if item.phase % 2:
                    raise DomainError(f"{item.to_string(with_sign=True)} is not Hermitian")
                lines.append(f"{1 - item.phase} {item}")
            elif isinstance(item, str):
                lines.append(item)
            else:
                coef, s = item
                lines.append(f"{float(coef)!r} {s}")
        if not lines:
            raise DomainError("no Pauli strings given")
        out = parse_pauli_list("\n".join(lines))
    if len(out) == 0:
        raise DomainError("no Pauli strings given")
    return out


def check_records(records, n_circuits: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalize records to ``(indices, bits)`` arrays.

    Accepted: MeasurementRecord / ``(index, bits)`` pairs, or a plain list of
    bitstrings taken as one shot per circuit in order.
    """
    records = list(records)
    if records and isinstance(records[0], str):
        if len(records) != n_circuits:
            raise DimensionError(f"{len(records)} bitstrings for {n_circuits} circuits")
        records = [MeasurementRecord(i, b) for i, b in enumerate(records)]
    idx = np.array([int(r[0]) for r in records], dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= n_circuits):
        raise DimensionError("record index outside the fitted circuit list")
    bits = bits_matrix([str(r[1]) for r in records], n) if records else np.zeros((0, n), np.uint8)
    return idx, bits


class DerandomizedShadows(BaseEstimator):
    """Greedy derandomized shallow-shadow measurement design.

    Parameters
    ----------
    depth : number of two-qubit brickwork layers.
    shots : fixed measurement budget.  Mutually exclusive with ``per_observable``.
    per_observable : coverage target; measurements are added until every
        Pauli is measured this many times.
    epsilon : precision hyperparameter of the cost.
    weights : ``"uniform"``, ``"abs-coeff"`` or ``"explicit"``.
    relaxed : allow gates to stay random.
    order : ``"default"`` or ``"scan"`` (also try reversed two-qubit layers,
        fixed budget only).
    horizon : product horizon for coverage mode; ``"self-consistent"``
        iterates it to the resulting shot count.
    """

    def __init__(
        self,
        depth: int = 1,
        shots: int | None = None,
        per_observable: int | None = None,
        epsilon: float = DEFAULT_EPSILON,
        weights: str = "uniform",
        relaxed: bool = False,
        order: str = "default",
        horizon=None,
    ):
        self.depth = depth
        self.shots = shots
        self.per_observable = per_observable
        self.epsilon = epsilon
        self.weights = weights
        self.relaxed = relaxed
        self.order = order
        self.horizon = horizon

    def _validate_params(self):
        check_scalar(self.depth, "depth", Integral, low=0)
        check_scalar(self.shots, "shots", Integral, low=1, allow_none=True)
        check_scalar(self.per_observable, "per_observable", Integral, low=1, allow_none=True)
        check_scalar(self.epsilon, "epsilon", Real)
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if (self.shots is None) == (self.per_observable is None):
            raise DomainError("set exactly one of shots and per_observable")
        if self.order not in ("default", "scan"):
            raise DomainError(f"unknown order {self.order!r}")
        if self.horizon not in (None, "self-consistent"):
            check_scalar(self.horizon, "horizon", Integral, low=1)

    def fit(self, X, y=None):
        """Design measurements for the Paulis in ``X``; ``y`` is ignored."""
        self._validate_params()
        paulis = check_paulis(X)
        config = RunConfig(
            paulis.n,
            self.depth,
            shots=self.shots,
            per_observable=self.per_observable,
            relaxed=self.relaxed,
            weights=self.weights,
        )
        horizon = self.horizon if isinstance(self.horizon, Integral) else None
        params = CostParams(self.epsilon, measurement_horizon=horizon)
        if self.shots is not None:
            run = derandomize_best_order if self.order == "scan" else derandomize
            result = run(paulis, config, params)
        elif self.horizon == "self-consistent":
            result = derandomize_self_consistent(paulis, self.per_observable, config, params)
        else:
            result = derandomize_until_covered(paulis, self.per_observable, config, params)
        self.paulis_ = paulis
        self.n_qubits_ = paulis.n
        self.result_ = result
        self.specs_ = result.specs
        self.cost_ = result.cost
        self.hitting_counts_ = result.hitting_counts
        self.n_shots_ = result.shots
        if all(s.is_deterministic for s in result.specs):
            self.circuits_ = as_circuits(result.specs)
            self.plan_ = MeasurementPlan(self.circuits_, paulis.paulis)
        else:
            self.circuits_ = None
            self.plan_ = None
        return self

    def _require_plan(self):
        check_is_fitted(self, "result_")
        if self.plan_ is None:
            raise DomainError("relaxed fit left random gates; estimation needs deterministic circuits")

    def simulate(self, state: StateVector, seed=0) -> list[MeasurementRecord]:
        """One shot per fitted circuit on a dense state."""
        self._require_plan()
        if state.n != self.n_qubits_:
            raise DimensionError(f"state has {state.n} qubits, model has {self.n_qubits_}")
        return sample_records(self.circuits_, state, seed)

    def transform(self, records) -> np.ndarray:
        """Per-Pauli estimates, in the order of ``paulis_``."""
        self._require_plan()
        idx, bits = check_records(records, len(self.circuits_), self.n_qubits_)
        est, _ = self.plan_.estimates(idx, bits)
        return est

    def fit_transform(self, X, records, y=None) -> np.ndarray:
        return self.fit(X).transform(records)

    def predict(self, records) -> float:
        """Recombined scalar ``sum_P c_P o(P)``."""
        est = self.transform(records)
        return float(np.dot(self.paulis_.coefficients, est))

    def predict_bound(self) -> float:
        """Error bound ``eps * sum |c_P|`` holding with probability ``1 - cost_``."""
        check_is_fitted(self, "result_")
        return self.epsilon * self.paulis_.one_norm()

    def score(self, records, y) -> float:
        """Negative absolute error of the recombined scalar against ``y``."""
        return -abs(self.predict(records) - float(y))

    def report(self, records: Sequence, true_values=None) -> EstimationReport:
        self._require_plan()
        recs = list(records)
        if recs and isinstance(recs[0], str):
            recs = [MeasurementRecord(i, b) for i, b in enumerate(recs)]
        check_records(recs, len(self.circuits_), self.n_qubits_)
        return build_report(self.circuits_, recs, self.paulis_, self.epsilon, true_values)
