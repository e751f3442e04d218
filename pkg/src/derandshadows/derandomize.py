"""Confidence cost and greedy derandomization of brickwork ensembles.

For measurements with weights ``p_i(P)`` the cost is

    COST = sum_P w_P * 2 * prod_i exp(-eps^2/2 * p_i(P))

an upper bound on the probability that some estimate misses precision
``eps``.  The greedy search fixes one gate slot at a time, treating every
measurement not yet processed as a fully random one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .ansatz import (
    EnsembleSpec,
    Kind,
    SlotRef,
    assign,
    default_slot_order,
    init_ensemble,
    validate_slot_order,
)
from .errors import DomainError, InvariantError
from .pauli import PauliString, WeightedPauliSet
from .weights import PauliBatch, pauli_weights

__all__ = [
    "CostParams",
    "RunConfig",
    "HittingCounts",
    "DerandomizationResult",
    "WeightCache",
    "cost",
    "hitting_counts",
    "derandomize",
    "derandomize_until_covered",
    "relaxed_dominates_shallow_check",
    "direct_spec",
    "reversed_two_qubit_order",
    "derandomize_best_order",
    "derandomize_self_consistent",
    "DEFAULT_EPSILON",
]

DEFAULT_EPSILON = 0.9
STRICT_OPTIONS = {Kind.TWO: (1, 2, 3), Kind.SINGLE: (1, 2, 3, 4, 5, 6)}


@dataclass(frozen=True)
class CostParams:
    epsilon: float = DEFAULT_EPSILON
    include_factor_two: bool = True
    measurement_horizon: int | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.measurement_horizon is not None and self.measurement_horizon < 1:
            raise DomainError("measurement horizon must be positive")

    @property
    def rate(self) -> float:
        """Exponent per unit of hitting count, ``eps^2 / 2``."""
        return self.epsilon**2 / 2

    @property
    def prefactor(self) -> float:
        return 2.0 if self.include_factor_two else 1.0


@dataclass(frozen=True)
class RunConfig:
    n: int
    d: int
    shots: int | None = None
    per_observable: int | None = None
    slot_order: tuple | None = None
    relaxed: bool = False
    weights: str = "uniform"  # "uniform", "abs-coeff" or "explicit"

    def __post_init__(self):
        if (self.shots is None) == (self.per_observable is None):
            raise DomainError("set exactly one of shots and per_observable")
        if self.shots is not None and self.shots < 1:
            raise DomainError("shots must be at least 1")
        if self.per_observable is not None and self.per_observable < 1:
            raise DomainError("per-observable count must be at least 1")
        if self.weights not in ("uniform", "abs-coeff", "explicit"):
            raise DomainError(f"unknown weight source {self.weights!r}")
        if self.n < 1 or self.d < 0:
            raise DomainError("need n >= 1 and d >= 0")
        if self.slot_order is not None:
            object.__setattr__(
                self, "slot_order", tuple(validate_slot_order(self.slot_order, self.n, self.d))
            )

    def order(self) -> list[SlotRef]:
        return list(self.slot_order) if self.slot_order else default_slot_order(self.n, self.d)

    def options(self, kind: Kind) -> tuple:
        opts = STRICT_OPTIONS[kind]
        return (0,) + opts if self.relaxed else opts


class HittingCounts(dict):
    """Map Pauli -> accumulated weight ``h(P) = sum_i p_i(P)``."""

    def as_array(self, paulis: Sequence[PauliString]) -> np.ndarray:
        return np.array([self[p.hermitian()] for p in paulis], dtype=float)

    def minimum(self) -> float:
        return min(self.values()) if self else 0.0


class WeightCache:
    """Memoised ``spec -> weights`` over one fixed Pauli batch.

    Every cost evaluated on a given batch goes through the same cache, so the
    same spec always contributes bit-identical weights.
    """

    def __init__(self, batch: PauliBatch, max_entries: int = 200_000):
        self.batch = batch
        self.max_entries = max_entries
        self._store: dict = {}
        self.hits = 0
        self.misses = 0

    def __call__(self, spec: EnsembleSpec) -> np.ndarray:
        key = (spec.n, spec.d, spec.t, spec.s)
        out = self._store.get(key)
        if out is None:
            self.misses += 1
            out = pauli_weights(spec, self.batch)
            out.setflags(write=False)
            if len(self._store) >= self.max_entries:
                self._store.clear()
            self._store[key] = out
        else:
            self.hits += 1
        return out


def _weights_vector(paulis: WeightedPauliSet, source: str) -> np.ndarray:
    if source == "uniform":
        return np.ones(len(paulis))
    if source == "abs-coeff":
        return np.abs(np.array(paulis.coefficients, dtype=float))
    return np.array(paulis.cost_weights, dtype=float)


def _cost_from_h(h: np.ndarray, w: np.ndarray, params: CostParams) -> float:
    terms = params.prefactor * w * np.exp(-params.rate * np.asarray(h, dtype=float))
    return math.fsum(terms.tolist())


def _exact_h(columns: Sequence[np.ndarray]) -> np.ndarray:
    """Correctly rounded per-Pauli sums of the given weight columns."""
    if not columns:
        return np.zeros(0)
    stacked = np.stack(columns)
    return np.array([math.fsum(col) for col in stacked.T.tolist()])


def cost(
    specs: Sequence[EnsembleSpec],
    paulis: WeightedPauliSet,
    params: CostParams = CostParams(),
    weights: str | np.ndarray = "explicit",
    cache: WeightCache | None = None,
) -> float:
    """Confidence cost of a list of (possibly random) measurement specs.

    ``weights`` is a weight source name or an explicit array.  By default the
    cost weights stored on ``paulis`` are used.
    """
    if len(paulis) == 0:
        raise DomainError("empty Pauli set")
    for s in specs:
        if s.n != paulis.n:
            raise DomainError(f"spec has {s.n} qubits, Paulis have {paulis.n}")
    w = weights if isinstance(weights, np.ndarray) else _weights_vector(paulis, weights)
    cache = cache or WeightCache(PauliBatch(paulis.paulis, paulis.n))
    h = _exact_h([cache(s) for s in specs]) if specs else np.zeros(len(paulis))
    return _cost_from_h(h, w, params)


def hitting_counts(specs: Sequence[EnsembleSpec], paulis, cache: WeightCache | None = None) -> HittingCounts:
    plist = paulis.paulis if isinstance(paulis, WeightedPauliSet) else list(paulis)
    n = specs[0].n if specs else plist[0].n
    cache = cache or WeightCache(PauliBatch(plist, n))
    h = _exact_h([cache(s) for s in specs]) if specs else np.zeros(len(plist))
    return HittingCounts({p.hermitian(): float(v) for p, v in zip(plist, h)})


@dataclass
class DerandomizationResult:
    specs: list
    cost: float
    hitting_counts: HittingCounts
    trajectory: list = field(default_factory=list)  # (measurement, slot label, option, cost)
    fallbacks: int = 0

    @property
    def shots(self) -> int:
        return len(self.specs)

    def run_log(self) -> str:
        lines = ["measurement\tslot\toption\tcost"]
        lines += [f"{i}\t{slot}\t{opt}\t{c!r}" for i, slot, opt, c in self.trajectory]
        return "\n".join(lines) + "\n"


class _Greedy:
    """Slot-by-slot argmin for one measurement given the other measurements' weights."""

    def __init__(self, config: RunConfig, params: CostParams, w: np.ndarray, cache: WeightCache):
        self.config = config
        self.params = params
        self.cache = cache
        self.w = w
        self.order = config.order()
        self.log_b = np.log(params.prefactor * w, where=w > 0, out=np.full(w.shape, -np.inf))
        self.zero = init_ensemble(config.n, config.d)

    def score(self, h: np.ndarray, active) -> float:
        if active is not None:
            h = h[active]
            if h.size == 0:
                return -np.inf
            return float(logsumexp(self.log_b[active] - self.params.rate * h))
        return float(logsumexp(self.log_b - self.params.rate * h))

    def run(self, base_h: Callable, index: int, trajectory: list, active=None, exact_score=None):
        """``base_h(p_j)`` returns the hitting counts with this measurement's weights ``p_j``."""
        spec = self.zero
        for slot in self.order:
            best = None
            for code in self.config.options(slot.kind):
                cand = assign(spec, slot, code)
                h = base_h(self.cache(cand))
                val = exact_score(h) if exact_score else self.score(h, active)
                if best is None or val < best[0]:
                    best = (val, code, cand)
            val, code, spec = best
            trajectory.append((index, slot.label(), code, val if exact_score else math.exp(val)))
        return spec


def _prepare(paulis: WeightedPauliSet, config: RunConfig):
    if len(paulis) == 0:
        raise DomainError("empty Pauli set")
    if paulis.n != config.n:
        raise DomainError(f"config has {config.n} qubits, Paulis have {paulis.n}")
    w = _weights_vector(paulis, config.weights)
    cache = WeightCache(PauliBatch(paulis.paulis, paulis.n))
    return w, cache


def derandomize(paulis: WeightedPauliSet, config: RunConfig, params: CostParams = CostParams()) -> DerandomizationResult:
    """Fixed-budget greedy derandomization of ``config.shots`` measurements.

    In relaxed mode (option 0 allowed) hitting counts are accumulated exactly
    and candidates are compared on the reported cost itself, so the final cost
    can never exceed that of the all-random (shallow shadows) ensemble.
    """
    if config.shots is None:
        raise DomainError("derandomize needs a fixed shot budget")
    w, cache = _prepare(paulis, config)
    greedy = _Greedy(config, params, w, cache)
    p_rand = cache(greedy.zero)
    N = config.shots
    trajectory: list = []
    specs: list = []

    if config.relaxed:
        done = [Fraction(0)] * len(paulis)
        rand_exact = [Fraction(v) for v in p_rand.tolist()]

        for i in range(N):
            future = N - i - 1
            base = [a + future * r for a, r in zip(done, rand_exact)]

            def base_h(pj, base=base):
                return np.array([float(b + Fraction(v)) for b, v in zip(base, pj.tolist())])

            spec = greedy.run(base_h, i, trajectory, exact_score=lambda h: _cost_from_h(h, w, params))
            specs.append(spec)
            done = [a + Fraction(v) for a, v in zip(done, cache(spec).tolist())]
    else:
        done_h = np.zeros(len(paulis))
        for i in range(N):
            future = N - i - 1
            base = done_h + future * p_rand
            spec = greedy.run(lambda pj, base=base: base + pj, i, trajectory)
            specs.append(spec)
            done_h = done_h + cache(spec)

    final = cost(specs, paulis, params, weights=w, cache=cache)
    counts = hitting_counts(specs, paulis, cache)
    return DerandomizationResult(specs, final, counts, trajectory)


def direct_spec(p: PauliString, d: int) -> EnsembleSpec:
    """Identity two-qubit layers with single-qubit rotations that diagonalize ``p``.

    Code 2 (X<->Z) maps X to Z and code 4 (Z<->Y) maps Y to Z.
    """
    n = p.n
    spec = init_ensemble(n, d)
    t = (1,) * len(spec.t)
    s = [1] * len(spec.s)
    for k in range(n):
        letter = p.letter(k)
        s[d * n + k] = {"I": 1, "Z": 1, "X": 2, "Y": 4}[letter]
    return EnsembleSpec(n, d, t, tuple(s))


def derandomize_until_covered(
    paulis: WeightedPauliSet,
    per_observable: int,
    config: RunConfig,
    params: CostParams = CostParams(),
    max_shots: int | None = None,
) -> DerandomizationResult:
    """Add greedy measurements until every Pauli has ``h(P) >= per_observable``.

    Only still-uncovered Paulis enter the cost.  Measurements beyond the
    current one are modelled as random up to a horizon that defaults to
    ``per_observable * |paulis|``.  If a greedy measurement hits no uncovered
    Pauli, it is replaced by a measurement that directly diagonalizes the
    first uncovered one, which keeps the loop finite.
    """
    if per_observable < 1:
        raise DomainError("per-observable count must be at least 1")
    w, cache = _prepare(paulis, config)
    greedy = _Greedy(config, params, w, cache)
    p_rand = cache(greedy.zero)
    m = len(paulis)
    horizon = params.measurement_horizon or per_observable * m
    max_shots = max_shots or per_observable * m
    plist = paulis.paulis
    h = np.zeros(m)
    specs: list = []
    trajectory: list = []
    fallbacks = 0
    target = float(per_observable)
    while np.any(h < target):
        active = np.flatnonzero(h < target)
        j = len(specs)
        if j >= max_shots:
            raise InvariantError("coverage loop exceeded the direct-measurement shot count")
        future = max(horizon - (j + 1), 0)
        base = h + future * p_rand
        spec = greedy.run(lambda pj, base=base: base + pj, j, trajectory, active=active)
        pj = cache(spec)
        if not np.any(pj[active] > 0):
            spec = direct_spec(plist[active[0]], config.d)
            pj = cache(spec)
            fallbacks += 1
        specs.append(spec)
        h = h + pj
    final = cost(specs, paulis, params, weights=w, cache=cache)
    counts = hitting_counts(specs, paulis, cache)
    return DerandomizationResult(specs, final, counts, trajectory, fallbacks)


def reversed_two_qubit_order(n: int, d: int) -> list[SlotRef]:
    """Two-qubit slots from the state side towards the measurement, then the
    default single-qubit order."""
    order = [SlotRef(Kind.TWO, layer, pos) for layer in range(d) for pos in range(n // 2)]
    return order + [s for s in default_slot_order(n, d) if s.kind is Kind.SINGLE]


def derandomize_best_order(
    paulis: WeightedPauliSet,
    config: RunConfig,
    params: CostParams = CostParams(),
    orders: Sequence[Sequence[SlotRef]] | None = None,
) -> DerandomizationResult:
    """Run the fixed-budget greedy once per slot order and keep the lowest cost.

    The default candidates are the standard order and the one with reversed
    two-qubit layers.  Ties keep the earlier order.
    """
    if orders is None:
        orders = [default_slot_order(config.n, config.d)]
        if config.d > 1:
            orders.append(reversed_two_qubit_order(config.n, config.d))
    best = None
    for order in orders:
        cfg = replace(config, slot_order=tuple(order))
        result = derandomize(paulis, cfg, params)
        if best is None or result.cost < best.cost:
            best = result
    return best


def derandomize_self_consistent(
    paulis: WeightedPauliSet,
    per_observable: int,
    config: RunConfig,
    params: CostParams = CostParams(),
    max_rounds: int = 4,
) -> DerandomizationResult:
    """Coverage-mode run whose product horizon matches its own shot count.

    Starts from the default horizon and reruns with the horizon set to the
    previous shot count until it stops changing (or ``max_rounds`` is hit).
    The last run is returned.
    """
    horizon = params.measurement_horizon
    result = None
    for _ in range(max_rounds):
        result = derandomize_until_covered(
            paulis, per_observable, config, replace(params, measurement_horizon=horizon)
        )
        if result.shots == horizon:
            break
        horizon = result.shots
    return result


def relaxed_dominates_shallow_check(
    paulis: WeightedPauliSet, config: RunConfig, params: CostParams = CostParams()
) -> tuple[float, float]:
    """Run relaxed derandomization; return ``(cost_dss, cost_shallow)``.

    Raises InvariantError if the relaxed result is worse than keeping every
    gate random.
    """
    if not config.relaxed:
        raise DomainError("relaxed mode must be enabled")
    result = derandomize(paulis, config, params)
    w, cache = _prepare(paulis, config)
    shallow = cost([init_ensemble(config.n, config.d)] * config.shots, paulis, params, weights=w, cache=cache)
    dss = cost(result.specs, paulis, params, weights=w, cache=cache)
    if not dss <= shallow:
        raise InvariantError(f"relaxed cost {dss!r} exceeds shallow-shadows cost {shallow!r}")
    return dss, shallow
