"""End-to-end acceptance checks.  Each test prints one ``criterion k: PASS/FAIL`` line."""

import math
import time

import numpy as np
import pytest

from derandshadows.ansatz import EnsembleSpec, realize_fixed_circuit
from derandshadows.cli import h2_error_samples
from derandshadows.clifford import (
    CliffordTableau,
    StateVector,
    diagonalizes,
    expectation,
    ground_state,
    make_rng,
    outcome_distributions,
    sample_indices,
)
from derandshadows.derandomize import (
    CostParams,
    RunConfig,
    cost,
    derandomize,
    derandomize_best_order,
    derandomize_self_consistent,
    relaxed_dominates_shallow_check,
)
from derandshadows.estimator import MeasurementPlan
from derandshadows.models import (
    HubbardParams,
    basis_diagonalizes,
    hubbard_hamiltonian,
    load_dataset,
    naive_grouping_bases,
    square_hamiltonian,
)
from derandshadows.pauli import PauliString, WeightedPauliSet
from derandshadows.weights import pauli_weight, pauli_weight_dense, pauli_weights


@pytest.fixture
def verdict(capsys):
    def emit(k: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail

    return emit


def random_spec(rng, n, d, single_choices=range(7)):
    t = rng.integers(0, 4, size=d * (n // 2))
    s = rng.choice(list(single_choices), size=(d + 1) * n)
    return EnsembleSpec(n, d, tuple(t), tuple(s))


def random_pauli(rng, n):
    while True:
        x, z = (int(v) for v in rng.integers(0, 2**n, size=2))
        if x | z:
            return PauliString(n, x, z)


def test_criterion_1_oracle_equivalence(verdict):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n, d = int(rng.integers(2, 7)), int(rng.integers(0, 4))
        spec, p = random_spec(rng, n, d), random_pauli(rng, n)
        worst = max(worst, abs(pauli_weight(spec, p) - pauli_weight_dense(spec, p)))
    elapsed = time.perf_counter() - start
    verdict(1, worst <= 1e-10 and elapsed < 60, f"max deviation {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_basis_equivalence(verdict):
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(100):
        n, d = int(rng.integers(1, 9)), int(rng.integers(0, 4))
        spec = random_spec(rng, n, d, single_choices=[0])
        ps = [random_pauli(rng, n) for _ in range(6)]
        diff = np.abs(pauli_weights(spec, ps, "signature") - pauli_weights(spec, ps, "pauli"))
        worst = max(worst, float(diff.max()))
    verdict(2, worst <= 1e-12, f"max deviation {worst:.2e}")


def test_criterion_3_bell(verdict):
    bell = load_dataset("bell")
    eps = 0.9
    start = time.perf_counter()
    result = derandomize_best_order(bell, RunConfig(8, 3, shots=100), CostParams(eps))
    elapsed = time.perf_counter() - start
    hits = [0, 0, 0]
    for spec in result.specs:
        circuit = realize_fixed_circuit(spec)
        tableau = CliffordTableau.from_circuit(circuit)
        for k, p in enumerate(bell.paulis):
            image = tableau.apply(p)
            hits[k] += image.x_mask == 0 and diagonalizes(circuit, p)
    expected = 6 * math.exp(-50 * eps**2)
    final = cost(result.specs, bell, CostParams(eps))
    ok = hits == [100] * 3 and abs(final - expected) <= 1e-12 and elapsed < 300
    verdict(3, ok, f"hits {hits}, cost {final:.15g} vs {expected:.15g}, {elapsed:.1f}s")


def _h2_structure(spec, h):
    circuit = realize_fixed_circuit(spec)
    return frozenset(str(p) for p in h.paulis if diagonalizes(circuit, p))


def test_criterion_4_h2_grouping(verdict):
    h = load_dataset("h2")
    grid = [round(0.1 * k, 1) for k in range(1, 16)]
    exact_hit, fallback = None, None
    for eps in grid:
        params = CostParams(eps)
        result = derandomize(h, RunConfig(4, 1, shots=100, weights="abs-coeff"), params)
        groups = {}
        for spec in result.specs:
            groups.setdefault(_h2_structure(spec, h), []).append(spec)
        if len(groups) != 2:
            continue
        all_z = next((g for g in groups if "ZIII" in g), None)
        if all_z is None or "XXXX" in all_z:
            continue
        bell_key = next(g for g in groups if g is not all_z)
        if "XXXX" not in bell_key:
            continue
        z_spec, b_spec = groups[all_z][0], groups[bell_key][0]
        k_dss = len(groups[all_z])
        costs = [cost([z_spec] * k + [b_spec] * (100 - k), h, params, weights="abs-coeff") for k in range(101)]
        best = min(costs)
        optimal = costs[k_dss] <= best * (1 + 1e-12)
        if k_dss == 91 and optimal:
            exact_hit = eps
            break
        if optimal and fallback is None:
            fallback = (eps, k_dss, int(np.argmin(costs)))
    if exact_hit is not None:
        verdict(4, True, f"91 all-Z + 9 double-Bell at eps={exact_hit}, brute-force optimal")
    else:
        verdict(4, fallback is not None,
                f"no grid point gives 91/9; fallback (eps, k_dss, k_brute) = {fallback}")


def test_criterion_5_h2_error(verdict):
    h = load_dataset("h2")
    start = time.perf_counter()
    gs = ground_state(h)
    result = derandomize(h, RunConfig(4, 1, shots=1000, weights="abs-coeff"), CostParams(0.9))
    plan = MeasurementPlan(result.specs, h.paulis)
    errs = h2_error_samples(plan, gs.state, gs.energy, np.array(h.coefficients), 500, 5)
    mean = float(np.mean(errs))
    elapsed = time.perf_counter() - start
    verdict(5, 0.007 <= mean <= 0.013 and elapsed < 1800, f"mean |error| {mean:.5f} over 500 sims, {elapsed:.1f}s")


@pytest.fixture(scope="module")
def hubbard_runs():
    h2 = square_hamiltonian(hubbard_hamiltonian(HubbardParams(6)))
    cache = {}

    def run(d):
        if d not in cache:
            start = time.perf_counter()
            r = derandomize_self_consistent(h2, 25, RunConfig(12, d, per_observable=25), CostParams(0.9))
            cache[d] = (r.shots, time.perf_counter() - start)
        return cache[d]

    return run


@pytest.mark.slow
def test_criterion_6_hubbard_d0(verdict, hubbard_runs):
    shots, elapsed = hubbard_runs(0)
    verdict(6, abs(shots - 1236) <= 0.05 * 1236, f"{shots} shots at d=0 (reference 1236), {elapsed:.0f}s")


@pytest.mark.slow
def test_criterion_7_hubbard_depths(verdict, hubbard_runs):
    runs = [hubbard_runs(d) for d in (0, 1, 2)]
    shots = [s for s, _ in runs]
    total = sum(t for _, t in runs)
    ok = shots[0] >= shots[1] >= shots[2] and shots[2] <= 0.8 * shots[0] and total < 7200
    verdict(7, ok, f"shots d=0,1,2 = {shots}, reduction {1 - shots[2] / shots[0]:.1%}, {total:.0f}s")


def test_criterion_8_naive_grouping(verdict):
    counts = {N: len(naive_grouping_bases(N)) for N in (4, 8, 12)}
    h2 = square_hamiltonian(hubbard_hamiltonian(HubbardParams(4)))
    bases = naive_grouping_bases(8)
    complete = all(any(basis_diagonalizes(b, p) for b in bases) for p in h2.paulis if p.x_mask | p.z_mask)
    ok = complete and all(c == 7 * N - 11 for N, c in counts.items())
    verdict(8, ok, f"counts {counts} vs 7N-11 {({N: 7 * N - 11 for N in counts})}, complete at N=8: {complete}")


def test_criterion_9_relaxed_dominance(verdict):
    rng = np.random.default_rng(909)
    bad = []
    for i in range(20):
        n, d = int(rng.integers(2, 9)), int(rng.integers(0, 3))
        m = int(rng.integers(1, 21))
        terms = {}
        while len(terms) < m:
            p = random_pauli(rng, n)
            terms[p.masks] = p
            if len(terms) >= 4**n - 1:
                break
        paulis = WeightedPauliSet.from_terms([(p, 1.0) for p in terms.values()])
        shots = int(rng.integers(1, 8))
        dss, shallow = relaxed_dominates_shallow_check(
            paulis, RunConfig(n, d, shots=shots, relaxed=True), CostParams(float(rng.uniform(0.2, 1.0)))
        )
        if not dss <= shallow:
            bad.append((i, dss, shallow))
    verdict(9, not bad, f"{20 - len(bad)}/20 instances with relaxed cost <= shallow cost")


def _guarantee_instance():
    rng = np.random.default_rng(1010)
    state = StateVector.random(3, rng)
    strings = ["ZZI", "XXI", "IYY", "XIZ", "ZXX", "YIY", "IZZ", "XYZ"]
    paulis = WeightedPauliSet.from_terms([(PauliString.from_string(s), 1.0) for s in strings])
    truth = np.array([expectation(p, state) for p in paulis.paulis])
    return state, paulis, truth


def _simulate_estimates(plan, state, runs, seed):
    cdfs, rows = outcome_distributions(plan.circuits, state)
    rng = make_rng(seed)
    shifts = np.arange(state.n - 1, -1, -1)
    idx_all = np.arange(len(plan.circuits))
    out = np.empty((runs, len(plan.paulis)))
    for r in range(runs):
        idx = sample_indices(cdfs, rows, rng)
        bits = ((idx[:, None] >> shifts) & 1).astype(np.uint8)
        out[r], _ = plan.estimates(idx_all, bits)
    return out


def test_criterion_10_guarantee_coverage(verdict):
    state, paulis, truth = _guarantee_instance()
    lines, ok = [], True
    for eps in (0.3, 0.5):
        result = derandomize(paulis, RunConfig(3, 1, shots=400), CostParams(eps))
        plan = MeasurementPlan(result.specs, paulis.paulis)
        est = _simulate_estimates(plan, state, 2000, seed=int(eps * 10))
        freq = float(np.mean(np.any(np.abs(est - truth) > eps, axis=1)))
        ok &= freq <= result.cost
        lines.append(f"eps={eps}: failure rate {freq:.4f} <= cost {result.cost:.4f}")
    verdict(10, ok, "; ".join(lines))


def test_criterion_11_variance_bound(verdict):
    state, paulis, _ = _guarantee_instance()
    result = derandomize(paulis, RunConfig(3, 1, shots=400), CostParams(0.3))
    plan = MeasurementPlan(result.specs, paulis.paulis)
    est = _simulate_estimates(plan, state, 5000, seed=11)
    var = est.var(axis=0, ddof=1)
    bound = result.shots / plan.hits
    verdict(11, bool(np.all(var <= bound)), f"max variance/bound ratio {float(np.max(var / bound)):.3g}")


def test_criterion_12_hubbard_square_terms(verdict):
    start = time.perf_counter()
    h2 = square_hamiltonian(hubbard_hamiltonian(HubbardParams(100)))
    elapsed = time.perf_counter() - start
    verdict(12, 2.3e5 <= len(h2) <= 2.5e5 and elapsed < 300, f"{len(h2)} terms, {elapsed:.1f}s")
