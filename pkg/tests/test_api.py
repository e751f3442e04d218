import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from derandshadows.api import DerandomizedShadows, check_paulis, check_records
from derandshadows.clifford import StateVector, expectation, ground_state
from derandshadows.errors import DimensionError, DomainError
from derandshadows.models import load_dataset
from derandshadows.pauli import parse_pauli


def test_params_roundtrip_and_clone():
    est = DerandomizedShadows(depth=2, shots=10, epsilon=0.4)
    params = est.get_params()
    assert params["depth"] == 2 and params["shots"] == 10 and params["epsilon"] == 0.4
    other = clone(est).set_params(depth=1)
    assert other.depth == 1 and est.depth == 2


def test_not_fitted():
    with pytest.raises(NotFittedError):
        DerandomizedShadows(shots=3).transform(["0"])


@pytest.mark.parametrize(
    "kwargs",
    [dict(shots=0), dict(), dict(shots=2, per_observable=2), dict(shots=2, epsilon=-1.0),
     dict(shots=2, depth=-1), dict(shots=2, order="random"), dict(per_observable=2, horizon=0)],
)
def test_param_validation(kwargs):
    with pytest.raises(DomainError):
        DerandomizedShadows(**kwargs).fit(["ZZ"])


def test_input_validation_helpers():
    s = check_paulis(["0.5 ZZ", (2.0, "XX"), parse_pauli("YY")])
    assert s.coefficients == [0.5, 2.0, 1.0]
    with pytest.raises(DomainError):
        check_paulis([])
    idx, bits = check_records(["01", "10"], 2, 2)
    assert idx.tolist() == [0, 1] and bits.tolist() == [[0, 1], [1, 0]]
    with pytest.raises(DimensionError):
        check_records(["01"], 2, 2)
    with pytest.raises(DimensionError):
        check_records([(5, "01")], 2, 2)


def test_fit_transform_predict_pipeline():
    h = load_dataset("h2")
    gs = ground_state(h)
    est = DerandomizedShadows(depth=1, shots=200, weights="abs-coeff", epsilon=0.9).fit(h)
    assert len(est.circuits_) == 200 and est.cost_ > 0
    recs = est.simulate(gs.state, seed=3)
    vals = est.transform(recs)
    assert vals.shape == (len(h),) and np.all(np.abs(vals) <= 1)
    assert est.predict(recs) == pytest.approx(float(np.dot(h.coefficients, vals)))
    assert est.score(recs, gs.energy) <= 0
    assert est.predict_bound() == pytest.approx(0.9 * h.one_norm())
    report = est.report(recs)
    assert report.shots == 200
    with pytest.raises(DimensionError):
        est.simulate(StateVector.zero(3))


def test_coverage_mode_and_relaxed():
    paulis = ["ZZI", "XXI", "IYY"]
    est = DerandomizedShadows(depth=1, per_observable=5, horizon="self-consistent").fit(paulis)
    assert min(est.hitting_counts_.values()) >= 5
    relaxed = DerandomizedShadows(depth=1, shots=4, relaxed=True).fit(paulis)
    if relaxed.circuits_ is None:
        with pytest.raises(DomainError):
            relaxed.transform(["000"] * 4)


def test_transform_is_exact_on_stabilizer_state():
    est = DerandomizedShadows(depth=0, shots=6).fit(["ZZ", "ZI"])
    recs = est.simulate(StateVector.zero(2), seed=0)
    assert est.transform(recs).tolist() == [1.0, 1.0]
