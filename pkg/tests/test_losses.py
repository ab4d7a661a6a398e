import dataclasses

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from mcid_hub.core.exceptions import BadParameterError, QuadratureError, UnknownLossError
from mcid_hub.core.losses import (
    HingeLoss,
    LogisticLoss,
    PsiDeltaLoss,
    PsiLoss,
    ZeroOneLoss,
    counterexample_spec,
    get_loss,
    loss_value,
    population_risk,
    psi_delta_dc_parts,
    surrogate_minimizer,
)
from mcid_hub.core.population import inconsistency_table
from mcid_hub.simulation.scenarios import Pop1

margins = st.floats(min_value=-50, max_value=50, allow_nan=False)


def test_zero_one_sign_convention():
    loss = ZeroOneLoss()
    assert loss(0.0) == 0.0
    assert loss(-1e-9) == 1.0
    assert list(loss(np.array([-1.0, 2.0]))) == [1.0, 0.0]


def test_psi_delta_values():
    loss = PsiDeltaLoss(0.5)
    assert loss(-1.0) == 1.0
    assert loss(0.0) == 1.0
    assert loss(0.25) == pytest.approx(0.5)
    assert loss(0.5) == 0.0
    assert loss(3.0) == 0.0


@given(u=margins, delta=st.floats(min_value=1e-3, max_value=10))
def test_psi_delta_bounded_and_dc_split(u, delta):
    value = loss_value(PsiDeltaLoss(delta), u)
    assert 0.0 <= value <= 1.0
    s1, s2 = psi_delta_dc_parts(delta, u)
    assert s1 - s2 == pytest.approx(value, abs=1e-9)


@given(u=margins)
def test_psi_delta_tends_to_zero_one(u):
    if abs(u) > 1e-3:
        assert PsiDeltaLoss(1e-4)(u) == ZeroOneLoss()(u)


def test_delta_validation():
    with pytest.raises(BadParameterError):
        PsiDeltaLoss(0.0)
    with pytest.raises(BadParameterError):
        PsiDeltaLoss(float("nan"))
    with pytest.raises(BadParameterError):
        psi_delta_dc_parts(-1.0, 0.0)


def test_get_loss():
    assert get_loss("Hinge") == HingeLoss()
    assert get_loss("psi-delta", delta=0.1) == PsiDeltaLoss(0.1)
    with pytest.raises(UnknownLossError):
        get_loss("squared")
    with pytest.raises(BadParameterError):
        get_loss("psi_delta")


def test_zero_one_population_risk():
    spec = Pop1().population_spec()
    assert population_risk(ZeroOneLoss(), spec, 0.0) == pytest.approx(0.25, abs=1e-8)
    assert population_risk(ZeroOneLoss(), spec, 1.0) == pytest.approx(0.5, abs=1e-8)


def test_psi_delta_risk_approaches_zero_one():
    spec = Pop1().population_spec()
    risks = [population_risk(PsiDeltaLoss(d), spec, 0.0) for d in (0.5, 0.1, 0.01)]
    assert risks[0] > risks[1] > risks[2]
    assert risks[2] == pytest.approx(0.25, abs=0.01)


def test_zero_one_minimizer_on_uniform_population():
    assert surrogate_minimizer(ZeroOneLoss(), Pop1().population_spec()) == pytest.approx(0.0, abs=1e-4)


def test_convex_surrogates_miss_ideal_threshold():
    rows = {row.loss: row for row in inconsistency_table()}
    assert rows["zero_one"].c_star == pytest.approx(0.0, abs=1e-9)
    assert abs(rows["zero_one"].gap) < 1e-3
    for name in ("hinge", "logistic", "psi"):
        assert abs(rows[name].gap) > 1e-3
    assert abs(rows["psi_delta(0.01)"].gap) < 1e-2


def test_quadrature_failure_is_reported():
    spec = dataclasses.replace(counterexample_spec(), tolerance=1e-300)
    with pytest.raises(QuadratureError):
        population_risk(HingeLoss(), spec, 0.3)


def test_population_risk_rejects_infinite_threshold():
    with pytest.raises(BadParameterError):
        population_risk(HingeLoss(), counterexample_spec(), float("inf"))


@pytest.mark.parametrize("loss", [ZeroOneLoss(), PsiDeltaLoss(0.3), HingeLoss(), LogisticLoss(), PsiLoss()], ids=repr)
@given(u=st.floats(min_value=-5, max_value=5, allow_nan=False))
def test_subgradient_matches_finite_differences(loss, u):
    assume(all(abs(u - k) > 1e-5 for k in loss.kinks()))
    h = 1e-7
    slope = (loss_value(loss, u + h) - loss_value(loss, u - h)) / (2 * h)
    assert loss.subgradient(u) == pytest.approx(slope, abs=1e-6)


def test_loss_value_on_arrays():
    u = np.array([-1.0, 0.05, 2.0])
    assert np.allclose(loss_value(PsiDeltaLoss(0.1), u), [1.0, 0.5, 0.0])
    assert loss_value(HingeLoss(), 0.25) == 0.75
