import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from markup_guarantee.technology import (CostValidationError, IsoElasticCost,
                                         GeneralConvexCost,
                                         NonlinearDemandModel, PolynomialCost,
                                         SeparableQuantityUtility,
                                         cost_from_spec, demand_elasticity,
                                         efficient_quality,
                                         pointwise_elasticity,
                                         quantity_model_from_spec)


class TestIsoElastic:
    def test_quadratic_case(self):
        cost = IsoElasticCost(eta=2.0)
        assert cost.c(2.0) == pytest.approx(2.0)
        assert cost.c_prime(3.0) == pytest.approx(3.0)
        assert cost.efficient_quality(5.0) == pytest.approx(5.0)

    def test_elasticity_is_constant(self):
        cost = IsoElasticCost(eta=3.0)
        for q in (0.1, 1.0, 7.0):
            assert pointwise_elasticity(cost, q) == pytest.approx(3.0)

    def test_rejects_eta_at_most_one(self):
        with pytest.raises(ValueError):
            IsoElasticCost(eta=1.0)

    @given(st.floats(min_value=1.2, max_value=8.0),
           st.floats(min_value=0.1, max_value=50.0))
    @settings(max_examples=60, deadline=None)
    def test_efficient_quality_solves_foc(self, eta, v):
        cost = IsoElasticCost(eta=eta)
        q = cost.efficient_quality(v)
        assert float(cost.c_prime(q)) == pytest.approx(v, rel=1e-9)


class TestGeneralConvex:
    def test_polynomial_matches_iso_elastic(self):
        # q^2/2 is iso-elastic with eta = 2
        poly = PolynomialCost(coeffs=[0.0, 0.0, 0.5], eta_bar=2.0)
        iso = IsoElasticCost(eta=2.0)
        q = np.geomspace(0.01, 10.0, 30)
        np.testing.assert_allclose(poly.c(q), iso.c(q), rtol=1e-12)
        np.testing.assert_allclose(poly.elasticity(q), 2.0, rtol=1e-12)

    def test_mixed_polynomial_elasticity_band(self):
        cost = PolynomialCost(coeffs=[0.0, 0.0, 0.5, 0.0, 0.25], eta_bar=4.0)
        q = np.geomspace(0.01, 100.0, 50)
        eta = cost.elasticity(q)
        assert np.all(eta <= 4.0 + 1e-9)
        assert np.all(eta >= 2.0 - 1e-9)

    def test_validation_rejects_declared_bound_violation(self):
        with pytest.raises(CostValidationError):
            # true elasticity reaches 4 but the declared bound is 3
            PolynomialCost(coeffs=[0.0, 0.0, 0.5, 0.0, 0.25], eta_bar=3.0)

    def test_validation_rejects_concave_marginal(self):
        with pytest.raises(CostValidationError):
            GeneralConvexCost(
                c=lambda q: np.asarray(q, dtype=float) ** 1.5 / 1.5,
                c_prime=lambda q: np.asarray(q, dtype=float) ** 0.5,
                eta_bar=2.0)

    def test_validation_rejects_nonzero_origin(self):
        with pytest.raises(CostValidationError):
            PolynomialCost(coeffs=[1.0, 0.0, 0.5], eta_bar=2.0)

    def test_efficient_quality_general(self):
        cost = PolynomialCost(coeffs=[0.0, 0.0, 0.5, 0.0, 0.25], eta_bar=4.0)
        v = 3.0
        q = efficient_quality(v, cost)
        assert float(cost.c_prime(q)) == pytest.approx(v, rel=1e-9)


class TestQuantitySide:
    def test_separable_demand_closed_form(self):
        m = SeparableQuantityUtility(eta=-2.0)
        # D(v, p) = (p/v)^eta = (v/p)^2
        assert float(m.demand(2.0, 4.0)) == pytest.approx(0.25)
        assert demand_elasticity(m, 1.0, 3.0) == -2.0

    def test_separable_marginal_utility_inverts_demand(self):
        m = SeparableQuantityUtility(eta=-3.0)
        v, p = 1.5, 2.5
        q = float(m.demand(v, p))
        assert float(m.h_q(v, q)) == pytest.approx(p, rel=1e-12)

    def test_efficient_surplus_per_value(self):
        m = SeparableQuantityUtility(eta=-2.0)
        # -v^2/(eta+1) with eta = -2 gives v^2
        assert float(m.efficient_surplus_per_value(3.0)) == pytest.approx(9.0)

    def test_nonlinear_band_check_passes_for_drifting_elasticity(self):
        D = lambda v, p: 2.0 * np.asarray(v, dtype=float) / (
            np.asarray(p, dtype=float) ** 2 * (1.0 + np.asarray(p, dtype=float)))
        m = NonlinearDemandModel(eta_bar=-2.0, D=D)
        m.check_band(v_grid=[0.5, 1.0, 4.0])
        e = float(np.asarray(m.elasticity(1.0, 1.0)))
        assert e == pytest.approx(-2.5, abs=1e-4)

    def test_nonlinear_band_check_rejects_out_of_band(self):
        D = lambda v, p: np.asarray(v, dtype=float) * np.asarray(p, dtype=float) ** -5.0
        m = NonlinearDemandModel(eta_bar=-2.0, D=D)
        with pytest.raises(CostValidationError):
            m.check_band(v_grid=[1.0])

    def test_demand_from_marginal_utility_inversion(self):
        m = NonlinearDemandModel(
            eta_bar=-2.0,
            h_q=lambda v, q: np.asarray(v, dtype=float) * np.asarray(q, dtype=float) ** -0.5)
        # h_q = v q^{-1/2} = p  =>  q = (v/p)^2
        assert float(m.demand(2.0, 1.0)) == pytest.approx(4.0, rel=1e-8)


def test_cost_specs_round_trip():
    iso = cost_from_spec({"kind": "iso_elastic", "eta": 2.5})
    assert iso.eta == 2.5
    poly = cost_from_spec({"kind": "poly_cost",
                           "coeffs": [0.0, 0.0, 0.5, 0.0, 0.25],
                           "eta_bar": 4.0})
    assert poly.eta_bar == 4.0
    sep = quantity_model_from_spec({"kind": "separable_quantity", "eta": -2.0})
    assert sep.eta == -2.0
    with pytest.raises(ValueError):
        cost_from_spec({"kind": "nope"})
