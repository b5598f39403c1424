import json
import math

import numpy as np
import pytest

from markup_guarantee.distributions import (Binary, Discrete, Mixture, Pareto,
                                            PointMass, Power, TruncatedPareto,
                                            Uniform)
from markup_guarantee.functionals import (InfiniteSurplusError, SurplusReport,
                                          consumer_surplus, efficient_surplus,
                                          expectation, full_report,
                                          mechanism_profit,
                                          quantity_surplus_report,
                                          survival_integral)
from markup_guarantee.mechanisms import guarantee_mechanism
from markup_guarantee.technology import (IsoElasticCost, PolynomialCost,
                                         SeparableQuantityUtility)


class TestExpectation:
    def test_uniform_mean(self):
        val, err = expectation(Uniform(0.0, 2.0), lambda v: np.asarray(v))
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_atom_contributions_are_exact(self):
        F = Binary(1.0, 3.0, 0.25)
        val, _ = expectation(F, lambda v: np.asarray(v) ** 2)
        assert val == pytest.approx(0.75 * 1.0 + 0.25 * 9.0)

    def test_pareto_tail(self):
        F = Pareto(3.0)
        val, _ = expectation(F, lambda v: np.asarray(v, dtype=float))
        assert val == pytest.approx(1.5, rel=1e-9)  # alpha/(alpha-1)

    def test_mixture_combines(self):
        F = Mixture(components=(Uniform(0.0, 1.0), PointMass(2.0)),
                    weights=(0.5, 0.5))
        val, _ = expectation(F, lambda v: np.asarray(v, dtype=float))
        assert val == pytest.approx(0.5 * 0.5 + 0.5 * 2.0)


class TestSurvivalIntegral:
    def test_uniform_closed_form(self):
        # int_0^1 (1 - v) dv = 1/2
        val, _ = survival_integral(Uniform(0.0, 1.0), lambda v: np.ones_like(np.asarray(v, dtype=float)))
        assert val == pytest.approx(0.5, abs=1e-10)

    def test_binary_steps(self):
        F = Binary(1.0, 2.0, 0.3)
        # survival: 1 on [0,1), 0.3 on [1,2)
        val, _ = survival_integral(F, lambda v: np.ones_like(np.asarray(v, dtype=float)))
        assert val == pytest.approx(1.0 + 0.3)

    def test_heavy_tail(self):
        F = Pareto(2.5)
        val, _ = survival_integral(F, lambda v: np.ones_like(np.asarray(v, dtype=float)))
        # 1 + int_1^inf v^{-2.5} = 1 + 1/1.5
        assert val == pytest.approx(1.0 + 1.0 / 1.5, rel=1e-9)


class TestEfficientSurplus:
    def test_iso_elastic_closed_form(self):
        # S = (1/2) E[v^2] for eta = 2
        S, err = efficient_surplus(Uniform(0.0, 1.0), IsoElasticCost(eta=2.0))
        assert S == pytest.approx(1.0 / 6.0, rel=1e-12)
        assert err == 0.0

    def test_divergence_at_boundary(self):
        with pytest.raises(InfiniteSurplusError):
            efficient_surplus(Pareto(2.0), IsoElasticCost(eta=2.0))

    def test_divergent_moment(self):
        with pytest.raises(InfiniteSurplusError):
            efficient_surplus(Pareto(2.1), IsoElasticCost(eta=1.5))

    def test_general_convex_matches_iso_elastic(self):
        iso = IsoElasticCost(eta=2.0)
        poly = PolynomialCost(coeffs=[0.0, 0.0, 0.5], eta_bar=2.0)
        F = Uniform(0.2, 1.0)
        S_iso, _ = efficient_surplus(F, iso)
        S_poly, _ = efficient_surplus(F, poly)
        assert S_poly == pytest.approx(S_iso, rel=1e-8)


class TestProfitAndSurplus:
    def test_point_mass_hand_computation(self):
        # v = 1, eta = 2, M*: Q = 1/2, T = 1/4; Pi = 1/4 - 1/8 = 1/8, S = 1/2
        F = PointMass(1.0)
        cost = IsoElasticCost(eta=2.0)
        M = guarantee_mechanism(2.0)
        Pi, _ = mechanism_profit(F, M, cost)
        U, _ = consumer_surplus(F, M)
        S, _ = efficient_surplus(F, cost)
        assert S == pytest.approx(0.5)
        assert Pi == pytest.approx(0.125, abs=1e-9)
        assert U == pytest.approx(0.25, abs=1e-9)

    def test_full_report_ratios(self):
        rep = full_report(Uniform(0.0, 1.0), guarantee_mechanism(2.0),
                          IsoElasticCost(eta=2.0))
        assert rep.pi_ratio == pytest.approx(0.25, abs=1e-9)
        assert rep.u_ratio == pytest.approx(0.5, abs=1e-9)
        assert rep.S == pytest.approx(1.0 / 6.0)

    def test_feasibility_guard(self):
        # Pi + U equals E[vQ - c(Q)], so no genuine mechanism can violate
        # Pi + U <= S; force a violation with an inconsistent cost whose
        # production expense vanishes while S keeps its closed form.
        class FreeLunchCost(IsoElasticCost):
            def c(self, q):
                return -np.asarray(q, dtype=float)

        with pytest.raises(ArithmeticError):
            full_report(Uniform(0.0, 1.0), guarantee_mechanism(2.0),
                        FreeLunchCost(eta=2.0))

    def test_report_serialization(self):
        rep = full_report(Uniform(0.0, 1.0), guarantee_mechanism(2.0),
                          IsoElasticCost(eta=2.0))
        payload = json.loads(rep.to_json())
        assert set(payload) == set(SurplusReport.csv_header)
        row = rep.csv_row()
        assert len(row) == len(SurplusReport.csv_header)
        assert float(row[3]) == pytest.approx(rep.pi_ratio)


class TestQuantityReport:
    def test_separable_quarter_share(self):
        model = SeparableQuantityUtility(eta=-2.0)
        for F in (Uniform(0.5, 2.0), PointMass(1.0), Binary(1.0, 2.0, 0.3)):
            rep = quantity_surplus_report(F, model, p_star=2.0)
            assert rep.pi_ratio == pytest.approx(0.25, abs=1e-9)

    def test_pointmass_hand_values(self):
        # v=1, eta=-2: S = 1, D(1,2) = 1/4, Pi = 1/4; U = int_2^inf p^-2 = 1/2
        model = SeparableQuantityUtility(eta=-2.0)
        rep = quantity_surplus_report(PointMass(1.0), model, p_star=2.0)
        assert rep.S == pytest.approx(1.0, abs=1e-9)
        assert rep.Pi == pytest.approx(0.25, abs=1e-9)
        assert rep.U == pytest.approx(0.5, abs=1e-9)
