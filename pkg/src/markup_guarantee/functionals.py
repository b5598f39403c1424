"""Surplus functionals: efficient surplus, mechanism profit, consumer surplus.

Expectations are split into the absolutely continuous part (adaptive
quadrature over the density segments, tails folded by u = 1/v) and the atom
sum, which is added exactly.  Profit follows
    Pi = E[v Q(v) - c(Q(v))] - int_0^vbar Q(v) (1 - F(v)) dv
and consumer surplus is the second integral alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from typing import Callable, Optional

import numpy as np

from .distributions import ValueDistribution
from .mechanisms import DirectMechanism
from .quadrature import adaptive_quad, quad_to_inf
from .technology import IsoElasticCost

__all__ = [
    "InfiniteSurplusError",
    "SurplusReport",
    "expectation",
    "survival_integral",
    "efficient_surplus",
    "mechanism_profit",
    "consumer_surplus",
    "full_report",
    "quantity_surplus_report",
]

# feasibility slack multiplier over the summed quadrature errors
_FEASIBILITY_HEADROOM = 10.0
_FEASIBILITY_FLOOR = 1e-9


class InfiniteSurplusError(ValueError):
    """Tail condition fails: the efficient surplus diverges."""


def _merge_breakpoints(a, b, pts):
    inner = sorted(p for p in pts if a < p < b)
    return [a, *inner, b]


def expectation(F: ValueDistribution, g: Callable, breakpoints=()):
    """E[g(v)] = integral of g f over density segments + atom sum.

    Returns (value, error_estimate).
    """
    value = 0.0
    err = 0.0
    for (a, b) in F.density_segments():
        tail = math.isinf(b)
        edges = [a] + sorted(p for p in breakpoints
                             if a < p and (tail or p < b))
        if not tail:
            edges.append(b)
        integrand = lambda v: np.asarray(g(v), dtype=float) * np.asarray(F.pdf(v), dtype=float)
        for lo_e, hi_e in zip(edges[:-1], edges[1:]):
            res = adaptive_quad(integrand, lo_e, hi_e)
            value += res.value
            err += res.error
        if tail:
            res = quad_to_inf(integrand, edges[-1])
            value += res.value
            err += res.error
    for loc, mass in F.atoms():
        value += mass * float(np.atleast_1d(np.asarray(g(loc), dtype=float))[0])
    return value, err


def survival_integral(F: ValueDistribution, g: Callable, breakpoints=()):
    """int_0^vbar g(v) (1 - F(v)) dv.  Returns (value, error_estimate)."""
    lo, hi = F.support
    pts = {0.0, lo}
    pts.update(p for p in breakpoints if 0 < p and (math.isinf(hi) or p < hi))
    for a, b in F.density_segments():
        pts.add(a)
        if not math.isinf(b):
            pts.add(b)
    for loc, _ in F.atoms():
        pts.add(loc)
    tail = math.isinf(hi)
    if not tail:
        pts.add(hi)
    edges = sorted(p for p in pts if not math.isinf(p))

    integrand = lambda v: np.asarray(g(v), dtype=float) * np.asarray(
        F.sf(v), dtype=float)
    value = 0.0
    err = 0.0
    for a, b in zip(edges, edges[1:]):
        res = adaptive_quad(integrand, a, b)
        value += res.value
        err += res.error
    if tail:
        res = quad_to_inf(integrand, edges[-1])
        value += res.value
        err += res.error
    return value, err


def efficient_surplus(F: ValueDistribution, cost) -> tuple:
    """First-best surplus S_F = E[max_q v q - c(q)].  Returns (value, error).

    For iso-elastic cost this is ((eta-1)/eta) E[v^{eta/(eta-1)}], evaluated
    in closed form when the distribution provides a closed moment.
    """
    if isinstance(cost, IsoElasticCost):
        eta = cost.eta
        if not F.tail_condition(eta):
            raise InfiniteSurplusError(
                "tail condition fails at this elasticity: S_F = inf "
                "(at the boundary shape, pass an explicit truncation k)")
        r = eta / (eta - 1.0)
        moment = F.power_moment(r)
        if math.isinf(moment):
            raise InfiniteSurplusError("E[v^{eta/(eta-1)}] diverges")
        return ((eta - 1.0) / eta) * moment, 0.0

    # general convex cost: per-value surplus via the efficient quality
    def s_of_v(v):
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        q = np.asarray(cost.efficient_quality(v_arr), dtype=float)
        return v_arr * q - np.asarray(cost.c(q), dtype=float)

    return expectation(F, s_of_v)


def mechanism_profit(F: ValueDistribution, M: DirectMechanism, cost) -> tuple:
    """Expected profit of menu M against F.  Returns (value, error)."""
    def margin(v):
        v_arr = np.asarray(v, dtype=float)
        q = np.asarray(M.Q(v_arr), dtype=float)
        return v_arr * q - np.asarray(cost.c(q), dtype=float)

    first, e1 = expectation(F, margin, breakpoints=M.breakpoints)
    second, e2 = survival_integral(F, M.Q, breakpoints=M.breakpoints)
    return first - second, e1 + e2


def consumer_surplus(F: ValueDistribution, M: DirectMechanism) -> tuple:
    """U = int Q(v)(1 - F(v)) dv (envelope form).  Returns (value, error)."""
    return survival_integral(F, M.Q, breakpoints=M.breakpoints)


@dataclass(frozen=True)
class SurplusReport:
    S: float
    Pi: float
    U: float
    pi_ratio: float
    u_ratio: float
    err_S: float
    err_Pi: float
    err_U: float

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    def csv_row(self):
        return [f"{x:.17g}" for x in
                (self.S, self.Pi, self.U, self.pi_ratio, self.u_ratio,
                 self.err_S, self.err_Pi, self.err_U)]

    csv_header = ("S", "Pi", "U", "pi_ratio", "u_ratio",
                  "err_S", "err_Pi", "err_U")


def full_report(F: ValueDistribution, M: DirectMechanism, cost) -> SurplusReport:
    """Bundle (S, Pi, U) with normalized ratios and quadrature errors."""
    S, err_S = efficient_surplus(F, cost)
    Pi, err_Pi = mechanism_profit(F, M, cost)
    U, err_U = consumer_surplus(F, M)
    slack = max(_FEASIBILITY_HEADROOM * (err_S + err_Pi + err_U),
                _FEASIBILITY_FLOOR * max(1.0, S))
    if Pi + U > S + slack:
        raise ArithmeticError(
            f"feasibility violated beyond quadrature noise: Pi+U={Pi + U!r} "
            f"> S={S!r}")
    return SurplusReport(S=S, Pi=Pi, U=U, pi_ratio=Pi / S, u_ratio=U / S,
                         err_S=err_S, err_Pi=err_Pi, err_U=err_U)


def quantity_surplus_report(F: ValueDistribution, model, p_star: float) -> SurplusReport:
    """Surplus report for quantity discrimination under a uniform price.

    Profit per value is D(v, p*)(p* - 1); efficient surplus integrates
    demand above the unit cost; consumer surplus is the usual triangle
    int_{p*}^inf D(v, p) dp.
    """
    def s_of_v(v):
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        if hasattr(model, "efficient_surplus_per_value"):
            return model.efficient_surplus_per_value(v_arr)
        return np.array([model.surplus_per_value(x) for x in v_arr])

    def pi_of_v(v):
        v_arr = np.asarray(v, dtype=float)
        return np.asarray(model.demand(v_arr, p_star), dtype=float) * (p_star - 1.0)

    def u_of_v(v):
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        return np.array([
            quad_to_inf(lambda p: model.demand(x, p), p_star).value
            for x in v_arr])

    S, err_S = expectation(F, s_of_v)
    Pi, err_Pi = expectation(F, pi_of_v)
    U, err_U = expectation(F, u_of_v)
    return SurplusReport(S=S, Pi=Pi, U=U, pi_ratio=Pi / S, u_ratio=U / S,
                         err_S=err_S, err_Pi=err_Pi, err_U=err_U)
