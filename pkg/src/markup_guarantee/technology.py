"""Cost-side and demand-side primitives.

Quality discrimination uses convex costs (iso-elastic or general convex with
a declared elasticity bound); quantity discrimination uses concave buyer
utilities with linear production cost normalized to 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .quadrature import adaptive_quad, quad_to_inf

__all__ = [
    "CostValidationError",
    "RootFindError",
    "IsoElasticCost",
    "GeneralConvexCost",
    "PolynomialCost",
    "SeparableQuantityUtility",
    "NonlinearDemandModel",
    "pointwise_elasticity",
    "efficient_quality",
    "demand",
    "demand_elasticity",
    "cost_from_spec",
    "quantity_model_from_spec",
]


class CostValidationError(ValueError):
    pass


class RootFindError(RuntimeError):
    pass


@dataclass(frozen=True)
class IsoElasticCost:
    """c(q) = q^eta / eta with constant pointwise elasticity eta in (1, inf)."""

    eta: float

    def __post_init__(self):
        if self.eta <= 1.0:
            raise ValueError("iso-elastic cost needs eta > 1")

    def c(self, q):
        q = np.asarray(q, dtype=float)
        return q ** self.eta / self.eta

    def c_prime(self, q):
        q = np.asarray(q, dtype=float)
        return q ** (self.eta - 1.0)

    def c_double_prime(self, q):
        q = np.asarray(q, dtype=float)
        return (self.eta - 1.0) * q ** (self.eta - 2.0)

    @property
    def eta_bar(self):
        return self.eta

    def elasticity(self, q):
        return self.eta

    def efficient_quality(self, v):
        v = np.asarray(v, dtype=float)
        return v ** (1.0 / (self.eta - 1.0))

    def to_spec(self):
        return {"kind": "iso_elastic", "eta": self.eta}


def _monotone_root(g, target, lo=0.0, hi=None, rel_tol=1e-12, max_iter=100,
                   g_prime=None):
    """Solve g(q) = target for nondecreasing g: bracket, bisect, Newton polish."""
    if hi is None:
        hi = max(1.0, 2.0 * lo + 1.0)
        for _ in range(200):
            if g(hi) >= target:
                break
            lo, hi = hi, hi * 2.0
        else:
            raise RootFindError(
                f"marginal evaluator never reaches {target!r} on the search interval")
    a, b = float(lo), float(hi)
    for _ in range(80):
        mid = 0.5 * (a + b)
        if g(mid) < target:
            a = mid
        else:
            b = mid
    q = 0.5 * (a + b)
    if g_prime is not None:
        for _ in range(max_iter):
            d = g_prime(q)
            if d <= 0:
                break
            step = (g(q) - target) / d
            q_new = q - step
            if not (a <= q_new <= b):
                break
            q = q_new
            if abs(step) <= rel_tol * max(1.0, abs(q)):
                break
    return q


@dataclass(frozen=True)
class GeneralConvexCost:
    """Convex cost with convex marginal (c''' >= 0) and bounded elasticity.

    Validation is best-effort: c''' >= 0 and eta(q) <= eta_bar are checked by
    finite differences on a geometric probe grid, which cannot certify the
    conditions globally.
    """

    c: Callable
    c_prime: Callable
    c_double_prime: Optional[Callable] = None
    eta_bar: float = 2.0
    q_min: float = 1e-4
    q_max: float = 1e4
    validate: bool = True

    def __post_init__(self):
        if self.eta_bar <= 1.0:
            raise CostValidationError("declared elasticity bound must exceed 1")
        if self.validate:
            self._run_validation()

    def _run_validation(self):
        grid = np.geomspace(self.q_min, self.q_max, 256)
        c0 = np.asarray(self.c(grid), dtype=float)
        if abs(float(self.c(0.0))) > 1e-12:
            raise CostValidationError("cost must satisfy c(0) = 0")
        cp = np.asarray(self.c_prime(grid), dtype=float)
        if np.any(np.diff(cp) < -1e-10 * np.maximum(1.0, np.abs(cp[:-1]))):
            raise CostValidationError("marginal cost must be nondecreasing")
        # c''' >= 0 via second differences of c' on the probe grid
        h = grid * 1e-4
        cpp = (np.asarray(self.c_prime(grid + h)) - np.asarray(self.c_prime(grid - h))) / (2 * h)
        if np.any(np.diff(cpp) < -1e-6 * np.maximum(1.0, np.abs(cpp[:-1]))):
            raise CostValidationError("marginal cost must be convex (c''' >= 0)")
        eta = cp * grid / c0
        if np.any(eta > self.eta_bar + 1e-8):
            raise CostValidationError(
                f"measured elasticity {eta.max():.6g} exceeds declared bound "
                f"{self.eta_bar:.6g}")

    def elasticity(self, q):
        q = np.asarray(q, dtype=float)
        return np.asarray(self.c_prime(q)) * q / np.asarray(self.c(q))

    def efficient_quality(self, v):
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        out = np.array([
            0.0 if x <= 0 else _monotone_root(self.c_prime, x,
                                              g_prime=self.c_double_prime)
            for x in v_arr])
        return out if np.ndim(v) else float(out[0])


class PolynomialCost(GeneralConvexCost):
    """Convex polynomial cost c(q) = sum coeffs[i] q^i (no constant term)."""

    def __init__(self, coeffs, eta_bar, q_min=1e-4, q_max=1e4, validate=True):
        coeffs = tuple(float(x) for x in coeffs)
        if coeffs and coeffs[0] != 0.0:
            raise CostValidationError("polynomial cost must have c(0) = 0")
        poly = np.polynomial.Polynomial(coeffs)
        d1 = poly.deriv(1)
        d2 = poly.deriv(2)
        super().__init__(c=poly, c_prime=d1, c_double_prime=d2,
                         eta_bar=eta_bar, q_min=q_min, q_max=q_max,
                         validate=validate)
        self.coeffs = coeffs

    def to_spec(self):
        return {"kind": "poly_cost", "coeffs": list(self.coeffs),
                "eta_bar": self.eta_bar}


def pointwise_elasticity(cost, q):
    """eta(q) = c'(q) q / c(q)."""
    if np.any(np.asarray(q) <= 0):
        raise ValueError("pointwise elasticity needs q > 0")
    if isinstance(cost, IsoElasticCost):
        return cost.eta
    val = cost.elasticity(q)
    return float(val) if np.ndim(val) == 0 or np.size(val) == 1 else val


def efficient_quality(v, cost):
    """Solve c'(q*) = v; the allocation the full-information seller provides."""
    if np.any(np.asarray(v) < 0):
        raise ValueError("value must be nonnegative")
    return cost.efficient_quality(v)


@dataclass(frozen=True)
class SeparableQuantityUtility:
    """h(v, q) = v (eta/(eta+1)) q^{(eta+1)/eta}, demand elasticity eta < -1.

    Marginal cost is normalized to 1.
    """

    eta: float

    def __post_init__(self):
        if self.eta >= -1.0:
            raise ValueError("demand elasticity must be below -1")

    def h(self, v, q):
        v = np.asarray(v, dtype=float)
        q = np.asarray(q, dtype=float)
        e = self.eta
        return v * (e / (e + 1.0)) * q ** ((e + 1.0) / e)

    def h_q(self, v, q):
        v = np.asarray(v, dtype=float)
        q = np.asarray(q, dtype=float)
        return v * q ** (1.0 / self.eta)

    def demand(self, v, p):
        v = np.asarray(v, dtype=float)
        p = np.asarray(p, dtype=float)
        return (p / v) ** self.eta

    def elasticity(self, v, p):
        return self.eta

    @property
    def eta_bar(self):
        return self.eta

    def efficient_surplus_per_value(self, v):
        """max_q h(v,q) - q = -v^{-eta} / (eta+1)."""
        v = np.asarray(v, dtype=float)
        return -(v ** -self.eta) / (self.eta + 1.0)

    def to_spec(self):
        return {"kind": "separable_quantity", "eta": self.eta}


@dataclass(frozen=True)
class NonlinearDemandModel:
    """Quantity-side demand D(v,p) = h_q^{-1}(v,p) with a band on elasticity.

    Either supply h (gross utility, concave in q) and let demand be obtained
    by monotone inversion, or supply D directly.  eta_fn may be omitted, in
    which case elasticities come from central differences in p.

    The elasticity band eta(v,p) in [eta_bar - 1, eta_bar] is enforced on a
    probe grid over p >= 1 only (= marginal cost).
    """

    eta_bar: float
    D: Optional[Callable] = None
    h: Optional[Callable] = None
    h_q: Optional[Callable] = None
    eta_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.eta_bar >= -1.0:
            raise ValueError("elasticity bound must be below -1")
        if self.D is None and self.h_q is None:
            raise ValueError("provide demand D or marginal utility h_q")

    def demand(self, v, p):
        if np.any(np.asarray(p) <= 0):
            raise ValueError("price must be positive")
        if self.D is not None:
            return np.asarray(self.D(v, p), dtype=float)
        # invert h_q(v, .) = p; h concave in q makes h_q decreasing
        v_arr, p_arr = np.broadcast_arrays(np.asarray(v, dtype=float),
                                           np.asarray(p, dtype=float))
        flat_v, flat_p = v_arr.ravel(), p_arr.ravel()
        out = np.empty_like(flat_v)
        for i, (vv, pp) in enumerate(zip(flat_v, flat_p)):
            g = lambda q: -float(self.h_q(vv, q))
            out[i] = _monotone_root(g, -pp, lo=1e-12, hi=None)
        return out.reshape(v_arr.shape) if v_arr.ndim else float(out[0])

    def elasticity(self, v, p):
        if self.eta_fn is not None:
            return np.asarray(self.eta_fn(v, p), dtype=float)
        p = np.asarray(p, dtype=float)
        step = np.maximum(1e-6, 1e-6 * p)
        d_hi = self.demand(v, p + step)
        d_lo = self.demand(v, p - step)
        d_mid = self.demand(v, p)
        return (d_hi - d_lo) / (2.0 * step) * p / d_mid

    def check_band(self, v_grid, p_grid=None):
        """Verify the elasticity band and monotonicity on a probe grid."""
        if p_grid is None:
            p_grid = np.geomspace(1.0, 1e3, 64)
        p_grid = np.asarray(p_grid, dtype=float)
        if np.any(p_grid < 1.0):
            raise ValueError("the band is only enforced on p >= 1")
        for v in np.atleast_1d(v_grid):
            e = np.asarray(self.elasticity(v, p_grid), dtype=float)
            if np.any(e >= 0):
                raise CostValidationError("demand elasticity must be negative")
            if np.any(e > self.eta_bar + 1e-8) or np.any(e < self.eta_bar - 1.0 - 1e-8):
                raise CostValidationError(
                    "demand elasticity leaves the band [eta_bar-1, eta_bar]")
            if np.any(np.diff(e) > 1e-8):
                raise CostValidationError(
                    "demand elasticity must be non-increasing in p")

    def surplus_per_value(self, v):
        """Efficient surplus for type v: integral of demand above cost."""
        return quad_to_inf(lambda p: self.demand(v, p), 1.0).value


def demand(model, v, p):
    """D(v, p); works for both separable and nonlinear demand models."""
    return model.demand(v, p)


def demand_elasticity(model, v, p):
    return model.elasticity(v, p)


def cost_from_spec(spec: dict):
    kind = spec.get("kind")
    if kind == "iso_elastic":
        return IsoElasticCost(eta=spec["eta"])
    if kind == "poly_cost":
        return PolynomialCost(coeffs=spec["coeffs"], eta_bar=spec["eta_bar"])
    raise ValueError(f"unknown cost kind {kind!r}")


def quantity_model_from_spec(spec: dict):
    kind = spec.get("kind")
    if kind == "separable_quantity":
        return SeparableQuantityUtility(eta=spec["eta"])
    raise ValueError(f"unknown quantity model kind {kind!r}")
