"""Willingness-to-pay distributions, including the extremal Pareto families.

Every distribution exposes a vectorized CDF and density, an explicit list of
atoms (location, mass), a quantile function, and the open intervals on which
the density is smooth.  Atoms are first-class: integrators never see a step
smeared into a narrow density.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quadrature import adaptive_quad, quad_to_inf

__all__ = [
    "ValueDistribution",
    "Pareto",
    "TruncatedPareto",
    "Uniform",
    "Binary",
    "Power",
    "Discrete",
    "PointMass",
    "Mixture",
    "density_or_mass",
    "tail_condition",
    "minimax_distribution",
    "distribution_from_spec",
]

_MASS_TOL = 1e-12


class ValueDistribution:
    """Base class for buyer value laws F on [v_lo, v_hi] (v_hi may be inf)."""

    # --- interface -------------------------------------------------------
    @property
    def support(self):
        raise NotImplementedError

    def cdf(self, v):
        raise NotImplementedError

    def pdf(self, v):
        """Density of the absolutely continuous part (0 elsewhere)."""
        raise NotImplementedError

    def sf(self, v):
        """Survival function 1 - F(v); override where 1 - cdf cancels."""
        return 1.0 - np.asarray(self.cdf(v), dtype=float)

    def atoms(self):
        """Mass points as a tuple of (location, mass) pairs."""
        return ()

    def density_segments(self):
        """Open intervals where the density is smooth and positive."""
        return ()

    def quantile(self, u):
        raise NotImplementedError

    def tail_condition(self, eta):
        """True iff (1 - F(v)) v^{eta/(eta-1)} -> 0, i.e. finite surplus."""
        raise NotImplementedError

    def power_moment(self, r):
        """E[v^r]; closed form where available, quadrature otherwise."""
        value = 0.0
        for (a, b) in self.density_segments():
            f = lambda v: np.asarray(v) ** r * self.pdf(v)
            if math.isinf(b):
                value += quad_to_inf(f, a).value
            else:
                value += adaptive_quad(f, a, b).value
        for loc, mass in self.atoms():
            value += mass * loc ** r
        return value

    def to_spec(self):
        raise NotImplementedError

    # --- helpers ---------------------------------------------------------
    def sample(self, rng, size=None):
        """Inverse-CDF sampling."""
        return self.quantile(rng.uniform(size=size))

    def __repr__(self):
        fields = ", ".join(f"{k}={v!r}" for k, v in self.to_spec().items()
                           if k != "kind")
        return f"{type(self).__name__}({fields})"


@dataclass(frozen=True, repr=False)
class Pareto(ValueDistribution):
    """Pareto law on [1, inf): F(v) = 1 - v^{-alpha}."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("Pareto shape must be positive")

    @property
    def support(self):
        return (1.0, math.inf)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v < 1.0, 0.0, 1.0 - np.maximum(v, 1.0) ** -self.alpha)

    def sf(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v < 1.0, 1.0, np.maximum(v, 1.0) ** -self.alpha)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v < 1.0, 0.0, self.alpha * np.maximum(v, 1.0) ** (-self.alpha - 1.0))

    def density_segments(self):
        return ((1.0, math.inf),)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return (1.0 - u) ** (-1.0 / self.alpha)

    def tail_condition(self, eta):
        # strict inequality: at alpha = eta/(eta-1) the product is identically 1
        return self.alpha > eta / (eta - 1.0)

    def power_moment(self, r):
        if r >= self.alpha:
            return math.inf
        return self.alpha / (self.alpha - r)

    def to_spec(self):
        return {"kind": "pareto", "alpha": self.alpha}


@dataclass(frozen=True, repr=False)
class TruncatedPareto(ValueDistribution):
    """Pareto below k, with the residual tail mass k^{-alpha} parked at k."""

    alpha: float
    k: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("shape must be positive")
        if self.k <= 1.0:
            raise ValueError("truncation point must exceed 1")

    @property
    def support(self):
        return (1.0, self.k)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        inner = 1.0 - np.maximum(v, 1.0) ** -self.alpha
        return np.where(v < 1.0, 0.0, np.where(v >= self.k, 1.0, inner))

    def sf(self, v):
        v = np.asarray(v, dtype=float)
        tail = np.maximum(v, 1.0) ** -self.alpha
        return np.where(v < 1.0, 1.0, np.where(v >= self.k, 0.0, tail))

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        dens = self.alpha * np.maximum(v, 1.0) ** (-self.alpha - 1.0)
        return np.where((v < 1.0) | (v >= self.k), 0.0, dens)

    def atoms(self):
        return ((self.k, self.k ** -self.alpha),)

    def density_segments(self):
        return ((1.0, self.k),)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        cont = np.minimum(u, 1.0 - 1e-300)
        q = (1.0 - cont) ** (-1.0 / self.alpha)
        return np.where(u >= 1.0 - self.k ** -self.alpha, self.k, np.minimum(q, self.k))

    def tail_condition(self, eta):
        return True

    def power_moment(self, r):
        a, k = self.alpha, self.k
        tail = k ** (r - a)
        if abs(a - r) < 1e-14:
            return a * math.log(k) + tail
        return a * (1.0 - tail) / (a - r) + tail

    def to_spec(self):
        return {"kind": "truncated_pareto", "alpha": self.alpha, "k": self.k}


@dataclass(frozen=True, repr=False)
class Uniform(ValueDistribution):
    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b):
            raise ValueError("need 0 <= a < b")

    @property
    def support(self):
        return (self.a, self.b)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.clip((v - self.a) / (self.b - self.a), 0.0, 1.0)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        inside = (v >= self.a) & (v <= self.b)
        return np.where(inside, 1.0 / (self.b - self.a), 0.0)

    def density_segments(self):
        return ((self.a, self.b),)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return self.a + (self.b - self.a) * u

    def tail_condition(self, eta):
        return True

    def power_moment(self, r):
        r1 = r + 1.0
        return (self.b ** r1 - self.a ** r1) / (r1 * (self.b - self.a))

    def to_spec(self):
        return {"kind": "uniform", "a": self.a, "b": self.b}


@dataclass(frozen=True, repr=False)
class Binary(ValueDistribution):
    v_lo: float
    v_hi: float
    p_hi: float

    def __post_init__(self):
        if not (0.0 <= self.v_lo < self.v_hi):
            raise ValueError("need 0 <= v_lo < v_hi")
        if not (0.0 < self.p_hi < 1.0):
            raise ValueError("p_hi must be in (0,1)")

    @property
    def support(self):
        return (self.v_lo, self.v_hi)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v < self.v_lo, 0.0,
                        np.where(v < self.v_hi, 1.0 - self.p_hi, 1.0))

    def pdf(self, v):
        return np.zeros_like(np.asarray(v, dtype=float))

    def atoms(self):
        return ((self.v_lo, 1.0 - self.p_hi), (self.v_hi, self.p_hi))

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u <= 1.0 - self.p_hi, self.v_lo, self.v_hi)

    def tail_condition(self, eta):
        return True

    def power_moment(self, r):
        return (1.0 - self.p_hi) * self.v_lo ** r + self.p_hi * self.v_hi ** r

    def to_spec(self):
        return {"kind": "binary", "v_lo": self.v_lo, "v_hi": self.v_hi,
                "p_hi": self.p_hi}


@dataclass(frozen=True, repr=False)
class Power(ValueDistribution):
    """F(v) = v^alpha on [0, 1]."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("power exponent must be positive")

    @property
    def support(self):
        return (0.0, 1.0)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.clip(v, 0.0, 1.0) ** self.alpha

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        inside = (v > 0.0) & (v <= 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = self.alpha * np.where(inside, v, 1.0) ** (self.alpha - 1.0)
        return np.where(inside, dens, 0.0)

    def density_segments(self):
        return ((0.0, 1.0),)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return u ** (1.0 / self.alpha)

    def tail_condition(self, eta):
        return True

    def power_moment(self, r):
        return self.alpha / (self.alpha + r)

    def to_spec(self):
        return {"kind": "power", "alpha": self.alpha}


@dataclass(frozen=True, repr=False)
class Discrete(ValueDistribution):
    values: tuple
    masses: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "masses", masses)
        if len(values) != len(masses) or not values:
            raise ValueError("values and masses must be equal-length, nonempty")
        if any(v < 0 for v in values):
            raise ValueError("values must be nonnegative")
        if any(v2 <= v1 for v1, v2 in zip(values, values[1:])):
            raise ValueError("values must be strictly ascending")
        if any(m < 0 for m in masses):
            raise ValueError("masses must be nonnegative")
        if abs(sum(masses) - 1.0) > _MASS_TOL:
            raise ValueError("masses must sum to 1 within 1e-12")
        object.__setattr__(self, "_cum", tuple(np.cumsum(masses)))

    @property
    def support(self):
        return (self.values[0], self.values[-1])

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        idx = np.searchsorted(self.values, v, side="right")
        cum = np.concatenate([[0.0], self._cum])
        return cum[idx]

    def pdf(self, v):
        return np.zeros_like(np.asarray(v, dtype=float))

    def atoms(self):
        return tuple(zip(self.values, self.masses))

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self._cum, u, side="left")
        idx = np.clip(idx, 0, len(self.values) - 1)
        return np.asarray(self.values)[idx]

    def tail_condition(self, eta):
        return True

    def power_moment(self, r):
        return sum(m * v ** r for v, m in zip(self.values, self.masses))

    def to_spec(self):
        return {"kind": "discrete", "values": list(self.values),
                "masses": list(self.masses)}


@dataclass(frozen=True, repr=False)
class PointMass(ValueDistribution):
    v0: float

    def __post_init__(self):
        if self.v0 < 0:
            raise ValueError("point mass location must be nonnegative")

    @property
    def support(self):
        return (self.v0, self.v0)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.where(v >= self.v0, 1.0, 0.0)

    def pdf(self, v):
        return np.zeros_like(np.asarray(v, dtype=float))

    def atoms(self):
        return ((self.v0, 1.0),)

    def quantile(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.v0)

    def tail_condition(self, eta):
        return True

    def power_moment(self, r):
        return self.v0 ** r

    def to_spec(self):
        return {"kind": "point_mass", "v0": self.v0}


@dataclass(frozen=True, repr=False)
class Mixture(ValueDistribution):
    """Convex combination of component laws."""

    components: tuple
    weights: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", weights)
        if len(comps) != len(weights) or not comps:
            raise ValueError("components and weights must be equal-length, nonempty")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        if abs(sum(weights) - 1.0) > _MASS_TOL:
            raise ValueError("weights must sum to 1 within 1e-12")

    @property
    def support(self):
        los, his = zip(*(c.support for c in self.components))
        return (min(los), max(his))

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        for w, c in zip(self.weights, self.components):
            out = out + w * c.cdf(v)
        return out

    def sf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        for w, c in zip(self.weights, self.components):
            out = out + w * c.sf(v)
        return out

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        for w, c in zip(self.weights, self.components):
            out = out + w * c.pdf(v)
        return out

    def atoms(self):
        merged = {}
        for w, c in zip(self.weights, self.components):
            for loc, mass in c.atoms():
                merged[loc] = merged.get(loc, 0.0) + w * mass
        return tuple(sorted(merged.items()))

    def density_segments(self):
        # merge overlapping component segments
        segs = sorted(seg for c in self.components for seg in c.density_segments())
        merged = []
        for a, b in segs:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return tuple((a, b) for a, b in merged)

    def quantile(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        lo_s, hi_s = self.support
        if math.isinf(hi_s):
            # expand an upper bracket per query
            hi_s = max(2.0, lo_s + 1.0)
            while float(np.min(self.cdf(hi_s))) < float(np.max(u)):
                hi_s *= 2.0
        lo = np.full_like(u, lo_s)
        hi = np.full_like(u, hi_s)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def tail_condition(self, eta):
        return all(c.tail_condition(eta) for c in self.components)

    def power_moment(self, r):
        return sum(w * c.power_moment(r)
                   for w, c in zip(self.weights, self.components))

    def to_spec(self):
        return {"kind": "mixture",
                "components": [c.to_spec() for c in self.components],
                "weights": list(self.weights)}


def density_or_mass(d: ValueDistribution, v):
    """Density at v plus the full atom list, kept separate for integrators."""
    return float(np.asarray(d.pdf(v))), d.atoms()


def tail_condition(d: ValueDistribution, eta: float) -> bool:
    if eta <= 1.0:
        raise ValueError("cost elasticity must exceed 1")
    return d.tail_condition(eta)


def minimax_distribution(eta: float) -> Pareto:
    """The profit-minimizing Pareto family: shape eta/(eta-1).

    The returned law sits exactly at the finite-surplus boundary; functionals
    on it require an explicit truncation k (use TruncatedPareto and take k
    large).
    """
    if eta <= 1.0:
        raise ValueError("cost elasticity must exceed 1")
    return Pareto(eta / (eta - 1.0))


_KINDS = {
    "pareto": lambda d: Pareto(alpha=d["alpha"]),
    "truncated_pareto": lambda d: TruncatedPareto(alpha=d["alpha"], k=d["k"]),
    "uniform": lambda d: Uniform(a=d["a"], b=d["b"]),
    "binary": lambda d: Binary(v_lo=d["v_lo"], v_hi=d["v_hi"], p_hi=d["p_hi"]),
    "power": lambda d: Power(alpha=d["alpha"]),
    "discrete": lambda d: Discrete(values=tuple(d["values"]),
                                   masses=tuple(d["masses"])),
    "point_mass": lambda d: PointMass(v0=d["v0"]),
    "mixture": lambda d: Mixture(
        components=tuple(distribution_from_spec(c) for c in d["components"]),
        weights=tuple(d["weights"])),
}


def distribution_from_spec(spec: dict) -> ValueDistribution:
    """Build a distribution from its JSON spec, e.g.
    {"kind": "truncated_pareto", "alpha": 2.0, "k": 100.0}."""
    try:
        kind = spec["kind"]
    except (KeyError, TypeError):
        raise ValueError("distribution spec needs a 'kind' field") from None
    if kind not in _KINDS:
        raise ValueError(f"unknown distribution kind {kind!r}")
    known = {"kind", "alpha", "k", "a", "b", "v_lo", "v_hi", "p_hi",
             "values", "masses", "v0", "components", "weights"}
    extra = set(spec) - known
    if extra:
        raise ValueError(f"unknown fields in distribution spec: {sorted(extra)}")
    return _KINDS[kind](spec)
