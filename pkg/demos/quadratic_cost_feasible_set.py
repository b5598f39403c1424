"""The exact feasible set of (U/S, Pi/S) pairs under quadratic cost.

For eta = 2 the set of normalized outcomes achievable by *some* distribution
and *some* incentive-compatible menu has a closed-form boundary: an upper
branch traced by Pareto shapes alpha >= 2, a lower straight edge x + 2y = 1
traced by alpha in [1, 2], and a zero-consumer-surplus segment.  This script
tabulates the boundary and classifies a few candidate points.
"""

import numpy as np

import markup_guarantee as mg

print("boundary parametrized by Pareto shape alpha:")
print(f"{'alpha':>8s} {'branch':>8s} {'U/S':>10s} {'Pi/S':>10s}")
for alpha in [1.1, 1.5, 2.0, 3.0, 5.0, 20.0]:
    pt = mg.eta2_boundary(alpha)
    print(f"{alpha:8.2f} {pt.branch:>8s} {pt.u_over_s:10.6f} {pt.beta:10.6f}")

print()
print("classifying candidate normalized outcomes (x = U/S, y = Pi/S):")
candidates = [
    (0.30, 0.30),   # strictly inside
    (0.50, 0.25),   # junction of the two branches (Pareto alpha = 2)
    (0.00, 0.75),   # zero-CS segment
    (0.45, 0.45),   # above the upper branch
    (0.10, 0.10),   # below the lower edge: total surplus share under 1/2
]
for x, y in candidates:
    print(f"  ({x:.2f}, {y:.2f}) -> {mg.eta2_membership(x, y)}")

print()
print("every guarantee-menu outcome (U/S, Pi/S) = (1/2, 1/4) sits at the")
print("junction where both branches meet:")
print(f"  membership(0.5, 0.25) = {mg.eta2_membership(0.5, 0.25)}")

# Monte Carlo sanity check: Bayes-optimal outcomes over a spread of laws
# should never land outside the set.
rng = np.random.default_rng(7)
cost = mg.IsoElasticCost(eta=2.0)
worst = "interior"
for _ in range(25):
    F = mg.Uniform(0.0, float(rng.uniform(0.5, 3.0)))
    mech = mg.bayes_optimal_mechanism(F, cost)
    rep = mg.full_report(F, mech, cost)
    verdict = mg.eta2_membership(rep.u_ratio, rep.pi_ratio)
    assert verdict != "exterior", (F, rep)
print()
print("25 random uniform laws: all Bayes-optimal outcomes inside the set.")
