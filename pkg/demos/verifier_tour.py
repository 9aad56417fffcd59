"""
Empirical checks of a decision model
====================================

Runs the consistency, optimality, robustness and alignment checks on a
bundled scenario and on a few synthetic ones.
"""

import numpy as np

from ethreason import decide
from ethreason.scenario_io import bundled_scenario
from ethreason.synthetic import random_scenario, scenario_from_arrays
from ethreason.verifier import (
    PerturbationSpec,
    check_alignment,
    check_consistency,
    check_optimality,
    check_robustness,
)

model = bundled_scenario("scenario3")

# Optimality: an independent compensated-sum oracle re-derives every utility.
opt = check_optimality(model)
print("optimality:", opt.verdict, "gap", opt.measured["gap"])

# Consistency: how much the prescript marginal P(E) moves per unit of
# total-variation change in P(C). Scenario 3's two dicta differ only in
# road surface, so the marginal barely moves.
spec = PerturbationSpec(magnitude=0.2, samples=2000, seed=1)
cons = check_consistency(model, spec, L_max=2.0)
print("consistency: L_hat = %.4f (%s)" % (cons.measured["L_hat"], cons.verdict))

# The extremal two-dictum table attains the bound L = 2 exactly.
extremal = scenario_from_arrays([0.5, 0.5], [[1, 0], [0, 1]], np.zeros((1, 2, 2)))
print("extremal L_hat = %.6f" % check_consistency(extremal, spec, None).measured["L_hat"])

# Robustness works on the softmax action distribution; hard argmax changes
# are counted separately.
rob = check_robustness(model, PerturbationSpec(magnitude=0.3, samples=2000, seed=2), K_max=None)
print("robustness: K_hat = %.4f, argmax flips = %d" % (rob.measured["K_hat"], rob.measured["argmax_flips"]))

# Alignment against a reference corpus: the engine's own answers, then coin flips.
rng = np.random.default_rng(0)
models = [random_scenario(rng, 3, 3, 2) for _ in range(400)]
own = check_alignment([(m, decide(m).chosen_action) for m in models], theta=0.9)
coin = check_alignment([(m, m.action_ids[rng.integers(2)]) for m in models], theta=0.9)
print("alignment: self %.3f (%s), random %.3f (%s)" % (
    own.measured["agreement"], own.verdict, coin.measured["agreement"], coin.verdict))
