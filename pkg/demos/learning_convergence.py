"""
Learning a policy by repeated decisions
=======================================

Trains the incremental softmax learner on Scenario 1 and on a symmetric
scenario, and prints how P(best action) evolves.
"""

import numpy as np

from ethreason.learning import policy_distance, run_learning
from ethreason.scenario_io import bundled_scenario
from ethreason.synthetic import scenario_from_arrays

model = bundled_scenario("scenario1")
report = run_learning(model, 5000, seed=7, eps_conv=0.01, window=300,
                      checkpoint_every=250)
print("scenario1 converged:", report.converged, "at step", report.convergence_step)
print("best action per dictum:", report.best_actions)
# The first visits are forced (every action once per dictum), after which
# the softmax concentrates quickly.
for t, p in report.trajectory:
    if t in (1, 2, 3, 4, 8, 16, 64, 256, 1024, 4096):
        print(f"  t={t:5d}  P(best) = {p:.4f}")

# Successive checkpoints move less and less once the policy has settled.
steps = [policy_distance(a, b) for a, b in zip(report.checkpoints, report.checkpoints[1:])]
print("checkpoint drift: first %.3g, last %.3g" % (steps[0], steps[-1]))

# With identical rewards the mass stays split, so a strict threshold never fires.
tied = scenario_from_arrays([1.0], [[1.0]], np.array([[[0.5]], [[0.5]]]))
flat = run_learning(tied, 5000, seed=7, eps_conv=0.01, window=300)
print("symmetric scenario converged:", flat.converged, "final P =", round(flat.final_probability, 3))
