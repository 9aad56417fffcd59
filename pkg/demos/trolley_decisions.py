"""
Deciding the four trolley scenarios
===================================

Loads the bundled route-choice scenarios, prints the expected utility of
each route and shows how the Scenario 4 outcome depends on which weight
configuration is applied.
"""

from ethreason import decide
from ethreason.decision import weighted_expected_utilities
from ethreason.scenario_io import SCENARIO4_CONFIGS, bundled_scenarios, scenario4_configured

# Each scenario has three prescripts (casualties, damage, interference) and two routes.
for model in bundled_scenarios():
    report = decide(model)
    utils = ", ".join(f"{a}={u:+.3f}" for a, u in report.expected_utilities.items())
    print(f"{model.name}: {report.chosen_action}  ({utils})")

# Scenario 3 is the pure dilemma: three pedestrians on A, two on B. With the
# bundled casualty weight the casualty term dominates the interference penalty.
s3 = bundled_scenarios()[2]
print("\nscenario3 per-prescript contributions")
report = decide(s3)
for a in s3.action_ids:
    print(" ", a, {e: round(report.objective_breakdown[(a, e)], 3) for e in s3.prescript_ids})

# Scenario 4 ships no default value judgement about age or societal role.
# Swapping the objective weights between the two shipped files flips the route.
print()
for config in SCENARIO4_CONFIGS:
    model = scenario4_configured(config)
    print(f"scenario4 [{config}]: {decide(model).chosen_action}",
          {a: round(u, 3) for a, u in weighted_expected_utilities(model).items()})
