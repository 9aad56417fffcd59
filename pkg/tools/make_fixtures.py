"""Regenerate the bundled trolley scenarios under src/ethreason/data.

Run from the repository root: ``python tools/make_fixtures.py``.
"""

from pathlib import Path

from ethreason.model import ActionDef, Dictum, Prescript, ScenarioModel
from ethreason.scenario_io import save_scenario, weights_to_text

DATA = Path(__file__).resolve().parents[1] / "src" / "ethreason" / "data"

XYZ = (
    Prescript("X", "Minimize human casualties", 1),
    Prescript("Y", "Minimize physical damage", 2),
    Prescript("Z", "Minimize external interference (deviation from the default path)", 3),
)
ROUTES = (
    ActionDef("route_A", "Stay on route A, the default path"),
    ActionDef("route_B", "Intervene and switch to route B"),
)


def table(rows):
    """{(action, dictum): {prescript: u}} -> flat utility map."""
    return {(a, c, e): float(v) for (a, c), by_e in rows.items() for e, v in by_e.items()}


def scenario1():
    return ScenarioModel(
        name="scenario1",
        description="No pedestrians on either route.",
        notes=(
            "No human lives at risk, so every casualty utility is 0. Route A (default) carries debris "
            "that damages the vehicle (Y: -4 dry, -5 wet); route B is clear (Y: -1 dry, -2 wet) and needs "
            "a minor steering intervention (Z: -1). Hand sum: U(route_A) = 0.7*(0.6*-4) + 0.3*(0.7*-5) = -2.73; "
            "U(route_B) = 0.7*(0.6*-1 + 0.3*-1) + 0.3*(0.7*-2 + 0.2*-1) = -1.11, so route_B."
        ),
        dicta=(
            Dictum("clear_dry", "No pedestrians on either route; dry road",
                   ("pedestrians_A=0", "pedestrians_B=0", "road=dry")),
            Dictum("clear_wet", "No pedestrians on either route; wet road",
                   ("pedestrians_A=0", "pedestrians_B=0", "road=wet")),
        ),
        prescripts=XYZ,
        actions=ROUTES,
        context={"clear_dry": 0.7, "clear_wet": 0.3},
        conditional={"clear_dry": {"X": 0.1, "Y": 0.6, "Z": 0.3},
                     "clear_wet": {"X": 0.1, "Y": 0.7, "Z": 0.2}},
        utilities=table({
            ("route_A", "clear_dry"): {"X": 0, "Y": -4, "Z": 0},
            ("route_A", "clear_wet"): {"X": 0, "Y": -5, "Z": 0},
            ("route_B", "clear_dry"): {"X": 0, "Y": -1, "Z": -1},
            ("route_B", "clear_wet"): {"X": 0, "Y": -2, "Z": -1},
        }),
        u_max=10.0,
    )


def scenario2():
    return ScenarioModel(
        name="scenario2",
        description="Two pedestrians on route B; route A is the default path.",
        notes=(
            "Casualties: route_B kills two (X: -2), route_A none. Damage Y: -1 on either route, -2 for "
            "route_B on a wet road. Switching costs Z: -1. Hand sum: U(route_A) = 0.7*(0.2*-1) + 0.3*(0.2*-1) "
            "= -0.2; U(route_B) = 0.7*(0.7*-2 + 0.2*-1 + 0.1*-1) + 0.3*(0.7*-2 + 0.2*-2 + 0.1*-1) = -1.76, "
            "so route_A."
        ),
        dicta=(
            Dictum("peds_B_dry", "Two pedestrians on route B; dry road",
                   ("pedestrians_A=0", "pedestrians_B=2", "road=dry")),
            Dictum("peds_B_wet", "Two pedestrians on route B; wet road",
                   ("pedestrians_A=0", "pedestrians_B=2", "road=wet")),
        ),
        prescripts=XYZ,
        actions=ROUTES,
        context={"peds_B_dry": 0.7, "peds_B_wet": 0.3},
        conditional={"peds_B_dry": {"X": 0.7, "Y": 0.2, "Z": 0.1},
                     "peds_B_wet": {"X": 0.7, "Y": 0.2, "Z": 0.1}},
        utilities=table({
            ("route_A", "peds_B_dry"): {"X": 0, "Y": -1, "Z": 0},
            ("route_A", "peds_B_wet"): {"X": 0, "Y": -1, "Z": 0},
            ("route_B", "peds_B_dry"): {"X": -2, "Y": -1, "Z": -1},
            ("route_B", "peds_B_wet"): {"X": -2, "Y": -2, "Z": -1},
        }),
        u_max=10.0,
    )


def scenario3():
    return ScenarioModel(
        name="scenario3",
        description="Three pedestrians on route A (default), two on route B (requires intervention).",
        notes=(
            "The scenario description gives pedestrian counts A=3, B=2 but elsewhere frames the trade "
            "the other way round; this fixture follows the counts. One casualty is worth -1 under X. The interference penalty "
            "for switching (Z: -0.5) is deliberately smaller than one casualty, and the objective weights "
            "are casualty-dominant (alpha X=2, Y=1, Z=1). Weighted hand sum: "
            "U(route_A) = 0.6*(2*0.7*-3 + 0.1*-1) + 0.4*(2*0.6*-3 + 0.2*-1) = -4.10; "
            "U(route_B) = 0.6*(2*0.7*-2 + 0.1*-1 + 0.2*-0.5) + 0.4*(2*0.6*-2 + 0.2*-2 + 0.2*-0.5) = -2.96, "
            "so route_B. Raise Z above the casualty disutility (or drop alpha X) to invert the outcome."
        ),
        dicta=(
            Dictum("A3_B2_dry", "Three pedestrians on route A, two on route B; dry road",
                   ("pedestrians_A=3", "pedestrians_B=2", "road=dry")),
            Dictum("A3_B2_wet", "Three pedestrians on route A, two on route B; wet road",
                   ("pedestrians_A=3", "pedestrians_B=2", "road=wet")),
        ),
        prescripts=XYZ,
        actions=ROUTES,
        context={"A3_B2_dry": 0.6, "A3_B2_wet": 0.4},
        conditional={"A3_B2_dry": {"X": 0.7, "Y": 0.1, "Z": 0.2},
                     "A3_B2_wet": {"X": 0.6, "Y": 0.2, "Z": 0.2}},
        utilities=table({
            ("route_A", "A3_B2_dry"): {"X": -3, "Y": -1, "Z": 0},
            ("route_A", "A3_B2_wet"): {"X": -3, "Y": -1, "Z": 0},
            ("route_B", "A3_B2_dry"): {"X": -2, "Y": -1, "Z": -0.5},
            ("route_B", "A3_B2_wet"): {"X": -2, "Y": -2, "Z": -0.5},
        }),
        objective_weights={"X": 2.0, "Y": 1.0, "Z": 1.0},
        u_max=10.0,
    )


def scenario4():
    return ScenarioModel(
        name="scenario4",
        description=("Two children on route A (default); three adults on route B, possibly including "
                     "a medical professional."),
        notes=(
            "The casualty objective is split in two because the contested value judgment lives there: "
            "X_age counts a child as 2 and an adult as 1 (A: -4, B: -3); X_role counts the medical "
            "professional as 3 and everyone else as 1 (A: -2, B: -5 with the medic present, -3 without). "
            "No weighting between them is shipped as a default. Two alternative configurations ship "
            "side by side: scenario4.child_priority.weights (alpha X_age=1, X_role=0) selects route_B "
            "(U_A = -1.55, U_B = -1.275) and scenario4.role_priority.weights (alpha X_age=0, X_role=1) "
            "selects route_A (U_A = -0.85, U_B = -1.835)."
        ),
        dicta=(
            Dictum("kids_A_medic_B", "Route A: two children. Route B: three adults, one a medical professional",
                   ("pedestrians_A=2", "pedestrians_B=3", "age_A=child", "age_B=adult", "role_B=medical")),
            Dictum("kids_A_adults_B", "Route A: two children. Route B: three adults, no special role",
                   ("pedestrians_A=2", "pedestrians_B=3", "age_A=child", "age_B=adult")),
        ),
        prescripts=(
            Prescript("X_age", "Minimize human casualties, weighting by age (life-years)", 1),
            Prescript("X_role", "Minimize human casualties, weighting by societal role", 1),
            XYZ[1],
            XYZ[2],
        ),
        actions=ROUTES,
        context={"kids_A_medic_B": 0.8, "kids_A_adults_B": 0.2},
        conditional={c: {"X_age": 0.35, "X_role": 0.35, "Y": 0.15, "Z": 0.15}
                     for c in ("kids_A_medic_B", "kids_A_adults_B")},
        utilities=table({
            ("route_A", "kids_A_medic_B"): {"X_age": -4, "X_role": -2, "Y": -1, "Z": 0},
            ("route_A", "kids_A_adults_B"): {"X_age": -4, "X_role": -2, "Y": -1, "Z": 0},
            ("route_B", "kids_A_medic_B"): {"X_age": -3, "X_role": -5, "Y": -1, "Z": -0.5},
            ("route_B", "kids_A_adults_B"): {"X_age": -3, "X_role": -3, "Y": -1, "Z": -0.5},
        }),
        u_max=10.0,
    )


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    for build in (scenario1, scenario2, scenario3, scenario4):
        model = build()
        save_scenario(model, DATA / f"{model.name}.eth")
    (DATA / "scenario4.child_priority.weights").write_text(weights_to_text(
        {"X_age": 1.0, "X_role": 0.0, "Y": 1.0, "Z": 1.0}, name="scenario4 child-prioritizing"))
    (DATA / "scenario4.role_priority.weights").write_text(weights_to_text(
        {"X_age": 0.0, "X_role": 1.0, "Y": 1.0, "Z": 1.0}, name="scenario4 role-prioritizing"))


if __name__ == "__main__":
    main()
