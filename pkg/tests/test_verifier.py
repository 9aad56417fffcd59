from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ethreason.decision import decide
from ethreason.model import InvalidScenarioError
from ethreason.scenario_io import bundled_scenario
from ethreason.synthetic import random_scenario, scenario_from_arrays
from ethreason.verifier import (
    PerturbationSpec,
    VerifierError,
    VerifierReport,
    check_alignment,
    check_consistency,
    check_optimality,
    check_robustness,
    l1,
    oracle_utilities,
    perturb_simplex,
    total_variation,
)


def extremal():
    return scenario_from_arrays([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]], np.zeros((1, 2, 2)))


def invariant_table(rng, n=4, m=3):
    row = rng.dirichlet(np.ones(m))
    row[-1] = 1.0 - row[:-1].sum()
    return scenario_from_arrays(rng.dirichlet(np.ones(n)), np.tile(row, (n, 1)),
                                rng.uniform(-5, 5, (2, n, m)))


# -- perturbation sampler ---------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.floats(0.0, 2.0), st.sampled_from(["l1", "tv"]))
def test_perturbation_stays_on_simplex_within_budget(seed, n, budget, metric):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(n))
    q = perturb_simplex(p, budget, rng, metric)
    assert np.all(q >= 0) and abs(q.sum() - 1) < 1e-12
    dist = l1(p, q) if metric == "l1" else total_variation(p, q)
    assert dist <= budget + 1e-12


def test_spec_validation():
    with pytest.raises(VerifierError):
        PerturbationSpec(mode="utility")
    with pytest.raises(VerifierError):
        PerturbationSpec(magnitude=-0.1)
    with pytest.raises(VerifierError):
        PerturbationSpec(samples=0)
    with pytest.raises(VerifierError):
        check_consistency(extremal(), PerturbationSpec(), L_max=0)


# -- consistency ------------------------------------------------------------

def test_context_invariant_table_gives_zero(rng):
    rep = check_consistency(invariant_table(rng), PerturbationSpec(magnitude=0.3, samples=500), L_max=1e-6)
    assert rep.measured["L_hat"] == pytest.approx(0.0, abs=1e-9)
    assert rep.passed and rep.trials > 0


def test_zero_magnitude_is_vacuous():
    rep = check_consistency(extremal(), PerturbationSpec(magnitude=0.0), L_max=1.0)
    assert rep.trials == 0 and rep.passed and rep.measured["L_hat"] == 0.0


def test_extremal_scenario_ratio_is_two():
    rep = check_consistency(extremal(), PerturbationSpec(magnitude=0.2, samples=500), L_max=2.5)
    assert rep.measured["L_hat"] == pytest.approx(2.0, rel=1e-9)
    assert rep.passed
    tight = check_consistency(extremal(), PerturbationSpec(magnitude=0.2, samples=500), L_max=1.5)
    assert not tight.passed and len(tight.failures) == tight.trials


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_consistency_bounded_by_two(seed):
    # ||P(C')Q - P(C)Q||_1 <= ||dP(C)||_1 = 2 TV for any row-stochastic Q.
    m = random_scenario(np.random.default_rng(seed), 4, 3, 2)
    rep = check_consistency(m, PerturbationSpec(magnitude=0.5, samples=100, seed=seed), L_max=None)
    assert 0 <= rep.measured["L_hat"] <= 2 + 1e-9


def test_conditional_mode_bounded_by_two(rng):
    m = random_scenario(rng, 3, 4, 2)
    rep = check_consistency(m, PerturbationSpec(mode="conditional", magnitude=0.3, samples=200), L_max=2.0 + 1e-9)
    assert rep.passed and 0 < rep.measured["L_hat"] <= 2.0 + 1e-9


def test_doubling_samples_never_decreases_estimate(rng):
    m = random_scenario(rng, 4, 3, 3)
    small = check_consistency(m, PerturbationSpec(magnitude=0.2, samples=100, seed=7), None)
    big = check_consistency(m, PerturbationSpec(magnitude=0.2, samples=200, seed=7), None)
    assert big.measured["L_hat"] >= small.measured["L_hat"]
    rs = check_robustness(m, PerturbationSpec(magnitude=0.2, samples=100, seed=7), None)
    rb = check_robustness(m, PerturbationSpec(magnitude=0.2, samples=200, seed=7), None)
    assert rb.measured["K_hat"] >= rs.measured["K_hat"]


def test_invalid_model_rejected(rng):
    m = random_scenario(rng, 2, 2, 2)
    bad = replace(m, context={"c0": 0.9, "c1": 0.0})
    with pytest.raises(InvalidScenarioError):
        check_consistency(bad, PerturbationSpec(), 1.0)


# -- optimality -------------------------------------------------------------

def test_single_action_gap_zero(rng):
    m = random_scenario(rng, 3, 3, 1)
    rep = check_optimality(m)
    assert rep.passed and rep.measured["gap"] == 0.0


def test_scenario1_oracle_picks_route_b():
    rep = check_optimality(bundled_scenario("scenario1"))
    assert rep.passed and rep.details["oracle_argmax"] == ["route_B"]


def test_random_4x4x4_zero_failures(rng):
    for _ in range(100):
        rep = check_optimality(random_scenario(rng, 4, 4, 4, weighted=True))
        assert rep.passed and rep.measured["gap"] <= 1e-9
        assert rep.measured["engine_oracle_max_diff"] < 1e-9


def test_oracle_matches_hand_sum():
    m = bundled_scenario("scenario3")
    oracle = oracle_utilities(m)
    for a in m.action_ids:
        hand = sum(m.alpha(e) * m.context[c] * m.conditional[c][e] * m.baseline(e, c) * m.utilities[(a, c, e)]
                   for c in m.dictum_ids for e in m.prescript_ids)
        assert oracle[a] == pytest.approx(hand, abs=1e-12)


# -- robustness -------------------------------------------------------------

def test_context_free_utility_gives_zero_k(rng):
    n, m, k = 3, 2, 3
    f = rng.uniform(-5, 5, (k, 1, m))
    row = np.array([0.3, 0.7])
    model = scenario_from_arrays(rng.dirichlet(np.ones(n)), np.tile(row, (n, 1)), np.repeat(f, n, axis=1))
    rep = check_robustness(model, PerturbationSpec(magnitude=0.5, samples=300), K_max=1e-6)
    assert rep.measured["K_hat"] == pytest.approx(0.0, abs=1e-9) and rep.passed
    assert rep.measured["argmax_flips"] == 0


def dominant(rng, delta, u_max=10.0):
    """Action a0 beats a1 in every dictum by more than delta*u_max."""
    n, m = 3, 2
    u = np.empty((2, n, m))
    u[1] = rng.uniform(-u_max, -0.5 * u_max, (n, m))
    u[0] = np.minimum(u_max, u[1] + delta * u_max + 1.0 + rng.uniform(0, 1, (n, m)))
    return scenario_from_arrays(rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(m), n), u, u_max=u_max)


def test_dominant_margin_never_flips(rng):
    for mode in ("context", "conditional"):
        m = dominant(rng, 0.2)
        rep = check_robustness(m, PerturbationSpec(mode=mode, magnitude=0.2, samples=1000), K_max=None)
        assert rep.measured["argmax_flips"] == 0 and rep.measured["min_flip_size"] is None
        assert np.isfinite(rep.measured["K_hat"])


def test_exact_tie_flips_at_tiny_perturbation():
    u = np.array([[[1.0], [0.0]], [[0.0], [1.0]]])
    m = scenario_from_arrays([0.5, 0.5], [[1.0], [1.0]], u)
    assert decide(m).tie
    rep = check_robustness(m, PerturbationSpec(magnitude=0.01, samples=400), K_max=10.0)
    assert rep.measured["argmax_flips"] > 0
    assert rep.measured["min_flip_size"] < 0.01
    assert rep.passed


def test_robustness_reproducible_bit_for_bit(rng):
    m = random_scenario(rng, 3, 3, 3)
    spec = PerturbationSpec(magnitude=0.3, samples=300, seed=11)
    a, b = check_robustness(m, spec, 5.0), check_robustness(m, spec, 5.0)
    assert a.to_dict() == b.to_dict()
    c = check_robustness(m, replace(spec, seed=12), 5.0)
    assert c.measured["K_hat"] != a.measured["K_hat"]


def test_robustness_conditional_mode_finite(rng):
    m = random_scenario(rng, 3, 3, 3, weighted=True)
    rep = check_robustness(m, PerturbationSpec(mode="conditional", magnitude=0.3, samples=200), None, temperature=0.5)
    assert np.isfinite(rep.measured["K_hat"]) and rep.measured["temperature"] == 0.5


# -- alignment --------------------------------------------------------------

def test_self_reference_agreement_one(rng):
    models = [random_scenario(rng, 3, 3, 3) for _ in range(50)]
    ref = [(m, decide(m).chosen_action) for m in models]
    rep = check_alignment(ref, theta=0.9)
    assert rep.measured["agreement"] == 1.0 and rep.passed
    assert rep.measured["pearson"] == pytest.approx(1.0)


def test_theta_one_with_disagreement_fails(rng):
    models = [random_scenario(rng, 2, 2, 2) for _ in range(5)]
    ref = [(m, decide(m).chosen_action) for m in models]
    m0 = models[0]
    ref[0] = (m0, next(a for a in m0.action_ids if a != decide(m0).chosen_action))
    rep = check_alignment(ref, theta=1.0)
    assert not rep.passed and rep.failures == (0,)
    assert check_alignment(ref, theta=0.5).passed


def test_alignment_errors(rng):
    m = random_scenario(rng, 2, 2, 2)
    with pytest.raises(VerifierError):
        check_alignment([], 0.5)
    with pytest.raises(VerifierError):
        check_alignment([(m, "nope")], 0.5)
    with pytest.raises(VerifierError):
        check_alignment([(m, "a0")], 1.5)


def test_report_round_trip(rng):
    rep = check_robustness(random_scenario(rng), PerturbationSpec(samples=20), 3.0)
    assert VerifierReport.from_dict(rep.to_dict()) == rep
