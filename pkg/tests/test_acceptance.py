"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines also appear in the
terminal summary) or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from ethreason.decision import decide
from ethreason.learning import run_learning
from ethreason.model import joint_matrix, validate_scenario
from ethreason.profiles import (
    EthicalProfileMatrix,
    cluster_collection,
    distance_matrix,
    matrix_distance,
    normalize_matrix,
)
from ethreason.scenario_io import bundled_scenario, scenario4_configured
from ethreason.synthetic import random_scenario, scenario_from_arrays
from ethreason.verifier import (
    PerturbationSpec,
    check_alignment,
    check_consistency,
    check_optimality,
    check_robustness,
)

RESULTS: dict[str, tuple[bool, str]] = {}


def record(name: str, ok: bool, detail: str) -> None:
    RESULTS[name] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, detail


def test_ac1_probabilistic_soundness():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst, invalid = 0.0, 0
    for _ in range(1000):
        m = random_scenario(rng, int(rng.integers(1, 7)), int(rng.integers(1, 6)), int(rng.integers(1, 5)),
                            weighted=bool(rng.integers(2)))
        if not validate_scenario(m).ok:
            invalid += 1
        worst = max(worst, abs(joint_matrix(m).sum() - 1.0))
    elapsed = time.perf_counter() - start
    record("AC1 probabilistic soundness", worst <= 1e-9 and invalid == 0 and elapsed < 5.0,
           f"1000 scenarios, max |sum-1| = {worst:.2e}, invalid = {invalid}, {elapsed:.2f}s")


def test_ac2_decision_optimality():
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    failures, worst = 0, 0.0
    for _ in range(500):
        m = random_scenario(rng, int(rng.integers(1, 7)), int(rng.integers(1, 6)), int(rng.integers(1, 5)),
                            weighted=bool(rng.integers(2)))
        rep = check_optimality(m)
        failures += not rep.passed
        worst = max(worst, rep.measured["gap"])
    elapsed = time.perf_counter() - start
    record("AC2 decision optimality", failures == 0 and worst <= 1e-9 and elapsed < 10.0,
           f"500 scenarios, failures = {failures}, max gap = {worst:.2e}, {elapsed:.2f}s")


def test_ac3_trolley_fixtures():
    picks = {n: decide(bundled_scenario(n)).chosen_action for n in ("scenario1", "scenario2", "scenario3")}
    child = decide(scenario4_configured("child_priority")).chosen_action
    role = decide(scenario4_configured("role_priority")).chosen_action
    ok = (picks == {"scenario1": "route_B", "scenario2": "route_A", "scenario3": "route_B"}
          and child != role)
    record("AC3 trolley fixtures", ok,
           f"S1={picks['scenario1']} S2={picks['scenario2']} S3={picks['scenario3']} "
           f"S4 child={child} role={role}")


def test_ac4_consistency():
    rng = np.random.default_rng(404)
    worst_invariant = 0.0
    for i in range(20):
        n, m = int(rng.integers(2, 7)), int(rng.integers(2, 6))
        row = rng.dirichlet(np.ones(m))
        model = scenario_from_arrays(rng.dirichlet(np.ones(n)), np.tile(row, (n, 1)),
                                     rng.uniform(-5, 5, (2, n, m)))
        rep = check_consistency(model, PerturbationSpec(magnitude=0.5, samples=200, seed=i), L_max=None)
        worst_invariant = max(worst_invariant, rep.measured["L_hat"])
    ext = scenario_from_arrays([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]], np.zeros((1, 2, 2)))
    rep = check_consistency(ext, PerturbationSpec(magnitude=0.2, samples=10_000, seed=4), L_max=None)
    closed_form = 2.0
    rel = abs(rep.measured["L_hat"] - closed_form) / closed_form
    record("AC4 consistency", worst_invariant <= 1e-9 and rel <= 0.05 and rep.trials >= 9_000,
           f"invariant tables max L_hat = {worst_invariant:.2e}; extremal L_hat = "
           f"{rep.measured['L_hat']:.6f} vs {closed_form} ({rep.trials} trials)")


def _dominant(rng, delta, u_max=10.0):
    n, m = int(rng.integers(2, 5)), int(rng.integers(2, 4))
    u = np.empty((2, n, m))
    u[1] = rng.uniform(-u_max, -0.5 * u_max, (n, m))
    u[0] = np.minimum(u_max, u[1] + delta * u_max + 1.0 + rng.uniform(0, 1, (n, m)))
    return scenario_from_arrays(rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(m), n), u, u_max=u_max)


def test_ac5_robustness():
    rng = np.random.default_rng(505)
    delta = 0.2
    flips, k_hats, reproducible = 0, [], True
    for i, mode in enumerate(("context", "conditional")):
        model = _dominant(rng, delta)
        spec = PerturbationSpec(mode=mode, magnitude=delta, samples=10_000, seed=50 + i)
        a = check_robustness(model, spec, K_max=None)
        b = check_robustness(model, spec, K_max=None)
        flips += a.measured["argmax_flips"]
        k_hats.append(a.measured["K_hat"])
        reproducible &= a.to_dict() == b.to_dict()
    ok = flips == 0 and all(np.isfinite(k_hats)) and reproducible
    record("AC5 robustness", ok,
           f"flips = {flips} over 2x10000 perturbations, K_hat = {[round(k, 6) for k in k_hats]}, "
           f"bit-reproducible = {reproducible}")


def test_ac6_convergence():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        base = float(rng.uniform(-5, 4))
        u = np.array([[[base + 1.0]], [[base]]])
        if rng.integers(2):
            u = u[::-1].copy()
        model = scenario_from_arrays([1.0], [[1.0]], u, u_max=10.0)
        rep = run_learning(model, 10_000, seed=seed, eps_conv=0.01, window=500, trajectory_every=1000)
        hits += rep.final_probability >= 0.99 and rep.converged
    false_conv = 0
    sym = scenario_from_arrays([1.0], [[1.0]], np.array([[[0.5]], [[0.5]]]))
    for seed in range(20):
        false_conv += run_learning(sym, 10_000, seed=seed, eps_conv=0.01, window=500,
                                   trajectory_every=1000).converged
    record("AC6 convergence", hits >= 95 and false_conv == 0,
           f"gap-1.0 runs reaching p>=0.99: {hits}/100; symmetric false convergence: {false_conv}/20")


def test_ac7_alignment():
    rng = np.random.default_rng(707)
    models = [random_scenario(rng, 3, 3, 2) for _ in range(1000)]
    self_ref = check_alignment([(m, decide(m).chosen_action) for m in models], theta=0.9)
    random_ref = check_alignment([(m, m.action_ids[int(rng.integers(2))]) for m in models], theta=0.5)
    a_self, a_rand = self_ref.measured["agreement"], random_ref.measured["agreement"]
    record("AC7 alignment", a_self == 1.0 and abs(a_rand - 0.5) <= 0.05,
           f"self-referenced agreement = {a_self}; random-reference agreement = {a_rand:.3f} (n=1000)")


def _two_blob_items(rng):
    shape = (2, 3)
    n_a = int(rng.integers(1, 5))
    n_b = int(rng.integers(1, 9 - n_a))
    items = {}
    # blobs of radius <= 0.05 (L1 <= 0.3 inside) around centres 6 apart in L1: >= 10x separation
    for i in range(n_a):
        items[f"a{i}"] = EthicalProfileMatrix(("e0", "e1"), ("c0", "c1", "c2"),
                                              rng.uniform(0.0, 0.05, shape), True)
    for i in range(n_b):
        items[f"b{i}"] = EthicalProfileMatrix(("e0", "e1"), ("c0", "c1", "c2"),
                                              rng.uniform(0.95, 1.0, shape), True)
    return items


def _exhaustive_partition(ids, d):
    best, parts = None, None
    n = len(ids)
    for labels in itertools.product((0, 1), repeat=n):
        if labels[0] != 0 or len(set(labels)) != 2:
            continue
        cost = 0.0
        for g in (0, 1):
            mem = [i for i in range(n) if labels[i] == g]
            cost += min(sum(d[i, j] for i in mem) for j in mem)
        if best is None or cost < best - 1e-12:
            best = cost
            parts = {frozenset(ids[i] for i in range(n) if labels[i] == g) for g in (0, 1)}
    return parts


def test_ac8_matrix_pipeline():
    hand = normalize_matrix(EthicalProfileMatrix(("e0", "e1"), ("c0", "c1"), [[1, 2], [3, 5]], False))
    hand_ok = np.array_equal(hand.entries, [[0.0, 0.25], [0.5, 1.0]])

    rng = np.random.default_rng(808)
    ids = (("e0", "e1", "e2"), ("c0", "c1", "c2", "c3"))
    axiom_failures = 0
    for _ in range(10_000):
        x, y, z = (normalize_matrix(EthicalProfileMatrix(*ids, rng.random((3, 4)), False)) for _ in range(3))
        dxy, dyx = matrix_distance(x, y), matrix_distance(y, x)
        ok = (dxy == dyx and matrix_distance(x, x) == 0.0 and dxy >= 0
              and matrix_distance(x, z) <= dxy + matrix_distance(y, z) + 1e-12
              and (dxy > 0 or x == y))
        axiom_failures += not ok

    recovered = 0
    for seed in range(100):
        rng = np.random.default_rng(10_000 + seed)
        items = _two_blob_items(rng)
        order = sorted(items)
        truth = _exhaustive_partition(order, distance_matrix([items[i] for i in order]))
        coll = cluster_collection(items, 2, seed=seed)
        recovered += {frozenset(v) for v in coll.clusters.values()} == truth
    record("AC8 matrix pipeline", hand_ok and axiom_failures == 0 and recovered == 100,
           f"hand case = {hand_ok}; metric axiom failures = {axiom_failures}/10000; "
           f"two-blob recovery = {recovered}/100")


def test_ac9_cli_determinism(tmp_path):
    from conftest import build_cli_workspace

    _, commands = build_cli_workspace(tmp_path)
    env = {**os.environ, "PYTHONHASHSEED": "random"}
    env.pop("ETHREASON_FORMAT", None)
    mismatched, errors = [], []
    for label, argv in commands.items():
        outs = []
        for _ in range(2):
            proc = subprocess.run([sys.executable, "-m", "ethreason", *argv], capture_output=True, env=env)
            if proc.returncode not in (0, 1):
                errors.append(f"{label}: {proc.stderr.decode().strip()}")
            outs.append(proc.stdout)
        if outs[0] != outs[1] or not outs[0]:
            mismatched.append(label)
    record("AC9 CLI determinism", not mismatched and not errors,
           f"{len(commands)} subcommand invocations, mismatched = {mismatched}, errors = {errors}")


if __name__ == "__main__":
    sys.path.insert(0, str(Path(__file__).parent))
    sys.exit(pytest.main([__file__, "-q", "-s"]))
