import numpy as np
import pytest

from ethreason.scenario_io import bundled_scenario


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=["scenario1", "scenario2", "scenario3", "scenario4"])
def bundled(request):
    return bundled_scenario(request.param)


def build_cli_workspace(root):
    """Scenario, weights, profile and corpus files for exercising every CLI subcommand.

    Returns (paths, commands) where commands maps a label to an argv list.
    """
    import json
    from pathlib import Path

    from ethreason.profiles import build_matrix, normalize_matrix
    from ethreason.scenario_io import (
        bundled_path, corpus_to_text, save_profile, save_scenario, scenario_to_dict,
    )
    from ethreason.synthetic import random_scenario

    root = Path(root)
    p = {}
    for name in ("scenario1", "scenario2", "scenario3", "scenario4"):
        p[name] = root / f"{name}.eth"
        save_scenario(bundled_scenario(name), p[name])
    for cfg in ("child_priority", "role_priority"):
        p[cfg] = root / f"scenario4.{cfg}.weights"
        p[cfg].write_text(bundled_path(p[cfg].name).read_text("utf-8"), encoding="utf-8")
    doc = scenario_to_dict(bundled_scenario("scenario1"))
    first = sorted(doc["context"])[0]
    doc["context"][first] = round(doc["context"][first] - 0.1, 12)
    p["broken"] = root / "broken.eth"
    p["broken"].write_text(json.dumps(doc), encoding="utf-8")
    p["corpus"] = root / "ref.corpus"
    p["corpus"].write_text(corpus_to_text([("scenario1.eth", "route_B"), ("scenario2.eth", "route_A"),
                                           ("scenario3.eth", "route_B")]), encoding="utf-8")
    rng = np.random.default_rng(5)
    profs = []
    for i in range(5):
        m = random_scenario(rng, 2, 3, 2, weighted=True)
        path = root / f"p{i}.ethp"
        save_profile(normalize_matrix(build_matrix(m)), path, f"p{i}")
        profs.append(str(path))
    p["profiles"] = profs
    p["raw_profile"] = root / "raw.ethp"
    save_profile(build_matrix(bundled_scenario("scenario1")), p["raw_profile"], "raw")
    p["s1_profile"] = root / "s1.ethp"
    save_profile(normalize_matrix(build_matrix(bundled_scenario("scenario1"))), p["s1_profile"], "s1")
    p["coll"] = root / "coll"
    s = {k: str(v) for k, v in p.items() if k != "profiles"}
    m = ["--format", "machine"]
    commands = {
        "validate": ["validate", s["scenario1"], *m],
        "decide": ["decide", s["scenario1"], *m],
        "decide-weights": ["decide", s["scenario4"], "--weights", s["child_priority"], *m],
        "explain": ["explain", s["scenario3"], *m],
        "sample": ["sample", s["scenario3"], "--temp", "0.7", "--n", "50", "--seed", "3", *m],
        "perturb": ["perturb", s["scenario2"], "--delta", "0.1", "--samples", "300", "--seed", "4", *m],
        "consistency": ["consistency", s["scenario3"], "--delta", "0.2", "--samples", "300", "--lmax", "2.5", *m],
        "optimality": ["optimality", s["scenario2"], *m],
        "align": ["align", s["corpus"], "--theta", "0.5", *m],
        "learn": ["learn", s["scenario1"], "--episodes", "2000", "--window", "100", "--seed", "2", *m],
        "profile-build": ["profile", "build", s["scenario1"], "--normalize", *m],
        "profile-normalize": ["profile", "normalize", s["raw_profile"], *m],
        "profile-cluster": ["profile", "cluster", *profs, "--k", "2", "--out-dir", s["coll"], "--seed", "1", *m],
        "profile-retrieve": ["profile", "retrieve", s["coll"], profs[2], *m],
        "profile-apply": ["profile", "apply", s["scenario1"], s["s1_profile"], *m],
    }
    return p, commands


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
