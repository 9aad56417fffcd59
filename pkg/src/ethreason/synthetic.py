"""Random valid scenarios for property tests and demos."""

from __future__ import annotations

import numpy as np

from .model import ActionDef, Dictum, Prescript, ScenarioModel


def _simplex(rng: np.random.Generator, n: int) -> np.ndarray:
    p = rng.dirichlet(np.ones(n))
    # Pin the last entry so the row sums to 1 to within rounding of the others.
    p[-1] = max(0.0, 1.0 - p[:-1].sum())
    return p


def random_scenario(
    rng: np.random.Generator,
    n_dicta: int = 3,
    n_prescripts: int = 3,
    n_actions: int = 3,
    *,
    u_scale: float = 10.0,
    u_max: float = 1000.0,
    weighted: bool = False,
    name: str = "random",
) -> ScenarioModel:
    """A valid scenario with Dirichlet probabilities and uniform utilities in [-u_scale, u_scale]."""
    dicta = tuple(Dictum(f"c{i}") for i in range(n_dicta))
    prescripts = tuple(Prescript(f"e{j}", priority_rank=int(rng.integers(1, 4))) for j in range(n_prescripts))
    actions = tuple(ActionDef(f"a{k}") for k in range(n_actions))
    pc = _simplex(rng, n_dicta)
    context = {d.id: float(p) for d, p in zip(dicta, pc)}
    conditional = {d.id: {e.id: float(p) for e, p in zip(prescripts, _simplex(rng, n_prescripts))}
                   for d in dicta}
    u = rng.uniform(-u_scale, u_scale, size=(n_actions, n_dicta, n_prescripts))
    utilities = {(a.id, d.id, e.id): float(u[k, i, j])
                 for k, a in enumerate(actions) for i, d in enumerate(dicta) for j, e in enumerate(prescripts)}
    objective = baseline = None
    if weighted:
        objective = {e.id: float(w) for e, w in zip(prescripts, rng.uniform(0.0, 2.0, n_prescripts))}
        objective[prescripts[0].id] += 0.1
        baseline = {(e.id, d.id): float(rng.uniform(0.5, 2.0)) for e in prescripts for d in dicta}
    return ScenarioModel(name, dicta, prescripts, actions, context, conditional, utilities,
                         objective_weights=objective, baseline_weights=baseline, u_max=u_max)


def scenario_from_arrays(context, conditional, utility, *, action_ids=None, dictum_ids=None,
                         prescript_ids=None, priority=None, objective=None, name: str = "arrays",
                         u_max: float = 1000.0) -> ScenarioModel:
    """Build a scenario from dense arrays: P(C) (n,), P(E|C) (n, m), u (k, n, m)."""
    context = np.asarray(context, dtype=float)
    conditional = np.asarray(conditional, dtype=float)
    utility = np.asarray(utility, dtype=float)
    k, n, m = utility.shape
    cids = dictum_ids or [f"c{i}" for i in range(n)]
    eids = prescript_ids or [f"e{j}" for j in range(m)]
    aids = action_ids or [f"a{i}" for i in range(k)]
    ranks = priority or [1] * m
    return ScenarioModel(
        name,
        tuple(Dictum(c) for c in cids),
        tuple(Prescript(e, priority_rank=r) for e, r in zip(eids, ranks)),
        tuple(ActionDef(a) for a in aids),
        {c: float(p) for c, p in zip(cids, context)},
        {c: {e: float(conditional[i, j]) for j, e in enumerate(eids)} for i, c in enumerate(cids)},
        {(a, c, e): float(utility[x, i, j]) for x, a in enumerate(aids)
         for i, c in enumerate(cids) for j, e in enumerate(eids)},
        objective_weights=None if objective is None else dict(zip(eids, map(float, objective))),
        u_max=u_max,
    )
