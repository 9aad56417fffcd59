"""Expected-utility action selection.

All sums run in canonical (lexicographic id) order: dicta are accumulated one
at a time, then per-prescript partial utilities are added one at a time. The
plain and weighted utilities share that path, so with unit weights they agree
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ScenarioModel, require_valid

TIE_TOL = 1e-9


@dataclass(frozen=True)
class DecisionReport:
    expected_utilities: dict[str, float]
    chosen_action: str
    tie: bool
    tied_actions: tuple[str, ...]
    objective_breakdown: dict[tuple[str, str], float]
    mode: str = "deterministic"
    action_distribution: dict[str, float] | None = None
    temperature: float | None = None

    def to_dict(self) -> dict:
        breakdown: dict[str, dict[str, float]] = {}
        for (a, e), v in self.objective_breakdown.items():
            breakdown.setdefault(a, {})[e] = v
        out = {
            "chosen_action": self.chosen_action,
            "expected_utilities": dict(self.expected_utilities),
            "mode": self.mode,
            "objective_breakdown": breakdown,
            "tie": {"flag": self.tie, "actions": list(self.tied_actions)},
        }
        if self.action_distribution is not None:
            out["action_distribution"] = dict(self.action_distribution)
            out["temperature"] = self.temperature
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionReport":
        return cls(
            expected_utilities={k: float(v) for k, v in d["expected_utilities"].items()},
            chosen_action=d["chosen_action"],
            tie=bool(d["tie"]["flag"]),
            tied_actions=tuple(d["tie"]["actions"]),
            objective_breakdown={(a, e): float(v) for a, row in d["objective_breakdown"].items()
                                 for e, v in row.items()},
            mode=d.get("mode", "deterministic"),
            action_distribution=d.get("action_distribution"),
            temperature=d.get("temperature"),
        )


def partial_utilities(context: np.ndarray, conditional: np.ndarray, utility: np.ndarray,
                      baseline: np.ndarray | None = None, alpha: np.ndarray | None = None) -> np.ndarray:
    """Per-objective utilities from dense arrays, shape (n_actions, n_prescripts).

    alpha_j * sum_i P(c_i) w(e_j, c_i) P(e_j|c_i) u(a|c_i, e_j), accumulated
    over dicta in index order. ``baseline``/``alpha`` of None mean unit weights.
    """
    joint = context[:, None] * conditional
    if baseline is not None:
        joint = joint * baseline
    acc = np.zeros((utility.shape[0], utility.shape[2]))
    for i in range(utility.shape[1]):
        acc = acc + joint[i] * utility[:, i, :]
    if alpha is not None:
        acc = alpha * acc
    return acc


def _partials(model: ScenarioModel, weighted: bool) -> np.ndarray:
    if weighted:
        return partial_utilities(model.context_vector, model.conditional_matrix, model.utility_tensor,
                                 model.baseline_matrix, model.alpha_vector)
    return partial_utilities(model.context_vector, model.conditional_matrix, model.utility_tensor)


def sum_objectives(partials: np.ndarray) -> np.ndarray:
    total = np.zeros(partials.shape[0])
    for j in range(partials.shape[1]):
        total = total + partials[:, j]
    return total


def expected_utilities(model: ScenarioModel) -> dict[str, float]:
    """U(a|C,E) for every action, without objective or baseline weights."""
    totals = sum_objectives(_partials(model, weighted=False))
    return {a: float(v) for a, v in zip(model.action_ids, totals)}


def expected_utility(model: ScenarioModel, action_id: str) -> float:
    i = model.index_of("action", action_id)
    return float(sum_objectives(_partials(model, weighted=False))[i])


def objective_breakdown(model: ScenarioModel) -> np.ndarray:
    """alpha_j * U_j(a) with baseline weights applied, shape (n_actions, n_prescripts)."""
    return _partials(model, weighted=True)


def weighted_expected_utilities(model: ScenarioModel) -> dict[str, float]:
    totals = sum_objectives(_partials(model, weighted=True))
    return {a: float(v) for a, v in zip(model.action_ids, totals)}


def weighted_expected_utility(model: ScenarioModel, action_id: str) -> float:
    """sum_j alpha_j U_j(a|C, e_j); reduces to :func:`expected_utility` under unit weights."""
    i = model.index_of("action", action_id)
    return float(sum_objectives(_partials(model, weighted=True))[i])


def _best_prescript_rank(model: ScenarioModel, row: np.ndarray) -> int:
    top = row.max()
    ranks = [model.prescripts[j].priority_rank for j in range(len(row)) if row[j] >= top - TIE_TOL]
    return min(ranks)


def select_action(model: ScenarioModel, totals: np.ndarray, parts: np.ndarray) -> tuple[str, tuple[str, ...]]:
    best = totals.max()
    cands = [i for i in range(len(totals)) if totals[i] >= best - TIE_TOL]
    tied = tuple(model.action_ids[i] for i in cands)
    if len(cands) == 1:
        return tied[0], ()
    # Lowest priority_rank of the best-contributing prescript, then smallest id.
    chosen = min(cands, key=lambda i: (_best_prescript_rank(model, parts[i]), model.action_ids[i]))
    return model.action_ids[chosen], tied


def decide(model: ScenarioModel) -> DecisionReport:
    """Pick argmax_a of the weighted expected utility, with a total tie-break order."""
    require_valid(model)
    parts = _partials(model, weighted=True)
    totals = sum_objectives(parts)
    chosen, tied = select_action(model, totals, parts)
    return DecisionReport(
        expected_utilities={a: float(v) for a, v in zip(model.action_ids, totals)},
        chosen_action=chosen,
        tie=bool(tied),
        tied_actions=tied,
        objective_breakdown={(a, e): float(parts[ai, ei])
                             for ai, a in enumerate(model.action_ids)
                             for ei, e in enumerate(model.prescript_ids)},
    )


def softmax(values: np.ndarray, temperature: float) -> np.ndarray:
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature!r}")
    z = (np.asarray(values, dtype=float) - np.max(values)) / temperature
    ez = np.exp(z)
    return ez / ez.sum()


def action_probabilities(model: ScenarioModel, temperature: float) -> np.ndarray:
    """Softmax of weighted expected utilities, canonical action order."""
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature!r}")
    return softmax(sum_objectives(_partials(model, weighted=True)), temperature)


def action_distribution(model: ScenarioModel, temperature: float) -> dict[str, float]:
    """P(a|C,E) = exp(U(a)/tau) / sum_b exp(U(b)/tau)."""
    probs = action_probabilities(model, temperature)
    return {a: float(p) for a, p in zip(model.action_ids, probs)}


def _seed_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)


def sample_action(model: ScenarioModel, temperature: float, seed: int) -> str:
    """Draw one action from :func:`action_distribution` with a generator seeded by ``seed``."""
    probs = action_probabilities(model, temperature)
    cdf = np.cumsum(probs)
    r = _seed_rng(seed).random() * cdf[-1]
    idx = int(np.searchsorted(cdf, r, side="right"))
    return model.action_ids[min(idx, len(probs) - 1)]


def sampled_report(model: ScenarioModel, temperature: float, seed: int) -> DecisionReport:
    """A :class:`DecisionReport` in ``sampled`` mode: the chosen action is a draw."""
    base = decide(model)
    dist = action_distribution(model, temperature)
    return DecisionReport(
        expected_utilities=base.expected_utilities,
        chosen_action=sample_action(model, temperature, seed),
        tie=base.tie,
        tied_actions=base.tied_actions,
        objective_breakdown=base.objective_breakdown,
        mode="sampled",
        action_distribution=dist,
        temperature=float(temperature),
    )
