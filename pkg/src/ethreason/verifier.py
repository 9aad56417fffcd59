"""Empirical checks of consistency, optimality, robustness and alignment.

Every check returns a :class:`VerifierReport`. Perturbation trials draw from a
generator seeded by ``(seed, trial_index)``, so a report does not depend on
how many trials ran before it and doubling ``samples`` only adds trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .decision import (
    action_probabilities,
    decide,
    partial_utilities,
    select_action,
    softmax,
    sum_objectives,
)
from .model import ScenarioModel, prescript_marginal, require_valid

MODES = ("context", "conditional")
OPTIMALITY_GAP_TOL = 1e-9
MAX_EXHAUSTIVE_CELLS = 10**6
_MAX_REDRAWS = 64


class VerifierError(ValueError):
    pass


@dataclass(frozen=True)
class PerturbationSpec:
    """``magnitude`` is the distance budget; ``samples`` trials are drawn from ``seed``."""

    mode: str = "context"
    magnitude: float = 0.1
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise VerifierError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (isinstance(self.magnitude, (int, float)) and 0 <= self.magnitude <= 2):
            raise VerifierError(f"magnitude must lie in [0, 2], got {self.magnitude!r}")
        if not (isinstance(self.samples, (int, np.integer)) and self.samples >= 1):
            raise VerifierError(f"samples must be a positive integer, got {self.samples!r}")


@dataclass(frozen=True)
class VerifierReport:
    theorem: int
    verdict: str
    measured: dict
    trials: int
    failures: tuple = ()
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "verdict": self.verdict,
            "measured": dict(self.measured),
            "trials": self.trials,
            "failures": list(self.failures),
            "details": dict(self.details),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerifierReport":
        return cls(d["theorem"], d["verdict"], dict(d["measured"]), int(d["trials"]),
                   tuple(d.get("failures", ())), dict(d.get("details", {})))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFF_FFFF_FFFF_FFFF, int(trial)])


def l1(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.abs(np.asarray(x) - np.asarray(y)).sum())


def total_variation(x: np.ndarray, y: np.ndarray) -> float:
    return 0.5 * l1(x, y)


def perturb_simplex(p: np.ndarray, budget: float, rng: np.random.Generator,
                    metric: str = "l1") -> np.ndarray:
    """A random point of the probability simplex within ``budget`` of ``p``.

    A Dirichlet(1) draw ``q`` picks the direction; ``p`` moves toward ``q`` by a
    uniformly drawn fraction of the budget, measured in L1 or total variation.
    The result is clipped and renormalized onto the simplex and redrawn if that
    pushed it past the budget.
    """
    p = np.asarray(p, dtype=float)
    dist = l1 if metric == "l1" else total_variation
    scale = 1.0 if metric == "l1" else 2.0
    for _ in range(_MAX_REDRAWS):
        q = rng.dirichlet(np.ones(p.size))
        span = l1(q, p)
        radius = budget * rng.random() * scale
        if span == 0.0 or radius == 0.0:
            return p.copy()
        t = min(1.0, radius / span)
        out = np.clip(p + t * (q - p), 0.0, None)
        out = out / out.sum()
        if dist(out, p) <= budget:
            return out
    return p.copy()


def _perturb_rows(cond: np.ndarray, budget: float, rng, metric: str) -> np.ndarray:
    return np.vstack([perturb_simplex(row, budget, rng, metric) for row in cond])


def _check_threshold(name: str, value) -> None:
    if value is not None and not (isinstance(value, (int, float)) and value > 0):
        raise VerifierError(f"{name} must be positive, got {value!r}")


def _verdict(failures) -> str:
    return "fail" if failures else "pass"


def check_consistency(model: ScenarioModel, spec: PerturbationSpec, L_max: float | None) -> VerifierReport:
    """Estimate the Lipschitz constant of the prescript distribution under perturbation.

    ``context`` mode perturbs P(C) within total variation ``spec.magnitude`` and
    measures the L1 change of the prescript marginal P(E) per unit of context
    distance. ``conditional`` mode perturbs every row of P(E|C) within the same
    budget and divides by the largest row change (total variation).

    ``L_max=None`` measures without a threshold (the verdict is then always pass).
    """
    require_valid(model)
    _check_threshold("L_max", L_max)
    pc, pec = model.context_vector, model.conditional_matrix
    base = prescript_marginal(pc, pec)
    ratios, failures = [], []
    for t in range(spec.samples):
        if spec.magnitude == 0:
            break
        rng = trial_rng(spec.seed, t)
        if spec.mode == "context":
            pc2 = perturb_simplex(pc, spec.magnitude, rng, "tv")
            d = total_variation(pc, pc2)
            moved = prescript_marginal(pc2, pec)
        else:
            pec2 = _perturb_rows(pec, spec.magnitude, rng, "tv")
            d = max(total_variation(a, b) for a, b in zip(pec, pec2))
            moved = prescript_marginal(pc, pec2)
        if d <= 0.0:
            continue
        ratio = l1(moved, base) / d
        ratios.append(ratio)
        if L_max is not None and ratio > L_max:
            failures.append(t)
    L_hat = max(ratios) if ratios else 0.0
    return VerifierReport(
        theorem=1,
        verdict=_verdict(failures),
        measured={"L_hat": L_hat, "L_max": None if L_max is None else float(L_max)},
        trials=len(ratios),
        failures=tuple(failures),
        details={"mode": spec.mode, "metric": "total_variation", "magnitude": spec.magnitude,
                 "seed": spec.seed},
    )


def _kahan(values) -> float:
    total, comp = 0.0, 0.0
    for v in values:
        y = v - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total


def oracle_utilities(model: ScenarioModel) -> dict[str, float]:
    """Weighted expected utility per action by compensated summation from the raw maps.

    Deliberately independent of the engine: reads the dicts directly and walks
    the (prescript, dictum) grid in reverse order.
    """
    out = {}
    cells = [(e, c) for e in model.prescript_ids for c in model.dictum_ids][::-1]
    for a in model.action_ids:
        terms = (model.alpha(e) * (model.context[c] * model.conditional[c][e]
                                   * model.baseline(e, c)) * model.utilities[(a, c, e)]
                 for e, c in cells)
        out[a] = _kahan(terms)
    return out


def check_optimality(model: ScenarioModel) -> VerifierReport:
    """Compare the engine's choice with exhaustive enumeration by an independent oracle."""
    require_valid(model)
    cells = len(model.action_ids) * len(model.dictum_ids) * len(model.prescript_ids)
    if cells > MAX_EXHAUSTIVE_CELLS:
        raise VerifierError(f"scenario has {cells} utility cells; exhaustive check limited to {MAX_EXHAUSTIVE_CELLS}")
    report = decide(model)
    oracle = oracle_utilities(model)
    best = max(oracle.values())
    gap = best - oracle[report.chosen_action]
    drift = max(abs(oracle[a] - report.expected_utilities[a]) for a in oracle)
    failures = (report.chosen_action,) if gap > OPTIMALITY_GAP_TOL else ()
    return VerifierReport(
        theorem=2,
        verdict=_verdict(failures),
        measured={"gap": gap, "oracle_max": best, "engine_oracle_max_diff": drift},
        trials=len(oracle),
        failures=failures,
        details={"chosen_action": report.chosen_action,
                 "oracle_argmax": sorted(a for a, v in oracle.items() if v >= best - OPTIMALITY_GAP_TOL)},
    )


def check_robustness(model: ScenarioModel, spec: PerturbationSpec, K_max: float | None,
                     temperature: float = 1.0) -> VerifierReport:
    """Sensitivity of the softmax decision distribution to perturbed inputs.

    The ratio is ||dP(A)||_1 / ||dP(C)||_1 in ``context`` mode, or the largest
    row change of P(E|C) (L1) in ``conditional`` mode. Hard argmax changes are
    counted separately as ``argmax_flips``; they do not affect the verdict.
    ``K_max=None`` measures without a threshold.
    """
    require_valid(model)
    _check_threshold("K_max", K_max)
    pc, pec, u = model.context_vector, model.conditional_matrix, model.utility_tensor
    w, alpha = model.baseline_matrix, model.alpha_vector
    base_probs = action_probabilities(model, temperature)
    base_choice = decide(model).chosen_action
    ratios, failures = [], []
    flips, min_flip = 0, None
    for t in range(spec.samples):
        if spec.magnitude == 0:
            break
        rng = trial_rng(spec.seed, t)
        if spec.mode == "context":
            pc2, pec2 = perturb_simplex(pc, spec.magnitude, rng, "l1"), pec
            d = l1(pc, pc2)
        else:
            pc2, pec2 = pc, _perturb_rows(pec, spec.magnitude, rng, "l1")
            d = max(l1(a, b) for a, b in zip(pec, pec2))
        if d <= 0.0:
            continue
        parts = partial_utilities(pc2, pec2, u, w, alpha)
        totals = sum_objectives(parts)
        ratio = l1(softmax(totals, temperature), base_probs) / d
        ratios.append(ratio)
        if K_max is not None and ratio > K_max:
            failures.append(t)
        choice, _ = select_action(model, totals, parts)
        if choice != base_choice:
            flips += 1
            min_flip = d if min_flip is None else min(min_flip, d)
    K_hat = max(ratios) if ratios else 0.0
    return VerifierReport(
        theorem=3,
        verdict=_verdict(failures),
        measured={"K_hat": K_hat, "K_max": None if K_max is None else float(K_max), "argmax_flips": flips,
                  "min_flip_size": min_flip, "temperature": float(temperature)},
        trials=len(ratios),
        failures=tuple(failures),
        details={"mode": spec.mode, "metric": "l1", "magnitude": spec.magnitude, "seed": spec.seed,
                 "base_action": base_choice},
    )


def _pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 2 or np.std(x) == 0 or np.std(y) == 0:
        return None
    return float(np.corrcoef(x, y)[0, 1])


def check_alignment(reference: Sequence[tuple[ScenarioModel, str]], theta: float) -> VerifierReport:
    """Agreement between engine decisions and a reference decision corpus.

    Passes iff the fraction of exact matches exceeds ``theta``. Also reports the
    Pearson correlation between the engine's utility for the reference action
    and its best utility, which is ``None`` when either side is constant.
    """
    if not reference:
        raise VerifierError("reference corpus is empty")
    if not 0 <= theta <= 1:
        raise VerifierError(f"theta must lie in [0, 1], got {theta!r}")
    matches, ref_u, best_u, misses = 0, [], [], []
    for i, (model, action) in enumerate(reference):
        if action not in model.action_ids:
            raise VerifierError(f"reference action {action!r} not in scenario {model.name!r} (record {i})")
        rep = decide(model)
        if rep.chosen_action == action:
            matches += 1
        else:
            misses.append(i)
        ref_u.append(rep.expected_utilities[action])
        best_u.append(max(rep.expected_utilities.values()))
    agreement = matches / len(reference)
    verdict = "pass" if agreement > theta else "fail"
    return VerifierReport(
        theorem=5,
        verdict=verdict,
        measured={"agreement": agreement, "pearson": _pearson(ref_u, best_u), "theta": float(theta)},
        trials=len(reference),
        failures=tuple(misses) if verdict == "fail" else (),
        details={"disagreements": misses},
    )
