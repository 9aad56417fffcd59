"""Incremental policy learning used to test convergence of repeated decisions.

Each episode samples a dictum from P(C), picks an action by softmax over the
learned preferences for that dictum, observes the conditional expected utility
as reward and moves the preference toward it with step 1/(1 + visits). The
exploration temperature decays as max(tau_min, tau_0 / sqrt(t)).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .decision import softmax
from .model import ScenarioModel, require_valid


class LearningError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PolicyState:
    """Snapshot of the learner. Arrays are indexed (dictum, action) in canonical order."""

    dictum_ids: tuple[str, ...]
    action_ids: tuple[str, ...]
    counts: np.ndarray
    preferences: np.ndarray
    step: int
    temperature: float

    def policy(self, dictum_id: str | None = None) -> np.ndarray:
        """Induced action distribution, one row per dictum (or the row for ``dictum_id``).

        Actions never visited in a dictum are tried first, in id order, so
        while any remain the policy puts all mass on the first of them.
        """
        pol = induced_policy(self.counts, self.preferences, self.temperature)
        if dictum_id is not None:
            return pol[self.dictum_ids.index(dictum_id)]
        return pol


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    convergence_step: int | None
    final_probability: float
    trajectory: tuple[tuple[int, float], ...]
    stability_window: int
    eps_conv: float
    best_actions: dict[str, str]
    final_state: PolicyState | None = None
    checkpoints: tuple[PolicyState, ...] = ()
    episodes: tuple[tuple[int, str, str, float, float], ...] = ()

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "convergence_step": self.convergence_step,
            "final_probability": self.final_probability,
            "stability_window": self.stability_window,
            "eps_conv": self.eps_conv,
            "best_actions": dict(self.best_actions),
            "trajectory": [[t, p] for t, p in self.trajectory],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceReport":
        return cls(
            converged=bool(d["converged"]),
            convergence_step=d["convergence_step"],
            final_probability=float(d["final_probability"]),
            trajectory=tuple((int(t), float(p)) for t, p in d["trajectory"]),
            stability_window=int(d["stability_window"]),
            eps_conv=float(d["eps_conv"]),
            best_actions=dict(d["best_actions"]),
        )


def induced_policy(counts: np.ndarray, prefs: np.ndarray, tau: float) -> np.ndarray:
    z = (prefs - prefs.max(axis=1, keepdims=True)) / tau
    pol = np.exp(z)
    pol /= pol.sum(axis=1, keepdims=True)
    for ci in np.flatnonzero((counts == 0).any(axis=1)):
        pol[ci] = 0.0
        pol[ci, np.flatnonzero(counts[ci] == 0)[0]] = 1.0
    return pol


def conditional_rewards(model: ScenarioModel) -> np.ndarray:
    """Reward table r(c, a) = sum_j alpha_j w(e_j, c) P(e_j|c) u(a|c, e_j), shape (dicta, actions)."""
    weights = model.alpha_vector[None, :] * model.baseline_matrix * model.conditional_matrix
    u = model.utility_tensor  # (a, c, e)
    rewards = np.zeros((len(model.dictum_ids), len(model.action_ids)))
    for j in range(u.shape[2]):
        rewards = rewards + weights[:, j][:, None] * u[:, :, j].T
    return rewards


def temperature_at(t: int, tau0: float, tau_min: float) -> float:
    return max(tau_min, tau0 / np.sqrt(max(t, 1)))


def run_learning(
    model: ScenarioModel,
    episodes: int,
    seed: int = 0,
    eps_conv: float = 0.05,
    window: int = 500,
    *,
    tau0: float = 1.0,
    tau_min: float = 0.01,
    noise: float = 0.0,
    checkpoint_every: int = 0,
    record_episodes: bool = False,
    trajectory_every: int = 1,
) -> ConvergenceReport:
    """Run the learner for ``episodes`` steps and report whether the policy settled.

    The tracked probability at step t is the smallest P(best action | c) over
    dicta with P(c) > 0, where the best action maximizes the true conditional
    reward (ties resolved to the smallest id). The run counts as converged once
    that probability has stayed at or above ``1 - eps_conv`` for ``window``
    consecutive episodes, up to the end of the run.

    ``noise`` > 0 adds uniform zero-mean noise in [-noise, noise] to rewards.
    ``trajectory_every`` thins the recorded trajectory (the last step is always kept).
    """
    require_valid(model)
    if not (isinstance(episodes, (int, np.integer)) and episodes >= 1):
        raise LearningError(f"episodes must be a positive integer, got {episodes!r}")
    if not (isinstance(window, (int, np.integer)) and 1 <= window <= episodes):
        raise LearningError(f"window must be an integer in [1, episodes], got {window!r}")
    if not 0 < eps_conv < 1:
        raise LearningError(f"eps_conv must lie in (0, 1), got {eps_conv!r}")
    if not (tau0 > 0 and tau_min > 0):
        raise LearningError("temperatures must be positive")
    if noise < 0:
        raise LearningError("noise must be >= 0")

    rng = np.random.default_rng(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)
    pc = model.context_vector
    rewards = conditional_rewards(model)
    n_c, n_a = rewards.shape
    best = np.array([int(np.flatnonzero(r >= r.max())[0]) for r in rewards])
    support = np.flatnonzero(pc > 0)

    counts = np.zeros((n_c, n_a))
    prefs = np.zeros((n_c, n_a))
    trajectory, rows, checkpoints = [], [], []
    streak, conv_step = 0, None
    cdf = np.cumsum(pc)

    def snapshot(t: int, tau: float) -> PolicyState:
        return PolicyState(model.dictum_ids, model.action_ids, counts.copy(), prefs.copy(), t, tau)

    for t in range(1, episodes + 1):
        tau = temperature_at(t, tau0, tau_min)
        c = min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), n_c - 1)
        unvisited = np.flatnonzero(counts[c] == 0)
        if unvisited.size:
            a = int(unvisited[0])
        else:
            probs = softmax(prefs[c], tau)
            a = min(int(np.searchsorted(np.cumsum(probs), rng.random(), side="right")), n_a - 1)
        r = rewards[c, a]
        if noise:
            r += rng.uniform(-noise, noise)
        eta = 1.0 / (1.0 + counts[c, a])
        prefs[c, a] += eta * (r - prefs[c, a])
        counts[c, a] += 1

        pol = induced_policy(counts, prefs, temperature_at(t + 1, tau0, tau_min))
        p_best = float(min(pol[ci, best[ci]] for ci in support))
        if t % trajectory_every == 0 or t == episodes:
            trajectory.append((t, p_best))
        if record_episodes:
            rows.append((t, model.dictum_ids[c], model.action_ids[a], float(r), float(pol[c, best[c]])))
        if checkpoint_every and t % checkpoint_every == 0:
            checkpoints.append(snapshot(t, temperature_at(t + 1, tau0, tau_min)))

        if p_best >= 1.0 - eps_conv:
            streak += 1
            if streak >= window and conv_step is None:
                conv_step = t
        else:
            streak = 0
            conv_step = None

    final = p_best
    return ConvergenceReport(
        converged=conv_step is not None,
        convergence_step=conv_step,
        final_probability=final,
        trajectory=tuple(trajectory),
        stability_window=int(window),
        eps_conv=float(eps_conv),
        best_actions={model.dictum_ids[ci]: model.action_ids[best[ci]] for ci in range(n_c)},
        final_state=snapshot(episodes, temperature_at(episodes + 1, tau0, tau_min)),
        checkpoints=tuple(checkpoints),
        episodes=tuple(rows),
    )


def policy_distance(p1: PolicyState, p2: PolicyState) -> float:
    """Largest L1 distance between the two induced action distributions over dicta."""
    if p1.dictum_ids != p2.dictum_ids or p1.action_ids != p2.action_ids:
        raise LearningError("policy states come from differently shaped scenarios")
    return float(np.abs(p1.policy() - p2.policy()).sum(axis=1).max())


def trajectory_csv(report: ConvergenceReport) -> str:
    """Per-episode rows ``t,dictum,action,reward,p_best`` (needs ``record_episodes=True``)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "dictum", "action", "reward", "p_best"])
    for t, c, a, r, p in report.episodes:
        writer.writerow([t, c, a, repr(r), repr(p)])
    return buf.getvalue()
