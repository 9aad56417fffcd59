"""Scenario data model: dicta, prescripts, actions, distributions and utilities.

Models are plain frozen dataclasses. Mapping fields are ordinary dicts and are
never mutated by this package; derive variants with :func:`dataclasses.replace`.
A model may be constructed in an invalid state so that :func:`validate_scenario`
can report every problem at once.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

PROB_TOL = 1e-9
DEFAULT_U_MAX = 1000.0
MAX_ID_LENGTH = 64

_ID_RE = re.compile(r"^[\x21-\x7e]{1,64}$")


class ScenarioError(ValueError):
    """Raised when a scenario cannot be used, e.g. an unknown id is requested."""


class UnknownIdError(ScenarioError, KeyError):
    def __init__(self, kind: str, ident: str):
        self.kind = kind
        self.ident = ident
        super().__init__(f"unknown {kind} id {ident!r}")

    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class Dictum:
    id: str
    description: str = ""
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class Prescript:
    id: str
    description: str = ""
    priority_rank: int = 1


@dataclass(frozen=True)
class ActionDef:
    id: str
    description: str = ""


@dataclass(frozen=True)
class Violation:
    """One broken invariant. ``residual`` carries the numeric miss where there is one."""

    code: str
    ident: str
    message: str
    residual: float | None = None

    def to_dict(self) -> dict:
        out = {"code": self.code, "id": self.ident, "message": self.message}
        if self.residual is not None:
            out["residual"] = self.residual
        return out


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def to_dict(self) -> dict:
        return {"valid": self.ok, "violations": [v.to_dict() for v in self.violations]}


@dataclass(frozen=True)
class ScenarioModel:
    """A complete decision scenario.

    ``context`` maps dictum id to P(c); ``conditional`` maps dictum id to a map
    prescript id -> P(e|c); ``utilities`` maps (action, dictum, prescript) to
    u(a|c,e). ``objective_weights`` (alpha per prescript) and ``baseline_weights``
    (w per (prescript, dictum)) are ``None`` when not given, meaning 1.0 everywhere.

    Entity lists are kept sorted by id, which is the canonical order used by
    every computation and by serialization.
    """

    name: str
    dicta: tuple[Dictum, ...]
    prescripts: tuple[Prescript, ...]
    actions: tuple[ActionDef, ...]
    context: Mapping[str, float]
    conditional: Mapping[str, Mapping[str, float]]
    utilities: Mapping[tuple[str, str, str], float]
    objective_weights: Mapping[str, float] | None = None
    baseline_weights: Mapping[tuple[str, str], float] | None = None
    u_max: float = DEFAULT_U_MAX
    description: str = ""
    notes: str = ""
    format_version: int = 1

    def __post_init__(self):
        for name in ("dicta", "prescripts", "actions"):
            items = tuple(sorted(getattr(self, name), key=lambda x: x.id))
            object.__setattr__(self, name, items)

    @cached_property
    def dictum_ids(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.dicta)

    @cached_property
    def prescript_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.prescripts)

    @cached_property
    def action_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.actions)

    @cached_property
    def priority(self) -> dict[str, int]:
        return {p.id: p.priority_rank for p in self.prescripts}

    def alpha(self, prescript_id: str) -> float:
        if self.objective_weights is None:
            return 1.0
        return float(self.objective_weights.get(prescript_id, 1.0))

    def baseline(self, prescript_id: str, dictum_id: str) -> float:
        if self.baseline_weights is None:
            return 1.0
        return float(self.baseline_weights.get((prescript_id, dictum_id), 1.0))

    # Dense views in canonical order. Missing entries become NaN so that they
    # poison any computation on an unvalidated model instead of reading as 0.

    @cached_property
    def context_vector(self) -> np.ndarray:
        return np.array([self.context.get(c, np.nan) for c in self.dictum_ids], dtype=float)

    @cached_property
    def conditional_matrix(self) -> np.ndarray:
        """Shape (n_dicta, n_prescripts)."""
        return np.array(
            [[self.conditional.get(c, {}).get(e, np.nan) for e in self.prescript_ids]
             for c in self.dictum_ids],
            dtype=float,
        ).reshape(len(self.dictum_ids), len(self.prescript_ids))

    @cached_property
    def utility_tensor(self) -> np.ndarray:
        """Shape (n_actions, n_dicta, n_prescripts)."""
        u = np.full((len(self.action_ids), len(self.dictum_ids), len(self.prescript_ids)), np.nan)
        for ai, a in enumerate(self.action_ids):
            for ci, c in enumerate(self.dictum_ids):
                for ei, e in enumerate(self.prescript_ids):
                    val = self.utilities.get((a, c, e))
                    if val is not None:
                        u[ai, ci, ei] = val
        return u

    @cached_property
    def alpha_vector(self) -> np.ndarray:
        return np.array([self.alpha(e) for e in self.prescript_ids], dtype=float)

    @cached_property
    def baseline_matrix(self) -> np.ndarray:
        """Baseline weights w laid out like :attr:`conditional_matrix` (dicta x prescripts)."""
        return np.array(
            [[self.baseline(e, c) for e in self.prescript_ids] for c in self.dictum_ids],
            dtype=float,
        ).reshape(len(self.dictum_ids), len(self.prescript_ids))

    def index_of(self, kind: str, ident: str) -> int:
        ids = {"dictum": self.dictum_ids, "prescript": self.prescript_ids,
               "action": self.action_ids}[kind]
        try:
            return ids.index(ident)
        except ValueError:
            raise UnknownIdError(kind, ident) from None

    def with_context(self, context: Mapping[str, float]) -> "ScenarioModel":
        from dataclasses import replace
        return replace(self, context=dict(context))

    def with_conditional(self, conditional: Mapping[str, Mapping[str, float]]) -> "ScenarioModel":
        from dataclasses import replace
        return replace(self, conditional={c: dict(row) for c, row in conditional.items()})

    def with_weights(self, objective=None, baseline=None) -> "ScenarioModel":
        from dataclasses import replace
        return replace(
            self,
            objective_weights=self.objective_weights if objective is None else dict(objective),
            baseline_weights=self.baseline_weights if baseline is None else dict(baseline),
        )


def _check_ids(kind: str, items, out: list[Violation]) -> set[str]:
    seen: set[str] = set()
    for item in items:
        if not isinstance(item.id, str) or not _ID_RE.match(item.id):
            out.append(Violation("bad-id", str(item.id),
                                 f"{kind} id {item.id!r} must be 1-{MAX_ID_LENGTH} printable ASCII chars"))
        if item.id in seen:
            out.append(Violation("duplicate-id", item.id, f"duplicate {kind} id {item.id!r}"))
        seen.add(item.id)
    return seen


def _is_prob(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x) and 0.0 <= x <= 1.0


def validate_scenario(model: ScenarioModel) -> ValidationReport:
    """Return every violated invariant; an empty report means the model is valid."""
    out: list[Violation] = []
    dicta = _check_ids("dictum", model.dicta, out)
    prescripts = _check_ids("prescript", model.prescripts, out)
    actions = _check_ids("action", model.actions, out)

    for p in model.prescripts:
        if not isinstance(p.priority_rank, int) or isinstance(p.priority_rank, bool) or p.priority_rank < 1:
            out.append(Violation("bad-priority", p.id, f"priority_rank of {p.id!r} must be an integer >= 1"))
    for kind, ids in (("dictum", dicta), ("prescript", prescripts), ("action", actions)):
        if not ids:
            out.append(Violation("empty-set", kind, f"scenario declares no {kind}"))

    if not (isinstance(model.u_max, (int, float)) and math.isfinite(model.u_max) and model.u_max > 0):
        out.append(Violation("bad-u-max", "u_max", f"u_max must be a positive finite number, got {model.u_max!r}"))

    # P(C)
    for c, p in model.context.items():
        if c not in dicta:
            out.append(Violation("dangling-ref", c, f"context references unknown dictum {c!r}"))
        if not _is_prob(p):
            out.append(Violation("bad-probability", c, f"P({c}) = {p!r} is not in [0, 1]"))
    for c in sorted(dicta - set(model.context)):
        out.append(Violation("missing-entry", c, f"context has no probability for dictum {c!r}"))
    total = math.fsum(p for p in model.context.values() if isinstance(p, (int, float)))
    if model.context and abs(total - 1.0) > PROB_TOL:
        out.append(Violation("context-sum", "context",
                             f"context sum {total:g}, residual {abs(total - 1.0):g}", abs(total - 1.0)))

    # P(E|C)
    for c, row in model.conditional.items():
        if c not in dicta:
            out.append(Violation("dangling-ref", c, f"conditional references unknown dictum {c!r}"))
            continue
        for e, p in row.items():
            if e not in prescripts:
                out.append(Violation("dangling-ref", e, f"conditional[{c}] references unknown prescript {e!r}"))
            if not _is_prob(p):
                out.append(Violation("bad-probability", f"{c}/{e}", f"P({e}|{c}) = {p!r} is not in [0, 1]"))
        for e in sorted(prescripts - set(row)):
            out.append(Violation("missing-entry", f"{c}/{e}", f"conditional has no P({e}|{c})"))
        s = math.fsum(p for p in row.values() if isinstance(p, (int, float)))
        if abs(s - 1.0) > PROB_TOL:
            out.append(Violation("conditional-sum", c,
                                 f"conditional sum for {c} {s:g}, residual {abs(s - 1.0):g}", abs(s - 1.0)))
    for c in sorted(dicta - set(model.conditional)):
        out.append(Violation("missing-entry", c, f"conditional has no row for dictum {c!r}"))

    # u(a|c,e)
    for key, val in model.utilities.items():
        a, c, e = key
        for kind, ident, known in (("action", a, actions), ("dictum", c, dicta), ("prescript", e, prescripts)):
            if ident not in known:
                out.append(Violation("dangling-ref", ident, f"utility {key} references unknown {kind} {ident!r}"))
        if not (isinstance(val, (int, float)) and math.isfinite(val)):
            out.append(Violation("bad-utility", "/".join(key), f"utility {key} = {val!r} is not finite"))
        elif isinstance(model.u_max, (int, float)) and abs(val) > model.u_max:
            out.append(Violation("utility-bound", "/".join(key),
                                 f"|u{key}| = {abs(val):g} exceeds u_max {model.u_max:g}",
                                 abs(val) - model.u_max))
    for a in sorted(actions):
        for c in sorted(dicta):
            for e in sorted(prescripts):
                if (a, c, e) not in model.utilities:
                    out.append(Violation("missing-entry", f"{a}/{c}/{e}", f"no utility for ({a}, {c}, {e})"))

    # alpha
    if model.objective_weights is not None:
        for e, w in model.objective_weights.items():
            if e not in prescripts:
                out.append(Violation("dangling-ref", e, f"objective weight for unknown prescript {e!r}"))
            if not (isinstance(w, (int, float)) and math.isfinite(w) and w >= 0):
                out.append(Violation("bad-weight", e, f"objective weight {e} = {w!r} must be finite and >= 0"))
        if prescripts and not any(model.alpha(e) > 0 for e in prescripts):
            out.append(Violation("zero-weights", "objective_weights", "at least one objective weight must be > 0"))

    # w
    if model.baseline_weights is not None:
        for (e, c), w in model.baseline_weights.items():
            if e not in prescripts:
                out.append(Violation("dangling-ref", e, f"baseline weight for unknown prescript {e!r}"))
            if c not in dicta:
                out.append(Violation("dangling-ref", c, f"baseline weight for unknown dictum {c!r}"))
            if not (isinstance(w, (int, float)) and math.isfinite(w) and w >= 0):
                out.append(Violation("bad-weight", f"{e}/{c}", f"baseline weight w({e},{c}) = {w!r} must be finite and >= 0"))

    return ValidationReport(tuple(out))


class InvalidScenarioError(ScenarioError):
    def __init__(self, report: ValidationReport, where: str = ""):
        self.report = report
        lines = "; ".join(v.message for v in report.violations[:5])
        more = f" (+{len(report) - 5} more)" if len(report) > 5 else ""
        prefix = f"{where}: " if where else ""
        super().__init__(f"{prefix}invalid scenario: {lines}{more}")


def require_valid(model: ScenarioModel) -> ScenarioModel:
    report = validate_scenario(model)
    if not report.ok:
        raise InvalidScenarioError(report, model.name)
    return model


def joint_probability(model: ScenarioModel, dictum_id: str, prescript_id: str) -> float:
    """P(c, e) = P(c) * P(e|c)."""
    if dictum_id not in model.context:
        raise UnknownIdError("dictum", dictum_id)
    if prescript_id not in model.prescript_ids:
        raise UnknownIdError("prescript", prescript_id)
    return float(model.context[dictum_id]) * float(model.conditional[dictum_id][prescript_id])


def joint_matrix(model: ScenarioModel) -> np.ndarray:
    """The full joint P(c_i, e_j) as a (n_dicta, n_prescripts) array."""
    return model.context_vector[:, None] * model.conditional_matrix


def marginal_prescripts(model: ScenarioModel) -> np.ndarray:
    """P(e_j) = sum_i P(c_i) P(e_j|c_i), in canonical prescript order."""
    return prescript_marginal(model.context_vector, model.conditional_matrix)


def prescript_marginal(context: np.ndarray, conditional: np.ndarray) -> np.ndarray:
    return context @ conditional
