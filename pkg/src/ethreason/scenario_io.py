"""Reading and writing scenario, weight, profile, collection, corpus and report files.

Every document is a JSON object with a ``meta`` section naming its ``kind`` and
``format_version``. Canonical serialization sorts keys, indents by two spaces
and ends with a newline, so serialize -> parse -> serialize is byte-stable.
The JSON Schemas live in ``ethreason/schemas``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .decision import DecisionReport
from .learning import ConvergenceReport
from .model import (
    DEFAULT_U_MAX,
    ActionDef,
    Dictum,
    InvalidScenarioError,
    Prescript,
    ScenarioModel,
    ValidationReport,
    validate_scenario,
)
from .profiles import EthicalProfileMatrix, ProfileCollection
from .verifier import VerifierReport

FORMAT_VERSION = 1
SCENARIO_SUFFIX = ".eth"
PROFILE_SUFFIX = ".ethp"
INDEX_NAME = "index.json"

_SCHEMA_FILES = {
    "scenario": "scenario.schema.json",
    "weights": "weights.schema.json",
    "profile": "profile.schema.json",
    "collection_index": "collection_index.schema.json",
    "corpus": "corpus.schema.json",
    "report": "reports.schema.json",
}
REPORT_KINDS = ("decision_report", "verifier_report", "convergence_report", "validation_report",
                "sample_report", "retrieval_report")


class FormatError(ValueError):
    """Malformed document: bad syntax or schema violation. ``where`` locates the problem."""

    def __init__(self, message: str, where: str = "", source: str = ""):
        self.where = where
        self.source = source
        loc = ":".join(x for x in (source, where) if x)
        super().__init__(f"{loc}: {message}" if loc else message)


@lru_cache(maxsize=None)
def schema(kind: str) -> dict:
    text = resources.files("ethreason").joinpath("schemas", _SCHEMA_FILES[kind]).read_text("utf-8")
    return json.loads(text)


def _reject_constant(name):
    raise ValueError(f"non-finite literal {name} is not allowed")


def load_json(text: str, source: str = "") -> dict:
    if not text.strip():
        raise FormatError("empty document", "line 1", source)
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"syntax error: {exc.msg}", f"line {exc.lineno} column {exc.colno}", source) from None
    except ValueError as exc:
        raise FormatError(f"syntax error: {exc}", "", source) from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be an object", "line 1", source)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def document_kind(doc: dict) -> str:
    meta = doc.get("meta")
    if not isinstance(meta, dict) or "kind" not in meta:
        raise FormatError("missing meta.kind", "meta")
    return meta["kind"]


def check_schema(doc: dict, kind: str, source: str = "") -> None:
    validator = jsonschema.Draft202012Validator(schema(kind))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise FormatError(f"schema violation: {err.message}", f"section {path}", source)


def _meta(kind: str, **extra) -> dict:
    return {"kind": kind, "format_version": FORMAT_VERSION, **extra}


# -- scenarios ---------------------------------------------------------------

def _f(x) -> float:
    return float(x)


def _weights_to_doc(model_objective, model_baseline) -> dict:
    out: dict[str, Any] = {}
    if model_objective is not None:
        out["objective"] = {e: _f(w) for e, w in model_objective.items()}
    if model_baseline is not None:
        base: dict[str, dict[str, float]] = {}
        for (e, c), w in model_baseline.items():
            base.setdefault(e, {})[c] = _f(w)
        out["baseline"] = base
    return out


def scenario_to_dict(model: ScenarioModel) -> dict:
    meta = _meta("scenario", name=model.name, u_max=_f(model.u_max))
    if model.description:
        meta["description"] = model.description
    if model.notes:
        meta["notes"] = model.notes
    utilities: dict[str, dict[str, dict[str, float]]] = {}
    for (a, c, e), v in model.utilities.items():
        utilities.setdefault(a, {}).setdefault(c, {})[e] = _f(v)
    doc = {
        "meta": meta,
        "dicta": [{"id": d.id, "description": d.description, "tags": list(d.tags)} for d in model.dicta],
        "prescripts": [{"id": p.id, "description": p.description, "priority_rank": p.priority_rank}
                       for p in model.prescripts],
        "actions": [{"id": a.id, "description": a.description} for a in model.actions],
        "context": {c: _f(p) for c, p in model.context.items()},
        "conditional": {c: {e: _f(p) for e, p in row.items()} for c, row in model.conditional.items()},
        "utilities": utilities,
    }
    weights = _weights_to_doc(model.objective_weights, model.baseline_weights)
    if weights:
        doc["weights"] = weights
    return doc


def serialize_scenario(model: ScenarioModel) -> str:
    return dumps(scenario_to_dict(model))


def _weights_from_doc(w: dict) -> tuple[dict | None, dict | None]:
    objective = None
    baseline = None
    if "objective" in w:
        objective = {e: _f(v) for e, v in w["objective"].items()}
    if "baseline" in w:
        baseline = {(e, c): _f(v) for e, row in w["baseline"].items() for c, v in row.items()}
    return objective, baseline


def scenario_from_dict(doc: dict, source: str = "", validate: bool = True) -> ScenarioModel:
    check_schema(doc, "scenario", source)
    meta = doc["meta"]
    objective, baseline = _weights_from_doc(doc.get("weights", {}))
    model = ScenarioModel(
        name=meta["name"],
        dicta=tuple(Dictum(d["id"], d.get("description", ""), tuple(d.get("tags", ()))) for d in doc["dicta"]),
        prescripts=tuple(Prescript(p["id"], p.get("description", ""), int(p["priority_rank"]))
                         for p in doc["prescripts"]),
        actions=tuple(ActionDef(a["id"], a.get("description", "")) for a in doc["actions"]),
        context={c: _f(p) for c, p in doc["context"].items()},
        conditional={c: {e: _f(p) for e, p in row.items()} for c, row in doc["conditional"].items()},
        utilities={(a, c, e): _f(v) for a, by_c in doc["utilities"].items()
                   for c, by_e in by_c.items() for e, v in by_e.items()},
        objective_weights=objective,
        baseline_weights=baseline,
        u_max=_f(meta.get("u_max", DEFAULT_U_MAX)),
        description=meta.get("description", ""),
        notes=meta.get("notes", ""),
        format_version=meta["format_version"],
    )
    if validate:
        report = validate_scenario(model)
        if not report.ok:
            raise InvalidScenarioError(report, source or model.name)
    return model


def parse_scenario(text: str, source: str = "", validate: bool = True) -> ScenarioModel:
    """Parse and (by default) validate one scenario document.

    Raises :class:`FormatError` on syntax or schema problems and
    :class:`~ethreason.model.InvalidScenarioError` (carrying the
    :class:`~ethreason.model.ValidationReport`) when the numbers are inconsistent.
    """
    return scenario_from_dict(load_json(text, source), source, validate)


@dataclass(frozen=True)
class ScenarioFile:
    path: Path
    parsed: ScenarioModel
    format_version: int = FORMAT_VERSION


def read_scenario_file(path, validate: bool = True) -> ScenarioFile:
    path = Path(path)
    model = parse_scenario(path.read_text(encoding="utf-8"), str(path), validate)
    return ScenarioFile(path, model, model.format_version)


def load_scenario(path, validate: bool = True) -> ScenarioModel:
    return read_scenario_file(path, validate).parsed


def save_scenario(model: ScenarioModel, path) -> None:
    Path(path).write_text(serialize_scenario(model), encoding="utf-8")


# -- weight configurations ---------------------------------------------------

def parse_weights(text: str, source: str = "") -> tuple[dict | None, dict | None]:
    """Returns (objective weights, baseline weights); either may be None."""
    doc = load_json(text, source)
    check_schema(doc, "weights", source)
    return _weights_from_doc(doc)


def apply_weights_file(model: ScenarioModel, path) -> ScenarioModel:
    objective, baseline = parse_weights(Path(path).read_text(encoding="utf-8"), str(path))
    out = model.with_weights(objective=objective, baseline=baseline)
    report = validate_scenario(out)
    if not report.ok:
        raise InvalidScenarioError(report, str(path))
    return out


def weights_to_text(objective=None, baseline=None, name: str = "") -> str:
    doc = {"meta": _meta("weights", **({"name": name} if name else {}))}
    doc.update(_weights_to_doc(objective, baseline))
    return dumps(doc)


# -- profiles and collections ------------------------------------------------

def profile_to_dict(m: EthicalProfileMatrix, profile_id: str = "") -> dict:
    meta = _meta("profile", **({"id": profile_id} if profile_id else {}))
    return {
        "meta": meta,
        "prescripts": list(m.prescript_ids),
        "dicta": list(m.dictum_ids),
        "entries": [[float(x) for x in row] for row in m.entries],
        "normalized": bool(m.normalized),
    }


def serialize_profile(m: EthicalProfileMatrix, profile_id: str = "") -> str:
    return dumps(profile_to_dict(m, profile_id))


def profile_from_dict(doc: dict, source: str = "") -> tuple[str, EthicalProfileMatrix]:
    check_schema(doc, "profile", source)
    rows, cols = doc["prescripts"], doc["dicta"]
    entries = doc["entries"]
    if len(entries) != len(rows) or any(len(r) != len(cols) for r in entries):
        raise FormatError(f"entries must be {len(rows)} x {len(cols)}", "section entries", source)
    try:
        m = EthicalProfileMatrix(tuple(rows), tuple(cols), entries, bool(doc["normalized"]))
    except ValueError as exc:
        raise FormatError(str(exc), "section entries", source) from None
    return doc["meta"].get("id", ""), m


def parse_profile(text: str, source: str = "") -> tuple[str, EthicalProfileMatrix]:
    return profile_from_dict(load_json(text, source), source)


def load_profile(path) -> tuple[str, EthicalProfileMatrix]:
    path = Path(path)
    pid, m = parse_profile(path.read_text(encoding="utf-8"), str(path))
    return pid or path.stem, m


def save_profile(m: EthicalProfileMatrix, path, profile_id: str = "") -> None:
    Path(path).write_text(serialize_profile(m, profile_id), encoding="utf-8")


def index_to_dict(collection: ProfileCollection, k: int | None = None, seed: int | None = None) -> dict:
    meta = _meta("collection_index", cost=float(collection.cost))
    if k is not None:
        meta["k"] = int(k)
    if seed is not None:
        meta["seed"] = int(seed)
    medoids = set(collection.medoids.values())
    labels = collection.labels()
    return {
        "meta": meta,
        "profiles": {pid: {"cluster": labels[pid], "medoid": pid in medoids, "file": pid + PROFILE_SUFFIX}
                     for pid in collection.profile_ids},
    }


def save_collection(collection: ProfileCollection, directory, k: int | None = None,
                    seed: int | None = None) -> Path:
    """One profile file per profile plus ``index.json`` with cluster assignments."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for pid, m in collection.profiles:
        save_profile(m, directory / (pid + PROFILE_SUFFIX), pid)
    index = directory / INDEX_NAME
    index.write_text(dumps(index_to_dict(collection, k, seed)), encoding="utf-8")
    return index


def load_collection(directory) -> ProfileCollection:
    directory = Path(directory)
    index_path = directory / INDEX_NAME if directory.is_dir() else directory
    doc = load_json(index_path.read_text(encoding="utf-8"), str(index_path))
    check_schema(doc, "collection_index", str(index_path))
    profiles, clusters, medoids = [], {}, {}
    for pid, rec in sorted(doc["profiles"].items()):
        _, m = load_profile(index_path.parent / rec["file"])
        profiles.append((pid, m))
        clusters.setdefault(rec["cluster"], []).append(pid)
        if rec["medoid"]:
            if rec["cluster"] in medoids:
                raise FormatError(f"cluster {rec['cluster']!r} has two medoids", f"profiles/{pid}", str(index_path))
            medoids[rec["cluster"]] = pid
    missing = set(clusters) - set(medoids)
    if missing:
        raise FormatError(f"clusters without medoid: {sorted(missing)}", "profiles", str(index_path))
    return ProfileCollection(tuple(profiles), {c: tuple(v) for c, v in sorted(clusters.items())},
                             dict(sorted(medoids.items())), cost=float(doc["meta"].get("cost", 0.0)))


# -- reference corpora -------------------------------------------------------

def parse_corpus(text: str, source: str = "", base_dir=None) -> list[tuple[ScenarioModel, str]]:
    """Load every (scenario, reference action) record; paths resolve against ``base_dir``."""
    doc = load_json(text, source)
    check_schema(doc, "corpus", source)
    base = Path(base_dir) if base_dir is not None else Path(".")
    cache: dict[Path, ScenarioModel] = {}
    out = []
    for rec in doc["records"]:
        p = (base / rec["scenario"]).resolve()
        if p not in cache:
            cache[p] = load_scenario(p)
        out.append((cache[p], rec["action"]))
    return out


def load_corpus(path) -> list[tuple[ScenarioModel, str]]:
    path = Path(path)
    return parse_corpus(path.read_text(encoding="utf-8"), str(path), path.parent)


def corpus_to_text(records: list[tuple[str, str]], name: str = "") -> str:
    doc = {"meta": _meta("corpus", **({"name": name} if name else {})),
           "records": [{"scenario": s, "action": a} for s, a in records]}
    return dumps(doc)


# -- reports -----------------------------------------------------------------

def report_to_dict(report) -> dict:
    if isinstance(report, DecisionReport):
        kind = "decision_report"
    elif isinstance(report, VerifierReport):
        kind = "verifier_report"
    elif isinstance(report, ConvergenceReport):
        kind = "convergence_report"
    elif isinstance(report, ValidationReport):
        kind = "validation_report"
    else:
        raise TypeError(f"not a report: {type(report).__name__}")
    return {"meta": _meta(kind), **report.to_dict()}


def serialize_report(report) -> str:
    return dumps(report_to_dict(report))


def tagged(kind: str, body: dict) -> str:
    """Serialize an ad-hoc report body under ``meta.kind``."""
    return dumps({"meta": _meta(kind), **body})


_REPORT_TYPES = {
    "decision_report": DecisionReport,
    "verifier_report": VerifierReport,
    "convergence_report": ConvergenceReport,
}


def parse_document(text: str, source: str = ""):
    """Parse any document this package writes, dispatching on ``meta.kind``.

    Scenarios, profiles and reports with a dataclass come back typed; other
    report kinds come back as validated dicts.
    """
    doc = load_json(text, source)
    try:
        kind = document_kind(doc)
    except FormatError as exc:
        raise FormatError(str(exc), "meta", source) from None
    if kind == "scenario":
        return scenario_from_dict(doc, source)
    if kind == "profile":
        return profile_from_dict(doc, source)
    if kind in ("weights", "collection_index", "corpus"):
        check_schema(doc, kind, source)
        return doc
    if kind in REPORT_KINDS:
        check_schema(doc, "report", source)
        body = {k: v for k, v in doc.items() if k != "meta"}
        cls = _REPORT_TYPES.get(kind)
        return cls.from_dict(body) if cls is not None else doc
    raise FormatError(f"unknown document kind {kind!r}", "meta/kind", source)


# -- bundled fixtures --------------------------------------------------------

BUNDLED = ("scenario1", "scenario2", "scenario3", "scenario4")
SCENARIO4_CONFIGS = ("child_priority", "role_priority")


def bundled_path(name: str):
    """Path-like handle to a file under ``ethreason/data``."""
    return resources.files("ethreason").joinpath("data", name)


def bundled_scenario(name: str) -> ScenarioModel:
    fname = name if name.endswith(SCENARIO_SUFFIX) else name + SCENARIO_SUFFIX
    return parse_scenario(bundled_path(fname).read_text("utf-8"), fname)


def bundled_scenarios() -> list[ScenarioModel]:
    """The four trolley scenarios, in order."""
    return [bundled_scenario(n) for n in BUNDLED]


def scenario4_configured(config: str) -> ScenarioModel:
    """Scenario 4 with one of the shipped weight configurations applied."""
    if config not in SCENARIO4_CONFIGS:
        raise ValueError(f"config must be one of {SCENARIO4_CONFIGS}")
    fname = f"scenario4.{config}.weights"
    objective, baseline = parse_weights(bundled_path(fname).read_text("utf-8"), fname)
    return bundled_scenario("scenario4").with_weights(objective=objective, baseline=baseline)
