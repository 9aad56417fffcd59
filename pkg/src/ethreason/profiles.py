"""Ethical-profile matrices and the clustered, normalized profile collection."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .model import ScenarioModel, require_valid, validate_scenario, InvalidScenarioError

MAX_ITER = 100
EXHAUSTIVE_LIMIT = 32


class ProfileError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EthicalProfileMatrix:
    """Rows are prescripts, columns are dicta; ``entries[i, j]`` is m_ij."""

    prescript_ids: tuple[str, ...]
    dictum_ids: tuple[str, ...]
    entries: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float, copy=True)
        entries = entries.reshape(len(self.prescript_ids), len(self.dictum_ids))
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "prescript_ids", tuple(self.prescript_ids))
        object.__setattr__(self, "dictum_ids", tuple(self.dictum_ids))
        if len(set(self.prescript_ids)) != len(self.prescript_ids) or len(set(self.dictum_ids)) != len(self.dictum_ids):
            raise ProfileError("row/column ids must be duplicate-free")
        if not np.all(np.isfinite(entries)):
            raise ProfileError("profile entries must be finite")
        if self.normalized and entries.size and (entries.min() < 0 or entries.max() > 1):
            raise ProfileError("normalized profile entries must lie in [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __eq__(self, other):
        if not isinstance(other, EthicalProfileMatrix):
            return NotImplemented
        return (self.prescript_ids == other.prescript_ids and self.dictum_ids == other.dictum_ids
                and self.normalized == other.normalized and np.array_equal(self.entries, other.entries))

    def entry(self, prescript_id: str, dictum_id: str) -> float:
        return float(self.entries[self.prescript_ids.index(prescript_id), self.dictum_ids.index(dictum_id)])


def build_matrix(model: ScenarioModel) -> EthicalProfileMatrix:
    """m_ij = w(e_i, c_j) * P(e_i | c_j)."""
    require_valid(model)
    m = (model.baseline_matrix * model.conditional_matrix).T
    return EthicalProfileMatrix(model.prescript_ids, model.dictum_ids, m, normalized=False)


def normalize_matrix(m: EthicalProfileMatrix) -> EthicalProfileMatrix:
    """Global min-max scaling to [0, 1]; a constant matrix maps to all zeros."""
    if m.entries.size == 0:
        raise ProfileError("cannot normalize an empty matrix")
    lo, hi = m.entries.min(), m.entries.max()
    if hi > lo:
        scaled = (m.entries - lo) / (hi - lo)
        # exact endpoints, and guard against rounding just past them
        scaled = np.clip(scaled, 0.0, 1.0)
    else:
        scaled = np.zeros_like(m.entries)
    return EthicalProfileMatrix(m.prescript_ids, m.dictum_ids, scaled, normalized=True)


def _check_compatible(x: EthicalProfileMatrix, y: EthicalProfileMatrix) -> None:
    if x.shape != y.shape:
        raise ProfileError(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.prescript_ids != y.prescript_ids or x.dictum_ids != y.dictum_ids:
        raise ProfileError("row/column id orderings differ")


def matrix_distance(x: EthicalProfileMatrix, y: EthicalProfileMatrix) -> float:
    """Elementwise L1 distance sum_ij |x_ij - y_ij|."""
    _check_compatible(x, y)
    if not (x.normalized and y.normalized):
        raise ProfileError("matrix_distance expects normalized profiles")
    return float(np.abs(x.entries - y.entries).sum())


def distance_matrix(mats: Sequence[EthicalProfileMatrix]) -> np.ndarray:
    n = len(mats)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = matrix_distance(mats[i], mats[j])
    return d


@dataclass(frozen=True)
class ProfileCollection:
    """Normalized profiles with a k-medoids partition.

    ``profiles`` is ordered by profile id. ``clusters`` maps cluster id to the
    sorted member ids and ``medoids`` maps cluster id to its medoid profile id.
    """

    profiles: tuple[tuple[str, EthicalProfileMatrix], ...]
    clusters: dict[str, tuple[str, ...]]
    medoids: dict[str, str]
    cost: float = 0.0
    cost_history: tuple[float, ...] = ()
    iterations: int = 0

    @property
    def profile_ids(self) -> tuple[str, ...]:
        return tuple(pid for pid, _ in self.profiles)

    def get(self, profile_id: str) -> EthicalProfileMatrix:
        for pid, m in self.profiles:
            if pid == profile_id:
                return m
        raise KeyError(profile_id)

    def cluster_of(self, profile_id: str) -> str:
        for cid, members in self.clusters.items():
            if profile_id in members:
                return cid
        raise KeyError(profile_id)

    def labels(self) -> dict[str, str]:
        return {pid: cid for cid, members in self.clusters.items() for pid in members}


def _assign(d: np.ndarray, medoids: list[int]) -> np.ndarray:
    # argmin takes the first minimum: ties go to the lower medoid slot
    return np.argmin(d[:, medoids], axis=1)


def _cost(d: np.ndarray, medoids: list[int], labels: np.ndarray) -> float:
    return float(sum(d[i, medoids[labels[i]]] for i in range(d.shape[0])))


def _init_medoids(d: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    """k-medoids++ seeding: first uniformly, then proportional to distance to nearest chosen."""
    n = d.shape[0]
    medoids = [int(rng.integers(n))]
    while len(medoids) < k:
        near = d[:, medoids].min(axis=1)
        near[medoids] = 0.0
        total = near.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=near / total))
        else:
            rest = [i for i in range(n) if i not in medoids]
            nxt = int(rng.choice(rest))
        medoids.append(nxt)
    return medoids


def kmedoids(d: np.ndarray, k: int, seed: int = 0, max_iter: int = MAX_ITER):
    """k-medoids on a precomputed distance matrix.

    Alternates nearest-medoid assignment with medoid updates; when that stalls,
    tries the best single (medoid, non-medoid) swap. Each accepted step strictly
    lowers the cost, so the recorded cost history is non-increasing.

    Returns (labels, medoid indices, cost history, iterations).
    """
    n = d.shape[0]
    rng = np.random.default_rng(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)
    medoids = _init_medoids(d, k, rng)
    labels = _assign(d, medoids)
    history = [_cost(d, medoids, labels)]
    it = 0
    while it < max_iter:
        it += 1
        improved = False
        # medoid update within each cluster
        for c in range(k):
            members = np.flatnonzero(labels == c)
            if members.size == 0:
                continue
            within = d[np.ix_(members, members)].sum(axis=0)
            best = int(members[np.argmin(within)])
            if within.min() < d[members, medoids[c]].sum() - 1e-12:
                medoids[c] = best
                improved = True
        if improved:
            labels = _assign(d, medoids)
            history.append(_cost(d, medoids, labels))
            continue
        # swap phase
        best_swap, best_cost = None, history[-1]
        for c in range(k):
            for h in range(n):
                if h in medoids:
                    continue
                trial = list(medoids)
                trial[c] = h
                cost = _cost(d, trial, _assign(d, trial))
                if cost < best_cost - 1e-12:
                    best_swap, best_cost = (c, h), cost
        if best_swap is None:
            break
        medoids[best_swap[0]] = best_swap[1]
        labels = _assign(d, medoids)
        history.append(_cost(d, medoids, labels))
    return labels, medoids, history, it


def _as_items(profiles) -> list[tuple[str, EthicalProfileMatrix]]:
    if isinstance(profiles, Mapping):
        items = list(profiles.items())
    else:
        items = [tuple(p) for p in profiles]
    ids = [pid for pid, _ in items]
    if len(set(ids)) != len(ids):
        raise ProfileError("duplicate profile ids")
    return sorted(items, key=lambda kv: kv[0])


def cluster_collection(profiles, k: int, seed: int = 0) -> ProfileCollection:
    """Partition normalized profiles into ``k`` clusters under the L1 matrix distance.

    ``profiles`` is a mapping or a sequence of (profile_id, matrix) pairs.
    Cluster ids are ``cluster-0``, ``cluster-1``, ... in order of medoid id.
    """
    items = _as_items(profiles)
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ProfileError(f"k must be a positive integer, got {k!r}")
    if k > len(items):
        raise ProfileError(f"k={k} exceeds the number of profiles ({len(items)})")
    mats = [m for _, m in items]
    for m in mats:
        if not m.normalized:
            raise ProfileError("all profiles must be normalized before clustering")
        _check_compatible(mats[0], m)
    d = distance_matrix(mats)
    labels, medoids, history, it = kmedoids(d, k, seed)

    ids = [pid for pid, _ in items]
    order = sorted(range(k), key=lambda c: ids[medoids[c]])
    clusters, med = {}, {}
    for rank, c in enumerate(order):
        cid = f"cluster-{rank}"
        clusters[cid] = tuple(ids[i] for i in range(len(ids)) if labels[i] == c)
        med[cid] = ids[medoids[c]]
    return ProfileCollection(tuple(items), clusters, med, cost=history[-1],
                             cost_history=tuple(history), iterations=it)


def retrieve_profile(collection: ProfileCollection, query: EthicalProfileMatrix) -> tuple[str, str, float]:
    """Nearest stored profile to ``query``: (profile_id, cluster_id, distance).

    Small collections are scanned exhaustively. Larger ones route through the
    nearest medoid first and search only that cluster. Distance ties go to the
    lexicographically smaller id.
    """
    if not collection.profiles:
        raise ProfileError("empty collection")
    if not query.normalized:
        raise ProfileError("query profile must be normalized")
    if len(collection.profiles) <= EXHAUSTIVE_LIMIT:
        candidates = collection.profiles
    else:
        by_id = dict(collection.profiles)
        cid = min(collection.medoids,
                  key=lambda c: (matrix_distance(by_id[collection.medoids[c]], query), c))
        candidates = tuple((pid, by_id[pid]) for pid in collection.clusters[cid])
    best = min(((matrix_distance(m, query), pid) for pid, m in candidates))
    return best[1], collection.cluster_of(best[1]), best[0]


def apply_profile(model: ScenarioModel, profile: EthicalProfileMatrix) -> ScenarioModel:
    """Replace baseline weights with w(e, c) = 1 + m(e, c); probability tables are untouched."""
    missing_e = set(model.prescript_ids) - set(profile.prescript_ids)
    missing_c = set(model.dictum_ids) - set(profile.dictum_ids)
    if missing_e or missing_c:
        raise ProfileError(f"profile does not cover prescripts {sorted(missing_e)} / dicta {sorted(missing_c)}")
    weights = {(e, c): 1.0 + profile.entry(e, c) for e in model.prescript_ids for c in model.dictum_ids}
    out = replace(model, baseline_weights=weights)
    report = validate_scenario(out)
    if not report.ok:
        raise InvalidScenarioError(report, model.name)
    return out
