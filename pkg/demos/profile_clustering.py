"""
Ethical profile matrices and retrieval
======================================

Builds profile matrices from weighted synthetic scenarios, clusters them
with k-medoids and retrieves the profile nearest to a new one.
"""

import numpy as np

from ethreason import decide
from ethreason.profiles import (
    EthicalProfileMatrix,
    apply_profile,
    build_matrix,
    cluster_collection,
    normalize_matrix,
    retrieve_profile,
)
from ethreason.scenario_io import bundled_scenario
from ethreason.synthetic import random_scenario

# Min-max normalisation over the whole matrix.
raw = EthicalProfileMatrix(("e0", "e1"), ("c0", "c1"), [[1, 2], [3, 5]], normalized=False)
print(normalize_matrix(raw).entries)

rng = np.random.default_rng(3)
library = {}
for i in range(12):
    m = random_scenario(rng, 3, 3, 2, weighted=True, name=f"s{i}")
    library[f"profile{i:02d}"] = normalize_matrix(build_matrix(m))

coll = cluster_collection(library, k=3, seed=0)
print("cost history:", [round(c, 3) for c in coll.cost_history])
for cid, members in coll.clusters.items():
    print(f"  {cid} medoid={coll.medoids[cid]}: {', '.join(members)}")

query = normalize_matrix(build_matrix(random_scenario(rng, 3, 3, 2, weighted=True)))
pid, cid, dist = retrieve_profile(coll, query)
print(f"nearest to query: {pid} in {cid} at L1 distance {dist:.3f}")

# A profile can stand in for a scenario's baseline weights (w = 1 + m).
s1 = bundled_scenario("scenario1")
profile = normalize_matrix(build_matrix(s1))
print("scenario1 with its own profile as weights:", decide(apply_profile(s1, profile)).chosen_action)
