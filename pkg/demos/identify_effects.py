"""Identification walkthrough: from graphs to do-free expressions.

Builds a few small causal graphs with hidden confounders, identifies
interventional distributions, evaluates them against an exact model, and
shows a non-identifiable query together with its hedge witness.
"""

import numpy as np

from docalc import (Admg, Var, effect_factor, find_hedge, id_effect, joint,
                    oracle_query, pretty, random_scm)
from docalc.scm import InterventionSpec

V = (Var("X"), Var("Y"), Var("Z"))
candidates = {
    "direct causes":        Admg(V, [("X", "Y"), ("X", "Z"), ("Y", "Z")]),
    "confounded outcome":   Admg(V, [("X", "Y"), ("Y", "Z")], [("X", "Z")]),
    "mediator-free":        Admg(V, [("X", "Y"), ("X", "Z")]),
    "disconnected outcome": Admg(V, [("X", "Y")]),
}

print("=== P(Z | do(X, Y)) across four candidate graphs ===")
for name, g in candidates.items():
    res = id_effect(g, {"X", "Y"}, {"Z"})
    print(f"{name:22s} -> {pretty(res.expr)}")

print("\n=== evaluating an identified effect exactly ===")
rng = np.random.default_rng(0)
g = candidates["confounded outcome"]
m = random_scm(rng, g)
p = joint(m)
res = id_effect(g, {"X", "Y"}, {"Z"})
pred = effect_factor(res.expr, p, {"X": 1, "Y": 0}, {"Z"})
truth = oracle_query(m, InterventionSpec(frozenset({"X", "Y"}),
                                         {"X": 1, "Y": 0}, frozenset({"Z"})))
print("expression:", pretty(res.expr))
print("evaluated :", np.round(pred.table, 6))
print("mutilated :", np.round(truth.table, 6), "(brute-force ground truth)")

print("\n=== a non-identifiable query and its hedge ===")
bow = Admg((Var("A"), Var("B")), [("A", "B")], [("A", "B")])
h = find_hedge(bow, {"A"}, {"B"})
print("P(B|do(A)) in the bow graph is not identifiable")
print(f"hedge: F={sorted(h.forest_f)}  F'={sorted(h.forest_f_prime)}  R={sorted(h.roots)}")
