"""Active discovery walkthrough.

Runs the discovery loop on two candidate sets: one where a single cheap
experiment settles everything, and one where no single-value experiment
separates the survivors so the conditional-independence fallbacks finish
the job.
"""

import numpy as np

from docalc import Admg, CandidateSet, Var, alcam_run, random_scm

rng = np.random.default_rng(7)

print("=== four candidates, one decisive experiment ===")
V = (Var("X"), Var("Y"), Var("Z"))
candidates = CandidateSet((
    Admg(V, [("X", "Y"), ("X", "Z"), ("Y", "Z")]),
    Admg(V, [("X", "Y"), ("Y", "Z")], [("X", "Z")]),
    Admg(V, [("X", "Y"), ("X", "Z")]),
    Admg(V, [("X", "Y")]),
))
truth = candidates.graphs[0]
res = alcam_run(candidates, random_scm(rng, truth))
print("recovered the true graph:", res.final == truth)
for it in res.interventions:
    print(f"  performed {it['intervention']} at cost {it['cost']}; "
          f"surviving candidates {it['surviving']}")
print(f"interventions used: {res.n_interventions} "
      f"(bound {res.n_candidates - res.n_surviving_before_ci})")

print("\n=== a hidden confounder no experiment can see directly ===")
W = (Var("X1"), Var("X2"))
plain = Admg(W, [("X1", "X2")])
confounded = Admg(W, [("X1", "X2")], [("X1", "X2")])
truth = confounded
res = alcam_run(CandidateSet((plain, confounded)), random_scm(rng, truth))
print("recovered the true graph:", res.final == truth)
print(f"interventions used: {res.n_interventions} (none can split the pair)")
for r in res.ci_records:
    kind = "adjacent" if r.multi_value else "non-adjacent"
    print(f"  CI test on {r.pair} ({kind} criterion, {r.interventions} "
          f"experiments, cost {r.cost}): dependent={r.dependent}")

print("\n=== chain candidates masked by hedges ===")
C = (Var("X1"), Var("X2"), Var("X3"), Var("X4"))
chain = [("X1", "X2"), ("X2", "X3"), ("X3", "X4")]
trio = CandidateSet((
    Admg(C, chain),
    Admg(C, chain, [("X1", "X3")]),
    Admg(C, chain, [("X1", "X2"), ("X1", "X3")]),
))
truth = trio.graphs[2]
res = alcam_run(trio, random_scm(rng, truth))
print("recovered the true graph:", res.final == truth)
print(f"interventions used: {res.n_interventions}, CI tests: {len(res.ci_records)}")
