"""Active learning of causal graphs from least-cost interventions.

Phase 1 compares do-calculus predictions across candidate graphs and
performs the cheapest single-value interventions that split the
candidate set; phase 2 settles the remaining edge and hidden-confounder
differences with exact conditional-independence tests.

Prediction precomputation is embarrassingly parallel over (experiment,
graph) pairs; the discovery loop itself is sequential because each
oracle answer conditions the next selection.  Oracle access is
serialized through a single ``InterventionOracle``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (InternalError, InvalidInputError, PartialSupportError,
                     PromiseViolationError)
from .factors import EPS_CMP, Factor, equal_within, marginalize
from .graphs import Admg, d_separated, mutilate
from .identify import Prediction, evaluate, id_effect
from .scm import InterventionOracle, InterventionSpec, Scm, ci_test, joint, oracle_query

__all__ = [
    "CandidateSet", "CostModel", "InterventionCaps", "Verdict", "Partition",
    "InterventionPlan", "PredictionTable", "enumerate_interventions",
    "distinguishable_by", "power_of_intervention", "partition_candidates",
    "minimal_splitting_sets", "select_intervention", "select_graphs",
    "id_edges", "id_hidden", "alcam_run", "DiscoveryResult",
]


@dataclass(frozen=True)
class CandidateSet:
    """Ordered candidate graphs over a common variable set."""

    graphs: tuple[Admg, ...]

    def __post_init__(self) -> None:
        if not self.graphs:
            raise InvalidInputError("candidate set must be nonempty")
        base = self.graphs[0].vars
        for g in self.graphs[1:]:
            if g.vars != base:
                raise InvalidInputError("candidates must share variables and domains")

    def names(self) -> tuple[str, ...]:
        return self.graphs[0].names()


@dataclass(frozen=True)
class CostModel:
    """Costs of intervening (per target set and value) and observing."""

    intervention_cost: Callable[[frozenset[str], Mapping[str, int]], float]
    observation_cost: Callable[[frozenset[str]], float]

    @staticmethod
    def unit() -> "CostModel":
        """Default: one unit per intervened and per observed variable."""
        return CostModel(lambda x, _v: float(len(x)), lambda y: float(len(y)))

    @staticmethod
    def per_variable(
        intervention_weights: Mapping[str, float],
        observation_weights: Mapping[str, float],
        default_intervention: float = 1.0,
        default_observation: float = 1.0,
    ) -> "CostModel":
        iw = dict(intervention_weights)
        ow = dict(observation_weights)
        return CostModel(
            lambda x, _v: float(sum(iw.get(n, default_intervention) for n in x)),
            lambda y: float(sum(ow.get(n, default_observation) for n in y)),
        )

    def of(self, e: InterventionSpec) -> float:
        return self.intervention_cost(e.targets, e.values) + self.observation_cost(e.observed)


@dataclass(frozen=True)
class InterventionCaps:
    """Bounds on the enumerated experiment space (the full space is
    exponential)."""

    max_targets: int = 2
    max_observed: int = 2


@dataclass(frozen=True)
class Verdict:
    """Distinguishability classification of one candidate pair under one
    experiment; cases follow the seven-row table (2, 4 and 5 distinguish)."""

    case_id: int
    distinguishable: bool
    eps: float = EPS_CMP
    partial: bool = False


@dataclass(frozen=True)
class Partition:
    """Maximal non-distinguishable candidate subsets (indices into the
    candidate list); a graph may belong to several subsets."""

    subsets: tuple[frozenset[int], ...]

    def members(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for s in self.subsets:
            out |= s
        return out


@dataclass(frozen=True)
class InterventionPlan:
    interventions: tuple[InterventionSpec, ...]
    total_cost: float


def enumerate_interventions(g: Admg, caps: InterventionCaps = InterventionCaps()) -> list[InterventionSpec]:
    """All experiments E=(X,x,Y) within the caps, in deterministic order.

    Every single value assignment of each target set appears as its own
    experiment; performing one tests exactly one value.
    """
    names = sorted(g.names())
    out: list[InterventionSpec] = []
    for k in range(1, caps.max_targets + 1):
        for targets in itertools.combinations(names, k):
            domains = [range(g.var(n).domain) for n in targets]
            rest = [n for n in names if n not in targets]
            for values in itertools.product(*domains):
                assignment = dict(zip(targets, values))
                for m in range(1, caps.max_observed + 1):
                    for observed in itertools.combinations(rest, m):
                        out.append(InterventionSpec(frozenset(targets), assignment,
                                                    frozenset(observed)))
    out.sort(key=lambda e: e.key())
    return out


class PredictionTable:
    """Cache of do-calculus predictions for every (experiment, graph) pair.

    Identification depends only on (graph, X, Y); the evaluated sheet is
    cached once per such triple and sliced per value assignment.
    """

    def __init__(self, candidates: CandidateSet, p_star: Factor, eps: float = EPS_CMP):
        self.candidates = candidates
        self.p_star = p_star
        self.eps = eps
        self._sheets: dict[tuple[int, tuple[str, ...], tuple[str, ...]], Optional[Factor]] = {}
        self._marginals: dict[tuple[str, ...], Factor] = {}

    def observational_marginal(self, observed: Iterable[str]) -> Factor:
        key = tuple(sorted(observed))
        if key not in self._marginals:
            drop = [n for n in self.p_star.names() if n not in key]
            self._marginals[key] = marginalize(self.p_star, drop).reorder(key)
        return self._marginals[key]

    def _sheet(self, g_idx: int, targets: tuple[str, ...], observed: tuple[str, ...]) -> Optional[Factor]:
        key = (g_idx, targets, observed)
        if key not in self._sheets:
            g = self.candidates.graphs[g_idx]
            result = id_effect(g, targets, observed)
            if not result.identified:
                self._sheets[key] = None
            else:
                assert result.expr is not None
                self._sheets[key] = evaluate(result.expr, self.p_star)
        return self._sheets[key]

    def prediction(self, g_idx: int, e: InterventionSpec) -> Prediction:
        sheet = self._sheet(g_idx, tuple(sorted(e.targets)), tuple(sorted(e.observed)))
        if sheet is None:
            return Prediction(None)
        binding = dict(e.values)
        for n in sheet.names():
            if n not in e.observed and n not in binding:
                binding[n] = 0  # rule-3 auxiliary do-variable, value irrelevant
        f = sheet.restrict(binding)
        if set(f.names()) != set(e.observed):
            raise InternalError("prediction scope mismatch")
        return Prediction(f.reorder(sorted(f.names())))


def _classify(pk: Optional[Factor], pl: Optional[Factor], py: Factor, eps: float) -> Verdict:
    partial = any(f is not None and f.partial for f in (pk, pl))
    if pk is None and pl is None:
        return Verdict(7, False, eps, partial)
    if pk is None or pl is None:
        other = pl if pk is None else pk
        assert other is not None
        matches_py = equal_within(other, py.reorder(other.names()), eps)
        case = 5 if matches_py else 6
        return Verdict(case, case == 5 and not partial, eps, partial)
    k_is_py = equal_within(pk, py.reorder(pk.names()), eps)
    l_is_py = equal_within(pl, py.reorder(pl.names()), eps)
    if k_is_py and l_is_py:
        return Verdict(1, False, eps, partial)
    if k_is_py != l_is_py:
        return Verdict(2, not partial, eps, partial)
    if equal_within(pk, pl.reorder(pk.names()), eps):
        return Verdict(3, False, eps, partial)
    return Verdict(4, not partial, eps, partial)


def distinguishable_by(
    e: InterventionSpec,
    k_idx: int,
    l_idx: int,
    preds: PredictionTable,
) -> Verdict:
    """Classify a candidate pair under one experiment into the seven-case
    table; partial-support predictions demote to non-distinguishable."""
    pk = preds.prediction(k_idx, e).dist
    pl = preds.prediction(l_idx, e).dist
    py = preds.observational_marginal(e.observed)
    return _classify(pk, pl, py, preds.eps)


def power_of_intervention(
    e: InterventionSpec,
    graph_indices: Iterable[int],
    preds: PredictionTable,
) -> int:
    """Number of candidate pairs the experiment distinguishes."""
    idx = sorted(set(graph_indices))
    return sum(
        1
        for k, l in itertools.combinations(idx, 2)
        if distinguishable_by(e, k, l, preds).distinguishable
    )


def _distinguishability_matrix(
    candidates: CandidateSet,
    preds: PredictionTable,
    interventions: Sequence[InterventionSpec],
) -> dict[tuple[int, int], set[int]]:
    """For each candidate pair, the indices of experiments distinguishing it."""
    n = len(candidates.graphs)
    out: dict[tuple[int, int], set[int]] = {
        (k, l): set() for k, l in itertools.combinations(range(n), 2)
    }
    for ei, e in enumerate(interventions):
        for k, l in itertools.combinations(range(n), 2):
            if distinguishable_by(e, k, l, preds).distinguishable:
                out[(k, l)].add(ei)
    return out


def _maximal_cliques(n: int, adjacent: Callable[[int, int], bool]) -> list[frozenset[int]]:
    """Deterministic Bron-Kerbosch over the non-distinguishability relation."""
    cliques: list[frozenset[int]] = []

    def bk(r: set[int], p: set[int], x: set[int]) -> None:
        if not p and not x:
            cliques.append(frozenset(r))
            return
        pivot_pool = p | x
        pivot = min(pivot_pool)
        candidates_ = sorted(v for v in p if not adjacent(pivot, v))
        for v in candidates_:
            nv = {u for u in range(n) if u != v and adjacent(u, v)}
            bk(r | {v}, p & nv, x & nv)
            p.remove(v)
            x.add(v)

    bk(set(), set(range(n)), set())
    return sorted(cliques, key=lambda s: (sorted(s), len(s)))


def partition_candidates(
    candidates: CandidateSet,
    preds: PredictionTable,
    interventions: Sequence[InterventionSpec],
) -> Partition:
    """All maximal subsets of pairwise non-distinguishable candidates.

    Within a subset every experiment has zero power; across any two
    subsets some experiment has positive power.  Subsets may overlap.
    """
    matrix = _distinguishability_matrix(candidates, preds, interventions)

    def non_dist(a: int, b: int) -> bool:
        if a == b:
            return False
        k, l = min(a, b), max(a, b)
        return not matrix[(k, l)]

    return Partition(tuple(_maximal_cliques(len(candidates.graphs), non_dist)))


def _pair_coverage(
    partition: Partition,
    preds: PredictionTable,
    interventions: Sequence[InterventionSpec],
) -> dict[int, frozenset[tuple[int, int]]]:
    """For each experiment index, the subset pairs it splits."""
    coverage: dict[int, set[tuple[int, int]]] = {i: set() for i in range(len(interventions))}
    subs = partition.subsets
    for (a, b) in itertools.combinations(range(len(subs)), 2):
        cross = [(k, l) for k in subs[a] for l in subs[b] if k != l]
        for ei, e in enumerate(interventions):
            if any(distinguishable_by(e, min(k, l), max(k, l), preds).distinguishable
                   for k, l in cross):
                coverage[ei].add((a, b))
    return {i: frozenset(s) for i, s in coverage.items()}


def _exact_cover(
    universe: frozenset,
    sets: Sequence[tuple[float, tuple, frozenset]],
) -> Optional[list[int]]:
    """Min-cost cover by branch and bound; ``sets`` rows are
    (cost, tie_key, covered); returns indices into ``sets``."""
    order = sorted(range(len(sets)), key=lambda i: (sets[i][0], sets[i][1]))
    best_cost = float("inf")
    best: Optional[list[int]] = None

    def bound_remaining(missing: frozenset, start: int) -> bool:
        rest: set = set()
        for i in order[start:]:
            rest |= sets[i][2]
        return missing <= rest

    def walk(start: int, chosen: list[int], covered: frozenset, cost: float) -> None:
        nonlocal best_cost, best
        if universe <= covered:
            if cost < best_cost - 1e-12 or (abs(cost - best_cost) <= 1e-12 and best is not None
                                            and [sets[i][1] for i in chosen] < [sets[i][1] for i in best]):
                best_cost, best = cost, list(chosen)
            return
        if start >= len(order) or cost >= best_cost - 1e-12:
            return
        if not bound_remaining(universe - covered, start):
            return
        i = order[start]
        gain = sets[i][2] - covered
        if gain:
            walk(start + 1, chosen + [i], covered | sets[i][2], cost + sets[i][0])
        walk(start + 1, chosen, covered, cost)

    walk(0, [], frozenset(), 0.0)
    return best


def _greedy_cover(
    universe: frozenset,
    sets: Sequence[tuple[float, tuple, frozenset]],
) -> Optional[list[int]]:
    missing = set(universe)
    chosen: list[int] = []
    while missing:
        scored = []
        for i, (cost, key, covered) in enumerate(sets):
            gain = len(covered & missing)
            if gain:
                scored.append((cost / gain, key, i))
        if not scored:
            return None
        scored.sort()
        _, _, pick = scored[0]
        chosen.append(pick)
        missing -= sets[pick][2]
    return chosen


EXACT_COVER_MAX_SUBSETS = 8
EXACT_COVER_MAX_INTERVENTIONS = 20


def minimal_splitting_sets(
    partition: Partition,
    preds: PredictionTable,
    costs: CostModel,
    interventions: Sequence[InterventionSpec],
) -> InterventionPlan:
    """Least-total-cost experiment set splitting every pair of subsets.

    Exact for small instances (<= 8 subsets and <= 20 useful
    experiments), greedy weighted set cover beyond that; ties broken by
    lexicographic experiment ordering.
    """
    if len(partition.subsets) < 2:
        raise InvalidInputError("splitting needs at least two subsets")
    coverage = _pair_coverage(partition, preds, interventions)
    universe = frozenset(
        (a, b) for a, b in itertools.combinations(range(len(partition.subsets)), 2)
    )
    rows = [
        (costs.of(interventions[i]), interventions[i].key(), coverage[i])
        for i in range(len(interventions))
        if coverage[i]
    ]
    small = (len(partition.subsets) <= EXACT_COVER_MAX_SUBSETS
             and len(rows) <= EXACT_COVER_MAX_INTERVENTIONS)
    chosen = _exact_cover(universe, rows) if small else _greedy_cover(universe, rows)
    if chosen is None:
        raise InternalError("no experiment set splits all subsets; partition invariant broken")
    picked = sorted((rows[i][1] for i in chosen))
    by_key = {e.key(): e for e in interventions}
    plan = tuple(by_key[k] for k in picked)
    return InterventionPlan(plan, sum(costs.of(e) for e in plan))


def select_intervention(
    plan: Sequence[InterventionSpec],
    partition: Partition,
    preds: PredictionTable,
    costs: CostModel,
) -> Optional[InterventionSpec]:
    """Next experiment to perform: cheapest member of the cheapest
    sub-plan that splits one subset from all others; None when no
    remaining experiment has positive power."""
    if not plan:
        return None
    members = partition.members()
    if all(power_of_intervention(e, members, preds) == 0 for e in plan):
        return None
    subs = partition.subsets
    by_key = {e.key(): e for e in plan}
    best: Optional[tuple[float, tuple]] = None
    for i, target_subset in enumerate(subs):
        needed = frozenset(j for j in range(len(subs)) if j != i)
        if not needed:
            continue
        rows = []
        for e in plan:
            covered = set()
            for j in needed:
                cross = [(min(k, l), max(k, l)) for k in target_subset for l in subs[j] if k != l]
                if any(distinguishable_by(e, k, l, preds).distinguishable for k, l in cross):
                    covered.add(j)
            if covered:
                rows.append((costs.of(e), e.key(), frozenset(covered)))
        chosen = _exact_cover(needed, rows)
        if not chosen:
            continue
        cost = sum(rows[i2][0] for i2 in chosen)
        cheapest_key = min((rows[i2][0], rows[i2][1]) for i2 in chosen)[1]
        if best is None or (cost, cheapest_key) < best:
            best = (cost, cheapest_key)
    if best is None:
        # no remaining sub-plan isolates a single subset; fall back to the
        # cheapest experiment that still splits something
        useful = [(costs.of(e), e.key()) for e in plan
                  if power_of_intervention(e, members, preds) > 0]
        return by_key[min(useful)[1]]
    return by_key[best[1]]


def select_graphs(
    partition: Partition,
    e: InterventionSpec,
    oracle_answer: Factor,
    preds: PredictionTable,
) -> Partition:
    """Keep candidates consistent with the oracle answer.

    A candidate survives when its prediction matches the answer, or when
    its prediction is empty while the answer differs from the
    observational marginal of Y.  Subsets are re-derived as maximal
    non-distinguishable cliques over the survivors, so a graph is
    dropped only when it fails its own consistency condition.
    """
    py = preds.observational_marginal(e.observed)
    answer_is_py = equal_within(oracle_answer.reorder(py.names()), py, preds.eps)
    survivors = []
    for k in sorted(partition.members()):
        pk = preds.prediction(k, e).dist
        if pk is None:
            if not answer_is_py:
                survivors.append(k)
        elif equal_within(pk, oracle_answer.reorder(pk.names()), preds.eps):
            survivors.append(k)
    keep = frozenset(survivors)
    clipped: list[frozenset[int]] = []
    for s in partition.subsets:
        t = s & keep
        if t and not any(t < other & keep for other in partition.subsets):
            if t not in clipped:
                clipped.append(t)
    return Partition(tuple(sorted(clipped, key=lambda s: (sorted(s), len(s)))))


# -- conditional-independence fallbacks ----------------------------------


@dataclass
class CiRecord:
    """One conditional-independence test performed on the true model."""

    kind: str
    pair: tuple[str, str]
    do_set: tuple[str, ...]
    multi_value: bool
    interventions: int
    cost: float
    dependent: bool


def _edge_differences(graphs: Sequence[Admg]) -> list[tuple[str, str]]:
    all_edges = set()
    for g in graphs:
        all_edges |= g.directed
    return sorted(e for e in all_edges if not all(e in g.directed for g in graphs))


def _confounder_differences(graphs: Sequence[Admg]) -> list[frozenset[str]]:
    all_confs = set()
    for g in graphs:
        all_confs |= g.bidirected
    return sorted((c for c in all_confs if not all(c in g.bidirected for g in graphs)),
                  key=sorted)


def _min_dsep_intervention(
    graphs: Sequence[Admg],
    vi: str,
    vj: str,
) -> Optional[frozenset[str]]:
    """Smallest variable set whose intervention d-separates vi and vj in
    every given graph; may need to contain vi itself when confounders
    touch the pair.  Preference order: size, vi-free before vi, names."""
    names = sorted(graphs[0].names())
    pool = [n for n in names if n != vj]

    def separates(d: frozenset[str]) -> bool:
        z = d - {vi}
        return all(
            d_separated(mutilate(g, remove_incoming=d), {vi}, {vj}, z)
            for g in graphs
        )

    options = []
    for size in range(0, len(pool) + 1):
        for combo in itertools.combinations(pool, size):
            d = frozenset(combo)
            options.append((size, 1 if vi in d else 0, tuple(sorted(d)), d))
    options.sort(key=lambda t: t[:3])
    for size, _, _, d in options:
        if separates(d):
            return d
    return None


def _dependent_under(m_star: Scm, vi: str, vj: str, d: frozenset[str],
                     costs: CostModel, eps: float) -> tuple[bool, CiRecord]:
    """Exact dependence test of vi, vj under intervention on d."""
    context = {n: 0 for n in sorted(d)}
    if vi in d:
        # hidden confounders force intervening vi: test across all its values
        dists = []
        base = {n: 0 for n in sorted(d - {vi})}
        n_values = m_star.graph.var(vi).domain
        cost = 0.0
        for val in range(n_values):
            do_set = dict(base, **{vi: val})
            f = oracle_query(m_star, InterventionSpec(frozenset(do_set), do_set, frozenset({vj})))
            dists.append(f)
            cost += costs.intervention_cost(frozenset(do_set), do_set)
            cost += costs.observation_cost(frozenset({vj}))
        dep = any(
            not equal_within(dists[0], f.reorder(dists[0].names()), eps)
            for f in dists[1:]
        )
        rec = CiRecord("edge", (vi, vj), tuple(sorted(d)), True, n_values, cost, dep)
        return dep, rec
    cost = 0.0
    if d:
        cost += costs.intervention_cost(frozenset(d), context)
    cost += costs.observation_cost(frozenset({vi, vj}))
    independent = ci_test(m_star, vi, vj, context if d else {}, eps=eps)
    rec = CiRecord("edge", (vi, vj), tuple(sorted(d)), False, 1 if d else 0, cost, not independent)
    return not independent, rec


def id_edges(
    subset: CandidateSet,
    m_star: Scm,
    costs: Optional[CostModel] = None,
    eps: float = EPS_CMP,
    records: Optional[list[CiRecord]] = None,
) -> CandidateSet:
    """Resolve edge differences with interventional CI tests.

    For each differing edge, intervenes on a minimal set d-separating its
    endpoints in the edge-free candidates and keeps the side consistent
    with the exact test.  Returns a candidate set with no edge
    differences."""
    costs = costs or CostModel.unit()
    graphs = list(subset.graphs)
    while True:
        diffs = _edge_differences(graphs)
        if not diffs:
            return CandidateSet(tuple(graphs))
        vi, vj = diffs[0]
        without = [g for g in graphs if (vi, vj) not in g.directed]
        d = _min_dsep_intervention(without, vi, vj)
        if d is None:
            raise InternalError(f"no separating intervention for edge {vi}->{vj}")
        dependent, rec = _dependent_under(m_star, vi, vj, d, costs, eps)
        if records is not None:
            records.append(rec)
        if dependent:
            graphs = [g for g in graphs if (vi, vj) in g.directed]
        else:
            graphs = [g for g in graphs if (vi, vj) not in g.directed]
        if not graphs:
            raise PromiseViolationError("edge tests eliminated every candidate")


def _hidden_test(
    m_star: Scm,
    parent: str,
    child: str,
    adjacent: bool,
    o_context: Mapping[str, int],
    costs: CostModel,
    eps: float,
) -> tuple[bool, float, int]:
    """Confoundedness test; returns (confounded, cost, interventions)."""
    o_set = frozenset(o_context)
    cost = 0.0
    n_int = 0
    # right-hand side: P(child | parent, do(O)) from a single experiment
    rhs_spec = InterventionSpec(o_set, dict(o_context), frozenset({parent, child}))
    rhs_joint = oracle_query(m_star, rhs_spec)
    if o_set:
        cost += costs.intervention_cost(o_set, dict(o_context))
        n_int += 1
    cost += costs.observation_cost(frozenset({parent, child}))
    pair = rhs_joint.reorder([parent, child])
    ctx_mass = pair.table.sum(axis=1)
    if np.any(ctx_mass <= 0.0):
        raise PartialSupportError(
            f"value of {parent!r} with zero probability under do({sorted(o_set)})")
    rhs = pair.table / ctx_mass[:, None]

    if adjacent:
        # left-hand side: P(child | do(parent, O)), one experiment per value
        lhs_rows = []
        for val in range(m_star.graph.var(parent).domain):
            do_set = dict(o_context, **{parent: val})
            f = oracle_query(m_star, InterventionSpec(frozenset(do_set), do_set,
                                                      frozenset({child})))
            lhs_rows.append(f.table)
            cost += costs.intervention_cost(frozenset(do_set), do_set)
            cost += costs.observation_cost(frozenset({child}))
            n_int += 1
        lhs = np.stack(lhs_rows)
    else:
        # left-hand side: P(child | do(O)), same experiment as the rhs
        lhs = np.broadcast_to(pair.table.sum(axis=0), rhs.shape)
    confounded = bool(np.max(np.abs(lhs - rhs)) > eps)
    return confounded, cost, n_int


def id_hidden(
    subset: CandidateSet,
    m_star: Scm,
    costs: Optional[CostModel] = None,
    eps: float = EPS_CMP,
    records: Optional[list[CiRecord]] = None,
) -> CandidateSet:
    """Resolve hidden-confounder differences with exact CI tests.

    Uses the adjacent-pair criterion (compare P(Vj|do(Vi,O)) with
    P(Vj|Vi,do(O))) or the non-adjacent criterion (compare P(Vj|do(O))
    with P(Vj|Vi,do(O))), with O the union of the pair's observed
    parents held at a single context."""
    costs = costs or CostModel.unit()
    graphs = list(subset.graphs)
    base = graphs[0]
    for g in graphs[1:]:
        if g.directed != base.directed:
            raise InvalidInputError("id_hidden requires a shared observable graph")
    while True:
        diffs = _confounder_differences(graphs)
        if not diffs:
            return CandidateSet(tuple(graphs))
        pair = diffs[0]
        a, b = sorted(pair)
        if base.has_edge(a, b):
            parent, child, adjacent = a, b, True
        elif base.has_edge(b, a):
            parent, child, adjacent = b, a, True
        else:
            parent, child, adjacent = a, b, False
        o_vars = (base.parents_of(parent) | base.parents_of(child)) - {parent, child}
        o_context = {n: 0 for n in sorted(o_vars)}
        confounded, cost, n_int = _hidden_test(m_star, parent, child, adjacent,
                                               o_context, costs, eps)
        if records is not None:
            records.append(CiRecord("hidden", (parent, child), tuple(sorted(o_vars)),
                                    adjacent, n_int, cost, confounded))
        if confounded:
            graphs = [g for g in graphs if pair in g.bidirected]
        else:
            graphs = [g for g in graphs if pair not in g.bidirected]
        if not graphs:
            raise PromiseViolationError("confounder tests eliminated every candidate")


# -- the driver ----------------------------------------------------------


@dataclass
class DiscoveryResult:
    final: Admg
    interventions: list[dict]
    ci_records: list[CiRecord]
    n_candidates: int
    n_surviving_before_ci: int
    intervention_cost: float
    ci_cost: float

    @property
    def n_interventions(self) -> int:
        return len(self.interventions)

    @property
    def bound_ok(self) -> bool:
        """Single-value interventions <= |candidates| - |non-distinguishable set|."""
        return self.n_interventions <= self.n_candidates - self.n_surviving_before_ci

    @property
    def total_cost(self) -> float:
        return self.intervention_cost + self.ci_cost


def alcam_run(
    candidates: CandidateSet,
    m_star: Scm,
    costs: Optional[CostModel] = None,
    caps: InterventionCaps = InterventionCaps(),
    eps: float = EPS_CMP,
    oracle: Optional[InterventionOracle] = None,
) -> DiscoveryResult:
    """Learn the true graph by a least-cost sequence of single-value
    interventions plus, when needed, conditional-independence tests.

    The true model's induced graph must be among the candidates; if every
    candidate gets eliminated the promise was violated and an error is
    raised rather than returning a wrong graph."""
    costs = costs or CostModel.unit()
    oracle = oracle or InterventionOracle(m_star)
    if m_star.graph.vars != candidates.graphs[0].vars:
        raise InvalidInputError("true model and candidates must share variables")

    p_star = joint(m_star)
    preds = PredictionTable(candidates, p_star, eps)
    experiments = enumerate_interventions(candidates.graphs[0], caps)
    partition = partition_candidates(candidates, preds, experiments)

    log: list[dict] = []
    spent = 0.0
    if len(partition.subsets) > 1:
        plan = list(minimal_splitting_sets(partition, preds, costs, experiments).interventions)
        while len(partition.subsets) > 1:
            e = select_intervention(plan, partition, preds, costs)
            if e is None:
                # the plan ran dry while subsets remain (possible when an
                # unused splitter's witness pair was eliminated earlier);
                # re-derive a minimal splitting set for what is left
                plan = list(minimal_splitting_sets(partition, preds, costs,
                                                   experiments).interventions)
                e = select_intervention(plan, partition, preds, costs)
                if e is None:
                    raise InternalError("experiments exhausted with several subsets left")
            answer = oracle.query(e)
            partition = select_graphs(partition, e, answer, preds)
            plan.remove(e)
            spent += costs.of(e)
            log.append({
                "intervention": str(e),
                "cost": costs.of(e),
                "oracle_digest": [round(x, 12) for x in np.ravel(answer.table)],
                "surviving": sorted(partition.members()),
            })
            if not partition.subsets:
                raise PromiseViolationError("all candidate subsets eliminated")

    survivors = sorted(partition.members())
    if not survivors:
        raise PromiseViolationError("all candidates eliminated")
    remaining = CandidateSet(tuple(candidates.graphs[i] for i in survivors))

    ci_records: list[CiRecord] = []
    if len(set(remaining.graphs)) > 1 and _edge_differences(remaining.graphs):
        remaining = id_edges(remaining, m_star, costs, eps, ci_records)
    if len(set(remaining.graphs)) > 1 and _confounder_differences(remaining.graphs):
        remaining = id_hidden(remaining, m_star, costs, eps, ci_records)

    unique = sorted(set(remaining.graphs), key=lambda g: (sorted(g.directed), sorted(map(sorted, g.bidirected))))
    if len(unique) != 1:
        raise InternalError(f"{len(unique)} structurally distinct candidates remain")
    return DiscoveryResult(
        final=unique[0],
        interventions=log,
        ci_records=ci_records,
        n_candidates=len(candidates.graphs),
        n_surviving_before_ci=len(survivors),
        intervention_cost=spent,
        ci_cost=sum(r.cost for r in ci_records),
    )
