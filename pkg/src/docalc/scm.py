"""Parameterized structural causal models over finite domains.

Models are exact: the observed joint is computed by summing the full
product of conditionals over all exogenous assignments, never by
sampling.  Hidden confounders are explicit exogenous variables, each
feeding the pair of observed variables its bidirected edge joins.
Models are immutable; queries are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, PartialSupportError
from .factors import EPS_CMP, Factor, marginalize, multiply
from .graphs import Admg, Var, mutilate, topological_order

__all__ = [
    "Cpt",
    "Exogenous",
    "Scm",
    "InterventionSpec",
    "joint",
    "intervene",
    "oracle_query",
    "ci_test",
    "InterventionOracle",
    "random_admg",
    "random_scm",
]


@dataclass(frozen=True)
class Cpt:
    """Conditional table for one observed variable.

    ``table`` has one axis per parent (observed parents first, then
    exogenous parents, in the declared order) and a final axis for the
    variable itself; every parent-context row sums to 1.
    """

    var: str
    parents: tuple[str, ...]
    exo_parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.table, dtype=float)
        if np.any(rows < -1e-12):
            raise InvalidInputError(f"cpt of {self.var!r} has negative entries")
        sums = rows.sum(axis=-1)
        if np.max(np.abs(sums - 1.0)) > 1e-9:
            raise InvalidInputError(f"cpt rows of {self.var!r} must sum to 1")


@dataclass(frozen=True)
class Exogenous:
    """Hidden variable with a prior, feeding one or two observed variables."""

    var: Var
    prior: tuple[float, ...]
    feeds: frozenset[str]

    def __post_init__(self) -> None:
        if len(self.prior) != self.var.domain:
            raise InvalidInputError(f"prior of {self.var.name!r} has wrong length")
        if abs(sum(self.prior) - 1.0) > 1e-9 or min(self.prior) < 0:
            raise InvalidInputError(f"prior of {self.var.name!r} is not a distribution")
        if not 1 <= len(self.feeds) <= 2:
            raise InvalidInputError("an exogenous variable feeds one or two observed variables")


class Scm:
    """Structural causal model: ADMG + CPTs + exogenous confounder priors."""

    __slots__ = ("graph", "exogenous", "cpts")

    def __init__(self, graph: Admg, cpts: Mapping[str, Cpt],
                 exogenous: Sequence[Exogenous] = ()):
        self.graph = graph
        self.exogenous: tuple[Exogenous, ...] = tuple(exogenous)
        self.cpts: dict[str, Cpt] = dict(cpts)
        names = set(graph.names())
        if set(self.cpts) != names:
            raise InvalidInputError("cpts must cover exactly the observed variables")
        exo_names = {e.var.name for e in self.exogenous}
        if len(exo_names) != len(self.exogenous):
            raise InvalidInputError("exogenous names must be unique")
        if exo_names & names:
            raise InvalidInputError("exogenous names collide with observed variables")

        for name, cpt in self.cpts.items():
            if cpt.var != name:
                raise InvalidInputError(f"cpt key {name!r} does not match {cpt.var!r}")
            if frozenset(cpt.parents) != graph.parents_of(name):
                raise InvalidInputError(f"cpt parents of {name!r} disagree with the graph")
            shape = tuple(graph.var(p).domain for p in cpt.parents)
            shape += tuple(self._exo(e).var.domain for e in cpt.exo_parents)
            shape += (graph.var(name).domain,)
            if np.asarray(cpt.table).shape != shape:
                raise InvalidInputError(f"cpt table of {name!r} has shape "
                                        f"{np.asarray(cpt.table).shape}, expected {shape}")

        # bidirected edges and two-feed exogenous variables must correspond 1:1
        pairs = [e.feeds for e in self.exogenous if len(e.feeds) == 2]
        if len(set(pairs)) != len(pairs):
            raise InvalidInputError("two exogenous variables feed the same pair")
        if set(pairs) != set(graph.bidirected):
            raise InvalidInputError("bidirected edges and confounder variables disagree")
        for e in self.exogenous:
            for target in e.feeds:
                if e.var.name not in self.cpts[target].exo_parents:
                    raise InvalidInputError(
                        f"{e.var.name!r} feeds {target!r} but is not among its exo parents")

    def _exo(self, name: str) -> Exogenous:
        for e in self.exogenous:
            if e.var.name == name:
                return e
        raise InvalidInputError(f"unknown exogenous variable {name!r}")

    def observed_vars(self) -> tuple[Var, ...]:
        return self.graph.vars


@dataclass(frozen=True)
class InterventionSpec:
    """An experiment E = (X, x, Y): force X to x, observe Y."""

    targets: frozenset[str]
    values: Mapping[str, int]
    observed: frozenset[str]

    def __post_init__(self) -> None:
        if self.targets & self.observed:
            raise InvalidInputError("intervened and observed sets must be disjoint")
        if frozenset(self.values) != self.targets:
            raise InvalidInputError("values must cover exactly the intervened set")

    def key(self) -> tuple:
        return (tuple(sorted(self.targets)),
                tuple(v for _, v in sorted(self.values.items())),
                tuple(sorted(self.observed)))

    def __str__(self) -> str:
        do = ",".join(f"{k}={v}" for k, v in sorted(self.values.items()))
        return f"({{{do}}} -> {{{','.join(sorted(self.observed))}}})"


def joint(m: Scm) -> Factor:
    """Exact observed joint: sum the full conditional product over all
    exogenous assignments."""
    result = Factor.scalar(1.0)
    for e in m.exogenous:
        result = multiply(result, Factor((e.var,), np.asarray(e.prior)))
    order = topological_order(m.graph)
    for name in order:
        cpt = m.cpts[name]
        scope = tuple(m.graph.var(p) for p in cpt.parents)
        scope += tuple(m._exo(x).var for x in cpt.exo_parents)
        scope += (m.graph.var(name),)
        result = multiply(result, Factor(scope, np.asarray(cpt.table)))
    exo_names = [e.var.name for e in m.exogenous]
    out = marginalize(result, exo_names) if exo_names else result
    return out.reorder([v.name for v in m.graph.vars])


def intervene(m: Scm, x: Mapping[str, int]) -> Scm:
    """Model after do(X=x): point-mass CPTs, incoming edges removed."""
    for name, val in x.items():
        v = m.graph.var(name)
        if not (0 <= val < v.domain):
            raise InvalidInputError(f"value {val} out of domain for {name}")
    g2 = mutilate(m.graph, remove_incoming=x.keys())
    cpts: dict[str, Cpt] = {}
    for name, cpt in m.cpts.items():
        if name in x:
            dom = m.graph.var(name).domain
            row = np.zeros(dom)
            row[x[name]] = 1.0
            cpts[name] = Cpt(name, (), (), row)
        else:
            cpts[name] = cpt
    exo = []
    for e in m.exogenous:
        kept = frozenset(t for t in e.feeds if t not in x)
        if kept:
            exo.append(Exogenous(e.var, e.prior, kept))
        # an exogenous variable cut off from all its targets disappears
    # drop severed exo parents from intervened CPTs only (handled above:
    # intervened CPTs have no parents; others keep their mechanisms)
    return Scm(g2, cpts, exo)


def oracle_query(m_star: Scm, e: InterventionSpec) -> Factor:
    """Ground-truth P*(Y | do(X=x)) by brute mutilation and summation."""
    post = joint(intervene(m_star, dict(e.values))) if e.targets else joint(m_star)
    drop = [n for n in post.names() if n not in e.observed]
    return marginalize(post, drop)


def ci_test(
    m_star: Scm,
    vi: str,
    vj: str,
    do_set: Mapping[str, int],
    condition_on: Optional[Mapping[str, int]] = None,
    eps: float = EPS_CMP,
) -> bool:
    """Exact conditional-independence test of vi and vj under do(do_set).

    Compares P(vj | context) with P(vj | vi, context) across all value
    pairs, at the single supplied conditioning context.  Raises
    PartialSupportError when the context (or some vi value within it)
    has zero probability.
    """
    if vi in do_set or vj in do_set:
        raise InvalidInputError("test variables may not be intervened")
    ctx = dict(condition_on or {})
    if vi in ctx or vj in ctx:
        raise InvalidInputError("test variables may not be conditioned on")
    post = joint(intervene(m_star, dict(do_set))) if do_set else joint(m_star)
    keep = {vi, vj} | set(ctx)
    marg = marginalize(post, [n for n in post.names() if n not in keep])
    if ctx:
        at_ctx = marg.restrict(ctx)
        if at_ctx.total() <= 0.0:
            raise PartialSupportError("conditioning context has zero probability")
        marg = at_ctx.normalized()
    else:
        marg = marg.normalized()
    pair = marg.reorder([vi, vj])
    pv_i = pair.table.sum(axis=1)
    if np.any(pv_i <= 0.0):
        raise PartialSupportError(f"some value of {vi!r} has zero probability in the test context")
    base = pair.table.sum(axis=0) / pair.table.sum()
    cond_rows = pair.table / pv_i[:, None]
    return bool(np.max(np.abs(cond_rows - base[None, :])) <= eps)


class InterventionOracle:
    """Serialized access point to the true model's interventional answers.

    The call counter is the one mutable element of the module; a single
    coordinator (the discovery loop) owns each instance.
    """

    def __init__(self, m_star: Scm):
        self.m_star = m_star
        self.calls = 0
        self.log: list[InterventionSpec] = []

    def query(self, e: InterventionSpec) -> Factor:
        self.calls += 1
        self.log.append(e)
        return oracle_query(self.m_star, e)


# -- random generation (demos, discovery simulations, property tests) --------

def random_admg(
    rng: np.random.Generator,
    n_vars: int,
    edge_prob: float = 0.5,
    max_confounders: int = 2,
    domain: int = 2,
) -> Admg:
    """Random ADMG: random DAG in a random vertex order plus random
    bidirected edges."""
    names = [f"V{i+1}" for i in range(n_vars)]
    variables = [Var(n, domain) for n in names]
    order = list(rng.permutation(n_vars))
    edges = []
    for i in range(n_vars):
        for j in range(i + 1, n_vars):
            if rng.random() < edge_prob:
                edges.append((names[order[i]], names[order[j]]))
    all_pairs = [(names[i], names[j]) for i in range(n_vars) for j in range(i + 1, n_vars)]
    k = int(rng.integers(0, max_confounders + 1))
    conf_idx = rng.choice(len(all_pairs), size=min(k, len(all_pairs)), replace=False)
    confs = [all_pairs[i] for i in np.atleast_1d(conf_idx)]
    return Admg(variables, edges, confs)


def random_scm(
    rng: np.random.Generator,
    graph: Admg,
    exo_domain: int = 2,
) -> Scm:
    """Random parameterization: CPT rows uniform on the simplex, uniform
    random confounder priors.

    Callers relying on genericity (distinguishability lemmas assume
    effects do not cancel exactly) should re-draw when they detect a
    coincidence; see the discovery test helpers.
    """
    exo = []
    exo_parents: dict[str, list[str]] = {n: [] for n in graph.names()}
    for i, pair in enumerate(sorted(graph.bidirected, key=sorted)):
        name = f"U{i+1}"
        prior = rng.dirichlet(np.ones(exo_domain))
        exo.append(Exogenous(Var(name, exo_domain), tuple(prior), pair))
        for t in sorted(pair):
            exo_parents[t].append(name)
    cpts = {}
    for v in graph.vars:
        parents = tuple(sorted(graph.parents_of(v.name)))
        exop = tuple(exo_parents[v.name])
        shape = tuple(graph.var(p).domain for p in parents)
        shape += tuple(exo_domain for _ in exop)
        n_rows = int(np.prod(shape)) if shape else 1
        rows = rng.dirichlet(np.ones(v.domain), size=n_rows)
        cpts[v.name] = Cpt(v.name, parents, exop, rows.reshape(shape + (v.domain,)))
    return Scm(graph, cpts, exo)
