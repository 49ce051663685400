"""Acyclic directed mixed graphs (ADMGs) and purely graphical queries.

A bidirected edge stands for a hidden confounder between its two
endpoints; explicit latent vertices are assumed to have been projected
away by the input producer.  All types are immutable after construction
and all operations are pure functions, so values can be shared freely
across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .errors import CyclicGraphError, InvalidInputError

__all__ = [
    "Var",
    "Admg",
    "Hedge",
    "ancestors",
    "descendants",
    "mutilate",
    "d_separated",
    "c_components",
    "topological_order",
    "find_hedge",
    "verify_hedge",
]


@dataclass(frozen=True, order=True)
class Var:
    """A named discrete variable with a finite domain of ``domain`` values."""

    name: str
    domain: int = 2

    def __post_init__(self) -> None:
        if self.domain < 1:
            raise InvalidInputError(f"domain of {self.name!r} must be >= 1")


class Admg:
    """Mixed graph: directed edges plus bidirected (confounder) edges.

    Vertices are identified by name; ``vars`` fixes a deterministic order
    used for tie-breaking and for state indexing elsewhere.
    """

    __slots__ = ("vars", "directed", "bidirected", "_by_name", "_parents",
                 "_children", "_siblings", "_hash")

    def __init__(
        self,
        variables: Iterable[Var],
        directed: Iterable[tuple[str, str]] = (),
        bidirected: Iterable[tuple[str, str] | frozenset[str]] = (),
    ) -> None:
        self.vars: tuple[Var, ...] = tuple(variables)
        self._by_name = {v.name: v for v in self.vars}
        if len(self._by_name) != len(self.vars):
            raise InvalidInputError("variable names must be unique")
        names = set(self._by_name)

        dir_edges = set()
        for a, b in directed:
            if a not in names or b not in names:
                raise InvalidInputError(f"edge ({a},{b}) has unknown endpoint")
            if a == b:
                raise InvalidInputError(f"self-loop on {a}")
            dir_edges.add((a, b))
        self.directed: frozenset[tuple[str, str]] = frozenset(dir_edges)

        bi_edges = set()
        for e in bidirected:
            pair = frozenset(e)
            if len(pair) != 2:
                raise InvalidInputError(f"bidirected edge {set(e)} must join two distinct vertices")
            if not pair <= names:
                raise InvalidInputError(f"bidirected edge {set(e)} has unknown endpoint")
            bi_edges.add(pair)
        self.bidirected: frozenset[frozenset[str]] = frozenset(bi_edges)

        self._parents: dict[str, frozenset[str]] = {n: frozenset() for n in names}
        self._children: dict[str, frozenset[str]] = {n: frozenset() for n in names}
        par: dict[str, set[str]] = {n: set() for n in names}
        chi: dict[str, set[str]] = {n: set() for n in names}
        for a, b in dir_edges:
            par[b].add(a)
            chi[a].add(b)
        self._parents = {n: frozenset(s) for n, s in par.items()}
        self._children = {n: frozenset(s) for n, s in chi.items()}
        sib: dict[str, set[str]] = {n: set() for n in names}
        for pair in bi_edges:
            a, b = tuple(pair)
            sib[a].add(b)
            sib[b].add(a)
        self._siblings = {n: frozenset(s) for n, s in sib.items()}
        self._hash: Optional[int] = None

        # reject directed cycles up front
        topological_order(self)

    # -- basic accessors ------------------------------------------------

    def var(self, name: str) -> Var:
        try:
            return self._by_name[name]
        except KeyError:
            raise InvalidInputError(f"unknown variable {name!r}") from None

    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.vars)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def parents_of(self, name: str) -> frozenset[str]:
        self.var(name)
        return self._parents[name]

    def children_of(self, name: str) -> frozenset[str]:
        self.var(name)
        return self._children[name]

    def siblings_of(self, name: str) -> frozenset[str]:
        """Vertices joined to ``name`` by a bidirected edge."""
        self.var(name)
        return self._siblings[name]

    def induced(self, keep: Iterable[str]) -> "Admg":
        """Induced subgraph over the given vertex names (order preserved)."""
        keep = set(keep)
        unknown = keep - set(self._by_name)
        if unknown:
            raise InvalidInputError(f"unknown variables {sorted(unknown)}")
        return Admg(
            (v for v in self.vars if v.name in keep),
            ((a, b) for a, b in self.directed if a in keep and b in keep),
            (p for p in self.bidirected if p <= keep),
        )

    def has_edge(self, a: str, b: str) -> bool:
        return (a, b) in self.directed

    def has_confounder(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.bidirected

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Admg):
            return NotImplemented
        return (self.vars == other.vars and self.directed == other.directed
                and self.bidirected == other.bidirected)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.vars, self.directed, self.bidirected))
        return self._hash

    def __repr__(self) -> str:
        e = ", ".join(f"{a}->{b}" for a, b in sorted(self.directed))
        c = ", ".join("<->".join(sorted(p)) for p in sorted(self.bidirected, key=sorted))
        return f"Admg([{', '.join(self.names())}]; {e}; {c})"


@dataclass(frozen=True)
class Hedge:
    """Witness of non-identifiability of P(Y|do(X)).

    ``forest_f`` and ``forest_f_prime`` are the vertex sets of two
    R-rooted C-forests with F' contained in F; forest edges are the
    induced bidirected edges plus, for each non-root, one directed edge
    on a path toward ``roots``.
    """

    forest_f: frozenset[str]
    forest_f_prime: frozenset[str]
    roots: frozenset[str]


def _check_subset(g: Admg, s: Iterable[str], what: str) -> frozenset[str]:
    s = frozenset(s)
    for name in s:
        if name not in g:
            raise InvalidInputError(f"{what}: unknown variable {name!r}")
    return s


def ancestors(g: Admg, s: Iterable[str]) -> frozenset[str]:
    """Reflexive transitive closure of the parent relation applied to ``s``."""
    frontier = list(_check_subset(g, s, "ancestors"))
    seen = set(frontier)
    while frontier:
        v = frontier.pop()
        for p in g.parents_of(v):
            if p not in seen:
                seen.add(p)
                frontier.append(p)
    return frozenset(seen)


def descendants(g: Admg, s: Iterable[str]) -> frozenset[str]:
    """Reflexive transitive closure of the child relation applied to ``s``."""
    frontier = list(_check_subset(g, s, "descendants"))
    seen = set(frontier)
    while frontier:
        v = frontier.pop()
        for c in g.children_of(v):
            if c not in seen:
                seen.add(c)
                frontier.append(c)
    return frozenset(seen)


def mutilate(
    g: Admg,
    remove_incoming: Iterable[str] = (),
    remove_outgoing: Iterable[str] = (),
) -> Admg:
    """Cut edges entering ``remove_incoming`` and leaving ``remove_outgoing``.

    A bidirected edge counts as incoming at both endpoints, so it is
    dropped whenever it touches ``remove_incoming``.  The vertex set is
    unchanged.
    """
    inc = _check_subset(g, remove_incoming, "mutilate")
    out = _check_subset(g, remove_outgoing, "mutilate")
    return Admg(
        g.vars,
        ((a, b) for a, b in g.directed if b not in inc and a not in out),
        (p for p in g.bidirected if not (p & inc)),
    )


def topological_order(g: Admg) -> list[str]:
    """Deterministic topological order of the directed part (name tie-break)."""
    indeg = {v.name: len(g.parents_of(v.name)) for v in g.vars}
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order: list[str] = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        changed = False
        for c in g.children_of(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
                changed = True
        if changed:
            ready.sort()
    if len(order) != len(g.vars):
        raise CyclicGraphError("directed part of the graph contains a cycle")
    return order


def c_components(g: Admg) -> list[frozenset[str]]:
    """Connected components of the bidirected-edge-only graph.

    Returns a partition of the vertex names, ordered by first appearance
    in ``g.vars``.
    """
    seen: set[str] = set()
    comps: list[frozenset[str]] = []
    for v in g.names():
        if v in seen:
            continue
        comp = {v}
        frontier = [v]
        while frontier:
            u = frontier.pop()
            for w in g.siblings_of(u):
                if w not in comp:
                    comp.add(w)
                    frontier.append(w)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


# -- d-separation -----------------------------------------------------------

def d_separated(
    g: Admg,
    x: Iterable[str],
    y: Iterable[str],
    z: Iterable[str] = (),
) -> bool:
    """True iff every path between ``x`` and ``y`` is blocked by ``z``.

    Bidirected edges behave as latent common causes: they carry an
    arrowhead at both endpoints.  Implemented as reachability over
    (vertex, entered-via-arrowhead) states; a collider passes iff it has
    a descendant in ``z``, a non-collider passes iff it is outside ``z``.
    """
    xs = _check_subset(g, x, "d_separated")
    ys = _check_subset(g, y, "d_separated")
    zs = _check_subset(g, z, "d_separated")
    if xs & ys or xs & zs or ys & zs:
        raise InvalidInputError("x, y, z must be pairwise disjoint")
    if not xs or not ys:
        return True

    opens_collider = ancestors(g, zs) if zs else frozenset()

    # state: (vertex, entered_via_head); a leaving edge has an arrowhead at
    # v iff it is a parent edge traversed backwards or a bidirected edge.
    def may_leave(v: str, entered_via_head: bool, leaves_via_head_at_v: bool) -> bool:
        collider = entered_via_head and leaves_via_head_at_v
        if collider:
            return v in opens_collider
        return v not in zs

    seen: set[tuple[str, bool]] = set()
    stack: list[tuple[str, bool]] = [(s, False) for s in xs]
    while stack:
        v, via_head = stack.pop()
        if (v, via_head) in seen:
            continue
        seen.add((v, via_head))
        for c in g.children_of(v):
            # leaving along v->c: tail at v
            if may_leave(v, via_head, False):
                if c in ys:
                    return False
                stack.append((c, True))
        for p in g.parents_of(v):
            # leaving along p->v backwards: head at v
            if may_leave(v, via_head, True):
                if p in ys:
                    return False
                stack.append((p, False))
        for s in g.siblings_of(v):
            if may_leave(v, via_head, True):
                if s in ys:
                    return False
                stack.append((s, True))
    return True


# -- hedges -----------------------------------------------------------------

def _reaches_within(g: Admg, inside: frozenset[str], targets: frozenset[str]) -> frozenset[str]:
    """Vertices of ``inside`` with a directed path (within ``inside``) to ``targets``."""
    reach = set(targets)
    changed = True
    while changed:
        changed = False
        for v in inside:
            if v in reach:
                continue
            if g.children_of(v) & reach & inside:
                reach.add(v)
                changed = True
    return frozenset(reach & inside)


def _bidirected_connected(g: Admg, vs: frozenset[str]) -> bool:
    if not vs:
        return False
    start = next(iter(vs))
    comp = {start}
    frontier = [start]
    while frontier:
        u = frontier.pop()
        for w in g.siblings_of(u):
            if w in vs and w not in comp:
                comp.add(w)
                frontier.append(w)
    return comp == set(vs)


def verify_hedge(g: Admg, x: Iterable[str], y: Iterable[str], h: Hedge) -> bool:
    """Check every Hedge invariant against the query P(y|do(x)) in ``g``."""
    xs, ys = frozenset(x), frozenset(y)
    f, fp, r = h.forest_f, h.forest_f_prime, h.roots
    if not (r <= fp <= f):
        return False
    if not (f & xs) or (fp & xs):
        return False
    if not (_bidirected_connected(g, f) and _bidirected_connected(g, fp)):
        return False
    # every vertex must reach the common root set within its forest
    if _reaches_within(g, f, r) != f or _reaches_within(g, fp, r) != fp:
        return False
    # roots must be childless within F' (they are the forests' root set)
    for v in r:
        if g.children_of(v) & fp:
            return False
    return r <= ancestors(mutilate(g, remove_incoming=xs), ys)


def _hedge_from_frame(
    g: Admg,
    x: frozenset[str],
    y: frozenset[str],
    frame_vars: frozenset[str],
    frame_component: frozenset[str],
) -> Optional[Hedge]:
    """Build a hedge witness from an ID-failure frame.

    ``frame_vars`` is the vertex set of the failing recursion's graph (a
    single C-component) and ``frame_component`` the C-component of that
    graph minus its intervened part.
    """
    roots = frozenset(
        v for v in frame_component if not (g.children_of(v) & frame_component)
    )
    cand = Hedge(frame_vars, frame_component, roots)
    if verify_hedge(g, x, y, cand):
        return cand
    # Fallback: bounded search inside the failing frame.
    return _search_hedge(g, x, y, frame_vars)


def _connected_supersets(g: Admg, base: frozenset[str], pool: frozenset[str]) -> Iterator[frozenset[str]]:
    extra = sorted(pool - base)
    for k in range(len(extra) + 1):
        for combo in itertools.combinations(extra, k):
            cand = base | frozenset(combo)
            if _bidirected_connected(g, cand):
                yield cand


def _search_hedge(
    g: Admg,
    x: frozenset[str],
    y: frozenset[str],
    pool: Optional[frozenset[str]] = None,
) -> Optional[Hedge]:
    """Exhaustive witness search over subsets of ``pool`` (small graphs only)."""
    if pool is None:
        pool = frozenset(g.names())
    an_y_cut = ancestors(mutilate(g, remove_incoming=x), y)
    non_x = sorted(pool - x)
    for k in range(1, len(non_x) + 1):
        for fp_tuple in itertools.combinations(non_x, k):
            fp = frozenset(fp_tuple)
            if not _bidirected_connected(g, fp):
                continue
            roots = frozenset(v for v in fp if not (g.children_of(v) & fp))
            if not roots <= an_y_cut:
                continue
            if _reaches_within(g, fp, roots) != fp:
                continue
            for f in _connected_supersets(g, fp, pool):
                if not (f & x):
                    continue
                if _reaches_within(g, f, roots) != f:
                    continue
                cand = Hedge(f, fp, roots)
                if verify_hedge(g, x, y, cand):
                    return cand
    return None


def find_hedge(g: Admg, x: Iterable[str], y: Iterable[str]) -> Optional[Hedge]:
    """Witness hedge for P(y|do(x)) in ``g``, or None if none exists.

    Detection runs the identification recursion and converts its failure
    frame into the two C-forests; a hedge exists iff identification
    fails.
    """
    xs = _check_subset(g, x, "find_hedge")
    ys = _check_subset(g, y, "find_hedge")
    if not xs or not ys:
        raise InvalidInputError("x and y must be nonempty")
    if xs & ys:
        raise InvalidInputError("x and y must be disjoint")
    from . import identify  # deferred: identify depends on this module

    result = identify.id_effect(g, xs, ys)
    if result.identified:
        return None
    assert result.witness is not None
    return result.witness
