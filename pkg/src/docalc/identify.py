"""Do-calculus machinery: rule checks, the identification algorithm, and
symbolic do-free expressions with exact evaluation.

``id_effect`` transforms P(Y|do(X)) into an expression over the
observational joint by C-component recursion, or returns a hedge
witness when the effect is not identifiable.  Expressions are compared
by evaluated value only; the printer exists for reporting and golden
tests.

Everything here is pure over immutable inputs; predictions for many
(experiment, graph) pairs are independent and safe to compute in
parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .errors import InternalError, InvalidInputError
from .factors import Factor, condition, divide, marginalize, multiply
from .graphs import (Admg, Hedge, _hedge_from_frame, ancestors, c_components,
                     d_separated, mutilate, topological_order)

__all__ = [
    "Expr", "ObservedTerm", "SumOver", "Product", "Quotient", "One",
    "IdResult", "Prediction",
    "check_rule", "id_effect", "evaluate", "effect_factor", "predictor",
    "normalize", "pretty", "free_vars",
]


# -- expression trees ---------------------------------------------------


class Expr:
    """Base of the do-free expression tree."""

    __slots__ = ()


@dataclass(frozen=True)
class ObservedTerm(Expr):
    """P(outcome | given) read off the source observational joint."""

    outcome: tuple[str, ...]
    given: tuple[str, ...] = ()


@dataclass(frozen=True)
class SumOver(Expr):
    over: tuple[str, ...]
    child: Expr


@dataclass(frozen=True)
class Product(Expr):
    children: tuple[Expr, ...]


@dataclass(frozen=True)
class Quotient(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True)
class One(Expr):
    pass


@dataclass(frozen=True)
class IdResult:
    """Either an identifying expression or a hedge witness."""

    identified: bool
    expr: Optional[Expr] = None
    witness: Optional[Hedge] = None


@dataclass(frozen=True)
class Prediction:
    """Predicted causal effect from one candidate graph: a distribution
    over Y, or empty when the graph does not identify the effect."""

    dist: Optional[Factor]

    @property
    def empty(self) -> bool:
        return self.dist is None


# -- rule applicability -------------------------------------------------


def check_rule(
    g: Admg,
    rule: int,
    x: Iterable[str],
    y: Iterable[str],
    z: Iterable[str],
    w: Iterable[str] = (),
) -> bool:
    """Graphical applicability condition of do-calculus rule 1, 2 or 3.

    Rule 1 drops an observation z, rule 2 exchanges do(z) for an
    observation, rule 3 drops do(z) entirely; each is a d-separation
    check on the correspondingly mutilated graph.
    """
    xs, ys, zs, ws = map(frozenset, (x, y, z, w))
    for a, b in ((xs, ys), (xs, zs), (xs, ws), (ys, zs), (ys, ws), (zs, ws)):
        if a & b:
            raise InvalidInputError("rule sets must be pairwise disjoint")
    if rule == 1:
        gm = mutilate(g, remove_incoming=xs)
    elif rule == 2:
        gm = mutilate(g, remove_incoming=xs, remove_outgoing=zs)
    elif rule == 3:
        z_w = zs - ancestors(mutilate(g, remove_incoming=xs), ws) if ws else zs
        gm = mutilate(g, remove_incoming=xs | z_w)
    else:
        raise InvalidInputError("rule must be 1, 2 or 3")
    return d_separated(gm, ys, zs, xs | ws)


# -- identification -----------------------------------------------------


class _HedgeSignal(Exception):
    def __init__(self, frame_vars: frozenset[str], frame_component: frozenset[str]):
        self.frame_vars = frame_vars
        self.frame_component = frame_component


def _sum_over(over: frozenset[str], e: Expr) -> Expr:
    if not over:
        return e
    if isinstance(e, ObservedTerm) and not e.given:
        keep = tuple(n for n in e.outcome if n not in over)
        extra = over - set(e.outcome)
        if not extra:
            return ObservedTerm(keep)
    if isinstance(e, SumOver):
        return SumOver(tuple(sorted(over | set(e.over))), e.child)
    return SumOver(tuple(sorted(over)), e)


def _cond_term(vi: str, given: frozenset[str], p: Expr, p_scope: frozenset[str]) -> Expr:
    """P(vi | given) of the running distribution ``p`` over ``p_scope``."""
    if isinstance(p, ObservedTerm) and not p.given and ({vi} | given) <= set(p.outcome):
        return ObservedTerm((vi,), tuple(sorted(given)))
    num = _sum_over(p_scope - given - {vi}, p)
    den = _sum_over(p_scope - given, p)
    return Quotient(num, den)


def _chain_product(members: Iterable[str], p: Expr, p_scope: frozenset[str],
                   topo: list[str]) -> Expr:
    """Product of P(vi | predecessors) over members, Tian's Q-factor form."""
    pos = {n: i for i, n in enumerate(topo)}
    terms = []
    for vi in sorted(members, key=lambda n: pos[n]):
        preceding = frozenset(n for n in p_scope if pos[n] < pos[vi])
        terms.append(_cond_term(vi, preceding, p, p_scope))
    if len(terms) == 1:
        return terms[0]
    return Product(tuple(terms))


def _id(
    y: frozenset[str],
    x: frozenset[str],
    p: Expr,
    g: Admg,
    topo: list[str],
) -> Expr:
    v = frozenset(g.names())

    if not x:
        return _sum_over(v - y, p)

    an = ancestors(g, y)
    if v != an:
        return _id(y, x & an, _sum_over(v - an, p), g.induced(an), topo)

    w = (v - x) - ancestors(mutilate(g, remove_incoming=x), y)
    if w:
        return _id(y, x | w, p, g, topo)

    comps = c_components(g.induced(v - x))
    if len(comps) > 1:
        factors = tuple(_id(s, v - s, p, g, topo) for s in comps)
        return _sum_over(v - (y | x), Product(factors))

    s = comps[0]
    cg = c_components(g)
    if len(cg) == 1:
        raise _HedgeSignal(frame_vars=v, frame_component=s)
    if s in cg:
        return _sum_over(s - y, _chain_product(s, p, v, topo))
    s_prime = next(c for c in cg if s < c)
    new_p = _chain_product(s_prime, p, v, topo)
    return _id(y, x & s_prime, new_p, g.induced(s_prime), topo)


def id_effect(g: Admg, x: Iterable[str], y: Iterable[str]) -> IdResult:
    """Identify P(y|do(x)) in ``g``.

    Returns an expression whose evaluation against any observational
    joint compatible with ``g`` equals the interventional distribution,
    or a hedge witness when no do-free form exists.  An empty ``x`` is
    allowed and yields the observational marginal of ``y``.
    """
    xs = frozenset(x)
    ys = frozenset(y)
    names = set(g.names())
    if not ys or not ys <= names or not xs <= names:
        raise InvalidInputError("x and y must be subsets of the graph, y nonempty")
    if xs & ys:
        raise InvalidInputError("x and y must be disjoint")
    topo = topological_order(g)
    p0 = ObservedTerm(tuple(topo))
    try:
        expr = _id(ys, xs, p0, g, topo)
    except _HedgeSignal as sig:
        witness = _hedge_from_frame(g, xs, ys, sig.frame_vars, sig.frame_component)
        if witness is None:
            raise InternalError("identification failed but no hedge witness found")
        return IdResult(False, witness=witness)
    return IdResult(True, expr=normalize(expr))


# -- evaluation ---------------------------------------------------------


def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, ObservedTerm):
        return frozenset(e.outcome) | frozenset(e.given)
    if isinstance(e, SumOver):
        return free_vars(e.child) - frozenset(e.over)
    if isinstance(e, Product):
        out: frozenset[str] = frozenset()
        for c in e.children:
            out |= free_vars(c)
        return out
    if isinstance(e, Quotient):
        return free_vars(e.num) | free_vars(e.den)
    return frozenset()


def _eval(e: Expr, p: Factor) -> Factor:
    if isinstance(e, ObservedTerm):
        keep = set(e.outcome) | set(e.given)
        f = marginalize(p, [n for n in p.names() if n not in keep])
        if e.given:
            return condition(f, e.given)
        return f
    if isinstance(e, SumOver):
        f = _eval(e.child, p)
        present = [n for n in e.over if n in f.names()]
        out = marginalize(f, present)
        missing = [n for n in e.over if n not in f.names()]
        for n in missing:
            out = Factor(out.scope, out.table * p.var(n).domain, out.partial)
        return out
    if isinstance(e, Product):
        out = Factor.scalar(1.0)
        for c in e.children:
            out = multiply(out, _eval(c, p))
        return out
    if isinstance(e, Quotient):
        return divide(_eval(e.num, p), _eval(e.den, p))
    if isinstance(e, One):
        return Factor.scalar(1.0)
    raise InvalidInputError(f"unknown expression node {e!r}")


def evaluate(e: Expr, p: Factor, fixed: Optional[Mapping[str, int]] = None) -> Factor:
    """Evaluate a do-free expression against the observational joint ``p``.

    ``fixed`` binds the intervened values; the result is a factor over
    the remaining free variables.  Conditioning on zero-mass contexts
    propagates the partial flag rather than failing.
    """
    f = _eval(e, p)
    if fixed:
        f = f.restrict(fixed)
    return f


def effect_factor(
    expr: Expr,
    p: Factor,
    fixed: Mapping[str, int],
    outcome: Iterable[str],
) -> Factor:
    """Evaluate an identified effect down to a factor over ``outcome``.

    Auxiliary do-variables introduced by rule 3 during identification may
    remain free in the expression; their value cannot influence a joint
    consistent with the source graph, so they are bound to 0 as the
    canonical choice.
    """
    ys = frozenset(outcome)
    f = evaluate(expr, p, dict(fixed))
    extras = {n: 0 for n in f.names() if n not in ys}
    if extras:
        f = f.restrict(extras)
    if set(f.names()) != ys:
        raise InternalError(f"effect scope {f.names()} does not cover {sorted(ys)}")
    return f.reorder(sorted(f.names()))


def predictor(
    targets: Mapping[str, int],
    observed: Iterable[str],
    g_k: Admg,
    p_star: Factor,
) -> Prediction:
    """Do-calculus prediction of P(observed | do(targets)) from one
    candidate graph and the true observational joint.

    Empty prediction exactly when the graph contains a hedge for the
    experiment.
    """
    ys = frozenset(observed)
    result = id_effect(g_k, frozenset(targets), ys)
    if not result.identified:
        return Prediction(None)
    assert result.expr is not None
    f = effect_factor(result.expr, p_star, targets, ys)
    if not f.partial and abs(f.total() - 1.0) > 1e-6:
        raise InternalError(f"identified expression is not a distribution (sum={f.total()})")
    return Prediction(f)


# -- normalization and printing -----------------------------------------


def normalize(e: Expr) -> Expr:
    """Cosmetic canonical form: flattened sorted products, merged nested
    sums, units dropped.  Semantics are untouched; equality of
    expressions is always judged by evaluation."""
    if isinstance(e, SumOver):
        child = normalize(e.child)
        if isinstance(child, SumOver):
            return normalize(SumOver(tuple(sorted(set(e.over) | set(child.over))), child.child))
        if not e.over:
            return child
        if isinstance(child, ObservedTerm) and not child.given and set(e.over) <= set(child.outcome):
            return ObservedTerm(tuple(n for n in child.outcome if n not in e.over))
        return SumOver(tuple(sorted(e.over)), child)
    if isinstance(e, Product):
        flat: list[Expr] = []
        for c in e.children:
            c = normalize(c)
            if isinstance(c, Product):
                flat.extend(c.children)
            elif not isinstance(c, One):
                flat.append(c)
        if not flat:
            return One()
        if len(flat) == 1:
            return flat[0]
        return Product(tuple(sorted(flat, key=pretty)))
    if isinstance(e, Quotient):
        num, den = normalize(e.num), normalize(e.den)
        if isinstance(den, One):
            return num
        return Quotient(num, den)
    if isinstance(e, ObservedTerm):
        return ObservedTerm(tuple(sorted(e.outcome)), tuple(sorted(e.given)))
    return e


def pretty(e: Expr) -> str:
    """Deterministic text rendering, e.g. ``sum_{X} P(X) P(Z|X,Y)``."""
    if isinstance(e, ObservedTerm):
        out = ",".join(sorted(e.outcome))
        if e.given:
            return f"P({out}|{','.join(sorted(e.given))})"
        return f"P({out})"
    if isinstance(e, SumOver):
        return f"sum_{{{','.join(sorted(e.over))}}} {pretty(e.child)}"
    if isinstance(e, Product):
        parts = []
        for c in e.children:
            s = pretty(c)
            if isinstance(c, SumOver):
                s = f"[{s}]"
            parts.append(s)
        return " ".join(parts)
    if isinstance(e, Quotient):
        return f"({pretty(e.num)})/({pretty(e.den)})"
    if isinstance(e, One):
        return "1"
    return repr(e)
