"""Dynamic causal networks: time-recurrent causal graphs, identification
of intervention effects, post-intervention trajectories, and a
restricted transport between domains.

A spec describes one slice plus lagged cross-slice edges; lags are in
slices (0 = within the slice).  Confounders within a slice are static;
confounders crossing k >= 1 slices are dynamic of order k.  Static
specs make the observed slices a first-order Markov chain, so window
joints chain from the transition matrix; dynamic specs require the
slice mechanism for exact window joints.

Per-step identifications are independent given the window graphs and
may run concurrently; trajectory assembly is sequential.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (InternalError, InvalidInputError, UnsupportedModelError,
                     UnsupportedQueryError, UnsupportedTransportError,
                     WindowTooSmallError)
from .factors import (Factor, TransitionMatrix, condition, marginalize,
                      multiply)
from .graphs import Admg, Var, ancestors, c_components, d_separated, mutilate
from .identify import effect_factor, id_effect
from .scm import Cpt, Exogenous, Scm, joint

__all__ = [
    "DcnSpec", "DcnMechanism", "SliceCpt", "SliceExo",
    "ConfounderClass", "DynamicTimeSpan", "GidWindow",
    "SelectionVar", "TransportSpec",
    "classify", "unroll", "dynamic_time_span", "build_gid",
    "dcn_id_static", "dcn_id_dynamic", "cdcn_id_static", "cdcn_id_dynamic",
    "transport", "trajectory", "step_kernel_matrix", "slice_var_at",
    "random_dcn_spec",
]

MAX_WINDOW_CELLS = 1 << 22

Schedule = Union[TransitionMatrix, Sequence[TransitionMatrix],
                 Callable[[int], TransitionMatrix]]


def slice_var_at(name: str, t: int) -> str:
    return f"{name}@{t}"


# -- the template --------------------------------------------------------


@dataclass(frozen=True)
class SliceCpt:
    """Mechanism of one slice variable.

    Table axes: intra parents, cross parents, exogenous parents, then the
    variable itself; parents in declared order."""

    var: str
    intra_parents: tuple[str, ...] = ()
    cross_parents: tuple[tuple[str, int], ...] = ()
    exo_parents: tuple[str, ...] = ()
    table: np.ndarray = None  # type: ignore[assignment]


@dataclass(frozen=True)
class SliceExo:
    """Hidden confounder template: feeds ``earlier`` in its birth slice
    and ``later`` in the slice ``lag`` steps onward (lag 0 = same slice)."""

    name: str
    prior: tuple[float, ...]
    earlier: str
    later: str
    lag: int


@dataclass(frozen=True)
class DcnMechanism:
    cpts: tuple[SliceCpt, ...]
    exos: tuple[SliceExo, ...]

    def cpt(self, var: str) -> SliceCpt:
        for c in self.cpts:
            if c.var == var:
                return c
        raise InvalidInputError(f"no mechanism for slice variable {var!r}")


@dataclass(frozen=True)
class DcnSpec:
    """One-slice template of a bi-infinite time-recurrent causal graph."""

    slice_vars: tuple[Var, ...]
    intra_edges: tuple[tuple[str, str], ...] = ()
    cross_edges: tuple[tuple[str, str, int], ...] = ()
    intra_confounders: tuple[frozenset[str], ...] = ()
    cross_confounders: tuple[tuple[str, str, int], ...] = ()
    mechanism: Optional[DcnMechanism] = None

    def __post_init__(self) -> None:
        names = {v.name for v in self.slice_vars}
        if len(names) != len(self.slice_vars):
            raise InvalidInputError("slice variable names must be unique")
        for a, b in self.intra_edges:
            if a not in names or b not in names or a == b:
                raise InvalidInputError(f"bad intra edge ({a},{b})")
        for a, b, k in self.cross_edges:
            if a not in names or b not in names or k < 1:
                raise InvalidInputError(f"bad cross edge ({a},{b},{k})")
        for pair in self.intra_confounders:
            if len(pair) != 2 or not pair <= names:
                raise InvalidInputError(f"bad intra confounder {set(pair)}")
        for a, b, k in self.cross_confounders:
            if a not in names or b not in names or k < 1:
                raise InvalidInputError(f"bad cross confounder ({a},{b},{k})")
        # the unrolled graph is acyclic iff the intra part is
        Admg(self.slice_vars, self.intra_edges)
        if self.mechanism is not None:
            self._check_mechanism()

    def _check_mechanism(self) -> None:
        mech = self.mechanism
        assert mech is not None
        if {c.var for c in mech.cpts} != {v.name for v in self.slice_vars}:
            raise InvalidInputError("mechanism must cover exactly the slice variables")
        for c in mech.cpts:
            if frozenset(c.intra_parents) != frozenset(
                    a for a, b in self.intra_edges if b == c.var):
                raise InvalidInputError(f"intra parents of {c.var!r} disagree with edges")
            if frozenset(c.cross_parents) != frozenset(
                    (a, k) for a, b, k in self.cross_edges if b == c.var):
                raise InvalidInputError(f"cross parents of {c.var!r} disagree with edges")
        intra_pairs = [frozenset((e.earlier, e.later)) for e in mech.exos if e.lag == 0]
        if sorted(intra_pairs, key=sorted) != sorted(self.intra_confounders, key=sorted):
            raise InvalidInputError("intra confounders and lag-0 exo templates disagree")
        cross_triples = sorted((e.earlier, e.later, e.lag) for e in mech.exos if e.lag > 0)
        if cross_triples != sorted(self.cross_confounders):
            raise InvalidInputError("cross confounders and lagged exo templates disagree")

    def var(self, name: str) -> Var:
        for v in self.slice_vars:
            if v.name == name:
                return v
        raise InvalidInputError(f"unknown slice variable {name!r}")

    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.slice_vars)

    @property
    def next_slice_causes(self) -> frozenset[str]:
        return frozenset(a for a, _b, _k in self.cross_edges)

    def slice_states(self) -> int:
        return int(np.prod([v.domain for v in self.slice_vars]))


# -- classification -------------------------------------------------------


@dataclass(frozen=True)
class ConfounderClass:
    """Confounder classification of a spec.

    ``beta`` is the maximal directed-edge lag and ``alpha_max`` the
    maximal confounder lag, both in slices.  A confounder inside one
    slice is static; one reaching the next slice is first order; longer
    reaches are higher order (the order is the lag).
    """

    kind: str  # "static" | "first-order" | "higher-order"
    order: int
    beta: int
    alpha_max: int

    @property
    def is_static(self) -> bool:
        return self.kind == "static"


def classify(spec: DcnSpec) -> ConfounderClass:
    beta = max((k for _a, _b, k in spec.cross_edges), default=0)
    alpha_max = max((k for _a, _b, k in spec.cross_confounders), default=0)
    if alpha_max == 0:
        return ConfounderClass("static", 0, beta, 0)
    if alpha_max == 1:
        return ConfounderClass("first-order", 1, beta, 1)
    return ConfounderClass("higher-order", alpha_max, beta, alpha_max)


@dataclass(frozen=True)
class DynamicTimeSpan:
    """Farthest slice distance reachable from X via confounder chains;
    ``None`` marks an infinite span (self-sustaining confounder cycle)."""

    slices: Optional[int]

    @property
    def is_infinite(self) -> bool:
        return self.slices is None


def dynamic_time_span(spec: DcnSpec, x_slice_vars: Iterable[str]) -> DynamicTimeSpan:
    """Maximal forward slice offset d-connected to X via confounder paths."""
    return _confounder_reach(spec, x_slice_vars, forward=True)


def _confounder_reach(spec: DcnSpec, start: Iterable[str], forward: bool) -> DynamicTimeSpan:
    start = set(start)
    for n in start:
        spec.var(n)
    # weighted traversal graph over slice variables: a cross confounder
    # (a, b, k) joins a@t with b@t+k, traversable both ways
    edges: list[tuple[str, str, int]] = []
    for a, b, k in spec.cross_confounders:
        edges.append((a, b, k))
        edges.append((b, a, -k))
    for pair in spec.intra_confounders:
        a, b = sorted(pair)
        edges.append((a, b, 0))
        edges.append((b, a, 0))
    sign = 1 if forward else -1
    best = {n: 0 for n in start}
    n_vars = len(spec.slice_vars)
    for round_no in range(n_vars * 2 + 2):
        changed = False
        for a, b, w in edges:
            if a in best and best[a] + sign * w > best.get(b, -(10 ** 9)):
                best[b] = best[a] + sign * w
                changed = True
        if not changed:
            return DynamicTimeSpan(max(0, max(best.values())))
    return DynamicTimeSpan(None)


# -- unrolling ------------------------------------------------------------


def unroll(spec: DcnSpec, t0: int, t_end: int) -> tuple[Admg, dict[tuple[str, int], str]]:
    """Finite window of the bi-infinite graph: one vertex per (variable,
    slice).  Edges whose lag sticks out of the window are dropped."""
    if t0 > t_end:
        raise WindowTooSmallError("empty unroll window")
    variables: list[Var] = []
    index: dict[tuple[str, int], str] = {}
    for t in range(t0, t_end + 1):
        for v in spec.slice_vars:
            name = slice_var_at(v.name, t)
            variables.append(Var(name, v.domain))
            index[(v.name, t)] = name
    directed = []
    bidirected = []
    for t in range(t0, t_end + 1):
        for a, b in spec.intra_edges:
            directed.append((index[(a, t)], index[(b, t)]))
        for a, b, k in spec.cross_edges:
            if t + k <= t_end:
                directed.append((index[(a, t)], index[(b, t + k)]))
        for pair in spec.intra_confounders:
            a, b = sorted(pair)
            bidirected.append((index[(a, t)], index[(b, t)]))
        for a, b, k in spec.cross_confounders:
            if t + k <= t_end:
                bidirected.append((index[(a, t)], index[(b, t + k)]))
    return Admg(variables, directed, bidirected), index


def unrolled_scm(spec: DcnSpec, t0: int, t_end: int) -> Scm:
    """Exact SCM over a window.

    Boundary convention: parents and confounder halves that would come
    from slices before ``t0`` are averaged out uniformly, which defines
    the generating process started at ``t0``.
    """
    if spec.mechanism is None:
        raise UnsupportedModelError("spec carries no slice mechanism")
    mech = spec.mechanism
    graph, index = unroll(spec, t0, t_end)
    cells = float(np.prod([v.domain for v in graph.vars]))
    if cells > MAX_WINDOW_CELLS:
        raise UnsupportedModelError(f"window joint would need {cells:.3g} cells")

    exo_list: list[Exogenous] = []
    exo_parents: dict[str, list[str]] = {v.name: [] for v in graph.vars}
    exo_domains: dict[str, int] = {}
    for t in range(t0, t_end + 1):
        for e in mech.exos:
            if e.lag > 0 and t + e.lag > t_end:
                continue  # the later half leaves the window; handled as noise below
            name = f"{e.name}@{t}"
            early = index[(e.earlier, t)]
            late = index[(e.later, t + e.lag)]
            exo_list.append(Exogenous(Var(name, len(e.prior)), e.prior,
                                      frozenset((early, late))))
            exo_parents[early].append(name)
            exo_parents[late].append(name)
            exo_domains[name] = len(e.prior)

    cpts: dict[str, Cpt] = {}
    for t in range(t0, t_end + 1):
        for v in spec.slice_vars:
            c = mech.cpt(v.name)
            table = np.asarray(c.table, dtype=float)
            # axes: intra parents, cross parents, exo parents, var
            axis = 0
            keep_obs: list[str] = []
            for p in c.intra_parents:
                keep_obs.append(index[(p, t)])
                axis += 1
            for p, lag in c.cross_parents:
                if t - lag >= t0:
                    keep_obs.append(index[(p, t - lag)])
                    axis += 1
                else:
                    table = table.mean(axis=axis)  # pre-window parent: average
            kept_exo: list[str] = []
            for e_name in c.exo_parents:
                e = next(e for e in mech.exos if e.name == e_name)
                if v.name == e.earlier and (e.lag == 0 or t + e.lag <= t_end):
                    kept_exo.append(f"{e.name}@{t}")
                    axis += 1
                elif v.name == e.later and t - e.lag >= t0:
                    kept_exo.append(f"{e.name}@{t - e.lag}")
                    axis += 1
                elif v.name == e.earlier:
                    # later half leaves the window: keep as private noise
                    noise = f"{e.name}@{t}"
                    if noise not in exo_domains:
                        exo_list.append(Exogenous(Var(noise, len(e.prior)), e.prior,
                                                  frozenset((index[(v.name, t)],))))
                        exo_domains[noise] = len(e.prior)
                    kept_exo.append(noise)
                    axis += 1
                else:
                    table = table.mean(axis=axis)  # confounder born pre-window
            name = index[(v.name, t)]
            cpts[name] = Cpt(name, tuple(keep_obs), tuple(kept_exo), table)
    return Scm(graph, cpts, tuple(exo_list))


# -- transition matrices and marginals ------------------------------------


def _matrix_at(schedule: Optional[Schedule], t: int) -> TransitionMatrix:
    if schedule is None:
        raise InvalidInputError("a transition matrix (or schedule) is required")
    if isinstance(schedule, TransitionMatrix):
        return schedule
    if callable(schedule):
        return schedule(t)
    return schedule[t]


def mechanism_transition(spec: DcnSpec) -> TransitionMatrix:
    """P(V_{t+1} | V_t) implied by the slice mechanism (static specs)."""
    if not classify(spec).is_static:
        raise UnsupportedModelError(
            "with dynamic confounders the one-step conditional is not a mechanism constant")
    m2 = unrolled_scm(spec, 0, 1)
    j = joint(m2)
    prev = [slice_var_at(n, 0) for n in spec.names()]
    nxt = [slice_var_at(n, 1) for n in spec.names()]
    cond = condition(j, prev)
    f = cond.reorder(nxt + prev)
    n = spec.slice_states()
    return TransitionMatrix(spec.slice_vars, f.table.reshape(n, n))


def initial_distribution(spec: DcnSpec, t0: int = 0) -> Factor:
    """Slice-t0 joint under the boundary convention of ``unrolled_scm``."""
    m = unrolled_scm(spec, t0, t0)
    f = joint(m)
    return _to_template(spec, f, t0)


def _to_template(spec: DcnSpec, f: Factor, t: int) -> Factor:
    names = {slice_var_at(n, t): n for n in spec.names()}
    scope = [Var(names[v.name], v.domain) for v in f.scope]
    return Factor(scope, f.table, f.partial).reorder(spec.names())


def _slice_factor_at(spec: DcnSpec, f: Factor, t: int) -> Factor:
    scope = [Var(slice_var_at(v.name, t), v.domain) for v in f.scope]
    return Factor(scope, f.table, f.partial)


def observational_marginal(
    spec: DcnSpec,
    t: int,
    schedule: Optional[Schedule],
    p0: Optional[Factor],
    t0: int,
) -> Factor:
    """P(V_t) without intervention, over template variable names."""
    if t < t0:
        raise WindowTooSmallError(f"slice {t} precedes the initial slice {t0}")
    if p0 is None:
        if spec.mechanism is not None:
            if schedule is None or not classify(spec).is_static:
                m = unrolled_scm(spec, t0, t)
                f = joint(m)
                drop = [n for n in f.names() if not n.endswith(f"@{t}")]
                return _to_template(spec, marginalize(f, drop), t)
            p0 = initial_distribution(spec, t0)
        else:
            p0 = Factor.uniform(spec.slice_vars)
    out = p0.reorder(spec.names())
    for step in range(t0, t):
        tm = _matrix_at(schedule, step)
        vec = tm.matrix @ out.table.reshape(-1)
        out = Factor(spec.slice_vars, vec.reshape([v.domain for v in spec.slice_vars]))
    return out


def _window_joint(
    spec: DcnSpec,
    t_left: int,
    t_right: int,
    schedule: Optional[Schedule],
    p0: Optional[Factor],
    t0: int,
) -> Factor:
    """Observational joint over the window slices, unrolled names.

    Static specs chain the transition matrix from the marginal at the
    window's left edge (the slices are first-order Markov); otherwise
    the joint comes exactly from the mechanism.
    """
    if classify(spec).is_static and schedule is not None:
        left = observational_marginal(spec, t_left, schedule, p0, t0)
        out = _slice_factor_at(spec, left, t_left)
        for t in range(t_left, t_right):
            tm = _matrix_at(schedule, t)
            nxt_scope = tuple(Var(slice_var_at(v.name, t + 1), v.domain)
                              for v in spec.slice_vars)
            prev_scope = tuple(Var(slice_var_at(v.name, t), v.domain)
                               for v in spec.slice_vars)
            doms = [v.domain for v in nxt_scope] + [v.domain for v in prev_scope]
            cond = Factor(nxt_scope + prev_scope, tm.matrix.reshape(doms))
            out = multiply(out, cond)
        return out
    m = unrolled_scm(spec, t0, t_right)
    f = joint(m)
    drop = [n for n in f.names() if not (t_left <= int(n.split("@")[1]) <= t_right)]
    return marginalize(f, drop)


# -- windows ---------------------------------------------------------------


@dataclass(frozen=True)
class GidWindow:
    """Slice window sufficient for identification (graph plus bounds)."""

    t_start: int
    t_end: int
    graph: Admg
    index: Mapping[tuple[str, int], str]


def _backward_reach(spec: DcnSpec, x_vars: Iterable[str]) -> DynamicTimeSpan:
    return _confounder_reach(spec, x_vars, forward=False)


def build_gid(spec: DcnSpec, t_x: int, t_y: int) -> GidWindow:
    """Window per the identification lemma: from one slice before the
    leftmost confounder-connected slice (or t_x-2 without cross
    confounders) through t_y."""
    if t_x >= t_y:
        raise InvalidInputError("t_x must precede t_y")
    back = _backward_reach(spec, spec.names())
    if back.is_infinite:
        raise UnsupportedModelError("infinite dynamic time span")
    assert back.slices is not None
    t_start = min(t_x - back.slices - 1, t_x - 2)
    g, index = unroll(spec, t_start, t_y)
    return GidWindow(t_start, t_y, g, index)


# -- kernels ---------------------------------------------------------------


@dataclass
class _Kernel:
    """Conditional map P(next vars | prev vars) as a dense matrix."""

    next_names: tuple[str, ...]
    prev_names: tuple[str, ...]
    next_domains: tuple[int, ...]
    prev_domains: tuple[int, ...]
    matrix: np.ndarray  # (next states, prev states)
    partial: bool = False

    def apply(self, p: Factor) -> Factor:
        aligned = p.reorder(self.prev_names)
        vec = aligned.table.reshape(-1)
        out = self.matrix @ vec
        out = np.clip(out, 0.0, None)
        scope = tuple(Var(n, d) for n, d in zip(self.next_names, self.next_domains))
        return Factor(scope, out.reshape(self.next_domains), self.partial or p.partial)


def _kernel_from_conditional(cond: Factor, next_names: Sequence[str],
                             prev_names: Sequence[str]) -> _Kernel:
    f = cond.reorder(tuple(next_names) + tuple(prev_names))
    nd = tuple(f.var(n).domain for n in next_names)
    pd = tuple(f.var(n).domain for n in prev_names)
    m = int(np.prod(nd)) if nd else 1
    n = int(np.prod(pd)) if pd else 1
    return _Kernel(tuple(next_names), tuple(prev_names), nd, pd,
                   f.table.reshape(m, n), f.partial)


def _restricted_transition_kernel(
    spec: DcnSpec,
    tm: TransitionMatrix,
    next_keep: Sequence[str],
    prev_keep: Sequence[str],
) -> _Kernel:
    """Marginal of T onto ancestor subsets of consecutive slices.

    Sound because parents of ancestors are ancestors: the next-restricted
    conditional cannot depend on dropped previous-slice variables; the
    reduction asserts that constancy.
    """
    names = list(spec.names())
    doms = [spec.var(n).domain for n in names]
    full = tm.matrix.reshape(doms + doms)  # next axes then prev axes
    drop_next = tuple(i for i, n in enumerate(names) if n not in set(next_keep))
    reduced = full.sum(axis=drop_next) if drop_next else full
    n_next_kept = len(names) - len(drop_next)
    # walk prev axes from the back so dropped-axis indices stay valid
    for i in reversed(range(len(names))):
        if names[i] in set(prev_keep):
            continue
        axis = n_next_kept + i
        ref = np.take(reduced, 0, axis=axis)
        for val in range(1, doms[i]):
            if np.max(np.abs(np.take(reduced, val, axis=axis) - ref)) > 1e-9:
                raise InternalError(
                    f"transition depends on non-ancestor {names[i]!r}; "
                    "ancestor closure violated")
        reduced = ref
    next_names = [n for n in names if n in set(next_keep)]
    prev_names = [n for n in names if n in set(prev_keep)]
    nd = tuple(spec.var(n).domain for n in next_names)
    pd = tuple(spec.var(n).domain for n in prev_names)
    return _Kernel(tuple(next_names), tuple(prev_names), nd, pd,
                   reduced.reshape(int(np.prod(nd)), int(np.prod(pd))))


def _identified_kernel(
    spec: DcnSpec,
    window: tuple[int, int],
    x_values: Mapping[str, int],
    t_x: int,
    next_slice: int,
    next_vars: Sequence[str],
    prev_slice: int,
    prev_vars: Sequence[str],
    schedule: Optional[Schedule],
    p0: Optional[Factor],
    t0: int,
) -> Optional[_Kernel]:
    """ID the conditional P(next | prev, do(X)) on a window graph and
    evaluate it against the window's observational joint."""
    t_left, t_right = window
    g, index = unroll(spec, t_left, t_right)
    targets = {index[(n, t_x)]: v for n, v in x_values.items()}
    next_names = [index[(n, next_slice)] for n in next_vars]
    prev_names = [index[(n, prev_slice)] for n in prev_vars]
    outcome = frozenset(next_names) | frozenset(prev_names)
    result = id_effect(g, frozenset(targets), outcome)
    if not result.identified:
        return None
    assert result.expr is not None
    j = _window_joint(spec, t_left, t_right, schedule, p0, t0)
    num = effect_factor(result.expr, j, targets, outcome)
    cond = condition(num, prev_names)
    kern = _kernel_from_conditional(cond, next_names, prev_names)
    kern.next_names = tuple(next_vars)
    kern.prev_names = tuple(prev_vars)
    return kern


def step_kernel_matrix(
    spec: DcnSpec,
    x: Mapping[str, int],
    t_x: int,
    T: Optional[Schedule] = None,
    p0: Optional[Factor] = None,
    t0: int = 0,
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """The identified step conditional P(V_{t_x+1} | V_{t_x-1}, do(X=x)).

    Returns (matrix, reachable) where ``matrix[next, prev]`` is
    column-stochastic over the slice states in declared variable order
    and ``reachable`` marks previous-state columns with positive
    observational probability (the conditional is vacuous elsewhere);
    None when the step query has a hedge.
    """
    w_left = max(t0, t_x - 2)
    kern = _identified_kernel(
        spec, (w_left, t_x + 1), x, t_x,
        next_slice=t_x + 1, next_vars=spec.names(),
        prev_slice=t_x - 1, prev_vars=spec.names(),
        schedule=T, p0=p0, t0=t0,
    )
    if kern is None:
        return None
    prev = observational_marginal(spec, t_x - 1, T, p0, t0)
    reachable = prev.reorder(spec.names()).table.reshape(-1) > 1e-12
    return kern.matrix, reachable


# -- identification pipelines ----------------------------------------------


def _ancestor_slices(
    spec: DcnSpec,
    y: frozenset[str],
    t_y: int,
    t_left: int,
) -> dict[int, tuple[str, ...]]:
    """An(Y) intersected with each slice of [t_left, t_y], template names."""
    g, index = unroll(spec, t_left, t_y)
    an = ancestors(g, [index[(n, t_y)] for n in y])
    out: dict[int, tuple[str, ...]] = {}
    for t in range(t_left, t_y + 1):
        out[t] = tuple(n for n in spec.names() if index[(n, t)] in an)
    return out


def _validate_query(spec: DcnSpec, x: Mapping[str, int], y: Iterable[str],
                    t_x: int, t_y: int, t0: int) -> None:
    for n, v in x.items():
        var = spec.var(n)
        if not (0 <= v < var.domain):
            raise InvalidInputError(f"value {v} out of domain for {n}")
    for n in y:
        spec.var(n)
    if frozenset(x) & frozenset(y) and t_x == t_y:
        raise InvalidInputError("intervened and observed variables overlap")
    if t_x >= t_y:
        raise UnsupportedQueryError("the intervention must precede the outcome slice")
    if t_x - 1 < t0:
        raise WindowTooSmallError("need one observational slice before the intervention")


def _static_effect(
    spec: DcnSpec,
    x: Mapping[str, int],
    t_x: int,
    y: Iterable[str],
    t_y: int,
    schedule: Optional[Schedule],
    p0: Optional[Factor],
    t0: int,
    complete: bool,
) -> Optional[Factor]:
    ys = frozenset(y)
    _validate_query(spec, x, ys, t_x, t_y, t0)
    if not classify(spec).is_static:
        raise UnsupportedModelError("this algorithm requires static confounders only")
    if spec.mechanism is None and schedule is None:
        raise InvalidInputError("either a transition matrix or a mechanism is required")
    if schedule is None:
        schedule = mechanism_transition(spec)

    w_left = max(t0, t_x - 2)
    if complete:
        an = _ancestor_slices(spec, ys, t_y, w_left)
    else:
        an = {t: spec.names() for t in range(w_left, t_y + 1)}
    next_vars = an[t_x + 1]
    if not next_vars:
        # X cannot influence Y: the effect is the observational marginal
        marg = observational_marginal(spec, t_y, schedule, p0, t0)
        return marginalize(marg, [n for n in marg.names() if n not in ys])

    kern = _identified_kernel(
        spec, (w_left, t_x + 1), x, t_x,
        next_slice=t_x + 1, next_vars=next_vars,
        prev_slice=t_x - 1, prev_vars=spec.names(),
        schedule=schedule, p0=p0, t0=t0,
    )
    if kern is None:
        return None

    state = kern.apply(observational_marginal(spec, t_x - 1, schedule, p0, t0))
    current_vars = next_vars
    for t in range(t_x + 2, t_y + 1):
        step = _restricted_transition_kernel(spec, _matrix_at(schedule, t - 1),
                                             an[t], current_vars)
        state = step.apply(state)
        current_vars = an[t]
    return marginalize(state, [n for n in state.names() if n not in ys])


def dcn_id_static(
    spec: DcnSpec,
    x: Mapping[str, int],
    t_x: int,
    y: Iterable[str],
    t_y: int,
    T: Optional[Schedule] = None,
    p0: Optional[Factor] = None,
    t0: int = 0,
) -> Optional[Factor]:
    """P(Y at t_y | do(X=x at t_x)) for specs with static confounders.

    Identifies the full-slice step conditional around the intervention
    and chains transition matrices elsewhere; returns None when the
    full-slice step query has a hedge (which can happen even for
    identifiable effects; see the complete variant)."""
    return _static_effect(spec, x, t_x, y, t_y, T, p0, t0, complete=False)


def cdcn_id_static(
    spec: DcnSpec,
    x: Mapping[str, int],
    t_x: int,
    y: Iterable[str],
    t_y: int,
    T: Optional[Schedule] = None,
    p0: Optional[Factor] = None,
    t0: int = 0,
) -> Optional[Factor]:
    """Complete variant: restricts the step query to ancestors of Y, so it
    fails exactly when P(Y|do(X)) is truly non-identifiable."""
    return _static_effect(spec, x, t_x, y, t_y, T, p0, t0, complete=True)


def _dynamic_effect(
    spec: DcnSpec,
    x: Mapping[str, int],
    t_x: int,
    y: Iterable[str],
    t_y: int,
    schedule: Optional[Schedule],
    p0: Optional[Factor],
    t0: int,
    complete: bool,
) -> Optional[Factor]:
    ys = frozenset(y)
    _validate_query(spec, x, ys, t_x, t_y, t0)
    if spec.mechanism is None:
        raise UnsupportedModelError("dynamic identification needs the slice mechanism "
                                    "for exact window joints")
    span = dynamic_time_span(spec, x.keys())
    if span.is_infinite:
        raise UnsupportedModelError("infinite dynamic time span")
    assert span.slices is not None
    back = _backward_reach(spec, x.keys())
    assert back.slices is not None  # finite whenever the forward span is
    w_left = max(t0, min(t_x - back.slices - 1, t_x - 2))

    if complete:
        jump_to = t_x + span.slices + 1
        if jump_to >= t_y + 1:
            if span.slices > 0 and t_x + span.slices >= t_y:
                raise UnsupportedQueryError(
                    "the outcome slice lies inside the dynamic time span")
            jump_to = t_x + 1
        an = _ancestor_slices(spec, ys, t_y, w_left)
    else:
        jump_to = t_x + 1
        an = {t: spec.names() for t in range(w_left, t_y + 1)}

    next_vars = an[jump_to]
    if not next_vars:
        marg = observational_marginal(spec, t_y, schedule, p0, t0)
        return marginalize(marg, [n for n in marg.names() if n not in ys])

    kern = _identified_kernel(
        spec, (w_left, jump_to), x, t_x,
        next_slice=jump_to, next_vars=next_vars,
        prev_slice=t_x - 1, prev_vars=spec.names(),
        schedule=schedule, p0=p0, t0=t0,
    )
    if kern is None:
        return None
    state = kern.apply(observational_marginal(spec, t_x - 1, schedule, p0, t0))
    current = next_vars
    m_left = max(t0, min(t_x - back.slices - 1, t_x - 1))
    for t in range(jump_to + 1, t_y + 1):
        step = _identified_kernel(
            spec, (m_left, t), x, t_x,
            next_slice=t, next_vars=an[t],
            prev_slice=t - 1, prev_vars=current,
            schedule=schedule, p0=p0, t0=t0,
        )
        if step is None:
            return None
        state = step.apply(state)
        current = an[t]
    return marginalize(state, [n for n in state.names() if n not in ys])


def dcn_id_dynamic(
    spec: DcnSpec,
    x: Mapping[str, int],
    t_x: int,
    y: Iterable[str],
    t_y: int,
    T: Optional[Schedule] = None,
    p0: Optional[Factor] = None,
    t0: int = 0,
) -> Optional[Factor]:
    """Identification with dynamic confounders: every post-intervention
    step conditional is identified on its own growing window (an
    intervention keeps disturbing later transitions through lagged
    confounders)."""
    return _dynamic_effect(spec, x, t_x, y, t_y, T, p0, t0, complete=False)


def cdcn_id_dynamic(
    spec: DcnSpec,
    x: Mapping[str, int],
    t_x: int,
    y: Iterable[str],
    t_y: int,
    T: Optional[Schedule] = None,
    p0: Optional[Factor] = None,
    t0: int = 0,
) -> Optional[Factor]:
    """Complete dynamic variant: jumps over the dynamic time span of X
    with one ancestor-restricted step query, then proceeds stepwise;
    requires the outcome to lie beyond the span."""
    return _dynamic_effect(spec, x, t_x, y, t_y, T, p0, t0, complete=True)


# -- trajectories -----------------------------------------------------------


def trajectory(
    spec: DcnSpec,
    T_schedule: Optional[Schedule],
    p0: Optional[Factor],
    intervention: Optional[tuple[Mapping[str, int], int]],
    horizon: int,
    t0: int = 0,
) -> list[Factor]:
    """Per-slice joint distributions from t0 through ``horizon``.

    Slices before the intervention are untouched by it; the intervention
    slice and the one after come from identified step conditionals; later
    slices evolve by the transition matrix (static) or per-step
    identified conditionals (dynamic)."""
    if horizon < t0:
        raise InvalidInputError("horizon precedes t0")
    out: list[Factor] = []
    if intervention is None:
        for t in range(t0, horizon + 1):
            out.append(observational_marginal(spec, t, T_schedule, p0, t0))
        return out
    x, t_x = intervention
    if not (t0 < t_x <= horizon):
        raise InvalidInputError("the intervention slice must lie inside the horizon")
    static = classify(spec).is_static
    if static and T_schedule is None and spec.mechanism is not None:
        T_schedule = mechanism_transition(spec)

    for t in range(t0, t_x):
        out.append(observational_marginal(spec, t, T_schedule, p0, t0))

    w_left = max(t0, t_x - 2)
    rest = [n for n in spec.names() if n not in x]
    if rest:
        kern = _identified_kernel(
            spec, (w_left, t_x), x, t_x,
            next_slice=t_x, next_vars=rest,
            prev_slice=t_x - 1, prev_vars=spec.names(),
            schedule=T_schedule, p0=p0, t0=t0)
        if kern is None:
            raise UnsupportedQueryError(
                "the intervention-slice distribution is not identifiable")
        at_tx = kern.apply(out[-1] if out else observational_marginal(
            spec, t_x - 1, T_schedule, p0, t0))
    else:
        at_tx = Factor.scalar(1.0)
    point = Factor.point_mass([spec.var(n) for n in sorted(x)], dict(x))
    out.append(multiply(at_tx, point).reorder(spec.names()))
    if t_x == horizon:
        return out

    if static:
        step1 = _identified_kernel(
            spec, (w_left, t_x + 1), x, t_x,
            next_slice=t_x + 1, next_vars=spec.names(),
            prev_slice=t_x - 1, prev_vars=spec.names(),
            schedule=T_schedule, p0=p0, t0=t0)
        if step1 is None:
            raise UnsupportedQueryError("the post-intervention slice is not identifiable")
        state = step1.apply(observational_marginal(spec, t_x - 1, T_schedule, p0, t0))
        out.append(state)
        for t in range(t_x + 2, horizon + 1):
            tm = _matrix_at(T_schedule, t - 1)
            vec = tm.matrix @ state.reorder(spec.names()).table.reshape(-1)
            state = Factor(spec.slice_vars, vec.reshape([v.domain for v in spec.slice_vars]))
            out.append(state)
        return out

    # dynamic confounders: identify each subsequent step conditional
    back = _backward_reach(spec, x.keys())
    if back.is_infinite:
        raise UnsupportedModelError("infinite dynamic time span")
    assert back.slices is not None
    m_left = max(t0, min(t_x - back.slices - 1, t_x - 2))
    kern = _identified_kernel(
        spec, (m_left, t_x + 1), x, t_x,
        next_slice=t_x + 1, next_vars=spec.names(),
        prev_slice=t_x - 1, prev_vars=spec.names(),
        schedule=T_schedule, p0=p0, t0=t0)
    if kern is None:
        raise UnsupportedQueryError("the post-intervention slice is not identifiable")
    state = kern.apply(observational_marginal(spec, t_x - 1, T_schedule, p0, t0))
    out.append(state)
    for t in range(t_x + 2, horizon + 1):
        step = _identified_kernel(
            spec, (m_left, t), x, t_x,
            next_slice=t, next_vars=spec.names(),
            prev_slice=t - 1, prev_vars=spec.names(),
            schedule=T_schedule, p0=p0, t0=t0)
        if step is None:
            raise UnsupportedQueryError(f"step conditional at slice {t} is not identifiable")
        state = step.apply(state)
        out.append(state)
    return out


# -- transportability (restricted) ------------------------------------------


@dataclass(frozen=True)
class SelectionVar:
    """Root vertex marking variables whose mechanism differs between the
    source and target domains; offsets are slices relative to t_x."""

    name: str
    points_at: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class TransportSpec:
    """Selection variables plus the experiments recorded in the source
    domain (sets of slice variables that were intervened at t_x)."""

    selection_vars: tuple[SelectionVar, ...]
    source_experiments: tuple[frozenset[str], ...] = ()
    source_spec: Optional[DcnSpec] = None  # mechanism of the source domain


def transport(
    spec: DcnSpec,
    tspec: TransportSpec,
    x: Mapping[str, int],
    t_x: int,
    y: Iterable[str],
    t_y: int,
    T_target: Optional[Schedule] = None,
    p0_target: Optional[Factor] = None,
    t0: int = 0,
) -> Optional[Factor]:
    """P(Y|do(X)) in the target domain from target observations plus
    source-domain experiments, for static specs with selection variables
    pointing at slice variables.

    Supported class: no selection variable may point into the
    bidirected component of an intervened variable.  When the step query
    is target-identifiable the formula needs no source terms; when it is
    hedged, the whole step conditional is taken from a source experiment
    on X provided the selection variables are d-separated from it.
    """
    ys = frozenset(y)
    _validate_query(spec, x, ys, t_x, t_y, t0)
    if not classify(spec).is_static:
        raise UnsupportedTransportError("transport is supported for static specs only")

    w_left = max(t0, t_x - 2)
    g, index = unroll(spec, w_left, t_x + 1)
    comps = c_components(g)
    x_names = {index[(n, t_x)] for n in x}
    x_comp: frozenset[str] = frozenset()
    for comp in comps:
        if comp & x_names:
            x_comp |= comp
    pointed: list[str] = []
    for s in tspec.selection_vars:
        for var, off in s.points_at:
            t = t_x + off
            if (var, t) not in index:
                continue
            pointed.append(index[(var, t)])
            # pointing at an intervened variable is harmless (the do() cuts
            # the selection edge); pointing at its confounded partners is not
            if index[(var, t)] in x_comp - x_names:
                raise UnsupportedTransportError(
                    f"selection variable {s.name!r} points inside the intervened "
                    f"bidirected component ({var} at slice {t})")

    if not tspec.selection_vars:
        return dcn_id_static(spec, x, t_x, ys, t_y, T_target, p0_target, t0)

    target_side = dcn_id_static(spec, x, t_x, ys, t_y, T_target, p0_target, t0)
    if target_side is not None:
        return target_side

    # target-unidentifiable step: try the source experiment for the whole
    # step conditional
    if frozenset(x) not in set(tspec.source_experiments):
        return None
    if tspec.source_spec is None or tspec.source_spec.mechanism is None:
        raise UnsupportedTransportError("source experiments require the source mechanism")

    # s-admissibility: selection variables d-separated from the step
    # outcome under do(X) in the selection-augmented window
    sel_vars = [Var(s.name, 2) for s in tspec.selection_vars]
    aug_edges = list(g.directed)
    for s in tspec.selection_vars:
        for var, off in s.points_at:
            if (var, t_x + off) in index:
                aug_edges.append((s.name, index[(var, t_x + off)]))
    aug = Admg(tuple(g.vars) + tuple(sel_vars), aug_edges, g.bidirected)
    outcome = {index[(n, t_x + 1)] for n in spec.names()} | {index[(n, t_x - 1)] for n in spec.names()}
    cut = mutilate(aug, remove_incoming=x_names)
    if not d_separated(cut, {s.name for s in tspec.selection_vars},
                       outcome - x_names, frozenset()):
        return None

    src = tspec.source_spec
    m_src = unrolled_scm(src, w_left, t_x + 1)
    from .scm import intervene as scm_intervene
    post = joint(scm_intervene(m_src, {index[(n, t_x)]: v for n, v in x.items()}))
    keep = outcome
    num = marginalize(post, [n for n in post.names() if n not in keep])
    prev_names = [index[(n, t_x - 1)] for n in spec.names()]
    next_names = [index[(n, t_x + 1)] for n in spec.names()]
    cond = condition(num, prev_names)
    kern = _kernel_from_conditional(cond, next_names, prev_names)
    kern.next_names = tuple(spec.names())
    kern.prev_names = tuple(spec.names())

    state = kern.apply(observational_marginal(spec, t_x - 1, T_target, p0_target, t0))
    for t in range(t_x + 2, t_y + 1):
        tm = _matrix_at(T_target, t - 1)
        vec = tm.matrix @ state.reorder(spec.names()).table.reshape(-1)
        state = Factor(spec.slice_vars, vec.reshape([v.domain for v in spec.slice_vars]))
    return marginalize(state, [n for n in state.names() if n not in ys])


# -- random specs (tests, demos) --------------------------------------------


def random_dcn_spec(
    rng: np.random.Generator,
    n_vars: int = 3,
    p_intra: float = 0.4,
    p_cross: float = 0.6,
    n_static_conf: int = 1,
    n_dynamic_conf: int = 0,
    domain: int = 2,
) -> DcnSpec:
    """Random slice template with a random mechanism attached."""
    names = [f"V{i+1}" for i in range(n_vars)]
    variables = tuple(Var(n, domain) for n in names)
    intra = [(names[i], names[j]) for i in range(n_vars) for j in range(i + 1, n_vars)
             if rng.random() < p_intra]
    cross = [(a, b, 1) for a in names for b in names if rng.random() < p_cross / n_vars]
    if not cross:
        cross = [(names[-1], names[0], 1)]
    pairs = [(names[i], names[j]) for i in range(n_vars) for j in range(i + 1, n_vars)]
    intra_conf = []
    if pairs and n_static_conf:
        take = rng.choice(len(pairs), size=min(n_static_conf, len(pairs)), replace=False)
        intra_conf = [frozenset(pairs[i]) for i in np.atleast_1d(take)]
    cross_conf = []
    for _ in range(n_dynamic_conf):
        a = names[rng.integers(n_vars)]
        b = names[rng.integers(n_vars)]
        cross_conf.append((a, b, 1))
    cross_conf = sorted(set(cross_conf))

    exos = []
    exo_of: dict[str, list[str]] = {n: [] for n in names}
    for i, pair in enumerate(sorted(intra_conf, key=sorted)):
        a, b = sorted(pair)
        name = f"U{i+1}"
        exos.append(SliceExo(name, tuple(rng.dirichlet(np.ones(2))), a, b, 0))
        exo_of[a].append(name)
        exo_of[b].append(name)
    for j, (a, b, k) in enumerate(cross_conf):
        name = f"W{j+1}"
        exos.append(SliceExo(name, tuple(rng.dirichlet(np.ones(2))), a, b, k))
        exo_of[a].append(name)
        exo_of[b].append(name)

    cpts = []
    for n in names:
        intra_p = tuple(sorted(a for a, b in intra if b == n))
        cross_p = tuple(sorted((a, k) for a, b, k in cross if b == n))
        exo_p = tuple(exo_of[n])
        shape = tuple(domain for _ in intra_p) + tuple(domain for _ in cross_p)
        shape += tuple(2 for _ in exo_p)
        n_rows = int(np.prod(shape)) if shape else 1
        rows = rng.dirichlet(np.ones(domain), size=n_rows)
        cpts.append(SliceCpt(n, intra_p, cross_p, exo_p,
                             rows.reshape(shape + (domain,))))
    return DcnSpec(variables, tuple(intra), tuple(cross), tuple(intra_conf),
                   tuple(cross_conf), DcnMechanism(tuple(cpts), tuple(exos)))
