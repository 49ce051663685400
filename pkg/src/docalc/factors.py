"""Exact discrete probability algebra over finite variable scopes.

Tables are dense numpy arrays, row-major in scope order (the first
scope variable is the most significant index digit).  Factors are
immutable values; every operation returns a fresh factor.

Numerical policy: 64-bit floats, ``EPS_NORM`` for normalization checks
and ``EPS_CMP`` for distribution equality.  Conditioning on a
zero-probability context yields zero cells and sets the ``partial``
flag, which propagates through downstream operations instead of
producing NaNs.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, PartialSupportError
from .graphs import Var

__all__ = [
    "EPS_NORM",
    "EPS_CMP",
    "Factor",
    "marginalize",
    "condition",
    "multiply",
    "divide",
    "equal_within",
    "TransitionMatrix",
    "apply_transition",
    "power_apply",
]

EPS_NORM = 1e-9
EPS_CMP = 1e-9

Assignment = Mapping[str, int]


class Factor:
    """Non-negative table over an ordered scope of discrete variables."""

    __slots__ = ("scope", "table", "partial")

    def __init__(self, scope: Sequence[Var], table: np.ndarray, partial: bool = False):
        self.scope: tuple[Var, ...] = tuple(scope)
        names = [v.name for v in self.scope]
        if len(set(names)) != len(names):
            raise InvalidInputError("factor scope has duplicate variables")
        expected = tuple(v.domain for v in self.scope)
        arr = np.asarray(table, dtype=float)
        if arr.shape != expected:
            arr = arr.reshape(expected)
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("factor table must be finite")
        if np.any(arr < -1e-12):
            raise InvalidInputError("factor table must be non-negative")
        arr = np.array(np.clip(arr, 0.0, None), dtype=float)
        arr.flags.writeable = False
        self.table = arr
        self.partial = bool(partial)

    # -- constructors ----------------------------------------------------

    @classmethod
    def uniform(cls, scope: Sequence[Var]) -> "Factor":
        n = int(np.prod([v.domain for v in scope])) if scope else 1
        return cls(scope, np.full([v.domain for v in scope], 1.0 / n))

    @classmethod
    def ones(cls, scope: Sequence[Var]) -> "Factor":
        return cls(scope, np.ones([v.domain for v in scope]))

    @classmethod
    def scalar(cls, value: float) -> "Factor":
        return cls((), np.asarray(float(value)))

    @classmethod
    def point_mass(cls, scope: Sequence[Var], assignment: Assignment) -> "Factor":
        for v in scope:
            if not (0 <= assignment[v.name] < v.domain):
                raise InvalidInputError(f"value {assignment[v.name]} out of domain for {v.name}")
        t = np.zeros([v.domain for v in scope])
        t[tuple(assignment[v.name] for v in scope)] = 1.0
        return cls(scope, t)

    @classmethod
    def from_fn(cls, scope: Sequence[Var], fn: Callable[..., float]) -> "Factor":
        t = np.empty([v.domain for v in scope])
        for idx in np.ndindex(*t.shape):
            t[idx] = fn(*idx)
        return cls(scope, t)

    # -- accessors -------------------------------------------------------

    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.scope)

    def var(self, name: str) -> Var:
        for v in self.scope:
            if v.name == name:
                return v
        raise InvalidInputError(f"{name!r} not in factor scope")

    def total(self) -> float:
        return float(self.table.sum())

    def is_distribution(self, eps: float = EPS_NORM) -> bool:
        return abs(self.total() - 1.0) <= eps

    def __getitem__(self, assignment: Assignment) -> float:
        idx = tuple(assignment[v.name] for v in self.scope)
        return float(self.table[idx])

    def restrict(self, assignment: Assignment) -> "Factor":
        """Fix the given variables to values and drop them from the scope."""
        fixed = {n: v for n, v in assignment.items() if n in self.names()}
        idx = tuple(fixed.get(v.name, slice(None)) for v in self.scope)
        for v in self.scope:
            if v.name in fixed and not (0 <= fixed[v.name] < v.domain):
                raise InvalidInputError(f"value {fixed[v.name]} out of domain for {v.name}")
        keep = tuple(v for v in self.scope if v.name not in fixed)
        return Factor(keep, self.table[idx], self.partial)

    def normalized(self) -> "Factor":
        tot = self.total()
        if tot <= 0.0:
            raise PartialSupportError("cannot normalize a zero-mass factor")
        return Factor(self.scope, self.table / tot, self.partial)

    def reorder(self, names: Sequence[str]) -> "Factor":
        if set(names) != set(self.names()) or len(names) != len(self.scope):
            raise InvalidInputError("reorder must permute the existing scope")
        perm = [self.names().index(n) for n in names]
        return Factor([self.scope[i] for i in perm], np.transpose(self.table, perm), self.partial)

    def __repr__(self) -> str:
        flag = ", partial" if self.partial else ""
        return f"Factor({'x'.join(self.names()) or '()'}{flag}; sum={self.total():.6g})"


def marginalize(f: Factor, out: Iterable[str]) -> Factor:
    """Sum out the variables in ``out``; total mass is preserved."""
    out = frozenset(out)
    unknown = out - set(f.names())
    if unknown:
        raise InvalidInputError(f"marginalize: {sorted(unknown)} not in scope")
    if not out:
        return f
    axes = tuple(i for i, v in enumerate(f.scope) if v.name in out)
    keep = tuple(v for v in f.scope if v.name not in out)
    return Factor(keep, f.table.sum(axis=axes), f.partial)


def condition(f: Factor, given: Iterable[str]) -> Factor:
    """Turn a joint into a conditional P(rest | given), same scope.

    Cells whose conditioning context has zero mass are set to 0 and the
    result is flagged partial.
    """
    given = frozenset(given)
    unknown = given - set(f.names())
    if unknown:
        raise InvalidInputError(f"condition: {sorted(unknown)} not in scope")
    if given == set(f.names()):
        raise InvalidInputError("conditioning on the whole scope leaves nothing")
    if not given:
        return f.normalized()
    axes = tuple(i for i, v in enumerate(f.scope) if v.name not in given)
    ctx = f.table.sum(axis=axes, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(ctx > 0.0, f.table / np.where(ctx > 0.0, ctx, 1.0), 0.0)
    partial = f.partial or bool(np.any(ctx <= 0.0))
    return Factor(f.scope, out, partial)


def _broadcast_pair(a: Factor, b: Factor) -> tuple[tuple[Var, ...], np.ndarray, np.ndarray]:
    for v in a.scope:
        for w in b.scope:
            if v.name == w.name and v.domain != w.domain:
                raise InvalidInputError(f"domain mismatch for shared variable {v.name!r}")
    scope = a.scope + tuple(w for w in b.scope if w.name not in a.names())
    names = [v.name for v in scope]

    def expanded(f: Factor) -> np.ndarray:
        src = [f.names().index(n) if n in f.names() else None for n in names]
        have = [i for i in src if i is not None]
        arr = np.transpose(f.table, have)
        shape = [scope[i].domain if src[i] is not None else 1 for i in range(len(scope))]
        return arr.reshape(shape)

    return scope, expanded(a), expanded(b)


def multiply(a: Factor, b: Factor) -> Factor:
    """Cellwise product over the union scope, broadcasting non-shared vars."""
    scope, ta, tb = _broadcast_pair(a, b)
    return Factor(scope, ta * tb, a.partial or b.partial)


def divide(a: Factor, b: Factor) -> Factor:
    """Cellwise quotient a/b; zero-denominator cells become 0 and flag the
    result partial."""
    scope, ta, tb = _broadcast_pair(a, b)
    shape = np.broadcast_shapes(ta.shape, tb.shape)
    num = np.broadcast_to(ta, shape)
    den = np.broadcast_to(tb, shape)
    zero = den <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(zero, 0.0, num / np.where(zero, 1.0, den))
    partial = a.partial or b.partial or bool(np.any(zero))
    return Factor(scope, out, partial)


def equal_within(a: Factor, b: Factor, eps: float = EPS_CMP) -> bool:
    """Max absolute cell difference <= eps, after aligning scopes."""
    if set(a.names()) != set(b.names()):
        raise InvalidInputError("equal_within: scopes differ")
    bb = b.reorder(a.names())
    for v, w in zip(a.scope, bb.scope):
        if v.domain != w.domain:
            raise InvalidInputError(f"domain mismatch for {v.name!r}")
    return bool(np.max(np.abs(a.table - bb.table), initial=0.0) <= eps)


# -- transition matrices ------------------------------------------------


def state_index(scope: Sequence[Var], assignment: Assignment) -> int:
    """Mixed-radix joint state index, first scope variable most significant."""
    idx = 0
    for v in scope:
        val = assignment[v.name]
        if not (0 <= val < v.domain):
            raise InvalidInputError(f"value {val} out of domain for {v.name}")
        idx = idx * v.domain + val
    return idx


class TransitionMatrix:
    """Markov transition for the joint state of one slice.

    Stored column-stochastic: ``matrix[next, prev]`` is
    P(V_{t+1}=next | V_t=prev).  Use ``from_rows`` for data laid out the
    other way around (row-stochastic, entry (prev, next)).
    """

    __slots__ = ("state_vars", "matrix")

    def __init__(self, state_vars: Sequence[Var], matrix: np.ndarray):
        self.state_vars: tuple[Var, ...] = tuple(state_vars)
        n = int(np.prod([v.domain for v in self.state_vars]))
        arr = np.asarray(matrix, dtype=float)
        if arr.shape != (n, n):
            raise InvalidInputError(f"transition matrix must be {n}x{n}")
        if np.any(arr < -1e-12) or np.any(arr > 1.0 + 1e-12):
            raise InvalidInputError("transition entries must lie in [0, 1]")
        arr = np.clip(arr, 0.0, 1.0)
        cols = arr.sum(axis=0)
        if np.max(np.abs(cols - 1.0)) > EPS_NORM:
            raise InvalidInputError("transition matrix columns must sum to 1")
        arr.flags.writeable = False
        self.matrix = arr

    @classmethod
    def from_rows(cls, state_vars: Sequence[Var], rows: np.ndarray) -> "TransitionMatrix":
        """Build from a row-stochastic layout (entry [prev, next])."""
        return cls(state_vars, np.asarray(rows, dtype=float).T)

    @classmethod
    def from_conditional(cls, next_vars: Sequence[Var], prev_vars: Sequence[Var],
                         cond: Factor) -> "TransitionMatrix":
        """Build from a conditional factor P(next | prev) over next+prev scope."""
        names = tuple(v.name for v in next_vars) + tuple(v.name for v in prev_vars)
        f = cond.reorder(names)
        n = int(np.prod([v.domain for v in next_vars]))
        m = int(np.prod([v.domain for v in prev_vars]))
        base = tuple(Var(v.name, v.domain) for v in next_vars)
        return cls(base, f.table.reshape(n, m))

    def n_states(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return self.state_vars == other.state_vars and np.array_equal(self.matrix, other.matrix)

    def __repr__(self) -> str:
        return f"TransitionMatrix({'x'.join(v.name for v in self.state_vars)}, {self.n_states()} states)"


def _as_state_vector(t: TransitionMatrix, p: Factor) -> np.ndarray:
    if set(p.names()) != {v.name for v in t.state_vars}:
        raise InvalidInputError("factor scope must equal the matrix state variables")
    aligned = p.reorder([v.name for v in t.state_vars])
    return aligned.table.reshape(-1)


def apply_transition(t: TransitionMatrix, p: Factor) -> Factor:
    """One step: matrix-vector product in the column-stochastic orientation."""
    vec = _as_state_vector(t, p)
    if abs(vec.sum() - 1.0) > EPS_NORM:
        raise InvalidInputError("apply_transition expects a distribution")
    out = t.matrix @ vec
    out = np.clip(out, 0.0, None)
    return Factor(t.state_vars, out.reshape([v.domain for v in t.state_vars]), p.partial)


def power_apply(t: TransitionMatrix, p: Factor, n: int) -> Factor:
    """n-fold application of ``t``; n = 0 returns ``p`` unchanged."""
    if n < 0:
        raise InvalidInputError("power_apply needs n >= 0")
    out = p
    for _ in range(n):
        out = apply_transition(t, out)
    return out


def chain_apply(schedule: Sequence[TransitionMatrix], p: Factor) -> Factor:
    """Apply a time-ordered sequence of transition matrices."""
    out = p
    for t in schedule:
        out = apply_transition(t, out)
    return out
