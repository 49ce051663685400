import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from docalc.errors import CyclicGraphError, InvalidInputError
from docalc.graphs import (Admg, Var, ancestors, c_components, d_separated,
                           descendants, find_hedge, mutilate,
                           topological_order, verify_hedge)
from conftest import bf_d_separated, bf_hedge_exists


def chain():
    return Admg([Var("X"), Var("Z"), Var("Y")], [("X", "Z"), ("Z", "Y")])


class TestAncestors:
    def test_chain_closure(self):
        g = chain()
        assert ancestors(g, {"Y"}) == {"X", "Z", "Y"}

    def test_empty_base(self):
        assert ancestors(chain(), set()) == frozenset()

    def test_confounded_chain(self, fig32_trio):
        _g1, _g2, g3 = fig32_trio
        # bidirected edges do not create ancestry
        assert ancestors(g3, {"X4"}) == {"X1", "X2", "X3", "X4"}
        assert ancestors(g3, {"X1"}) == {"X1"}

    def test_unknown_var(self):
        with pytest.raises(InvalidInputError):
            ancestors(chain(), {"nope"})

    def test_monotone_and_idempotent(self):
        g = chain()
        small = ancestors(g, {"Z"})
        big = ancestors(g, {"Z", "Y"})
        assert small <= big
        assert ancestors(g, small) == small


class TestMutilate:
    def test_remove_incoming(self):
        g = Admg([Var("W"), Var("X"), Var("Z")], [("W", "X"), ("X", "Z")])
        cut = mutilate(g, remove_incoming={"X"})
        assert cut.directed == frozenset({("X", "Z")})
        assert cut.vars == g.vars

    def test_bidirected_is_incoming(self):
        g = Admg([Var("X"), Var("Z")], [("X", "Z")], [("X", "Z")])
        cut = mutilate(g, remove_incoming={"X"})
        assert cut.directed == frozenset({("X", "Z")})
        assert not cut.bidirected

    def test_identity(self):
        g = chain()
        assert mutilate(g) == g

    def test_idempotent(self):
        g = Admg([Var("A"), Var("B"), Var("C")],
                 [("A", "B"), ("B", "C")], [("A", "C")])
        once = mutilate(g, remove_incoming={"B"}, remove_outgoing={"C"})
        assert mutilate(once, remove_incoming={"B"}, remove_outgoing={"C"}) == once


class TestDSeparation:
    def test_edgeless(self):
        g = Admg([Var("A"), Var("B"), Var("C")])
        assert d_separated(g, {"A"}, {"B"}, set())

    def test_blocked_chain(self):
        assert d_separated(chain(), {"X"}, {"Y"}, {"Z"})
        assert not d_separated(chain(), {"X"}, {"Y"}, set())

    def test_conditioned_collider_opens(self):
        g = Admg([Var("X"), Var("C"), Var("Y")], [("X", "C"), ("Y", "C")])
        assert not d_separated(g, {"X"}, {"Y"}, {"C"})
        assert d_separated(g, {"X"}, {"Y"}, set())

    def test_bidirected_acts_as_fork(self):
        g = Admg([Var("A"), Var("B")], [], [("A", "B")])
        assert not d_separated(g, {"A"}, {"B"}, set())

    def test_overlap_rejected(self):
        with pytest.raises(InvalidInputError):
            d_separated(chain(), {"X"}, {"X"}, set())

    def test_symmetry_and_oracle_agreement(self):
        rng = np.random.default_rng(3)
        names = ["A", "B", "C", "D"]
        variables = [Var(n) for n in names]
        pairs = [(a, b) for i, a in enumerate(names) for b in names[i + 1:]]
        for _ in range(150):
            k = rng.integers(0, len(pairs) + 1)
            edges = [pairs[i] for i in rng.choice(len(pairs), size=k, replace=False)]
            nc = rng.integers(0, 3)
            confs = [pairs[i] for i in rng.choice(len(pairs), size=nc, replace=False)]
            g = Admg(variables, edges, confs)
            others = list(names)
            rng.shuffle(others)
            x, y = {others[0]}, {others[1]}
            z = set(others[2:2 + rng.integers(0, 3)])
            got = d_separated(g, x, y, z)
            assert got == d_separated(g, y, x, z)
            assert got == bf_d_separated(g, x, y, z)


class TestCComponents:
    def test_single_bidirected_edge(self):
        g = Admg([Var("W"), Var("X"), Var("Z"), Var("Y")],
                 [("W", "X"), ("X", "Z"), ("W", "Z"), ("Z", "Y")],
                 [("W", "Y")])
        assert set(c_components(g)) == {frozenset({"W", "Y"}),
                                        frozenset({"X"}), frozenset({"Z"})}

    def test_no_bidirected(self):
        assert set(c_components(chain())) == {frozenset({n}) for n in "XZY"}

    def test_path_closure(self):
        g = Admg([Var("a"), Var("b"), Var("c")], [], [("a", "b"), ("b", "c")])
        assert c_components(g) == [frozenset({"a", "b", "c"})]

    def test_partition_property(self):
        rng = np.random.default_rng(4)
        names = [f"V{i}" for i in range(5)]
        pairs = list(itertools.combinations(names, 2))
        for _ in range(50):
            nc = rng.integers(0, 5)
            confs = [pairs[i] for i in rng.choice(len(pairs), size=nc, replace=False)]
            g = Admg([Var(n) for n in names], [], confs)
            comps = c_components(g)
            assert sorted(itertools.chain.from_iterable(comps)) == sorted(names)
            for a, b in itertools.combinations(comps, 2):
                assert not (a & b)


class TestTopologicalOrder:
    def test_chain(self):
        assert topological_order(chain()) == ["X", "Z", "Y"]

    def test_name_tiebreak(self):
        g = Admg([Var("B"), Var("A")])
        assert topological_order(g) == ["A", "B"]

    def test_diamond(self):
        g = Admg([Var("A"), Var("B"), Var("C"), Var("D")],
                 [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")])
        assert topological_order(g) == ["A", "B", "C", "D"]

    def test_cycle_rejected(self):
        with pytest.raises(CyclicGraphError):
            Admg([Var("A"), Var("B")], [("A", "B"), ("B", "A")])


class TestFindHedge:
    def test_no_bidirected_no_hedge(self):
        assert find_hedge(chain(), {"X"}, {"Y"}) is None

    def test_bow(self):
        g = Admg([Var("A"), Var("B")], [("A", "B")], [("A", "B")])
        h = find_hedge(g, {"A"}, {"B"})
        assert h is not None
        assert verify_hedge(g, {"A"}, {"B"}, h)

    def test_fig32_hedge_present(self, fig32_trio):
        _g1, _g2, g3 = fig32_trio
        h = find_hedge(g3, {"X1"}, {"X4"})
        assert h is not None
        assert verify_hedge(g3, {"X1"}, {"X4"}, h)
        assert h.forest_f & {"X1"}
        assert not (h.forest_f_prime & {"X1"})

    def test_requires_nonempty_disjoint(self):
        g = chain()
        with pytest.raises(InvalidInputError):
            find_hedge(g, set(), {"Y"})
        with pytest.raises(InvalidInputError):
            find_hedge(g, {"X"}, {"X"})

    def test_against_brute_force(self):
        rng = np.random.default_rng(9)
        names = ["A", "B", "C", "D"]
        variables = [Var(n) for n in names]
        pairs = [(a, b) for i, a in enumerate(names) for b in names[i + 1:]]
        checked = 0
        for _ in range(120):
            perm = list(rng.permutation(names))
            possible = [(a, b) for a in perm for b in perm
                        if perm.index(a) < perm.index(b)]
            k = rng.integers(0, len(possible) + 1)
            edges = [possible[i] for i in rng.choice(len(possible), size=k, replace=False)]
            nc = rng.integers(0, 3)
            confs = [pairs[i] for i in rng.choice(len(pairs), size=nc, replace=False)]
            g = Admg(variables, edges, confs)
            x, y = rng.choice(names, size=2, replace=False)
            got = find_hedge(g, {x}, {y})
            assert (got is not None) == bf_hedge_exists(g, {x}, {y})
            if got is not None:
                assert verify_hedge(g, {x}, {y}, got)
                checked += 1
        assert checked > 5


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_random_graph_invariants(seed):
    rng = np.random.default_rng(seed)
    names = [f"N{i}" for i in range(5)]
    perm = list(rng.permutation(names))
    edges = [(a, b) for i, a in enumerate(perm) for b in perm[i + 1:]
             if rng.random() < 0.4]
    pairs = list(itertools.combinations(names, 2))
    confs = [pairs[i] for i in rng.choice(len(pairs), size=rng.integers(0, 3),
                                          replace=False)]
    g = Admg([Var(n) for n in names], edges, confs)
    order = topological_order(g)
    assert sorted(order) == sorted(names)
    for a, b in g.directed:
        assert order.index(a) < order.index(b)
    s = set(rng.choice(names, size=2, replace=False))
    anc = ancestors(g, s)
    assert ancestors(g, anc) == anc
    assert s <= anc
    dec = descendants(g, s)
    assert s <= dec
