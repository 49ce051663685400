import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from docalc.errors import InvalidInputError
from docalc.factors import (EPS_NORM, Factor, TransitionMatrix,
                            apply_transition, condition, equal_within,
                            marginalize, multiply, power_apply)
from docalc.graphs import Var

A, B = Var("A"), Var("B")


def joint_ab(table):
    return Factor((A, B), np.asarray(table))


class TestMarginalize:
    def test_uniform(self):
        f = Factor.uniform((A, B))
        m = marginalize(f, {"B"})
        assert np.allclose(m.table, [0.5, 0.5])

    def test_identity(self):
        f = joint_ab([[0.1, 0.2], [0.3, 0.4]])
        assert marginalize(f, set()) is f

    def test_hand_sum(self):
        # brute sum over A of [[0.1,0.2],[0.3,0.4]] -> (0.4, 0.6)
        f = joint_ab([[0.1, 0.2], [0.3, 0.4]])
        m = marginalize(f, {"A"})
        expected = [0.1 + 0.3, 0.2 + 0.4]
        assert np.allclose(m.table, expected)
        assert abs(m.total() - f.total()) < 1e-15

    def test_unknown_var(self):
        with pytest.raises(InvalidInputError):
            marginalize(joint_ab([[0.25] * 2] * 2), {"C"})

    def test_composition(self):
        rng = np.random.default_rng(0)
        scope = (A, B, Var("C"), Var("D"))
        t = rng.dirichlet(np.ones(16)).reshape(2, 2, 2, 2)
        f = Factor(scope, t)
        two_step = marginalize(marginalize(f, {"A"}), {"C"})
        one_step = marginalize(f, {"A", "C"})
        assert equal_within(two_step, one_step, 1e-15)


class TestCondition:
    def test_independent_uniform(self):
        f = Factor.uniform((A, B))
        c = condition(f, {"A"})
        assert np.allclose(c.table, 0.5)

    def test_deterministic_copy(self):
        f = joint_ab([[0.5, 0.0], [0.0, 0.5]])
        c = condition(f, {"A"})
        assert np.allclose(c.table, [[1.0, 0.0], [0.0, 1.0]])

    def test_hand_columns(self):
        f = joint_ab([[0.1, 0.2], [0.3, 0.4]])
        c = condition(f, {"B"})
        assert np.allclose(c.table[:, 0], [0.25, 0.75])
        assert np.allclose(c.table[:, 1], [1 / 3, 2 / 3])

    def test_whole_scope_rejected(self):
        with pytest.raises(InvalidInputError):
            condition(joint_ab([[0.25] * 2] * 2), {"A", "B"})

    def test_zero_context_flags_partial(self):
        f = joint_ab([[0.5, 0.5], [0.0, 0.0]])
        c = condition(f, {"A"})
        assert c.partial
        assert np.allclose(c.table[1], 0.0)


class TestMultiply:
    def test_ones_identity(self):
        f = joint_ab([[0.1, 0.2], [0.3, 0.4]])
        assert equal_within(multiply(f, Factor.ones((A, B))), f, 0.0)

    def test_product_distribution(self):
        pa = Factor((A,), np.array([0.3, 0.7]))
        pb = Factor((B,), np.array([0.6, 0.4]))
        f = multiply(pa, pb)
        assert f.names() == ("A", "B")
        assert np.allclose(f.table, np.outer([0.3, 0.7], [0.6, 0.4]))

    def test_chain_rule_recovers_joint(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            f = joint_ab(rng.dirichlet(np.ones(4)).reshape(2, 2))
            back = multiply(marginalize(f, {"B"}), condition(f, {"A"}))
            assert equal_within(back, f, 1e-12)

    def test_domain_mismatch_rejected(self):
        f = Factor((Var("A", 2),), np.array([0.5, 0.5]))
        g = Factor((Var("A", 3),), np.array([0.2, 0.3, 0.5]))
        with pytest.raises(InvalidInputError):
            multiply(f, g)


class TestEqualWithin:
    def test_reflexive(self):
        f = joint_ab([[0.1, 0.2], [0.3, 0.4]])
        assert equal_within(f, f, 0.0)

    def test_tolerance(self):
        a = Factor((A,), np.array([0.5, 0.5]))
        b = Factor((A,), np.array([0.5 + 1e-12, 0.5 - 1e-12]))
        assert equal_within(a, b, 1e-9)
        c = Factor((A,), np.array([1.0, 0.0]))
        d = Factor((A,), np.array([0.0, 1.0]))
        assert not equal_within(c, d, 1e-9)

    def test_scope_mismatch(self):
        with pytest.raises(InvalidInputError):
            equal_within(Factor((A,), np.array([1.0, 0.0])),
                         Factor((B,), np.array([1.0, 0.0])))


class TestTransition:
    def test_identity(self):
        t = TransitionMatrix((A, B), np.eye(4))
        p = Factor((A, B), np.array([[0.1, 0.2], [0.3, 0.4]]))
        assert equal_within(apply_transition(t, p), p, 0.0)

    def test_point_mass_through_t1(self, traffic):
        _spec, t1, _t2, _ts = traffic
        sv = t1.state_vars
        p = Factor.point_mass(sv, {"tr1": 0, "tr2": 0, "d": 0})
        nxt = apply_transition(t1, p)
        assert np.allclose(nxt.table.reshape(-1),
                           [0.0, 0.4, 0.0, 0.3, 0.0, 0.2, 0.0, 0.1])

    def test_uniform_invariant_under_doubly_stochastic(self):
        m = np.array([[0.5, 0.25, 0.25, 0.0],
                      [0.25, 0.5, 0.0, 0.25],
                      [0.25, 0.0, 0.5, 0.25],
                      [0.0, 0.25, 0.25, 0.5]])
        t = TransitionMatrix((A, B), m)
        p = Factor.uniform((A, B))
        assert equal_within(power_apply(t, p, 7), p, 1e-12)

    def test_power_zero_and_one(self, traffic):
        _spec, t1, _t2, _ts = traffic
        p = Factor.uniform(t1.state_vars)
        assert power_apply(t1, p, 0) is p
        assert equal_within(power_apply(t1, p, 1), apply_transition(t1, p), 0.0)

    def test_steady_state_fixed_point(self, traffic):
        _spec, _t1, _t2, ts = traffic
        p = power_apply(ts, Factor.uniform(ts.state_vars), 200)
        residual = ts.matrix @ p.table.reshape(-1) - p.table.reshape(-1)
        assert np.max(np.abs(residual)) < 1e-9

    def test_row_layout_transposes(self):
        rows = np.array([[0.2, 0.8], [0.7, 0.3]])
        t = TransitionMatrix.from_rows((A,), rows)
        assert np.allclose(t.matrix, rows.T)

    def test_simplex_preserved(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            m = rng.dirichlet(np.ones(4), size=4).T
            t = TransitionMatrix((A, B), m)
            p = Factor((A, B), rng.dirichlet(np.ones(4)).reshape(2, 2))
            q = apply_transition(t, p)
            assert q.table.min() >= 0.0
            assert abs(q.total() - 1.0) <= EPS_NORM


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_multiply_commutative_associative(seed):
    rng = np.random.default_rng(seed)
    c = Var("C")
    fa = Factor((A, B), rng.random((2, 2)))
    fb = Factor((B, c), rng.random((2, 2)))
    fc = Factor((c,), rng.random(2))
    ab = multiply(fa, fb)
    ba = multiply(fb, fa)
    assert equal_within(ab, ba.reorder(ab.names()), 1e-12)
    left = multiply(multiply(fa, fb), fc)
    right = multiply(fa, multiply(fb, fc))
    assert equal_within(left, right.reorder(left.names()), 1e-12)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_chain_rule_identity(seed):
    rng = np.random.default_rng(seed)
    f = Factor((A, B), rng.dirichlet(np.ones(4)).reshape(2, 2))
    back = multiply(marginalize(f, {"B"}), condition(f, {"A"}))
    assert equal_within(back, f, 1e-12)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_distribution_flag_preserved(seed):
    rng = np.random.default_rng(seed)
    f = Factor((A, B), rng.dirichlet(np.ones(4)).reshape(2, 2))
    assert f.is_distribution()
    assert marginalize(f, {"A"}).is_distribution()
    t = TransitionMatrix((A, B), rng.dirichlet(np.ones(4), size=4).T)
    assert apply_transition(t, f).is_distribution()
