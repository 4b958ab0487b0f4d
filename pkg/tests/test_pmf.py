"""Finite-pmf information measures: worked values and structural identities."""

import math

import numpy as np
import pytest

from contnet.errors import AxisError, GroupOverlapError
from contnet.pmf import (
    Axis,
    JointPmf,
    kl_divergence,
    l1_distance,
    product_pmf,
    scalar_pmf,
    sum_axis,
    tv_sup,
)

LN2 = math.log(2.0)


def binary_axis(name):
    return Axis(name, (0.0, 1.0))


def make(axes, tensor):
    return JointPmf(axes, np.asarray(tensor, dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_pmf(rng, shape, names="abcdefg"):
    axes = [Axis(names[i], tuple(float(k) for k in range(s))) for i, s in enumerate(shape)]
    w = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    return JointPmf(axes, w)


class TestMarginal:
    def test_uniform_2x2_keep_first(self):
        p = make([binary_axis("a"), binary_axis("b")], [[0.25, 0.25], [0.25, 0.25]])
        m = p.marginal("a")
        np.testing.assert_allclose(m.probs, [0.5, 0.5])

    def test_diag_keep_either(self):
        p = make([binary_axis("a"), binary_axis("b")], [[0.5, 0.0], [0.0, 0.5]])
        np.testing.assert_allclose(p.marginal("a").probs, [0.5, 0.5])
        np.testing.assert_allclose(p.marginal("b").probs, [0.5, 0.5])

    def test_three_axis_product_keep_middle(self):
        p = product_pmf(
            scalar_pmf("a", (0.0, 1.0), (0.5, 0.5)),
            scalar_pmf("b", (0.0, 1.0), (0.3, 0.7)),
            scalar_pmf("c", (0.0,), (1.0,)),
        )
        np.testing.assert_allclose(p.marginal("b").probs, [0.3, 0.7])

    def test_marginal_axis_order_follows_request(self):
        p = random_pmf(np.random.default_rng(0), (2, 3))
        m = p.marginal(("b", "a"))
        assert m.names == ("b", "a")
        np.testing.assert_allclose(m.probs, p.probs.T)

    def test_unknown_axis_raises(self):
        p = make([binary_axis("a")], [0.5, 0.5])
        with pytest.raises(AxisError):
            p.marginal("z")


class TestEntropy:
    def test_uniform_four_points(self):
        p = scalar_pmf("a", (0.0, 1.0, 2.0, 3.0), (1, 1, 1, 1))
        assert p.entropy() == pytest.approx(2.0, abs=1e-12)

    def test_point_mass(self):
        p = scalar_pmf("a", (0.0, 1.0), (1.0, 0.0))
        assert p.entropy() == 0.0

    def test_quarter_three_quarters(self):
        # oracle: direct evaluation of -sum q log2 q
        q = np.array([0.25, 0.75])
        oracle = float(-(q * np.log2(q)).sum())
        p = scalar_pmf("a", (0.0, 1.0), q)
        assert p.entropy() == pytest.approx(oracle, abs=1e-15)
        assert p.entropy() == pytest.approx(0.8112781244591328, abs=1e-12)


class TestMutualInformation:
    def test_product_is_zero(self):
        p = product_pmf(
            scalar_pmf("a", (0.0, 1.0), (0.4, 0.6)),
            scalar_pmf("b", (0.0, 1.0), (0.1, 0.9)),
        )
        assert p.mutual_information("a", "b") == pytest.approx(0.0, abs=1e-12)

    def test_deterministic_copy(self):
        p = make([binary_axis("a"), binary_axis("b")], [[0.5, 0.0], [0.0, 0.5]])
        assert p.mutual_information("a", "b") == pytest.approx(1.0, abs=1e-12)

    def test_doubly_symmetric_binary(self):
        p = make([binary_axis("a"), binary_axis("b")], [[0.4, 0.1], [0.1, 0.4]])
        hb = -(0.2 * math.log2(0.2) + 0.8 * math.log2(0.8))
        assert p.mutual_information("a", "b") == pytest.approx(1.0 - hb, abs=1e-12)

    def test_symmetry_and_kl_form(self, rng):
        for _ in range(50):
            p = random_pmf(rng, (3, 4))
            i_ab = p.mutual_information("a", "b")
            i_ba = p.mutual_information("b", "a")
            assert i_ab == pytest.approx(i_ba, abs=1e-12)
            prod = product_pmf(p.marginal("a"), p.marginal("b"))
            assert i_ab == pytest.approx(kl_divergence(p, prod), abs=1e-10)

    def test_overlap_rejected(self):
        p = random_pmf(np.random.default_rng(1), (2, 2))
        with pytest.raises(GroupOverlapError):
            p.mutual_information("a", ("a", "b"))


class TestConditionalMI:
    def test_trivial_conditioner_matches_mi(self, rng):
        for _ in range(20):
            p = random_pmf(rng, (2, 3))
            q = product_pmf(p, scalar_pmf("c", (0.0,), (1.0,)))
            assert q.conditional_mi("a", "b", "c") == pytest.approx(
                p.mutual_information("a", "b"), abs=1e-12
            )

    def test_degenerate_copy_chain(self):
        # X uniform binary, Y = X, U = X: I(X;Y|U) = 0
        t = np.zeros((2, 2, 2))
        t[0, 0, 0] = t[1, 1, 1] = 0.5
        p = make([binary_axis("x"), binary_axis("y"), binary_axis("u")], t)
        assert p.conditional_mi("x", "y", "u") == pytest.approx(0.0, abs=1e-12)

    def test_chain_rule(self, rng):
        for _ in range(100):
            p = random_pmf(rng, (2, 2, 3))
            lhs = p.mutual_information(("a", "b"), "c")
            rhs = p.mutual_information("a", "c") + p.conditional_mi("b", "c", "a")
            assert lhs == pytest.approx(rhs, abs=1e-10)


class TestDivergences:
    def test_kl_identical(self, rng):
        p = random_pmf(rng, (4,))
        assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-14)

    def test_kl_point_vs_uniform(self):
        ax = [Axis("a", (0.0, 1.0))]
        p = JointPmf(ax, np.array([1.0, 0.0]))
        q = JointPmf(ax, np.array([0.5, 0.5]))
        assert kl_divergence(p, q) == pytest.approx(1.0, abs=1e-14)

    def test_kl_support_violation_is_inf(self):
        ax = [Axis("a", (0.0, 1.0))]
        p = JointPmf(ax, np.array([0.5, 0.5]))
        q = JointPmf(ax, np.array([1.0, 0.0]))
        assert kl_divergence(p, q) == math.inf

    def test_l1_examples(self):
        ax = [Axis("a", (0.0, 1.0))]
        p = JointPmf(ax, np.array([1.0, 0.0]))
        q = JointPmf(ax, np.array([0.5, 0.5]))
        r = JointPmf(ax, np.array([0.0, 1.0]))
        assert l1_distance(p, p) == 0.0
        assert l1_distance(p, r) == pytest.approx(2.0)
        assert l1_distance(p, q) == pytest.approx(1.0)
        assert tv_sup(p, q) == pytest.approx(0.5)

    def test_pinsker_on_random_pairs(self, rng):
        # inequality: KL >= L1^2 / (2 ln 2), checked on 1000 seeded pairs
        for _ in range(1000):
            k = int(rng.integers(2, 6))
            ax = [Axis("a", tuple(float(i) for i in range(k)))]
            p = JointPmf(ax, rng.dirichlet(np.ones(k)))
            q = JointPmf(ax, rng.dirichlet(np.ones(k)))
            assert kl_divergence(p, q) >= l1_distance(p, q) ** 2 / (2 * LN2) - 1e-12


class TestPushforward:
    def test_sum_of_independent_uniform(self):
        p = product_pmf(
            scalar_pmf("u", (0.0, 0.5), (0.5, 0.5)),
            scalar_pmf("v", (0.0, 0.5), (0.5, 0.5)),
        )
        out = sum_axis(p.axis("u"), p.axis("v"), "s")
        q = p.pushforward(("u", "v"), lambda a, b: a + b, out)
        np.testing.assert_allclose(q.marginal("s").probs, [0.25, 0.5, 0.25])
        # oracle: enumerate the four outcomes
        # I(S;U) = H(S) - H(S|U); H(S|U=u) = 1 bit each => I = H(S) - 1
        h_s = -(0.25 * math.log2(0.25) * 2 + 0.5 * math.log2(0.5))
        assert q.mutual_information("s", "u") == pytest.approx(h_s - 1.0, abs=1e-12)
        assert q.mutual_information("s", "u") == pytest.approx(0.5, abs=1e-12)

    def test_identity_copy_axis(self, rng):
        p = random_pmf(rng, (3,))
        out = Axis("copy", p.axes[0].points)
        q = p.pushforward("a", lambda v: v, out)
        assert q.mutual_information("a", "copy") == pytest.approx(p.entropy("a"), abs=1e-12)

    def test_constant_map(self, rng):
        p = random_pmf(rng, (3, 2))
        q = p.pushforward("a", lambda v: 0.0, Axis("k", (0.0,)))
        assert q.mutual_information("k", "b") == pytest.approx(0.0, abs=1e-12)

    def test_marginals_preserved(self, rng):
        p = random_pmf(rng, (3, 4))
        out = Axis("s", tuple(sorted({x + y for x in p.axes[0].points for y in p.axes[1].points})))
        q = p.pushforward(("a", "b"), lambda x, y: x + y, out)
        np.testing.assert_allclose(q.marginal(("a", "b")).probs, p.probs, atol=1e-15)

    def test_off_grid_rejected(self, rng):
        from contnet.errors import GridMismatchError

        p = random_pmf(rng, (2,))
        with pytest.raises(GridMismatchError):
            p.pushforward("a", lambda v: v + 0.123, Axis("s", (0.0, 1.0)))

    def test_data_processing(self, rng):
        # I(f(A); B) <= I(A; B) for any deterministic f
        for _ in range(30):
            p = random_pmf(rng, (4, 3))
            out = Axis("f", (0.0, 1.0))
            q = p.pushforward("a", lambda v: float(v >= 2.0), out)
            assert q.mutual_information("f", "b") <= p.mutual_information("a", "b") + 1e-12


class TestInvariants:
    def test_subadditivity(self, rng):
        for _ in range(200):
            p = random_pmf(rng, (3, 3))
            assert p.entropy(("a", "b")) <= p.entropy("a") + p.entropy("b") + 1e-12

    def test_expectation_examples(self):
        p = scalar_pmf("x", (-1.0, 1.0), (0.5, 0.5))
        assert p.expectation(lambda x: np.ones_like(x)) == pytest.approx(1.0)
        assert p.expectation(lambda x: x**2) == pytest.approx(1.0)
        diag = make([binary_axis("x"), binary_axis("y")], [[0.5, 0.0], [0.0, 0.5]])
        assert diag.expectation(lambda x, y: (x - y) ** 2) == pytest.approx(0.0)


class TestSerialization:
    def test_round_trip_bit_exact(self, rng):
        p = random_pmf(rng, (3, 5))
        q = JointPmf.from_json(p.to_json())
        assert q.names == p.names
        assert all(a.points == b.points for a, b in zip(p.axes, q.axes))
        assert np.array_equal(q.probs, p.probs)  # bit-exact

    def test_awkward_floats_survive(self):
        vals = (1 / 3, 2 / 3, 0.1, 1e-300)
        p = JointPmf([Axis("a", (0.0, 1.0, 2.0, 3.0))], np.array([1 / 3, 1 / 3, 1 / 3 - 1e-300, 1e-300]))
        q = JointPmf.from_json(p.to_json())
        assert np.array_equal(q.probs, p.probs)

    def test_validation(self):
        with pytest.raises(ValueError):
            JointPmf([Axis("a", (0.0, 1.0))], np.array([0.6, 0.6]))
        with pytest.raises(AxisError):
            Axis("a", (1.0, 1.0))
        with pytest.raises(AxisError):
            Axis("a", ())
