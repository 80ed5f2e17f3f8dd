import numpy as np
import pytest
import scipy.linalg as spla
from hypothesis import given, settings
from hypothesis import strategies as st

from loewner import benchmarks
from loewner.errors import (
    InsufficientData,
    OutOfRange,
    RankTooLarge,
    SingularStep,
    SingularTransform,
    ZeroLeadingInput,
)
from loewner.hankel_time import (
    MarkovSequence,
    build_hankel,
    discretize_backward_euler,
    hankel_singular_values,
    pole_pencil,
    realize_from_impulse,
    realize_from_io,
    recover_markov,
    reduce_hankel,
    to_continuous_bilinear,
)
from loewner.model_core import (
    DescriptorModel,
    TimeSeries,
    impulse_response,
    pencil_eigenvalues,
    simulate_discrete,
    transfer_siso,
)

from oracles import convolve_io, markov_powers, random_stable

UNIT = np.exp(1j * np.linspace(0.05, np.pi - 0.05, 50))
EX2_MARKOV = 0.5 ** np.arange(25)  # z/(z - 1/2) = sum 0.5^k z^-k


def ex2(z):
    return z / (z - 0.5)


def impulse(N):
    u = np.zeros(N)
    u[0] = 1.0
    return u


def match_poles(got, want, tol):
    got, want = list(np.asarray(got)), list(np.asarray(want))
    assert len(got) == len(want)
    for w in want:
        i = int(np.argmin([abs(g - w) for g in got]))
        assert abs(got[i] - w) < tol * max(1.0, abs(w))
        got.pop(i)


def discrete_system(n, seed):
    A, B, C, D = random_stable(n, seed=seed, discrete=True)
    return A, B, C, D, DescriptorModel(np.eye(n), A, B, C, D, h=1.0)


class TestBuildHankel:
    def test_small(self):
        hp = build_hankel(TimeSeries(1.0, [1, 2, 3, 4], [0, 0, 0, 0]), 0, 2, 2)
        np.testing.assert_array_equal(hp.U0, [[1, 2], [2, 3]])
        np.testing.assert_array_equal(hp.U1, [[2, 3], [3, 4]])

    def test_impulse_pattern(self):
        hp = build_hankel(TimeSeries(1.0, impulse(7), np.zeros(7)), 0, 3, 3)
        expected = np.zeros((3, 3))
        expected[0, 0] = 1
        np.testing.assert_array_equal(hp.U0, expected)

    def test_hankel_structure(self):
        rng = np.random.default_rng(0)
        u, y = rng.standard_normal(20), rng.standard_normal(20)
        hp = build_hankel(TimeSeries(1.0, u, y), 2, 5, 6)
        for a in range(5):
            for b in range(6):
                assert hp.Y0[a, b] == y[2 + a + b]
                assert hp.Y1[a, b] == y[3 + a + b]

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            build_hankel(TimeSeries(1.0, [1, 2, 3, 4], [0, 0, 0, 0]), 1, 2, 2)

    def test_needs_output(self):
        with pytest.raises(InsufficientData):
            build_hankel(TimeSeries(1.0, [1, 2, 3, 4]), 0, 2, 2)


class TestRecoverMarkov:
    def test_impulse_identity(self):
        y = np.array([3.0, -1.0, 2.0, 0.5])
        np.testing.assert_array_equal(recover_markov(impulse(4), y, 3).siso, y)

    def test_example2(self):
        m = DescriptorModel(2.0, 1.0, 1.0, 1.0, 1.0, h=1.0)  # 1/(2z - 1) + 1 = z/(z - 1/2)
        np.testing.assert_allclose(transfer_siso(m, UNIT), ex2(UNIT), rtol=1e-14)
        y = simulate_discrete(m, TimeSeries(1.0, impulse(10))).y[:, 0]
        np.testing.assert_allclose(recover_markov(impulse(10), y, 9).siso, EX2_MARKOV[:10], atol=1e-15)

    def test_scaled_input(self):
        np.testing.assert_allclose(recover_markov([2.0, 0, 0], [2.0, 1.0, 0.5], 2).siso, [1, 0.5, 0.25])

    def test_zero_leading(self):
        with pytest.raises(ZeroLeadingInput):
            recover_markov([0.0, 1.0, 0.0], [0.0, 1.0, 0.5], 2)

    def test_too_short(self):
        with pytest.raises(InsufficientData):
            recover_markov([1.0, 0.0], [1.0, 0.0], 3)

    @staticmethod
    def _run(n, seed, u):
        A, B, C, _ = random_stable(n, seed=seed, discrete=True)
        D = np.array([[0.3]])
        m = DescriptorModel(np.eye(n), A, B, C, D, h=1.0)
        y = simulate_discrete(m, TimeSeries(1.0, u)).y[:, 0]
        K = u.size - 1
        return recover_markov(u, y, K).siso, markov_powers(A, B, C, D, K)[:, 0, 0]

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 10), st.integers(0, 10_000))
    def test_dominant_input_property(self, n, seed):
        u = np.random.default_rng(seed).standard_normal(2 * n + 2)
        u[0] = np.sign(u[0]) * (1.0 + np.sum(np.abs(u[1:])))
        got, want = self._run(n, seed, u)
        assert np.max(np.abs(got - want)) < 1e-9

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 10), st.integers(0, 10_000))
    def test_any_input_backward_stable(self, n, seed):
        # forward substitution error is governed by the Toeplitz condition number of u
        u = np.random.default_rng(seed).standard_normal(2 * n + 2)
        u[0] = np.sign(u[0]) * (0.5 + abs(u[0]))
        A, B, C, _ = random_stable(n, seed=seed, discrete=True)
        want = markov_powers(A, B, C, np.array([[0.3]]), u.size - 1)[:, 0, 0]
        got = recover_markov(u, convolve_io(want, u), u.size - 1).siso
        cond = np.linalg.cond(spla.toeplitz(u, np.zeros_like(u)))
        assert np.max(np.abs(got - want)) <= 10 * np.finfo(float).eps * cond * max(np.max(np.abs(want)), 1.0)

    def test_convolution_oracle(self):
        h = np.array([0.5, 1.0, -0.25, 0.125])
        u = np.array([1.5, -1.0, 2.0, 0.0, 1.0])
        y = convolve_io(h, u)
        np.testing.assert_allclose(recover_markov(u, y, 3).siso, h, atol=1e-14)

    def test_mimo_batch(self):
        A, B, C, D = random_stable(3, 2, 2, seed=11, discrete=True)
        m = DescriptorModel(np.eye(3), A, B, C, D, h=1.0)
        rng = np.random.default_rng(2)
        us = rng.standard_normal((2, 12, 2))
        ys = np.stack([simulate_discrete(m, TimeSeries(1.0, u)).y for u in us])
        h = recover_markov(us, ys, 6).h
        np.testing.assert_allclose(h, markov_powers(A, B, C, D, 6), atol=1e-10)


class TestRealizeFromImpulse:
    def test_example2(self):
        with pytest.warns(RuntimeWarning, match="rank 1"):
            m = realize_from_impulse(EX2_MARKOV[:5], 2)
        assert m.n == 1
        np.testing.assert_allclose(transfer_siso(m, UNIT), ex2(UNIT), atol=1e-12)

    def test_minimal_example2(self):
        m = realize_from_impulse(EX2_MARKOV[:3], 1)
        np.testing.assert_allclose(transfer_siso(m, UNIT), ex2(UNIT), atol=1e-12)

    def test_static(self):
        m = realize_from_impulse([2.5, 0, 0, 0, 0], 0)
        assert m.n == 0 and transfer_siso(m, [0.3 + 0.1j])[0] == 2.5

    def test_poles(self):
        A, B, C, D, _ = discrete_system(4, 21)
        m = realize_from_impulse(markov_powers(A, B, C, D, 8)[:, 0, 0], 4)
        match_poles(pencil_eigenvalues(m.A, m.E), np.linalg.eigvals(A), 1e-8)

    def test_transfer_equivalence_100(self):
        A, B, C, D, g = discrete_system(6, 3)
        m = realize_from_impulse(MarkovSequence(markov_powers(A, B, C, D, 12)), 6)
        z = np.exp(1j * np.linspace(0, 2 * np.pi, 100, endpoint=False) + 0.01j)
        np.testing.assert_allclose(transfer_siso(m, z), transfer_siso(g, z), atol=1e-8 * np.max(abs(transfer_siso(g, z))))

    def test_insufficient(self):
        with pytest.raises(InsufficientData):
            realize_from_impulse(EX2_MARKOV[:4], 2)

    def test_structure(self):
        h = np.array([1.0, 2.0, -1.0, 3.0, 0.5, 4.0, 7.0])
        m = realize_from_impulse(h, 3)
        np.testing.assert_array_equal(m.E, [[2, -1, 3], [-1, 3, 0.5], [3, 0.5, 4]])
        np.testing.assert_array_equal(m.A, [[-1, 3, 0.5], [3, 0.5, 4], [0.5, 4, 7]])
        np.testing.assert_array_equal(m.C, [[2, -1, 3]])
        np.testing.assert_array_equal(m.B, m.C.T)
        assert m.D[0, 0] == 1.0


class TestReduce:
    def test_full_projection(self):
        A, B, C, D, _ = discrete_system(5, 8)
        h = markov_powers(A, B, C, D, 10)[:, 0, 0]
        full, red = realize_from_impulse(h, 5), reduce_hankel(h, 5, 5)
        np.testing.assert_allclose(transfer_siso(red, UNIT), transfer_siso(full, UNIT), atol=1e-9)

    def test_one_pole(self):
        h = np.r_[0.0, 0.8 ** np.arange(10)]
        red = reduce_hankel(h, 5, 1)
        np.testing.assert_allclose(transfer_siso(red, UNIT), 1 / (UNIT - 0.8), rtol=1e-10)

    def test_rank_too_large(self):
        with pytest.raises(RankTooLarge):
            reduce_hankel(EX2_MARKOV[:9], 4, 5)

    def test_input_scaling_invariance(self):
        A, B, C, D, g = discrete_system(4, 9)
        rng = np.random.default_rng(0)
        u = rng.standard_normal(20)
        u[0] = 1.0
        y = simulate_discrete(g, TimeSeries(1.0, u)).y[:, 0]
        s1 = hankel_singular_values(recover_markov(u, y, 19), 6)
        s2 = hankel_singular_values(recover_markov(7 * u, 7 * y, 19), 6)
        np.testing.assert_allclose(s1, s2, atol=1e-10)

    def test_building_bound(self):
        step = benchmarks.BUILDING_STEP
        d = discretize_backward_euler(benchmarks.structural_chain(), step)
        t = benchmarks.building_grid()
        u = benchmarks.building_input(t)
        y = simulate_discrete(d, TimeSeries(step, u)).y[:, 0]
        n = (t.size - 1) // 2
        assert n == 1000
        h = recover_markov(u, y, 2 * n)
        red = reduce_hankel(h, n, 20, step=step)
        hsv = hankel_singular_values(h, n)
        z = np.exp(1j * np.logspace(0, 2, 500) * step)
        Hd = transfer_siso(d, z)
        err = np.max(np.abs(transfer_siso(red, z) - Hd)) / np.max(np.abs(Hd))
        assert err < 100 * hsv[20]


class TestRealizeFromIO:
    def test_impulse_route_agrees(self):
        A, B, C, D, g = discrete_system(3, 4)
        u = impulse(40)
        y = simulate_discrete(g, TimeSeries(1.0, u)).y[:, 0]
        a = realize_from_io(u, y, 3)
        b = realize_from_impulse(recover_markov(u, y, 6), 3)
        np.testing.assert_allclose(transfer_siso(a, UNIT), transfer_siso(b, UNIT), atol=1e-9)

    def test_rich_input_poles(self):
        A, B, C, D, g = discrete_system(3, 6)
        k = np.arange(80)
        u = 1.0 + np.sin(0.3 * k) + 0.5 * np.cos(1.1 * k) + 0.3 * np.sin(2.3 * k + 0.4)
        y = simulate_discrete(g, TimeSeries(1.0, u)).y[:, 0]
        m = realize_from_io(u, y, 3)
        match_poles(pencil_eigenvalues(m.A, m.E), np.linalg.eigvals(A), 1e-7)

    def test_static(self):
        u = np.array([1.0, 2.0, -1.0, 0.5])
        m = realize_from_io(u, 3.0 * u, 0)
        assert m.n == 0 and m.D[0, 0] == pytest.approx(3.0)


class TestPolePencil:
    def test_example2(self):
        u = impulse(30)
        y = np.r_[1.0, 0.5 ** np.arange(29)]
        match_poles(pole_pencil(u, y, 1), [0.5], 1e-10)

    def test_two_poles(self):
        A = np.diag([0.9, -0.3])
        g = DescriptorModel(np.eye(2), A, [[1.0], [1.0]], [[1.0, 2.0]], 0.0, h=1.0)
        rng = np.random.default_rng(5)
        u = rng.standard_normal(60)
        y = simulate_discrete(g, TimeSeries(1.0, u)).y[:, 0]
        match_poles(pole_pencil(u, y, 2), [0.9, -0.3], 1e-8)

    def test_static_empty(self):
        rng = np.random.default_rng(6)
        u = rng.standard_normal(30)
        assert pole_pencil(u, 2.0 * u, 0).size == 0

    @settings(max_examples=10, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 1000))
    def test_subset_property(self, n, seed):
        A, B, C, D, g = discrete_system(n, seed)
        u = np.random.default_rng(seed).standard_normal(20 * n + 40)
        y = simulate_discrete(g, TimeSeries(1.0, u)).y[:, 0]
        match_poles(pole_pencil(u, y, n), np.linalg.eigvals(A), 1e-7)


class TestBackwardEuler:
    def test_scalar_pole(self):
        d = discretize_backward_euler(DescriptorModel(1.0, -1.0, 1.0, 1.0), 0.1)
        assert pencil_eigenvalues(d.A, d.E)[0] == pytest.approx(1 / 1.1, rel=1e-14)

    def test_integrator(self):
        d = discretize_backward_euler(DescriptorModel(1.0, 0.0, 1.0, 1.0), 0.1)
        assert pencil_eigenvalues(d.A, d.E)[0] == 1.0

    @pytest.mark.parametrize("h", [1e-4, 1e-6])
    def test_small_step(self, h):
        A, B, C, D = random_stable(4, seed=2)
        d = discretize_backward_euler(DescriptorModel(np.eye(4), A, B, C, D), h)
        want = np.exp(np.linalg.eigvals(A) * h)
        match_poles(pencil_eigenvalues(d.A, d.E), want, 10 * h * h * np.max(np.abs(np.linalg.eigvals(A))) ** 2)

    def test_transfer_warping(self):
        A, B, C, D = random_stable(3, seed=3)
        c = DescriptorModel(np.eye(3), A, B, C, D)
        h = 0.05
        d = discretize_backward_euler(c, h)
        z = np.exp(1j * np.linspace(0.1, 3, 20))
        np.testing.assert_allclose(transfer_siso(d, z), transfer_siso(c, (z - 1) / (h * z)), rtol=1e-11)

    def test_impulse_matches_recursion(self):
        c = DescriptorModel(1.0, -2.0, 1.0, 1.0)
        h = 0.1
        d = discretize_backward_euler(c, h)
        x, ys = 0.0, []
        u = impulse(6)
        for k in range(6):
            x = (x + h * u[k]) / (1 + 2 * h)
            ys.append(x)
        np.testing.assert_allclose(impulse_response(d, 6)[:, 0, 0], ys, atol=1e-15)

    def test_singular_step(self):
        with pytest.raises(SingularStep):
            discretize_backward_euler(DescriptorModel(1.0, 10.0, 1.0, 1.0), 0.1)

    def test_round_trip(self):
        A, B, C, D = random_stable(6, seed=12)
        c = DescriptorModel(np.eye(6), A, B, C, np.array([[0.4]]))
        back = to_continuous_bilinear(discretize_backward_euler(c, 0.02))
        s = 1j * np.logspace(-2, 2, 50)
        np.testing.assert_allclose(transfer_siso(back, s), transfer_siso(c, s), rtol=1e-10)

    def test_inverse_pole(self):
        back = to_continuous_bilinear(DescriptorModel(1.0, 1 / 1.1, 1.0, 1.0, h=0.1))
        assert pencil_eigenvalues(back.A, back.E)[0] == pytest.approx(-1.0, rel=1e-12)

    def test_identity_static(self):
        m = DescriptorModel(np.zeros((0, 0)), np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), 1.0, h=0.1)
        back = to_continuous_bilinear(m)
        assert back.n == 0 and back.D[0, 0] == 1.0

    def test_singular_transform(self):
        with pytest.raises(SingularTransform):
            to_continuous_bilinear(DescriptorModel(1.0, 0.0, 1.0, 1.0, h=0.1))
