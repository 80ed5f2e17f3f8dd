import numpy as np
import pytest
import scipy.linalg as spla
from hypothesis import given, settings
from hypothesis import strategies as st

from loewner.errors import CoincidentPoints, NotConjugateClosed, RankTooLarge, TooFewPoints
from loewner.loewner_lti import (
    TangentialDataSet,
    build_pencil,
    check_interpolation,
    detect_order,
    extract_polynomial_part,
    loewner_fit,
    partition_data,
    project_reduce,
    realify,
    realify_pencil,
    sylvester_residual,
)
from loewner.model_core import DescriptorModel, pencil_eigenvalues, samples_from_function, transfer_siso

from oracles import (
    EX1_LAMBDA,
    EX1_MU,
    EX1_V,
    EX1_W,
    EX2_LAMBDA,
    EX2_MU,
    example1_function,
    example2_function,
    loewner_loops,
    random_stable,
    tf_inverse,
    tf_polynomial,
)


def siso(fun):
    return lambda s: np.array([[fun(s)]])


def ex1_data():
    return TangentialDataSet.from_function(siso(example1_function), EX1_LAMBDA, EX1_MU)


def ex2_data():
    return TangentialDataSet.from_function(siso(example2_function), EX2_LAMBDA, EX2_MU)


def model_function(A, B, C, D):
    n = A.shape[0]
    return lambda s: tf_inverse(np.eye(n), A, B, C, D, s)


class TestPartition:
    def test_example1_split(self):
        pts = np.arange(1.0, 9.0)
        data = partition_data(samples_from_function(example1_function, pts), right=EX1_LAMBDA)
        np.testing.assert_array_equal(data.lam, EX1_LAMBDA)
        np.testing.assert_array_equal(data.mu, EX1_MU)
        np.testing.assert_allclose(data.W[0], EX1_W, rtol=1e-15)
        np.testing.assert_allclose(data.V[:, 0], EX1_V, rtol=1e-15)

    def test_alternating_default_matches_example1(self):
        data = partition_data(samples_from_function(example1_function, np.arange(1.0, 9.0)))
        np.testing.assert_array_equal(data.lam.real, EX1_LAMBDA)

    def test_two_points(self):
        data = partition_data(samples_from_function(example1_function, [2.0, 1.0]))
        assert data.lam[0] == 1.0 and data.mu[0] == 2.0

    def test_odd_count_extra_right(self):
        data = partition_data(samples_from_function(example1_function, [1.0, 2.0, 3.0]))
        assert data.lam.size == 2 and data.mu.size == 1

    def test_conjugate_pairs_stay_together(self):
        pts = np.array([1j, -1j, 2j, -2j])
        data = partition_data(samples_from_function(lambda s: 1 / (s + 1), pts))
        assert sorted(data.lam.imag) == [-1.0, 1.0]
        assert sorted(data.mu.imag) == [-2.0, 2.0]
        rp = realify_pencil(build_pencil(data))
        assert rp.is_real

    def test_too_few(self):
        with pytest.raises(TooFewPoints):
            partition_data(samples_from_function(example1_function, [1.0]))

    def test_mimo_cyclic_directions(self):
        A, B, C, D = random_stable(3, 2, 2, seed=4)
        data = partition_data(samples_from_function(model_function(A, B, C, D), 1j * np.arange(1, 9)))
        assert data.R.shape == (2, 4) and data.L.shape == (4, 2)


class TestBuildPencil:
    def test_example1_entry(self):
        p = build_pencil(ex1_data())
        assert p.L[0, 0] == pytest.approx(5 / 6, abs=1e-15)
        assert p.Ms[0, 0] == pytest.approx(19 / 6, abs=1e-15)

    def test_against_loops(self):
        L, M = loewner_loops(EX1_LAMBDA, EX1_W, EX1_MU, EX1_V)
        p = build_pencil(ex1_data())
        np.testing.assert_allclose(p.L, L, rtol=1e-14)
        np.testing.assert_allclose(p.Ms, M, rtol=1e-14)

    def test_constant(self):
        p = build_pencil(TangentialDataSet.from_function(lambda s: np.array([[3.0]]), [1.0, 2.0], [3.0, 4.0]))
        np.testing.assert_allclose(p.L, 0, atol=1e-15)
        np.testing.assert_allclose(p.Ms, 3.0)

    def test_identity_function(self):
        lam, mu = np.array([1.0, 2.0]), np.array([3.0, 5.0])
        p = build_pencil(TangentialDataSet.from_function(lambda s: np.array([[s]]), lam, mu))
        np.testing.assert_allclose(p.L, 1.0)
        np.testing.assert_allclose(p.Ms, mu[:, None] + lam[None, :])

    def test_coincident(self):
        with pytest.raises(CoincidentPoints):
            TangentialDataSet.from_function(siso(example1_function), [1.0, 2.0], [2.0, 3.0])


class TestSylvester:
    def test_exact_data(self):
        assert max(sylvester_residual(build_pencil(ex1_data()))) < 1e-12

    def test_perturbation_grows(self):
        p = build_pencil(ex1_data())
        rho0 = sylvester_residual(p)[0]
        from loewner.loewner_lti import LoewnerPencil
        bumped = [sylvester_residual(LoewnerPencil(p.L + d, p.Ms, p.V, p.W, p.data))[0] for d in (1e-6, 1e-4)]
        assert rho0 < bumped[0] < bumped[1]
        assert bumped[1] / bumped[0] == pytest.approx(100, rel=0.05)

    def test_scaling_homogeneous(self):
        d = ex1_data()
        r1 = sylvester_residual(build_pencil(d))
        r2 = sylvester_residual(build_pencil(d.scaled(10.0)))
        assert max(r1) < 1e-12 and max(r2) < 1e-12

    def test_realified(self):
        assert max(sylvester_residual(build_pencil(realify(ex2_data())))) < 1e-12


class TestDetectOrder:
    def test_example1(self):
        rep = detect_order(build_pencil(ex1_data()))
        assert (rep.r, rep.nu) == (3, 2)
        assert rep.sv_row[0] == pytest.approx(1.0, abs=1e-12)
        assert rep.sv_row[1] == pytest.approx(5.59e-2, abs=5e-5)
        assert rep.sv_row[2] == pytest.approx(6.8804e-4, abs=5e-9)
        assert rep.sv_row[3] < 1e-12
        assert rep.rank_violations == []

    def test_example2(self):
        rep = detect_order(build_pencil(realify(ex2_data())))
        assert (rep.r, rep.nu) == (2, 1)

    def test_constant(self):
        d = TangentialDataSet.from_function(lambda s: np.array([[2.0]]), [1.0, 3.0], [2.0, 4.0])
        rep = detect_order(build_pencil(d))
        assert (rep.r, rep.nu) == (1, 0)

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            detect_order(build_pencil(ex1_data()), tol=2.0)

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_generic_order(self, n):
        A, B, C, D = random_stable(n, seed=10 + n)
        pts = 1j * np.logspace(-1, 1, n + 1)
        samples = samples_from_function(model_function(A, B, C, D), np.concatenate([pts, -pts]))
        rep = detect_order(build_pencil(realify(partition_data(samples))))
        assert rep.nu == n

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.1, 100.0), st.booleans())
    def test_scaling_invariance(self, c, neg):
        c = -c if neg else c
        d = ex1_data()
        p1, p2 = build_pencil(d), build_pencil(d.scaled(c))
        np.testing.assert_allclose(p2.L, c * p1.L, rtol=1e-12, atol=1e-14 * abs(c))
        np.testing.assert_allclose(p2.Ms, c * p1.Ms, rtol=1e-12)
        r1, r2 = detect_order(p1), detect_order(p2)
        assert (r1.r, r1.nu) == (r2.r, r2.nu)


class TestProjectReduce:
    def test_example1(self):
        p = build_pencil(ex1_data())
        m = project_reduce(p, 3)
        rng = np.random.default_rng(0)
        z = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        z = z[np.abs(z + 1) > 1e-2]
        np.testing.assert_allclose(transfer_siso(m, z), example1_function(z), rtol=1e-8)
        ev = pencil_eigenvalues(m.A, m.E)
        assert np.sum(np.isinf(ev)) == 2
        assert ev[np.isfinite(ev)][0] == pytest.approx(-1.0, abs=1e-8)

    def test_full_rank_raw_interpolant(self):
        A, B, C, D = random_stable(4, seed=5)
        d = TangentialDataSet.from_function(model_function(A, B, C, D), [0.5, 1.5, 2.5, 3.5], [1.0, 2.0, 3.0, 4.0])
        p = build_pencil(d)
        raw = DescriptorModel(-p.L, -p.Ms, p.V, p.W)
        proj = project_reduce(p, 4)
        pts = 1j * np.linspace(0.1, 5, 9)
        np.testing.assert_allclose(transfer_siso(proj, pts), transfer_siso(raw, pts), rtol=1e-9)

    def test_random_order5(self):
        A, B, C, D = random_stable(5, seed=7)
        w = np.logspace(-1, 1, 12)
        lam = np.concatenate([1j * w[0::2], -1j * w[0::2]])
        mu = np.concatenate([1j * w[1::2], -1j * w[1::2]])
        p = build_pencil(TangentialDataSet.from_function(model_function(A, B, C, D), lam, mu))
        m = project_reduce(p, 5)
        test = 1j * np.sqrt(w[1:] * w[:-1])
        np.testing.assert_allclose(transfer_siso(m, test), tf_polynomial(A, B, C, D, test), rtol=1e-8)

    def test_rank_too_large(self):
        with pytest.raises(RankTooLarge):
            project_reduce(build_pencil(ex1_data()), 5)


class TestRealify:
    def test_example2_structures(self):
        rd = realify(ex2_data())
        blk = spla.block_diag([[0.9950, -0.0998], [0.0998, 0.9950]], [[-0.4161, -0.9093], [0.9093, -0.4161]])
        np.testing.assert_allclose(rd.Lam, blk, atol=5e-5)
        blk_mu = spla.block_diag([[0.5403, -0.8415], [0.8415, 0.5403]], [[-0.9900, -0.1411], [0.1411, -0.9900]])
        np.testing.assert_allclose(rd.Mu, blk_mu, atol=5e-5)
        s2 = np.sqrt(2)
        np.testing.assert_allclose(rd.R[0], [s2, 0, s2, 0], atol=1e-14)
        np.testing.assert_allclose(rd.L[:, 0], [s2, 0, s2, 0], atol=1e-14)
        np.testing.assert_allclose(rd.W[0], [2.7869, 0.2768, 1.0254, 0.3859], atol=5e-5)
        np.testing.assert_allclose(rd.V[:, 0], [1.4544, -0.8384, 0.9439, -0.0445], atol=5e-5)
        assert rd.is_real

    def test_real_points_unchanged(self):
        d = ex1_data()
        rd = realify(d)
        np.testing.assert_allclose(rd.W, d.W)
        np.testing.assert_allclose(rd.Lam, np.diag(d.lam))

    def test_not_closed(self):
        d = TangentialDataSet.from_function(siso(example2_function), [1j, 2j], [3j, 4j])
        with pytest.raises(NotConjugateClosed):
            realify(d)

    @settings(max_examples=15, deadline=None)
    @given(st.lists(st.floats(0.1, 10), min_size=2, max_size=6, unique=True))
    def test_spectrum_preserved(self, freqs):
        freqs = sorted(freqs)
        if np.min(np.diff(freqs)) < 1e-3:
            return
        pts = 1j * np.array(freqs)
        samples = samples_from_function(lambda s: 1 / (s + 2), np.concatenate([pts, -pts]))
        rd = realify(partition_data(samples))
        ev = np.sort_complex(np.linalg.eigvals(rd.Lam))
        np.testing.assert_allclose(ev, np.sort_complex(rd.lam), atol=1e-12)

    def test_realify_commutes_with_build(self):
        A, B, C, D = random_stable(3, seed=8)
        w = np.array([0.3, 1.0, 2.0, 4.0])
        samples = samples_from_function(model_function(A, B, C, D), np.concatenate([1j * w, -1j * w]))
        d = partition_data(samples)
        m_real = project_reduce(build_pencil(realify(d)), 3)
        m_cplx = project_reduce(build_pencil(d), 3)
        pts = 1j * np.linspace(0.2, 5, 11)
        np.testing.assert_allclose(transfer_siso(m_real, pts), transfer_siso(m_cplx, pts), rtol=1e-9)
        assert m_real.field == "real"


class TestPolynomialPart:
    def test_example2(self):
        part = extract_polynomial_part(build_pencil(realify(ex2_data())))
        assert part.D[0, 0] == pytest.approx(1.0, abs=1e-10)
        assert not part.improper
        refit = detect_order(build_pencil(part.corrected))
        assert refit.r == refit.nu == 1

    def test_example2_realization(self):
        fit = loewner_fit(ex2_data(), h=1.0)
        m = fit.model
        # SVD leaves one sign free on each side; pin C negative and E positive
        s_r = -np.sign(m.C[0, 0])
        s_l = np.sign(m.E[0, 0]) * s_r
        got = (s_l * s_r * m.E[0, 0], s_l * s_r * m.A[0, 0], s_l * m.B[0, 0], s_r * m.C[0, 0], m.D[0, 0])
        np.testing.assert_allclose(got, (2.897, 1.448, -0.9632, -1.504, 1.0), atol=6e-4)

    def test_strictly_proper(self):
        d = TangentialDataSet.from_function(siso(lambda s: 1 / (s + 1)), [1.0, 3.0], [2.0, 4.0])
        part = extract_polynomial_part(build_pencil(d))
        assert part.D[0, 0] == 0 and not part.improper

    def test_example1_improper(self):
        part = extract_polynomial_part(build_pencil(ex1_data()))
        assert part.improper
        assert part.infinite_count == 2


class TestCheckInterpolation:
    def test_full_rank(self):
        A, B, C, D = random_stable(4, seed=9)
        d = TangentialDataSet.from_function(model_function(A, B, C, D), 1j * np.array([0.2, 0.9, 2.0, 5.0]),
                                            1j * np.array([0.5, 1.3, 3.0, 7.0]))
        m = project_reduce(build_pencil(d), 4)
        assert check_interpolation(m, d).max_violation < 1e-9

    def test_truncated_reports(self):
        A, B, C, D = random_stable(4, seed=9)
        d = TangentialDataSet.from_function(model_function(A, B, C, D), 1j * np.array([0.2, 0.9, 2.0, 5.0]),
                                            1j * np.array([0.5, 1.3, 3.0, 7.0]))
        rep = check_interpolation(project_reduce(build_pencil(d), 2), d)
        assert rep.max_violation > 1e-6 and not rep.ok(1e-8)

    def test_example1_at_five(self):
        m = project_reduce(build_pencil(ex1_data()), 3)
        assert abs(transfer_siso(m, [5.0])[0] - 31 / 6) < 1e-9


def test_constant_fit_order_zero():
    d = TangentialDataSet.from_function(lambda s: np.array([[2.5]]), [1.0, 3.0, 5.0], [2.0, 4.0, 6.0])
    fit = loewner_fit(d)
    assert fit.model.n == 0 and fit.D[0, 0] == pytest.approx(2.5)
