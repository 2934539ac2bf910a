import io

import numpy as np
import pytest
from scipy import integrate, stats

from penskew.distributions import (
    Dataset,
    DirectParams,
    alpha_star,
    canonical_matrix,
    canonical_transform,
    delta_of_alpha,
    prob_divergent_mle,
    prob_negative,
    sample,
    skewness_gamma1,
    sn_logpdf,
    st_logpdf,
)

HALF_NORMAL_GAMMA1 = 0.9952717464311565  # skewness of the |N(0,1)| boundary case


class TestDirectParams:
    def test_scalar_roundtrip(self):
        p = DirectParams.scalar(1.0, 2.0, -3.0)
        assert p.d == 1
        assert p.omega == pytest.approx(2.0)
        assert p.omega_bar[0, 0] == pytest.approx(1.0)

    def test_rejects_non_spd(self):
        with pytest.raises(ValueError):
            DirectParams(xi=[0, 0], omega_mat=[[1, 2], [2, 1]], alpha=[0, 0])

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            DirectParams(xi=[0, 0], omega_mat=[[1, 0.5], [0.2, 1]], alpha=[0, 0])

    def test_rejects_bad_nu(self):
        with pytest.raises(ValueError):
            DirectParams.scalar(0, 1, 0, nu=-1.0)

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            DirectParams(xi=[0, 0], omega_mat=np.eye(2), alpha=[0, 0, 0])


class TestSnLogpdf:
    def test_gaussian_reduction(self):
        p = DirectParams.scalar(0.0, 1.0, 0.0)
        assert sn_logpdf([0.0], p) == pytest.approx(-0.5 * np.log(2 * np.pi), abs=1e-14)

    def test_phi_factor_cancels_at_origin(self):
        for a in (0.5, 2.0, -7.0):
            p = DirectParams.scalar(0.0, 1.0, a)
            assert sn_logpdf([0.0], p) == pytest.approx(-0.5 * np.log(2 * np.pi), abs=1e-14)

    def test_univariate_normalization(self):
        p = DirectParams.scalar(0.3, 1.7, 4.0)
        val, _ = integrate.quad(lambda x: np.exp(sn_logpdf([x], p)), -np.inf, np.inf)
        assert val == pytest.approx(1.0, abs=1e-7)

    def test_bivariate_normalization(self):
        p = DirectParams(xi=[0.0, 0.0], omega_mat=np.eye(2), alpha=[3.0, -1.0])
        val, _ = integrate.dblquad(
            lambda y, x: np.exp(sn_logpdf([x, y], p)), -9, 9, -9, 9,
            epsabs=1e-9, epsrel=1e-9)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_reflection_identity(self, rng):
        xs = rng.normal(size=20)
        p_pos = DirectParams.scalar(0.0, 1.3, 2.5)
        p_neg = DirectParams.scalar(0.0, 1.3, -2.5)
        for x in xs:
            assert sn_logpdf([-x], p_pos) == pytest.approx(sn_logpdf([x], p_neg), abs=1e-13)

    def test_reflection_identity_bivariate(self, rng):
        omega = np.array([[2.0, 0.6], [0.6, 1.0]])
        pa = DirectParams(xi=[0, 0], omega_mat=omega, alpha=[1.5, -2.0])
        pb = DirectParams(xi=[0, 0], omega_mat=omega, alpha=[-1.5, 2.0])
        for x in rng.normal(size=(20, 2)):
            assert sn_logpdf(-x, pa) == pytest.approx(sn_logpdf(x, pb), abs=1e-13)

    def test_rejects_skew_t_params(self):
        with pytest.raises(ValueError):
            sn_logpdf([0.0], DirectParams.scalar(0, 1, 0, nu=3.0))


class TestStLogpdf:
    def test_symmetric_reduction_to_t(self):
        # alpha = 0: the distribution-function factor halves away the 2
        p = DirectParams.scalar(0.0, 1.0, 0.0, nu=3.0)
        expected = np.log(stats.t.pdf(1.3, 3.0))
        assert st_logpdf([1.3], p) == pytest.approx(expected, rel=1e-12)

    def test_normalization(self):
        p = DirectParams.scalar(0.0, 1.0, 2.0, nu=3.0)
        val, _ = integrate.quad(lambda x: np.exp(st_logpdf([x], p)), -np.inf, np.inf,
                                limit=200)
        assert val == pytest.approx(1.0, abs=1e-7)

    def test_skew_normal_limit(self):
        p_t = DirectParams.scalar(0.0, 1.0, 5.0, nu=1e6)
        p_n = DirectParams.scalar(0.0, 1.0, 5.0)
        assert st_logpdf([1.0], p_t) == pytest.approx(sn_logpdf([1.0], p_n), abs=1e-4)

    def test_bivariate_normalization(self):
        p = DirectParams(xi=[0.0, 0.0], omega_mat=np.eye(2), alpha=[2.0, 0.5], nu=5.0)
        val, _ = integrate.dblquad(
            lambda y, x: np.exp(st_logpdf([x, y], p)), -60, 60, -60, 60,
            epsabs=1e-8, epsrel=1e-8)
        assert val == pytest.approx(1.0, abs=1e-5)


class TestSample:
    def test_gaussian_case_moments(self):
        omega = np.array([[2.0, 0.7], [0.7, 1.5]])
        p = DirectParams(xi=[1.0, -2.0], omega_mat=omega, alpha=[0.0, 0.0])
        n = 100_000
        data = sample(p, n, 7)
        mean_se = np.sqrt(np.diag(omega) / n)
        assert np.all(np.abs(data.rows.mean(axis=0) - p.xi) < 3 * mean_se)
        cov = np.cov(data.rows, rowvar=False)
        cov_se = np.sqrt((np.outer(np.diag(omega), np.diag(omega)) + omega**2) / n)
        assert np.all(np.abs(cov - omega) < 3 * cov_se)

    def test_negative_fraction_matches_quadrature(self):
        n = 200_000
        data = sample(DirectParams.scalar(0.0, 1.0, 5.0), n, 11)
        p_neg = prob_negative(5.0)
        se = np.sqrt(p_neg * (1 - p_neg) / n)
        frac = float(np.mean(data.column() < 0))
        assert abs(frac - p_neg) < 3 * se

    def test_skew_t_distribution_function(self):
        params = DirectParams.scalar(0.0, 1.0, 3.0, nu=4.0)
        n = 10_000
        data = sample(params, n, 13)
        # independent CDF oracle: dense-grid quadrature of the density
        grid = np.concatenate([
            np.linspace(-150.0, -10.0, 300),
            np.linspace(-10.0, 20.0, 6001)[1:],
            np.geomspace(20.0, 500.0, 400)[1:],
        ])
        pdf = np.exp(st_logpdf(grid[:, None], params))
        cdf = np.concatenate([[0.0], np.cumsum(np.diff(grid) * 0.5 * (pdf[1:] + pdf[:-1]))])
        cdf /= cdf[-1]
        res = stats.kstest(data.column(), lambda x: np.interp(x, grid, cdf))
        assert res.pvalue > 0.01

    def test_deterministic_given_seed(self):
        p = DirectParams.scalar(0.0, 1.0, 2.0, nu=6.0)
        a = sample(p, 50, 99).rows
        b = sample(p, 50, 99).rows
        assert np.array_equal(a, b)

    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            sample(DirectParams.scalar(0, 1, 0), 0, 1)


class TestScalarSummaries:
    def test_alpha_star_zero(self):
        p = DirectParams(xi=[0, 0], omega_mat=np.eye(2), alpha=[0, 0])
        assert alpha_star(p) == 0.0

    def test_alpha_star_identical_components(self):
        for d in (2, 3, 5):
            p = DirectParams(xi=np.zeros(d), omega_mat=np.eye(d), alpha=np.full(d, 0.8))
            assert alpha_star(p) == pytest.approx(np.sqrt(d) * 0.8, rel=1e-13)

    def test_alpha_star_scalar(self):
        assert alpha_star(DirectParams.scalar(3.0, 2.0, -4.0)) == pytest.approx(4.0)

    def test_delta(self):
        assert delta_of_alpha(0.0) == 0.0
        assert delta_of_alpha(1.0) == pytest.approx(1 / np.sqrt(2))
        assert delta_of_alpha(1e8) == pytest.approx(1.0, abs=1e-15)
        assert delta_of_alpha(-2.0) == -delta_of_alpha(2.0)

    def test_gamma1(self):
        assert skewness_gamma1(0.0) == 0.0
        assert skewness_gamma1(6.256) == pytest.approx(0.899, abs=5e-4)
        assert skewness_gamma1(np.inf) == pytest.approx(0.99527, abs=5e-5)
        assert skewness_gamma1(-np.inf) == pytest.approx(-0.99527, abs=5e-5)
        assert skewness_gamma1(-3.0) == -skewness_gamma1(3.0)
        assert abs(skewness_gamma1(50.0)) < HALF_NORMAL_GAMMA1


class TestProbDivergent:
    def test_reference_values(self):
        assert prob_divergent_mle(25, 5.0) == pytest.approx(0.197, abs=5e-4)
        assert prob_divergent_mle(50, 5.0) == pytest.approx(0.039, abs=5e-4)

    def test_symmetric_shape(self):
        assert prob_divergent_mle(17, 3.0) == pytest.approx(prob_divergent_mle(17, -3.0))

    def test_zero_shape(self):
        for n in (1, 5, 20):
            assert prob_divergent_mle(n, 0.0) == pytest.approx(2.0 * 0.5**n, rel=1e-13)

    def test_decreasing_in_n(self):
        vals = [prob_divergent_mle(n, 4.0) for n in (5, 10, 25, 50, 100)]
        assert np.all(np.diff(vals) < 0)

    @pytest.mark.parametrize("n,alpha", [(10, 2.0), (25, 5.0)])
    def test_matches_brute_force_frequency(self, n, alpha):
        reps = 10_000
        rng = np.random.default_rng(314)
        d = alpha / np.sqrt(1 + alpha * alpha)
        z = d * np.abs(rng.standard_normal((reps, n))) \
            + np.sqrt(1 - d * d) * rng.standard_normal((reps, n))
        same_sign = np.mean(np.all(z > 0, axis=1) | np.all(z < 0, axis=1))
        p = prob_divergent_mle(n, alpha)
        assert abs(same_sign - p) < 3 * np.sqrt(p * (1 - p) / reps)

    def test_prob_negative_sign_convention(self):
        # right-skewed variables put less than half their mass below zero
        assert prob_negative(5.0) == pytest.approx(0.5 - np.arctan(5.0) / np.pi, abs=1e-10)
        assert prob_negative(5.0) < 0.5
        assert prob_negative(-5.0) == pytest.approx(0.5 + np.arctan(5.0) / np.pi, abs=1e-10)
        assert prob_negative(0.0) == pytest.approx(0.5, abs=1e-12)


class TestCanonicalTransform:
    def test_axis_aligned_is_identity_up_to_sign(self):
        p = DirectParams(xi=[0, 0], omega_mat=np.eye(2), alpha=[2.5, 0.0])
        data = Dataset(rows=np.array([[1.0, 2.0], [0.5, -0.25]]))
        out, a_star = canonical_transform(data, p)
        assert a_star == pytest.approx(2.5)
        assert np.allclose(np.abs(out.rows), np.abs(data.rows), atol=1e-12)
        assert np.allclose(out.rows[:, 0], data.rows[:, 0], atol=1e-12)

    def test_identical_components_alpha_star(self):
        a0 = 1.1
        p = DirectParams(xi=np.zeros(3), omega_mat=np.eye(3), alpha=np.full(3, a0))
        data = Dataset(rows=np.zeros((2, 3)) + 0.5)
        _, a_star = canonical_transform(data, p)
        assert a_star == pytest.approx(np.sqrt(3) * a0, rel=1e-13)

    def test_rotation_orthogonal_and_unit_variance_directions(self):
        omega_bar = np.array([[1.0, 0.4, -0.2], [0.4, 1.0, 0.1], [-0.2, 0.1, 1.0]])
        alpha = np.array([1.0, -2.0, 0.5])
        basis = canonical_matrix(omega_bar, alpha)
        p = basis.rotation
        assert np.allclose(p.T @ p, np.eye(3), atol=1e-12)
        m = basis.transform  # columns are the new coordinate directions
        assert np.allclose(m.T @ omega_bar @ m, np.eye(3), atol=1e-12)

    def test_sampling_law_after_transform(self):
        omega_bar = np.array([[1.0, 0.5], [0.5, 1.0]])
        alpha = np.array([2.0, 1.0])
        p = DirectParams(xi=[0.0, 0.0], omega_mat=omega_bar, alpha=alpha)
        n = 100_000
        data = sample(p, n, 21)
        out, a_star = canonical_transform(data, p)
        z2 = out.rows[:, 1]
        assert abs(stats.skew(z2)) < 3 * np.sqrt(6.0 / n)
        assert abs(z2.var() - 1.0) < 3 * np.sqrt(2.0 / n) * 1.5
        z1 = out.rows[:, 0]
        g1_expected = skewness_gamma1(a_star)
        assert abs(stats.skew(z1) - g1_expected) < 4 * np.sqrt(6.0 / n)

    def test_rejects_zero_alpha(self):
        p = DirectParams(xi=[0, 0], omega_mat=np.eye(2), alpha=[0.0, 0.0])
        with pytest.raises(ValueError):
            canonical_transform(Dataset(rows=np.zeros((1, 2)) + 1.0), p)

    def test_scalar_case_identity(self):
        p = DirectParams.scalar(1.0, 2.0, 3.0)
        data = Dataset(rows=np.array([[3.0], [5.0]]))
        out, a_star = canonical_transform(data, p)
        assert a_star == pytest.approx(3.0)
        assert np.allclose(out.rows[:, 0], (data.rows[:, 0] - 1.0) / 2.0)


class TestDatasetCsv:
    def test_roundtrip(self, tmp_path):
        rows = np.array([[1.5, -2.0], [0.25, 3.75]])
        path = tmp_path / "data.csv"
        Dataset(rows=rows).to_csv(path)
        back = Dataset.from_csv(path)
        assert np.array_equal(back.rows, rows)

    def test_header_skipped(self):
        data = Dataset.from_csv(io.StringIO("x,y\n1.0,2.0\n3.0,4.0\n"))
        assert data.n == 2 and data.d == 2

    def test_malformed_row_reports_line(self):
        with pytest.raises(ValueError, match="row 3"):
            Dataset.from_csv(io.StringIO("1.0\n2.0\nbogus\n"))

    def test_ragged_row_rejected(self):
        with pytest.raises(ValueError, match="row 2"):
            Dataset.from_csv(io.StringIO("1.0,2.0\n3.0\n"))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Dataset(rows=np.array([[np.nan]]))
