import numpy as np
import pytest

from qcs.oracles import finite_diff_check
from qcs.priors import GaussianPrior, GMMPrior, gaussian_score, gmm_score


def random_gaussian(rng, n=6):
    q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    w = rng.uniform(0.3, 2.5, n)
    return GaussianPrior(mean=rng.normal(size=n), cov=(q * w) @ q.T)


class TestGaussianPrior:
    def test_standard_normal_beta_zero(self):
        p = GaussianPrior(mean=np.zeros(3), cov=np.eye(3))
        x = np.array([0.5, -1.0, 2.0])
        np.testing.assert_allclose(p.score(x, 0.0), -x)

    def test_heavy_smoothing_kills_score(self):
        p = GaussianPrior(mean=np.zeros(3), cov=np.eye(3))
        x = np.array([1.0, 2.0, 3.0])
        assert np.abs(p.score(x, 1e6)).max() < 1e-10

    def test_matches_finite_difference(self):
        rng = np.random.default_rng(0)
        p = random_gaussian(rng)
        beta = 0.6
        w, q = np.linalg.eigh(p.cov + beta**2 * np.eye(6))

        def logpdf(x):
            d = q.T @ (x - p.mean)
            return float(-0.5 * np.sum(d * d / w) - 0.5 * np.sum(np.log(w)))

        rep = finite_diff_check(logpdf, lambda x: p.score(x, beta), [rng.normal(size=6) for _ in range(8)])
        assert rep.max_rel_error <= 1e-6

    def test_rejects_bad_covariance(self):
        with pytest.raises(ValueError):
            GaussianPrior(mean=np.zeros(2), cov=np.array([[1.0, 0.0], [0.0, -1.0]]))

    def test_posterior_given_linear_is_bayes(self):
        rng = np.random.default_rng(3)
        p = random_gaussian(rng, 4)
        A = rng.standard_normal((7, 4))
        x = p.sample(rng)
        y = A @ x + 0.1 * rng.standard_normal(7)
        mean, cov = p.posterior_given_linear(A, y, 0.1)
        # stationarity: gradient of log posterior at the mean is zero
        g = p.score(mean, 0.0) + A.T @ (y - A @ mean) / 0.01
        assert np.abs(g).max() < 1e-8
        assert np.all(np.linalg.eigvalsh(cov) > 0)


class TestGMMPrior:
    def test_single_component_equals_gaussian(self):
        rng = np.random.default_rng(1)
        mu = rng.normal(size=5)
        gmm = GMMPrior(weights=np.array([1.0]), means=mu[None, :], variances=np.array([0.7]))
        gp = GaussianPrior(mean=mu, cov=0.7 * np.eye(5))
        for beta in (0.0, 0.4, 2.0):
            x = rng.normal(size=5)
            np.testing.assert_allclose(gmm_score(gmm, x, beta), gaussian_score(gp, x, beta), atol=1e-12)

    def test_symmetric_midpoint(self):
        mu = np.array([[1.0, 0.0], [-1.0, 0.0]])
        gmm = GMMPrior(weights=np.array([0.5, 0.5]), means=mu, variances=np.array([0.2, 0.2]))
        # on the symmetry axis the pull along component separation cancels
        x = np.array([0.0, 0.7])
        s = gmm.score(x, 0.1)
        assert s[0] == pytest.approx(0.0, abs=1e-12)
        assert s[1] < 0  # still pulled toward the means' plane

    def test_matches_finite_difference(self):
        rng = np.random.default_rng(2)
        gmm = GMMPrior(
            weights=rng.uniform(0.2, 1.0, 2),
            means=rng.normal(size=(2, 6)),
            variances=rng.uniform(0.2, 0.8, 2),
        )
        beta = 0.5
        rep = finite_diff_check(
            lambda x: gmm.log_density(x, beta),
            lambda x: gmm.score(x, beta),
            [rng.normal(size=6) for _ in range(8)],
        )
        assert rep.max_rel_error <= 1e-6

    def test_weights_normalized_and_sampling(self):
        rng = np.random.default_rng(4)
        gmm = GMMPrior(weights=np.array([2.0, 2.0]), means=np.array([[5.0], [-5.0]]), variances=np.array([0.1, 0.1]))
        assert gmm.weights.sum() == pytest.approx(1.0)
        draws = gmm.sample(rng, size=400)
        assert draws.shape == (400, 1)
        frac = np.mean(draws > 0)
        assert 0.35 < frac < 0.65

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError):
            GMMPrior(weights=np.array([0.0, 1.0]), means=np.zeros((2, 2)), variances=np.ones(2))
        with pytest.raises(ValueError):
            GMMPrior(weights=np.array([1.0]), means=np.zeros((1, 2)), variances=np.zeros(1))
