import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sblkit import BernoulliGaussian, GaussianPrior, NumericError, ParameterError, bg_denoise, gaussian_denoise
from oracles import bg_posterior_quadrature

H = 1e-5


class TestBgDenoise:
    def test_full_slab_is_gaussian(self, rng):
        q = rng.standard_normal(20)
        tau = rng.uniform(0.1, 2, 20)
        xh, tp = bg_denoise(q, tau, 1.0, 2.0)
        np.testing.assert_allclose(xh, q * 2 / (2 + tau), rtol=1e-14)
        np.testing.assert_allclose(tp, 2 * tau / (2 + tau), rtol=1e-14)

    def test_noiseless_limit(self):
        xh, _ = bg_denoise(np.array([0.7]), 1e-12, 0.1, 1.0)
        assert xh[0] == pytest.approx(0.7, rel=1e-9)

    def test_rho_zero(self):
        xh, tp = bg_denoise(np.array([3.0, -1.0]), 0.5, 0.0, 1.0)
        assert not xh.any() and not tp.any()

    def test_against_quadrature(self, rng):
        for _ in range(50):
            q = rng.normal(0, 2)
            tau = rng.uniform(0.05, 3)
            xh, tp = bg_denoise(np.array([q]), tau, 0.3, 2.0)
            mean, var = bg_posterior_quadrature(q, tau, 0.3, 2.0)
            assert xh[0] == pytest.approx(mean, abs=1e-8)
            assert tp[0] == pytest.approx(var, abs=1e-8)

    @pytest.mark.parametrize("rho", [0.05, 0.3, 0.9])
    def test_derivative_matches_finite_difference(self, rng, rho):
        q = rng.normal(0, 2, 200)
        tau = rng.uniform(0.1, 2, 200)
        _, tp = bg_denoise(q, tau, rho, 1.5)
        up, _ = bg_denoise(q + H, tau, rho, 1.5)
        dn, _ = bg_denoise(q - H, tau, rho, 1.5)
        np.testing.assert_allclose(tp / tau, (up - dn) / (2 * H), atol=1e-6)

    def test_stable_for_large_ratio(self):
        tau = 1e-4
        q = np.array([300 * np.sqrt(tau), -300 * np.sqrt(tau), 0.0])
        xh, tp = bg_denoise(q, tau, 0.1, 1.0)
        assert np.all(np.isfinite(xh)) and np.all(np.isfinite(tp))
        assert xh[0] == pytest.approx(q[0] / (1 + tau), rel=1e-12)

    def test_magnitude_below_slab(self, rng):
        q = rng.normal(0, 3, 500)
        tau = rng.uniform(0.01, 2, 500)
        xh, tp = bg_denoise(q, tau, 0.2, 1.0)
        slab, _ = bg_denoise(q, tau, 1.0, 1.0)
        assert np.all(np.abs(xh) <= np.abs(slab))
        assert np.all(tp >= 0)

    def test_posterior_variance_can_exceed_tau(self):
        # the spike/slab mixture is not log-concave, so tau_post <= tau_q fails near the decision boundary
        q = np.linspace(0.5, 6, 500)
        _, tp = bg_denoise(q, 1.0, 0.1, 10.0)
        assert tp.max() > 1.0

    def test_vector_and_scalar_tau_agree(self, rng):
        q = rng.standard_normal(10)
        a = bg_denoise(q, 0.4, 0.2, 1.0)
        b = bg_denoise(q, np.full(10, 0.4), 0.2, 1.0)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_nonfinite(self):
        with pytest.raises(NumericError):
            bg_denoise(np.array([np.inf]), 1.0, 0.1, 1.0)

    @pytest.mark.parametrize("tau,rho,s2", [(0.0, 0.1, 1.0), (1.0, 1.5, 1.0), (1.0, 0.1, 0.0)])
    def test_invalid(self, tau, rho, s2):
        with pytest.raises(ParameterError):
            bg_denoise(np.ones(2), tau, rho, s2)


class TestGaussianDenoise:
    def test_flat_prior(self):
        xh, tp = gaussian_denoise(np.array([1.5, -2.0]), 0.7, 0.0)
        np.testing.assert_array_equal(xh, [1.5, -2.0])
        np.testing.assert_array_equal(tp, [0.7, 0.7])

    def test_half_shrink(self):
        xh, tp = gaussian_denoise(np.array([4.0]), 0.5, np.array([2.0]))
        assert xh[0] == 2.0 and tp[0] == 0.25

    def test_matches_bg_full_slab(self, rng):
        q = rng.standard_normal(100)
        gamma = rng.uniform(0.1, 10, 100)
        tau = rng.uniform(0.1, 2, 100)
        a = gaussian_denoise(q, tau, gamma)
        for j in range(100):
            b = bg_denoise(q[j:j + 1], tau[j], 1.0, 1 / gamma[j])
            assert a[0][j] == pytest.approx(b[0][0], abs=1e-12)
            assert a[1][j] == pytest.approx(b[1][0], abs=1e-12)

    def test_derivative_matches_finite_difference(self, rng):
        q = rng.standard_normal(50)
        gamma = rng.uniform(0.1, 5, 50)
        _, tp = gaussian_denoise(q, 0.8, gamma)
        up, _ = gaussian_denoise(q + H, 0.8, gamma)
        dn, _ = gaussian_denoise(q - H, 0.8, gamma)
        np.testing.assert_allclose(tp / 0.8, (up - dn) / (2 * H), atol=1e-6)

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(-1e3, 1e3),
        st.floats(1e-6, 1e3),
        st.floats(1e-6, 1e6),
    )
    def test_shrinkage_and_variance_bound(self, q, tau, gamma):
        xh, tp = gaussian_denoise(np.array([q]), tau, np.array([gamma]))
        assert abs(xh[0]) <= abs(q)
        assert 0 < tp[0] <= tau

    def test_negative_gamma(self):
        with pytest.raises(ParameterError):
            gaussian_denoise(np.ones(2), 1.0, -np.ones(2))


class TestDenoiserObjects:
    def test_bg_callable(self, rng):
        q = rng.standard_normal(5)
        a = BernoulliGaussian(0.2, 1.0)(q, 0.3)
        b = bg_denoise(q, 0.3, 0.2, 1.0)
        np.testing.assert_array_equal(a[0], b[0])

    def test_gaussian_prior_rejects_zero(self):
        with pytest.raises(ParameterError):
            GaussianPrior(np.zeros(3))

    def test_bg_rejects_bad_prior(self):
        with pytest.raises(ParameterError):
            BernoulliGaussian(-0.1, 1.0)
