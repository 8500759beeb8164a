import math
import warnings

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from sblkit import (
    MatrixSpec,
    NumericError,
    ParameterError,
    SblConfig,
    gen_signal,
    gaussian_denoise,
    make_problem,
    oracle_mmse,
    sbl_run,
    unitary_transform,
    utamp_run,
)
from sblkit.problem_gen import nmse_db
from sblkit.sbl import (
    GAMMA_MAX,
    LAMBDA_MAX,
    LAMBDA_MIN,
    epsilon_score,
    jensen_gap,
    solve_epsilon_newton,
    update_epsilon_closed,
    update_epsilon_newton,
    update_gamma,
    update_noise_precision,
)
from oracles import argmax_shape


class TestNoisePrecision:
    def test_plug_in(self):
        r = np.array([1.0, 2.0, 2.0])
        assert update_noise_precision(r, np.zeros(3), np.zeros(3)) == pytest.approx(3 / 9)

    def test_variance_term(self):
        r = np.array([1.0, 1.0])
        assert update_noise_precision(r, np.zeros(2), np.array([0.5, 1.5])) == pytest.approx(2 / 4)

    def test_degenerate_clamps_with_warning(self):
        r = np.array([1.0, -1.0])
        with pytest.warns(UserWarning):
            assert update_noise_precision(r, r, np.zeros(2)) == LAMBDA_MAX

    def test_clamped_below(self):
        assert update_noise_precision(np.array([1e8]), np.zeros(1), np.zeros(1)) == LAMBDA_MIN

    def test_clamped_above(self):
        assert update_noise_precision(np.array([1e-8]), np.zeros(1), np.zeros(1)) == LAMBDA_MAX


class TestGammaUpdate:
    def test_zero_signal(self):
        assert update_gamma(np.zeros(1), 1.0, 0.0)[0] == 1.0

    def test_arithmetic(self):
        assert update_gamma(np.ones(1), 1.0, 0.001)[0] == pytest.approx(0.501, rel=1e-14)

    def test_cap(self):
        assert update_gamma(np.zeros(2), 1e-30, 0.5)[0] == GAMMA_MAX

    def test_rate_form_against_symbolic_mean(self):
        g = sympy.symbols("g", positive=True)
        eps, eta, x, tau = sympy.Rational(3, 10), sympy.Rational(1, 2), sympy.Rational(7, 5), sympy.Rational(1, 4)
        # unnormalized belief: Gamma(eps, eta) prior times the expected Gaussian likelihood of x
        dens = g ** (eps - sympy.Rational(1, 2)) * sympy.exp(-g * (eta + (x**2 + tau) / 2))
        mean = sympy.integrate(g * dens, (g, 0, sympy.oo)) / sympy.integrate(dens, (g, 0, sympy.oo))
        got = update_gamma(np.array([1.4]), 0.25, 0.3, eta=0.5)[0]
        assert got == pytest.approx(float(mean), rel=1e-12)


class TestClosedFormShape:
    def test_equal_precisions(self):
        assert update_epsilon_closed(np.full(7, 3.2)) == 0.0

    def test_two_point(self):
        assert update_epsilon_closed(np.array([1.0, math.e**2])) == pytest.approx(0.3293, abs=1e-4)

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=40),
        st.floats(1e-3, 1e3),
    )
    def test_scale_invariant(self, gammas, c):
        g = np.array(gammas)
        assert update_epsilon_closed(c * g) == pytest.approx(update_epsilon_closed(g), abs=1e-6)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(1e-11, 1e11), min_size=1, max_size=60))
    def test_jensen_radicand_nonnegative(self, gammas):
        g = np.array(gammas)
        raw = math.log(float(np.mean(g))) - float(np.mean(np.log(g)))
        assert raw >= -1e-12
        assert jensen_gap(g) >= 0.0


class TestNewtonShape:
    def test_fixed_point(self):
        g = np.random.default_rng(3).gamma(2.0, 1.0, 1000)
        star = solve_epsilon_newton(g, 1.3)
        assert abs(epsilon_score(star, g, 1.3)) < 1e-10
        assert update_epsilon_newton(g, star, 1.3) == pytest.approx(star, rel=1e-12)

    @pytest.mark.parametrize("belief", [0.5, 2.0, 5.0])
    def test_matches_brute_force_maximizer(self, belief):
        g = np.random.default_rng(0).gamma(2.0, 1.0, 10_000)
        eps = belief
        for _ in range(30):
            eps = update_epsilon_newton(g, eps, belief)
        assert eps == pytest.approx(argmax_shape(g, belief), abs=1e-4)

    @pytest.mark.parametrize("eps", [1e-300, 1e100])
    def test_fallback_to_closed_form(self, eps):
        g = np.array([1.0, 1.0001])
        with pytest.warns(UserWarning):
            out = update_epsilon_newton(g, eps, 1.0)
        assert out == pytest.approx(update_epsilon_closed(g))

    def test_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            update_epsilon_newton(np.ones(3), 0.0)


class TestSblConfig:
    def test_defaults(self):
        cfg = SblConfig()
        assert (cfg.max_iter, cfg.tol, cfg.eps_init, cfg.gamma_init, cfg.lambda_init, cfg.tau_x_init) == (
            300, 1e-10, 1e-3, 1.0, 1.0, 1.0)
        assert cfg.eps_update == "closed_form" and cfg.eta == 0.0

    @pytest.mark.parametrize("kwargs", [{"max_iter": 0}, {"tol": -1.0}, {"eps_init": 0.0},
                                        {"eps_update": "other"}, {"eta": 0.5}, {"lambda_init": -1.0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ParameterError):
            SblConfig(**kwargs)


def _first_iteration(tm, cfg):
    """First pass of the loop written out from the initial state."""
    phi, r, lp = tm.phi, tm.r, tm.lambda_p
    n = phi.shape[1]
    tau_p = cfg.tau_x_init * lp
    p = np.zeros(len(r))
    v_h = 1.0 / (1.0 / tau_p + cfg.lambda_init)
    h = v_h * (cfg.lambda_init * r + p / tau_p)
    lam = len(r) / (np.sum((r - h) ** 2) + v_h.sum())
    tau_s = 1.0 / (tau_p + 1.0 / lam)
    s = tau_s * r
    tau_q = n / (lp @ tau_s)
    q = tau_q * (phi.T @ s)
    x = q / (1.0 + tau_q * cfg.gamma_init)
    return x, lam


class TestSblRun:
    def test_initialization(self, small_problem):
        p = small_problem
        tm = unitary_transform(p.A, p.y)
        cfg = SblConfig(max_iter=1)
        res = sbl_run(tm, cfg)
        x, lam = _first_iteration(tm, cfg)
        np.testing.assert_allclose(res.x_hat, x, rtol=1e-13, atol=1e-15)
        assert res.lambda_hat_final == pytest.approx(lam, rel=1e-13)

    def test_identity_noiseless(self):
        x = gen_signal(500, 0.1, 1.0, seed=0)
        tm = unitary_transform(np.eye(500), x.values)
        res = sbl_run(tm, SblConfig(tol=1e-12), truth=x)
        assert res.converged and res.iterations < 50
        assert res.nmse_trajectory[-1] < -100.0

    def test_positivity_checked_every_step(self, iid_problem):
        p = iid_problem
        sbl_run(unitary_transform(p.A, p.y), SblConfig(max_iter=80), check=True)

    def test_trace_and_trajectory_lengths(self, small_problem):
        p = small_problem
        res = sbl_run(unitary_transform(p.A, p.y), SblConfig(max_iter=40, tol=0.0), truth=p.signal)
        assert res.iterations == 40
        assert len(res.nmse_trajectory) == 40
        for key in ("lambda_hat", "eps_hat", "tau_x"):
            assert len(res.trace[key]) == 40

    def test_stops_at_first_small_change(self, iid_problem):
        p = iid_problem
        tm = unitary_transform(p.A, p.y)
        res = sbl_run(tm, SblConfig(tol=1e-8))
        assert res.converged
        # rerun one step short and check that the tolerance was not yet met
        prev = sbl_run(tm, SblConfig(tol=1e-8, max_iter=res.iterations - 1))
        assert not prev.converged

    def test_frozen_noise_matches_utamp_path(self, small_problem):
        p = small_problem
        tm = unitary_transform(p.A, p.y)
        cfg = SblConfig(max_iter=60, tol=0.0, learn_noise=False, lambda_init=p.lambda_true)
        state = {"gamma": np.full(tm.n, cfg.gamma_init), "eps": cfg.eps_init}

        def learned_prior(q, tau_q):
            x, tau_post = gaussian_denoise(q, tau_q, state["gamma"])
            state["gamma"] = update_gamma(x, np.mean(tau_post), state["eps"])
            state["eps"] = update_epsilon_closed(state["gamma"])
            return x, tau_post

        ref = utamp_run(tm, learned_prior, p.lambda_true, max_iter=60, tol=0.0)
        res = sbl_run(tm, cfg)
        np.testing.assert_allclose(res.x_hat, ref.x_hat, rtol=1e-9, atol=1e-12)

    def test_noise_learning(self, iid_problem):
        p = iid_problem
        res = sbl_run(unitary_transform(p.A, p.y))
        assert 0.5 <= res.lambda_hat_final / p.lambda_true <= 2.0

    def test_zero_observation(self):
        tm = unitary_transform(np.eye(4), np.zeros(4))
        with pytest.warns(UserWarning):
            res = sbl_run(tm)
        assert not res.x_hat.any()

    def test_nonfinite_raises(self):
        tm = unitary_transform(np.eye(3), np.array([1e308, 1e308, 1e308]))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(NumericError):
                sbl_run(tm)

    def test_newton_path_runs(self, iid_problem):
        p = iid_problem
        res = sbl_run(unitary_transform(p.A, p.y), SblConfig(eps_update="newton_iteration"), truth=p.x)
        assert np.isfinite(res.nmse_trajectory[-1])
        assert res.eps_hat_final > 0


@pytest.mark.slow
def test_paper_scale_tracks_oracle():
    gaps = []
    for seed in range(50):
        p = make_problem(MatrixSpec("iid_gaussian", 800, 1000), 0.1, 60.0, seed)
        res = sbl_run(unitary_transform(p.A, p.y))
        bound = oracle_mmse(p.A, p.y, p.signal.support, p.lambda_true, 1.0, truth=p.x)
        gaps.append(nmse_db(res.x_hat, p.x) - bound.nmse_db)
    assert np.median(gaps) <= 3.0
