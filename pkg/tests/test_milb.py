import math

import numpy as np
import pytest
from scipy import integrate, stats

from spmilb.allocation import optimal_alpha, optimal_lp
from spmilb.linklevel import SystemConfig, db_to_power
from spmilb.milb import (
    LN2,
    EigDensity,
    eig_density,
    gamma_sp,
    log_integral,
    milb_rp,
    milb_sp,
    rho_gamma_sp,
    rho_rp,
    rho_rp_from_variances,
    rho_sp_from_variances,
)
from spmilb.simulator import mc_milb

CASES = [(60, 30), (60, 29), (60, 1), (31, 30)]


@pytest.mark.parametrize("N,L", CASES)
def test_density_moments(N, L):
    d = eig_density(N, L)
    assert abs(d.normalization() - 1) < 1e-8
    assert abs(d.mean() - N) < 1e-6 * N


@pytest.mark.parametrize("N,L", [(8, 3), (60, 30)])
def test_density_second_moment(N, L):
    # E[tr (G^H G)^2] / L = N^2 + N L for complex Gaussian G
    assert eig_density(N, L).integrate(lambda x: x * x)[0] == pytest.approx(N * N + N * L, rel=1e-9)


def test_single_stream_is_gamma():
    d = eig_density(60, 1)
    x = np.linspace(20, 110, 20)
    np.testing.assert_allclose(d(x), stats.gamma(60).pdf(x), rtol=1e-10, atol=1e-300)


def test_density_rejects():
    with pytest.raises(ValueError):
        EigDensity(10, 0)
    with pytest.raises(ValueError):
        EigDensity(10, 11)


def test_density_nonnegative():
    d = eig_density(31, 30)
    x = np.linspace(0, d.upper, 2001)
    assert np.all(d(x) >= -1e-15)


def test_rho_gamma_example():
    rho, gamma = rho_gamma_sp(0.5, 1.0, 40, 30, 1.0)
    assert gamma == pytest.approx(433.683, abs=5e-4)
    assert rho == pytest.approx(0.02306, abs=5e-6)
    assert rho_rp(1.0, 40, 10, 1.0) == pytest.approx(40 / 1281, rel=1e-15)


def test_rho_forms_agree():
    rng = np.random.default_rng(0)
    for _ in range(200):
        L = int(rng.integers(2, 41))
        K = int(rng.integers(L, 4 * L + 1))
        a, P, s2 = rng.uniform(0.01, 0.99), 10 ** rng.uniform(-2, 4), rng.uniform(0.1, 10)
        assert rho_sp_from_variances(a, P, K, L, s2) == pytest.approx(rho_gamma_sp(a, P, K, L, s2)[0], rel=1e-12)
        lp = int(rng.integers(1, L))
        assert rho_rp_from_variances(P, K, lp, s2) == pytest.approx(rho_rp(P, K, lp, s2), rel=1e-12)


def test_gamma_endpoints():
    P, K, L, s2 = 3.0, 40, 30, 2.0
    assert gamma_sp(0.0, P, K, L, s2) == pytest.approx((s2 + K * P) ** 2, rel=1e-15)
    assert gamma_sp(1.0, P, K, L, s2) == pytest.approx(s2**2, rel=1e-15)


def test_rho_rp_rejects_long_pilot():
    with pytest.raises(ValueError):
        rho_rp(100.0, 10, 20, 1.0)


def test_zero_power():
    cfg = SystemConfig(K=40, L=30, N=60, P=0.0, alpha=0.5)
    assert milb_sp(cfg).milb_nats == 0.0
    assert milb_rp(cfg.replace(alpha=None, lp=5)).milb_nats == 0.0


def test_units():
    pt = milb_sp(SystemConfig(K=40, L=30, N=60, P=100.0, alpha=0.3))
    assert pt.milb_bits == pytest.approx(pt.milb_nats / math.log(2), rel=1e-15)
    assert LN2 == math.log(2)
    per = pt.per_channel_use()
    assert per.milb_nats == pytest.approx(pt.milb_nats / 30)
    assert per.rho == pt.rho


def test_needs_enough_antennas():
    with pytest.raises(ValueError):
        milb_sp(SystemConfig(K=40, L=30, N=20, P=1.0, alpha=0.5))
    with pytest.raises(ValueError):
        milb_sp(SystemConfig(K=40, L=30, N=60, P=1.0))


@pytest.mark.parametrize("rho", [1e-3, 0.05, 1.0, 30.0])
@pytest.mark.parametrize("N,L", [(60, 30), (60, 1), (31, 30)])
def test_log_integral_against_adaptive_quad(rho, N, L):
    d = eig_density(N, L)
    ref, err = integrate.quad(lambda x: math.log1p(rho * x) * float(d(x)), 0, np.inf, epsabs=0, epsrel=1e-11, limit=400)
    assert log_integral(rho, N, L) == pytest.approx(ref, rel=1e-8)


def test_quadrature_converged():
    d = eig_density(60, 30)
    fn = lambda x: np.log1p(0.02 * x)
    value, order = d.integrate(fn)
    x, w = d.nodes(2 * order)
    assert abs(np.dot(w, fn(x)) - value) <= 1e-8 * value


def test_monotone_in_power():
    K, L, N = 40, 30, 60
    prev_sp = prev_rp = -1.0
    for p_db in range(0, 41, 4):
        P = db_to_power(p_db)
        sp = milb_sp(SystemConfig(K, L, N, P, alpha=optimal_alpha(P, K, L, 1.0).alpha)).milb_nats
        rp = optimal_lp(P, K, L, N, 1.0).milb.milb_nats
        assert sp >= prev_sp and rp >= prev_rp
        prev_sp, prev_rp = sp, rp


@pytest.mark.slow
@pytest.mark.parametrize("scheme", ["sp", "rp"])
def test_monte_carlo_agreement(scheme):
    cfg = SystemConfig(K=40, L=30, N=60, P=10.0, **({"alpha": 0.4} if scheme == "sp" else {"lp": 12}))
    closed = milb_sp(cfg) if scheme == "sp" else milb_rp(cfg)
    mc = mc_milb(cfg, 2000, seed=3)
    assert abs(mc.mean - closed.milb_nats) <= max(0.01 * closed.milb_nats, 3 * mc.stderr)


@pytest.mark.slow
def test_rp_full_linklevel_is_gaussian_equivalent():
    # the pilot-phase observation is Gaussian, so the estimate is exactly a scaled Gaussian matrix
    cfg = SystemConfig(K=40, L=30, N=60, P=100.0, lp=20)
    ge = mc_milb(cfg, 2000, seed=11)
    fl = mc_milb(cfg, 2000, seed=12, mode="full-linklevel")
    assert abs(ge.mean - fl.mean) <= 3 * math.hypot(ge.stderr, fl.stderr)


@pytest.mark.slow
def test_sp_full_linklevel_below_gaussian_equivalent():
    # conditional on the data the received covariance spreads away from a scaled identity,
    # and log det is concave, so the link-level average sits below the Gaussian model
    cfg = SystemConfig(K=40, L=30, N=60, P=100.0, alpha=0.3)
    ge = mc_milb(cfg, 1000, seed=21)
    fl = mc_milb(cfg, 1000, seed=22, mode="full-linklevel")
    assert fl.mean < ge.mean - 3 * math.hypot(ge.stderr, fl.stderr)


def test_mc_rejects():
    cfg = SystemConfig(K=40, L=30, N=60, P=1.0, alpha=0.5)
    with pytest.raises(ValueError):
        mc_milb(cfg, 10, seed=0)
    with pytest.raises(ValueError):
        mc_milb(cfg, 100, seed=0, mode="bogus")
