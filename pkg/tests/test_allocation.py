from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
import sympy as sp

from spmilb.allocation import lp_candidates, optimal_alpha, optimal_lp, quartic_g
from spmilb.linklevel import SystemConfig, db_to_power
from spmilb.milb import gamma_coefficients, milb_sp, rho_gamma_sp


def random_tuples(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        L = int(rng.integers(2, 41))
        yield float(10 ** rng.uniform(-2, 4)), int(rng.integers(L, 4 * L + 1)), L, float(rng.uniform(0.1, 10))


def test_coefficients_example():
    g = quartic_g(1.0, 40, 30, 1.0)
    c4, c3, c2, c1, c0 = g.coefficients
    assert c4 == pytest.approx(-96000 / 41, rel=1e-15)
    assert c3 == pytest.approx(192000 / 41, rel=1e-15)
    assert c2 == pytest.approx(-96000 / 41 + 1680, rel=1e-14)
    assert (c1, c0) == (-3362.0, 1681.0)


def test_endpoints():
    for P, K, L, s2 in random_tuples(100, 0):
        g = quartic_g(P, K, L, s2)
        assert g(0.0) == (s2 + K * P) ** 2
        assert abs(g(1.0) + s2**2) <= 1e-10 * s2**2


def test_factored_matches_expanded():
    g = quartic_g(2.0, 40, 30, 1.0)
    a = np.linspace(0, 1, 101)
    np.testing.assert_allclose(g(a), g.expanded(a), rtol=0, atol=1e-9 * g.scale())


def test_g_symbolic():
    a, P, K, L, s2 = sp.symbols("alpha P K L sigma2", positive=True)
    c3, c2, c1, c0 = gamma_coefficients(P, K, L, s2)
    gamma = c3 * a**3 + c2 * a**2 + c1 * a + c0
    rho = a * (1 - a) * P**2 * K / gamma
    numerator = sp.diff(rho, a) * gamma**2 / (P**2 * K)
    d = s2 + K * P
    c4 = -2 * K**2 * L * P**3 / d
    factored = (1 - a) ** 2 * (d**2 + c4 * a**2) - s2**2 * a**2
    assert sp.simplify(numerator - factored) == 0
    expanded = c4 * a**4 - 2 * c4 * a**3 + (c4 + d**2 - s2**2) * a**2 - 2 * d**2 * a + d**2
    assert sp.expand(factored - expanded) == 0


def test_derivative_identity():
    rng = np.random.default_rng(1)
    h = 1e-6
    for P, K, L, s2 in random_tuples(20, 2):
        g = quartic_g(P, K, L, s2)
        for a in rng.uniform(0.05, 0.95, 10):
            fd = (rho_gamma_sp(a + h, P, K, L, s2)[0] - rho_gamma_sp(a - h, P, K, L, s2)[0]) / (2 * h)
            _, gamma = rho_gamma_sp(a, P, K, L, s2)
            exact = P**2 * K * g(a) / gamma**2
            assert fd == pytest.approx(exact, rel=1e-6, abs=1e-9 * abs(P**2 * K * g.scale() / gamma**2))


def grid_argmax(P, K, L, s2):
    a = np.arange(1, 10_000) * 1e-4
    return a[np.argmax([rho_gamma_sp(x, P, K, L, s2)[0] for x in a])]


@pytest.mark.parametrize("K", [10, 40])
@pytest.mark.parametrize("p_db", [0.0, 20.0])
def test_optimal_alpha_named(K, p_db):
    P = db_to_power(p_db)
    res = optimal_alpha(P, K, 30, 1.0)
    assert abs(res.alpha - grid_argmax(P, K, 30, 1.0)) <= 1e-3
    assert abs(res.residual) <= 1e-8 * res.g.scale()
    assert not res.ambiguous


def test_optimal_alpha_random():
    for P, K, L, s2 in random_tuples(20, 3):
        res = optimal_alpha(P, K, L, s2)
        assert 0 < res.alpha < 1
        assert abs(res.alpha - grid_argmax(P, K, L, s2)) <= 1e-3


def test_optimal_alpha_maximizes_milb():
    cfg = SystemConfig(K=40, L=30, N=60, P=100.0)
    a = optimal_alpha(cfg.P, cfg.K, cfg.L, cfg.sigma2).alpha
    best = milb_sp(cfg.replace(alpha=a)).milb_nats
    for da in (-0.05, -0.01, 0.01, 0.05):
        assert milb_sp(cfg.replace(alpha=a + da)).milb_nats <= best


def test_optimal_alpha_rejects():
    with pytest.raises(ValueError):
        quartic_g(0.0, 40, 30, 1.0)
    with pytest.raises(ValueError):
        optimal_alpha(1.0, 40, 30, 1.0, tol=0)


def test_lp_candidates():
    assert list(lp_candidates(40, 30, 60)) == list(range(1, 30))
    assert list(lp_candidates(10, 30, 60)) == list(range(1, 11))
    assert list(lp_candidates(40, 30, 5)) == list(range(1, 6))


def test_optimal_lp_argmax():
    res = optimal_lp(100.0, 40, 30, 60, 1.0)
    vals = [p.milb_nats for p in res.table]
    assert res.lp == res.table[int(np.argmax(vals))].config.lp
    assert res.milb.milb_nats == max(vals)


def test_optimal_lp_tie_break():
    res = optimal_lp(0.0, 40, 30, 60, 1.0)
    assert res.lp == 1
    assert all(p.milb_nats == 0.0 for p in res.table)


def test_optimal_lp_executor():
    with ThreadPoolExecutor(4) as pool:
        par = optimal_lp(10.0, 40, 30, 60, 1.0, executor=pool)
    seq = optimal_lp(10.0, 40, 30, 60, 1.0)
    assert par.lp == seq.lp and par.milb.milb_nats == seq.milb.milb_nats


def test_optimal_lp_no_candidates():
    with pytest.raises(ValueError):
        optimal_lp(1.0, 40, 1, 60, 1.0)
