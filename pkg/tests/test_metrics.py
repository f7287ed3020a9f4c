import math

import numpy as np
import pytest
from scipy.stats import norm

from gnpvlc.experiments import link_budget
from gnpvlc.metrics import (D_4PAM, ber_4pam, beam_norm, comm_distance, kappa, kappa_for_ber, link_rate, q_function,
                            secrecy_from_rates, secrecy_rate, sum_rate, user_rates)
from gnpvlc.precoder import dbm_to_watts, mrt_precoder

GRAY = {0: (0, 0), 1: (0, 1), 2: (1, 1), 3: (1, 0)}
LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / math.sqrt(5)


def pam4_monte_carlo(k, n, rng):
    """Bit error rate of Gray-coded 4-PAM with nearest-level detection, noise set so Q(k) is a neighbour error."""
    sym = rng.integers(0, 4, n)
    rx = LEVELS[sym] + rng.standard_normal(n) * (D_4PAM / 2) / k
    det = np.clip(np.round((rx * math.sqrt(5) + 3) / 2), 0, 3).astype(int)
    bits = np.array([GRAY[i] for i in range(4)])
    errors = int(np.sum(bits[sym] != bits[det]))
    return errors / (2 * n)


def exact_gray_ber(k):
    return (3 * q_function(k) + 2 * q_function(3 * k) - q_function(5 * k)) / 4


def _rand_instance(rng, users=3, heads=2, n_r=4, n_t=4):
    heff = [rng.uniform(0.0, 1.0, (users, n_r, n_t)) for _ in range(heads)]
    F = []
    for _ in range(heads):
        f = rng.standard_normal((users, n_t))
        F.append(f / np.linalg.norm(f, axis=1, keepdims=True))
    return heff, F


# rates

def test_zero_channel_gives_zero_rate(rng):
    _, F = _rand_instance(rng)
    assert sum_rate([np.zeros((3, 4, 4))] * 2, F, 1e-3, 0.1, 0.5, 1.0) == 0.0


def test_rate_at_the_log_two_point():
    # S = alpha^2 P^2 = 1 and mu_IN = e/(2 pi) so the log argument is exactly 2
    r = link_rate([np.ones((1, 1, 1))], [np.array([[1.0]])], 0, 0, math.e / (2 * math.pi), 0.0, 0.5, 2.0)
    assert r == pytest.approx(0.5, abs=1e-15)


def test_rates_match_direct_formula(rng):
    heff, F = _rand_instance(rng)
    sig, gam, alpha, ptx = 1e-2, 0.03, 0.5, 1.5
    rates = user_rates(heff, F, sig, gam, alpha, ptx)
    for u in range(3):
        S = sum(alpha**2 * ptx**2 * np.sum((H[u] @ f[u]) ** 2) for H, f in zip(heff, F))
        I = sum(alpha**2 * ptx**2 * np.sum((H[u] @ f[v]) ** 2) for H, f in zip(heff, F) for v in range(3) if v != u)
        shot = sum(gam * ptx * math.sqrt(np.sum((H[u] @ np.ones(4)) ** 2) + alpha**2 * np.sum((H[u] @ f.T) ** 2))
                   for H, f in zip(heff, F))
        assert rates[u] == pytest.approx(0.5 * math.log2(1 + math.e / (2 * math.pi) * S / (I + shot + sig)), rel=1e-12)
    assert sum_rate(heff, F, sig, gam, alpha, ptx) == pytest.approx(rates.sum())
    assert np.all(rates >= 0)


def test_pointing_an_interferer_at_the_victim_never_helps(rng):
    for _ in range(50):
        heff, F = _rand_instance(rng)
        before = user_rates(heff, F, 1e-2, 0.05, 0.5, 1.0)[0]
        G = [f.copy() for f in F]
        for i, H in enumerate(heff):
            G[i][1] = mrt_precoder(H[0])
        assert user_rates(heff, G, 1e-2, 0.05, 0.5, 1.0)[0] <= before + 1e-12


# secrecy

def test_secrecy_arithmetic():
    assert secrecy_from_rates(3.0, 1.0) == 2.0
    assert secrecy_from_rates(1.0, 3.0) == 0.0


def test_identical_bob_and_eve_gives_zero(rng):
    H = rng.uniform(0, 1, (4, 4))
    heff = [np.stack([H, H])]
    rb, re, rs = secrecy_rate(heff, [mrt_precoder(H)[None, :]], 1e-3, 0.05, 0.5, 1.0)
    assert rb == re and rs == 0.0


def test_dominant_eve_clamps_to_zero(rng):
    for _ in range(50):
        Hb = rng.uniform(0, 1, (4, 4))
        f = mrt_precoder(Hb)[None, :]  # nonnegative for a positive channel
        assert np.all(f >= 0)
        # entrywise dominance, thermal noise only
        He = Hb + rng.uniform(0, 0.5, (4, 4))
        assert secrecy_rate([np.stack([Hb, He])], [f], 1e-3, 0.0, 0.5, 1.0)[2] == 0.0
        # scaled copy, shot noise included
        He = Hb * rng.uniform(1.0, 3.0)
        assert secrecy_rate([np.stack([Hb, He])], [f], 1e-3, 0.05, 0.5, 1.0)[2] == 0.0


# BER

def test_ber_limits():
    assert ber_4pam(0.0) == pytest.approx(1.0, abs=1e-15)
    assert ber_4pam(40.0) == 0.0
    with pytest.raises(ValueError):
        ber_4pam(-1.0)


def test_ber_bound_dominates_exact_gray_ber():
    for k in np.linspace(0, 8, 81):
        assert ber_4pam(k) >= exact_gray_ber(k) - 1e-15
    assert ber_4pam(6.0) == pytest.approx(exact_gray_ber(6.0), rel=1e-6)


def test_ber_bound_against_monte_carlo(rng):
    n = 400_000
    for k in (0.5, 1.0, 2.0, 3.0):
        mc = pam4_monte_carlo(k, n, rng)
        sigma = math.sqrt(mc * (1 - mc) / (2 * n))
        assert ber_4pam(k) >= mc - 3 * sigma
        assert abs(mc - exact_gray_ber(k)) <= 4 * sigma


def test_q_function_matches_normal_tail():
    for x in (-1.0, 0.0, 0.7, 3.3):
        assert q_function(x) == pytest.approx(norm.sf(x), rel=1e-12)


def test_kappa_for_ber_inverts_the_bound():
    for target in (1e-1, 1e-3, 1e-6):
        assert ber_4pam(kappa_for_ber(target)) == pytest.approx(target, rel=1e-9)
    assert kappa_for_ber(1e-6) > kappa_for_ber(1e-3)
    with pytest.raises(ValueError):
        kappa_for_ber(1.5)


# kappa and distance

def test_kappa_vanishes_when_the_beam_cancels():
    gp = np.array([1.0, 1.0, 2.0, 2.0])
    f = np.array([1.0, -1.0, 0.5, -0.5]) / math.sqrt(2.5)
    assert beam_norm(gp, f, 4) == 0.0
    assert kappa(1e-6, 1.0, 1e-7, gp, f, 4) == 0.0


def test_kappa_is_linear_in_power():
    gp, f = np.array([0.4, 0.5, 0.6, 0.7]), np.full(4, 0.5)
    k1 = kappa(1e-6, 1.0, 1e-7, gp, f, 4)
    assert kappa(1e-6, 2.0, 1e-7, gp, f, 4) == pytest.approx(2 * k1, rel=1e-15)


def test_kappa_on_default_scene_matches_rank_one_channel(config, cache):
    lb = link_budget(config, cache)
    ptx = dbm_to_watts(30.0)
    H = lb.h_los * np.ones((lb.n_r, lb.f.size)) * lb.g_p[None, :]
    direct = ptx * D_4PAM / (2 * lb.sigma2) * np.linalg.norm(H @ lb.f)
    assert kappa(lb.h_los, ptx, lb.sigma2, lb.g_p, lb.f, lb.n_r) == pytest.approx(direct, rel=1e-12)


def test_distance_scaling_laws():
    gp, f = np.array([0.4, 0.5, 0.6, 0.7]), np.full(4, 0.5)
    d1 = comm_distance(3.0, 1e-3, 1.0, 1e-7, gp, f, 4)
    assert comm_distance(3.0, 1e-3, 4.0, 1e-7, gp, f, 4) == pytest.approx(2 * d1, rel=1e-14)
    assert comm_distance(6.0, 1e-3, 1.0, 1e-7, gp, f, 4) == pytest.approx(d1 / math.sqrt(2), rel=1e-14)
    # at that distance the far-field gain factor/R^2 reproduces the target kappa
    assert kappa(1e-3 / d1**2, 1.0, 1e-7, gp, f, 4) == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(ValueError):
        comm_distance(0.0, 1e-3, 1.0, 1e-7, gp, f, 4)
