import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnpvlc.channel import (GeometryError, Radiometry, Scene, azimuth_of, condition_number, effective_channel,
                            lambertian_order, los_gain, nlos_gain, path_loss_matrix, rank1_approx)
from gnpvlc.ratios import precoder_expansion

RAD = Radiometry()
SCENE = Scene()


def test_lambertian_order_values():
    assert lambertian_order(60.0) == pytest.approx(1.0, abs=1e-15)
    assert lambertian_order(20.0) == pytest.approx(11.143, abs=1e-3)
    assert lambertian_order(10.0) > lambertian_order(20.0)
    for bad in (0.0, 90.0, -5.0):
        with pytest.raises(GeometryError):
            lambertian_order(bad)


def test_boresight_gain_closed_form():
    rad = Radiometry(half_power_deg=60.0)
    g = los_gain((0, 0, 0), (0, 1, 0), rad)
    assert g == pytest.approx(1e-4 / math.pi, rel=1e-14)
    # inverse square along boresight, exact
    assert los_gain((0, 0, 0), (0, 2, 0), rad) == pytest.approx(g / 4, rel=1e-14)


def test_grazing_and_behind_give_zero():
    assert los_gain((0, 0, 0), (1, 0, 0), RAD) == 0.0
    assert los_gain((0, 0, 0), (0, -3, 0), RAD) == 0.0
    with pytest.raises(GeometryError):
        los_gain((1, 2, 3), (1, 2, 3), RAD)


def test_los_gain_against_scalar_recomputation():
    tx, rx = np.array([-1.0, 0.0, 1.1]), np.array([0.0, 23.0, 0.9])
    d = rx - tx
    r = math.sqrt(float(d @ d))
    n = -math.log(2) / math.log(math.cos(math.radians(20)))
    want = (n + 1) * 1e-4 / (2 * math.pi * r * r) * (d[1] / r) ** n * (d[1] / r)
    assert los_gain(tx, rx, RAD) == pytest.approx(want, rel=1e-12)


def test_nlos_gain_scales_with_reflectance_and_area():
    tx, rx, refl = (-1.0, 0.0, 1.1), (0.0, 23.0, 0.9), (-0.5, 11.5, 0.0)
    assert nlos_gain(tx, refl, rx, RAD, 0.0) == 0.0
    g1 = nlos_gain(tx, refl, rx, RAD, 0.91)
    g2 = nlos_gain(tx, refl, rx, Radiometry(reflector_area_m2=0.08), 0.91)
    assert g2 == pytest.approx(2 * g1, rel=1e-14)


def test_default_nlos_is_small(config, system):
    for head in system.headlights:
        nl = head.H_true - head.H_design
        assert np.mean(nl) / np.mean(head.H_design) < 1e-2


def test_single_element_matrix_equals_gain():
    s = Scene(headlights=((0.0, 0.0, 1.0),), users=((0.5, 10.0, 0.8),), led_grid=(1, 1), pd_grid=(1, 1))
    pl = path_loss_matrix(s, RAD, 0, 0, rho_bar=0.9)
    assert pl.los.shape == (1, 1)
    assert pl.los[0, 0] == pytest.approx(los_gain((0, 0, 1), (0.5, 10, 0.8), RAD), rel=1e-15)
    refl = s.reflector_position(0, 0)
    assert pl.total[0, 0] == pytest.approx(pl.los[0, 0] + nlos_gain((0, 0, 1), refl, (0.5, 10, 0.8), RAD, 0.9))


def test_mirror_symmetry_permutes_columns():
    s = Scene(headlights=((0.0, 0.0, 1.1),), users=((2.0, 15.0, 0.9), (-2.0, 15.0, 0.9)))
    H = path_loss_matrix(s, RAD, 0, 0, 0.9).total
    Hm = path_loss_matrix(s, RAD, 1, 0, 0.9).total
    # 2x2 arrays, row-major in x: mirroring swaps columns 0<->1 and 2<->3 on both ends
    perm = [1, 0, 3, 2]
    assert Hm == pytest.approx(H[np.ix_(perm, perm)], rel=1e-12)


def test_azimuth_examples():
    s = Scene(users=((-1.0, 20.0, 0.9), (3.0, 19.0, 0.9), (-5.0, 19.0, 0.9)))
    assert azimuth_of(s, 0, 0) == 0.0
    assert azimuth_of(s, 1, 0) == pytest.approx(math.degrees(math.atan(4 / 19)), abs=1e-12)
    assert azimuth_of(s, 1, 0) == pytest.approx(11.89, abs=5e-3)
    assert azimuth_of(s, 2, 0) == pytest.approx(-azimuth_of(s, 1, 0), abs=1e-12)
    behind = Scene(users=((0.0, -3.0, 0.9),))
    with pytest.raises(GeometryError):
        azimuth_of(behind, 0, 0)


def test_per_led_azimuth_shifts_with_offset():
    a = [azimuth_of(SCENE, 2, 0, m) for m in range(4)]
    assert a[0] > a[1]  # left LED sees the right-hand user at a wider angle
    assert a[0] == pytest.approx(a[2])


def test_effective_channel_cases(rng):
    H = rng.random((4, 4))
    G = np.kron(np.eye(4), np.full((1, 3), 1 / 3))
    assert effective_channel(H, G, np.ones(12)) == pytest.approx(H)
    assert not np.any(effective_channel(H, G, np.zeros(12)))
    with pytest.raises(GeometryError):
        effective_channel(H, G, np.ones(9))


def test_effective_channel_identity_with_expansion(rng):
    H = rng.random((4, 4))
    G = np.zeros((4, 12))
    for m in range(4):
        G[m, 3 * m:3 * m + 3] = rng.random(3)
    p, f = rng.random(12), rng.standard_normal(4)
    lhs = effective_channel(H, G, p) @ f
    rhs = H @ G @ precoder_expansion(f) @ p
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 11), st.floats(0.0, 2.0))
def test_effective_channel_monotone_in_ratios(k, bump):
    rng = np.random.default_rng(k)
    H, G, p = rng.random((4, 4)), np.abs(rng.random((4, 12))), rng.random(12)
    q = p.copy()
    q[k] += bump
    assert np.all(effective_channel(H, G, q) >= effective_channel(H, G, p) - 1e-15)
    assert np.all(effective_channel(H, G, p) >= 0)


def test_rank1_of_outer_product():
    a, b = np.array([1.0, 2.0, 2.0]), np.array([-3.0, 4.0])
    lam, q = rank1_approx(np.outer(a, b))
    assert lam == pytest.approx(9 * 25)
    assert q == pytest.approx(-b / 5)  # sign fixed so the first entry is positive
    assert q[0] > 0
    lam, q = rank1_approx(np.eye(2))
    assert lam == pytest.approx(1.0) and np.linalg.norm(q) == pytest.approx(1.0) and q[np.flatnonzero(q)[0]] > 0
    with pytest.raises(GeometryError):
        rank1_approx(np.zeros((2, 2)))


def test_default_channels_are_nearly_rank_one(system):
    for head in system.headlights:
        Ht = head.effective(np.full(12, 1 / 3))
        for u in range(Ht.shape[0]):
            M = Ht[u].T @ Ht[u]
            lam, q = rank1_approx(Ht[u])
            assert np.linalg.norm(M - lam * np.outer(q, q)) / np.linalg.norm(M) < 1e-3


def test_condition_number_default_and_scaling(system):
    Ht = system.headlights[0].effective(np.full(12, 1 / 3))[1]
    c = condition_number(Ht)
    assert c > 1e3
    # at cond ~ 1e11 the smallest singular value is round-off sized, so only exact rescaling is exact
    assert condition_number(8.0 * Ht) == pytest.approx(c, rel=1e-12)
    well = np.array([[2.0, 1.0], [0.5, 3.0]])
    assert condition_number(7.5 * well) == pytest.approx(condition_number(well), rel=1e-12)
    assert condition_number(np.diag([1.0, 0.0])) == math.inf


def test_wide_pd_spacing_decorrelates(config):
    from gnpvlc.metrics import condition_sweep
    from gnpvlc.optics import gain_matrix

    p = np.full(12, 1 / 3)
    gains = lambda az: gain_matrix(config.plate, config.spds, config.responsivity, az)  # noqa: E731
    narrow = condition_sweep(config.scene, config.radiometry, [3.0], gains, p)[0][1]
    wide_scene = Scene(config.scene.headlights, config.scene.users, d_led_m=0.5, d_pd_m=1.0)
    wide = condition_sweep(wide_scene, config.radiometry, [3.0], gains, p)[0][1]
    assert wide < narrow / 100


def test_scene_validation():
    with pytest.raises(GeometryError):
        Scene(users=((0.0, 10.0, -1.0),))
    with pytest.raises(GeometryError):
        Scene(users=((0.0, 10.0, 1.0), (0.0, 10.0, 1.0)))
    with pytest.raises(GeometryError):
        Radiometry(alpha=1.5)
