import dataclasses

import numpy as np
import pytest

import gnpvlc.ao as ao
from gnpvlc.ao import (AoError, AoResult, ao_for_temperature, ao_over_temperatures, design_precoders,
                       exact_sum_slnr, headlight_terms, initial_ratios)
from gnpvlc.model import build_system
from gnpvlc.precoder import dbm_to_watts
from gnpvlc.ratios import is_feasible

PTX = dbm_to_watts(30.0)


@pytest.fixture(scope="module")
def clear_single_user(config):
    cfg = config.replace(scene={"users": [[0.0, 23.0, 0.9]]})
    return build_system(cfg, cfg.plate.transparent_copy())


@pytest.fixture(scope="module")
def default_run(system):
    return ao_for_temperature(system, 6500, PTX)


def test_clear_plate_single_user_settles_quickly(clear_single_user):
    r = ao_for_temperature(clear_single_user, 6500, PTX)
    assert r.converged and r.iterations <= 3
    assert all(r.strict_init)
    # another precoder update at the returned ratios gives the same precoders
    for head, f, p in zip(clear_single_user.headlights, r.precoders, r.ratios):
        again = design_precoders(head, p, clear_single_user, PTX)
        assert np.max(np.abs(again - f)) <= 1e-3


@pytest.mark.xfail(strict=True, reason="per-LED triples drift apart after the first SCA pass, so the precoder moves")
def test_clear_plate_single_user_two_outer_passes(clear_single_user):
    assert ao_for_temperature(clear_single_user, 6500, PTX).iterations <= 2


def test_huge_outer_epsilon_gives_one_pass(system):
    opt = dataclasses.replace(system.config.optimizer, outer_epsilon=float("inf"))
    r = ao_for_temperature(system, 6500, PTX, opt)
    assert r.iterations == 1 and r.converged and len(r.trace) == 1


def test_outer_cap_is_respected(system):
    opt = dataclasses.replace(system.config.optimizer, outer_epsilon=0.0, max_outer=3)
    r = ao_for_temperature(system, 6500, PTX, opt)
    assert r.iterations == 3 and not r.converged


def test_default_trace_is_nondecreasing(default_run):
    values = [row.sum_slnr for row in default_run.trace]
    assert np.all(np.diff(values) >= -1e-9 * abs(values[-1]))
    assert default_run.converged and default_run.iterations <= 20
    for passes in default_run.surrogate_traces:
        for tr in passes:
            assert np.all(np.diff(tr) >= -1e-9 * abs(tr[-1]))


def test_result_is_feasible_and_self_consistent(system, default_run):
    for head, p in zip(system.headlights, default_run.ratios):
        quad = ao.quadrangle_rows(head, 6500, system.config.quadrangles)
        assert is_feasible(p, head.n_t, quad, tol=1e-8)
    for f in default_run.precoders:
        assert np.linalg.norm(f, axis=1) == pytest.approx(np.ones(f.shape[0]), abs=1e-12)
    assert default_run.sum_slnr == pytest.approx(
        exact_sum_slnr(system, default_run.precoders, default_run.ratios, PTX), rel=1e-12)
    total = sum(headlight_terms(h, f, system, PTX).sum_slnr(p)
                for h, f, p in zip(system.headlights, default_run.precoders, default_run.ratios))
    assert default_run.sum_slnr == pytest.approx(total, rel=1e-12)


def test_default_plate_uses_the_relaxed_start(system):
    recs = initial_ratios(system, 6500)
    assert [r.strict for r in recs] == [False, False]


def test_singleton_temperature_set_equals_single_run(system, default_run):
    sweep = ao_over_temperatures(system, PTX, [6500])
    assert sweep.best.kelvin == 6500 and not sweep.skipped
    assert sweep.best.sum_slnr == default_run.sum_slnr
    for a, b in zip(sweep.best.ratios, default_run.ratios):
        assert np.array_equal(a, b)


def test_ties_go_to_the_larger_temperature(system, monkeypatch):
    def flat(system, kelvin, ptx, settings=None):
        return AoResult(kelvin, [], [], 1.0, 1, True)

    monkeypatch.setattr(ao, "ao_for_temperature", flat)
    assert ao_over_temperatures(system, PTX, [3000, 6500, 4000]).best.kelvin == 6500


def test_red_absorbing_plate_prefers_cool_white(system):
    assert ao_over_temperatures(system, PTX).best.kelvin == 6500


def test_unreachable_quadrangles_are_skipped_then_fail(config):
    corner = [[0.05, 0.05], [0.06, 0.05], [0.06, 0.06], [0.05, 0.06]]
    cfg = config.replace(quadrangles={"6500": corner, "4000": corner}, temperatures_k=[4000, 6500])
    s = build_system(cfg)
    with pytest.raises(AoError):
        ao_over_temperatures(s, PTX)
    with pytest.raises(AoError):
        ao_over_temperatures(s, PTX, [])


def test_partial_skip_is_recorded(config):
    quads = dict(config.raw["quadrangles"])
    quads["4000"] = [[0.05, 0.05], [0.06, 0.05], [0.06, 0.06], [0.05, 0.06]]
    cfg = config.replace(quadrangles=quads, temperatures_k=[4000, 6500])
    sweep = ao_over_temperatures(build_system(cfg), PTX)
    assert sweep.best.kelvin == 6500
    assert [s.kelvin for s in sweep.skipped] == [4000]


def test_mrt_and_slnr_precoders_are_unit_rows(system):
    head = system.headlights[1]
    p = initial_ratios(system, 6500)[1].p
    for method in ("mrt", "slnr"):
        F = design_precoders(head, p, system, PTX, method)
        assert F.shape == (3, 4)
        assert np.linalg.norm(F, axis=1) == pytest.approx(np.ones(3), abs=1e-12)
