"""Alternating optimisation of precoders and RGB ratios over colour temperatures."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import rank1_approx
from .colorimetry import ColorimetryError, quadrangle_for, strict_white_matrix, white_point
from .model import HeadlightModel, SystemModel
from .precoder import mrt_precoder, shot_noise_constant, solve_slnr
from .qp import QpError
from .ratios import HeadlightTerms, RatioError, init_ratios_relaxed, init_ratios_strict, is_feasible, sca_loop

log = logging.getLogger(__name__)


class AoError(RuntimeError):
    pass


@dataclass(frozen=True)
class TraceRow:
    kelvin: int
    outer: int
    sum_slnr: float
    inner_iterations: int


@dataclass
class AoResult:
    kelvin: int
    precoders: list  # per headlight, (S, N_t)
    ratios: list  # per headlight, (3 N_t,)
    sum_slnr: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)
    surrogate_traces: list = field(default_factory=list)  # per outer pass, per headlight
    precoder_rejections: int = 0
    strict_init: tuple = ()


@dataclass(frozen=True)
class Skipped:
    kelvin: int
    reason: str


@dataclass
class AoSweep:
    best: AoResult
    results: dict
    skipped: list


def quadrangle_rows(head: HeadlightModel, kelvin: int, quadrangles: dict) -> np.ndarray:
    """Quadrangle rows of every receiver of this headlight, stacked."""
    return np.vstack([quadrangle_for(kelvin, quadrangles, head.colors, u) for u in range(head.colors.n_users)])


def design_precoders(head: HeadlightModel, p, system: SystemModel, ptx: float, method: str = "slnr") -> np.ndarray:
    """One unit-norm precoder per stream for this headlight at ratios `p`.

    SLNR precoders use the precoder-free shot-noise bound of each user's own
    channel as the noise regulariser.
    """
    cfg = system.config
    alpha, noise = cfg.radiometry.alpha, cfg.noise
    Ht = head.effective(p)
    n_s = system.n_streams
    rows = []
    for u in range(n_s):
        if method == "mrt":
            rows.append(mrt_precoder(Ht[u]))
            continue
        lam, _ = rank1_approx(Ht[u])
        sigma2 = shot_noise_constant(lam, head.n_t, n_s, alpha, noise.gamma, ptx) + noise.sigma_th2
        others = [Ht[v] for v in range(Ht.shape[0]) if v != u]
        rows.append(solve_slnr(Ht[u], others, sigma2, alpha, ptx).f)
    return np.array(rows)


def headlight_terms(head: HeadlightModel, precoders, system: SystemModel, ptx: float) -> HeadlightTerms:
    cfg = system.config
    return HeadlightTerms(head.Hbar_design, precoders, cfg.radiometry.alpha, ptx, cfg.noise.gamma, cfg.noise.sigma_th2)


def exact_sum_slnr(system: SystemModel, precoders, ratios, ptx: float) -> float:
    """Sum over headlights and streams of the SLNR with the Jensen shot-noise term."""
    return float(sum(headlight_terms(h, f, system, ptx).sum_slnr(p)
                     for h, f, p in zip(system.headlights, precoders, ratios)))


@dataclass(frozen=True)
class InitRecord:
    p: np.ndarray
    strict: bool
    residual: float


def initial_ratios(system: SystemModel, kelvin: int) -> list:
    """Starting ratios for every headlight at `kelvin`.

    Exact white for all users is tried first. When that only admits p = 0
    the start falls back to the quadrangle-relaxed problem (flagged
    `strict=False`). Raises RatioError when K is unusable either way.
    """
    target = white_point(kelvin, system.config.grid)
    out = []
    for i, head in enumerate(system.headlights):
        quad = quadrangle_rows(head, kelvin, system.config.quadrangles)
        try:
            init = init_ratios_strict(strict_white_matrix(head.colors, target), head.n_t)
            strict = is_feasible(init.p, head.n_t, quad, tol=1e-8)
        except (QpError, RatioError) as exc:
            log.debug("exact white unavailable for headlight %d at %d K: %s", i, kelvin, exc)
            strict = False
        if not strict:
            try:
                init = init_ratios_relaxed(quad, head.n_t)
            except QpError as exc:
                raise RatioError(f"headlight {i}: {kelvin} K quadrangle is empty for these users ({exc})") from exc
        out.append(InitRecord(init.p, strict, init.residual))
    return out


def ao_for_temperature(system: SystemModel, kelvin: int, ptx: float, settings=None) -> AoResult:
    """Alternate SLNR precoder updates and SCA ratio updates at one K.

    A precoder update is kept for a headlight only when it does not lower
    that headlight's exact sum SLNR, so the reported trace never decreases.
    """
    opt = system.config.optimizer if settings is None else settings
    quads = [quadrangle_rows(h, kelvin, system.config.quadrangles) for h in system.headlights]
    inits = initial_ratios(system, kelvin)
    ratios = [r.p for r in inits]
    precoders = [None] * len(system.headlights)
    trace, sur_traces = [], []
    rejections = 0
    objective = -math.inf
    converged = False
    outer = 0
    for outer in range(1, opt.max_outer + 1):
        for i, head in enumerate(system.headlights):
            cand = design_precoders(head, ratios[i], system, ptx)
            if precoders[i] is not None:
                old = headlight_terms(head, precoders[i], system, ptx).sum_slnr(ratios[i])
                new = headlight_terms(head, cand, system, ptx).sum_slnr(ratios[i])
                if new < old:
                    rejections += 1
                    continue
            precoders[i] = cand
        start_total, end_total, inner = 0.0, 0.0, 0
        passes = []
        for i, head in enumerate(system.headlights):
            terms = headlight_terms(head, precoders[i], system, ptx)
            res = sca_loop(terms, ratios[i], quads[i], epsilon=opt.epsilon, max_iter=opt.max_inner,
                           nu_refresh=opt.nu_refresh, shot=opt.shot_surrogate, qp_max_iter=opt.qp_max_iter)
            ratios[i] = res.p
            start_total += res.surrogate_trace[0]
            end_total += res.surrogate_trace[-1]
            inner += res.iterations
            passes.append(res.surrogate_trace)
        sur_traces.append(passes)
        objective = exact_sum_slnr(system, precoders, ratios, ptx)
        trace.append(TraceRow(kelvin, outer, objective, inner))
        log.debug("K=%d outer=%d sum_slnr=%.6g inner=%d", kelvin, outer, objective, inner)
        if abs(end_total - start_total) < opt.outer_epsilon * max(abs(end_total), 1e-300):
            converged = True
            break
    return AoResult(kelvin, precoders, ratios, objective, outer, converged, trace, sur_traces, rejections,
                    tuple(r.strict for r in inits))


def ao_over_temperatures(system: SystemModel, ptx: float, temperatures=None, settings=None) -> AoSweep:
    """Run AO for every K and keep the best; ties go to the larger K."""
    temps = system.config.temperatures if temperatures is None else tuple(temperatures)
    if not temps:
        raise AoError("temperature set is empty")
    results, skipped = {}, []
    for k in sorted(temps):
        try:
            results[k] = ao_for_temperature(system, k, ptx, settings)
        except (RatioError, ColorimetryError) as exc:
            log.info("skipping %d K: %s", k, exc)
            skipped.append(Skipped(k, str(exc)))
    if not results:
        raise AoError("no colour temperature admits a feasible white point")
    best = max(results.values(), key=lambda r: (r.sum_slnr, r.kelvin))
    return AoSweep(best, results, skipped)
