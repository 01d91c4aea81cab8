"""Monte Carlo ground truth: path simulation and escape-probability estimation.

Paths follow the Euler scheme X <- X + b(X) dt + sigma(X) sqrt(dt) N + eps J,
where J is an increment of the unit jump motion: an exact stable draw for the
full kernel, or (for the truncated kernel, which is not stable) a compound
Poisson sample of jumps above a cutoff plus a Gaussian proxy carrying the
exact second moment of the jumps below it.

Exits are classified by the landing point only, so a jump that overshoots the
boundary still registers on the side where it lands; this is the feature that
distinguishes jump-driven escape from diffusive escape.  For the diffusive
part, a Brownian-bridge crossing test between step endpoints removes the
order-sqrt(dt) boundary bias of pure endpoint checks (it is exact in law for
constant-coefficient diffusion); it can be disabled per configuration.

Estimation is vectorized in lockstep across paths from one seeded stream, so
a run is bit-for-bit reproducible from (problem, config) and independent of
any scheduling.  Censored paths are counted and excluded from the estimate,
never imputed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainValidationError, EstimateUnavailableError
from .problem import EscapeProblem, TARGET_RIGHT
from .stable import FULL_POWER_LAW, sample_stable_increments

OUTCOME_TARGET = "target"
OUTCOME_OTHER = "other"
OUTCOME_CENSORED = "censored"


@dataclass(frozen=True)
class MCConfig:
    """Simulation knobs.

    ``t_max=None`` applies the default horizon of 50 mean transit times,
    (b-a) / max(drift scale, sigma scale, epsilon).  ``small_jump_cutoff``
    splits the truncated-kernel sampler between explicit jumps and the
    Gaussian proxy.
    """

    n_paths: int = 10_000
    dt: float = 1e-3
    t_max: float | None = None
    seed: int = 0
    antithetic: bool = False
    bridge_correction: bool = True
    small_jump_cutoff: float = 1e-3

    def __post_init__(self):
        if self.n_paths < 100:
            raise DomainValidationError("n_paths must be at least 100")
        if not self.dt > 0:
            raise DomainValidationError("dt must be positive")
        if not 0 < self.small_jump_cutoff < 1:
            raise DomainValidationError("small_jump_cutoff must lie in (0, 1)")


@dataclass(frozen=True)
class EstimateWithCI:
    """Escape-probability estimate over the non-censored paths."""

    p_hat: float
    std_err: float
    n_escaped_target: int
    n_escaped_other: int
    n_censored: int
    n_paths: int


def default_t_max(problem: EscapeProblem) -> float:
    """Horizon heuristic: 50 transit times of the fastest transport scale."""
    xs = np.linspace(problem.a, problem.b, 257)
    drift_scale = float(np.max(np.abs(problem.drift(xs))))
    sigma_scale = float(np.max(np.abs(problem.diffusion(xs))))
    scale = max(drift_scale, sigma_scale, problem.epsilon, 1e-12)
    return 50.0 * (problem.b - problem.a) / scale


def _truncated_rate_and_var(alpha: float, kappa: float, cutoff: float) -> tuple[float, float]:
    """(jump rate above the cutoff, second moment below it) for the unit truncated kernel."""
    rate = 2.0 * kappa * (cutoff ** (-alpha) - 1.0) / alpha
    var_rate = 2.0 * kappa * cutoff ** (2.0 - alpha) / (2.0 - alpha)
    return rate, var_rate


def _truncated_increments(
    rng: np.random.Generator,
    size: int,
    alpha: float,
    kappa: float,
    dt: float,
    cutoff: float,
) -> np.ndarray:
    """Increments of the unit truncated-kernel jump motion over one step."""
    rate, var_rate = _truncated_rate_and_var(alpha, kappa, cutoff)
    out = rng.standard_normal(size) * math.sqrt(var_rate * dt)
    counts = rng.poisson(rate * dt, size)
    total = int(counts.sum())
    if total:
        u = rng.random(total)
        # inverse cdf of the normalized density u^-(1+alpha) on (cutoff, 1]
        mags = (cutoff ** (-alpha) - u * (cutoff ** (-alpha) - 1.0)) ** (-1.0 / alpha)
        signs = np.where(rng.random(total) < 0.5, -1.0, 1.0)
        np.add.at(out, np.repeat(np.arange(size), counts), signs * mags)
    return out


def _jump_increments(problem: EscapeProblem, cfg: MCConfig, rng, size: int) -> np.ndarray:
    if problem.epsilon == 0.0:
        return np.zeros(size)
    if problem.measure.kind == FULL_POWER_LAW:
        unit = sample_stable_increments(problem.alpha, cfg.dt, size, rng)
    else:
        unit = _truncated_increments(
            rng, size, problem.alpha, problem.measure.kappa, cfg.dt, cfg.small_jump_cutoff
        )
    return problem.epsilon * unit


def simulate_exit(
    problem: EscapeProblem,
    x0: float,
    cfg: MCConfig,
    rng: np.random.Generator,
) -> tuple[str, float, float]:
    """Run a single path to exit or censoring.

    Returns (outcome, exit_position, exit_time); for a censored path the
    position is the last interior state and the time is the horizon.
    Deterministic for a given generator state.
    """
    if not problem.a < x0 < problem.b:
        raise DomainValidationError("x0 must lie strictly inside (a, b)")
    a, b = problem.a, problem.b
    t_max = cfg.t_max if cfg.t_max is not None else default_t_max(problem)
    dt, sqdt = cfg.dt, math.sqrt(cfg.dt)
    target_right = problem.target == TARGET_RIGHT

    x = float(x0)
    t = 0.0
    while t < t_max:
        sigma = float(problem.diffusion(x))
        y = x + float(problem.drift(x)) * dt + sigma * sqdt * rng.standard_normal()
        x_new = y + float(_jump_increments(problem, cfg, rng, 1)[0])
        t += dt
        if x_new <= a or x_new >= b:
            side_right = x_new >= b
            hit_target = side_right == target_right
            return (OUTCOME_TARGET if hit_target else OUTCOME_OTHER, x_new, t)
        if cfg.bridge_correction and sigma != 0.0:
            denom = sigma * sigma * dt
            q_r = math.exp(-2.0 * max(b - x, 0.0) * max(b - y, 0.0) / denom)
            if rng.random() < q_r:
                return (OUTCOME_TARGET if target_right else OUTCOME_OTHER, b, t - dt / 2.0)
            q_l = math.exp(-2.0 * max(x - a, 0.0) * max(y - a, 0.0) / denom)
            if rng.random() < q_l:
                return (OUTCOME_OTHER if target_right else OUTCOME_TARGET, a, t - dt / 2.0)
        x = x_new
    return (OUTCOME_CENSORED, x, t_max)


def estimate_escape(problem: EscapeProblem, x0: float, cfg: MCConfig) -> EstimateWithCI:
    """Estimate the escape probability from x0 over ``cfg.n_paths`` paths.

    Lockstep-vectorized across paths; the estimate and its standard error are
    computed over the non-censored paths, and an error is raised if every
    path was censored.
    """
    if not problem.a < x0 < problem.b:
        raise DomainValidationError("x0 must lie strictly inside (a, b)")
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_paths
    a, b = problem.a, problem.b
    t_max = cfg.t_max if cfg.t_max is not None else default_t_max(problem)
    dt, sqdt = cfg.dt, math.sqrt(cfg.dt)
    target_right = problem.target == TARGET_RIGHT
    has_sigma = not problem.diffusion.is_zero
    n_half = (n + 1) // 2

    x = np.full(n, float(x0))
    alive = np.ones(n, dtype=bool)
    hit_right = np.zeros(n, dtype=bool)
    hit_left = np.zeros(n, dtype=bool)

    def mirrored(draw_half) -> np.ndarray:
        half = draw_half(n_half)
        return np.concatenate([half, -half])[:n]

    t = 0.0
    while t < t_max and alive.any():
        idx = np.nonzero(alive)[0]
        m = idx.size
        xa = x[idx]

        if has_sigma:
            if cfg.antithetic:
                z = mirrored(rng.standard_normal)[idx]
            else:
                z = rng.standard_normal(m)
            sig = np.asarray(problem.diffusion(xa), dtype=float)
            y = xa + np.asarray(problem.drift(xa), dtype=float) * dt + sig * sqdt * z
        else:
            sig = None
            y = xa + np.asarray(problem.drift(xa), dtype=float) * dt

        if problem.epsilon > 0.0:
            if cfg.antithetic:
                jumps = mirrored(lambda k: _jump_increments(problem, cfg, rng, k))[idx]
            else:
                jumps = _jump_increments(problem, cfg, rng, m)
        else:
            jumps = 0.0
        x_new = y + jumps
        t += dt

        right = x_new >= b
        left = x_new <= a
        out = right | left

        if cfg.bridge_correction and has_sigma:
            ins = ~out
            if ins.any():
                denom = np.maximum(sig[ins] ** 2 * dt, 1e-300)
                gap_r = np.maximum(b - xa[ins], 0.0) * np.maximum(b - y[ins], 0.0)
                gap_l = np.maximum(xa[ins] - a, 0.0) * np.maximum(y[ins] - a, 0.0)
                q_r = np.exp(-2.0 * gap_r / denom)
                q_l = np.exp(-2.0 * gap_l / denom)
                u1 = rng.random(int(ins.sum()))
                u2 = rng.random(int(ins.sum()))
                cross_r = u1 < q_r
                cross_l = (~cross_r) & (u2 < q_l)
                sub = np.nonzero(ins)[0]
                right[sub[cross_r]] = True
                left[sub[cross_l]] = True
                out[sub[cross_r]] = True
                out[sub[cross_l]] = True

        exited = idx[out]
        hit_right[exited[right[out]]] = True
        hit_left[exited[left[out]]] = True
        alive[exited] = False
        x[idx] = x_new

    n_censored = int(alive.sum())
    n_eff = n - n_censored
    if n_eff == 0:
        raise EstimateUnavailableError(
            "all paths censored at the horizon; raise t_max or the noise scales"
        )
    n_right = int(hit_right.sum())
    n_left = int(hit_left.sum())
    n_target = n_right if target_right else n_left
    n_other = n_eff - n_target
    p_hat = n_target / n_eff
    std_err = math.sqrt(p_hat * (1.0 - p_hat) / n_eff)
    return EstimateWithCI(
        p_hat=p_hat,
        std_err=std_err,
        n_escaped_target=n_target,
        n_escaped_other=n_other,
        n_censored=n_censored,
        n_paths=n,
    )
