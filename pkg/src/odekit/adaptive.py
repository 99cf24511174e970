"""Embedded Euler/RK2 adaptive integrator with the elementary step-size law.

Per attempted step, with f1 = f(t, y) and f2 = f(t + h/2, y + (h/2) f1):

* error estimate  e = ||h (f2 - f1)||_inf
* accept when e < tol, advancing with the second-order value y + h f2 and
  resetting h to tol^(1/3)
* otherwise retry with h <- 0.8 h (tol/e)^(1/2)

The final step is clamped so the trajectory lands exactly on t_end.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import CountingRhs, IvpProblem, RunStats, Trajectory, _check_state, _finish
from .errors import DivergenceError, RejectCapError, StepUnderflowError
from .linalg import vec_norm_inf


@dataclass
class AdaptiveConfig:
    """Controller parameters. ``p`` is the local order in the update law."""

    tol: float
    safety: float = 0.8
    p: int = 2
    h_min: float = 1e-12
    max_rejects_per_step: int = 50

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0.0 < self.safety < 1.0:
            raise ValueError("safety must lie in (0, 1)")

    @property
    def h_init(self) -> float:
        return self.tol ** (1.0 / 3.0)


@dataclass
class StepRecord:
    """One attempted step: start time, step size, estimate, verdict."""

    t: float
    h: float
    e: float
    accepted: bool


def step_size_update(h: float, e: float, tol: float, p: int = 2, safety: float = 0.8) -> float:
    """safety * h * (tol/e)^(1/p); callers handle e = 0 by accepting."""
    if not (h > 0 and e > 0):
        raise ValueError("h and e must be positive")
    return safety * h * (tol / e) ** (1.0 / p)


def ode12_solve(problem: IvpProblem, cfg: AdaptiveConfig) -> Trajectory:
    """Integrate with the adaptive Euler/RK2 pair; logs every attempt.

    The returned trajectory's ``step_log`` holds a StepRecord per attempt
    (two rhs evaluations each, so rhs_evals = 2 * len(step_log)).
    """
    stats = RunStats()
    f = CountingRhs(problem.rhs, problem.dim, stats)
    t = problem.t0
    y = problem.y0.copy()
    times = [t]
    states = [y.copy()]
    log: list[StepRecord] = []
    h = cfg.h_init
    rejects_in_a_row = 0

    while t < problem.t_end:
        h_eff = min(h, problem.t_end - t)
        if h_eff < cfg.h_min:
            raise StepUnderflowError(f"step size {h_eff:.3e} fell below h_min")
        f1 = f(t, y)
        f2 = f(t + h_eff / 2.0, y + (h_eff / 2.0) * f1)
        e = vec_norm_inf(h_eff * (f2 - f1))
        if e < cfg.tol:
            log.append(StepRecord(t, h_eff, e, True))
            y = y + h_eff * f2
            t_new = problem.t_end if h_eff == problem.t_end - t else t + h_eff
            if _check_state(y, t_new, times, states, stats):
                raise DivergenceError(
                    f"state magnitude passed the overflow guard near t={t_new:.6g}",
                    _finish(times, states, stats, log),
                )
            t = t_new
            h = cfg.h_init
            rejects_in_a_row = 0
        else:
            log.append(StepRecord(t, h_eff, e, False))
            stats.rejected_steps += 1
            rejects_in_a_row += 1
            if rejects_in_a_row > cfg.max_rejects_per_step:
                raise RejectCapError(
                    f"{rejects_in_a_row} consecutive rejections at t={t:.6g}"
                )
            h = step_size_update(h_eff, e, cfg.tol, cfg.p, cfg.safety)
            if h < cfg.h_min:
                raise StepUnderflowError(f"step size {h:.3e} fell below h_min")
    return _finish(times, states, stats, log)
