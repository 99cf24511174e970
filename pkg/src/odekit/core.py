"""Problem model, trajectories, and the fixed-grid time-marching driver."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError, MissingExactError, NonFiniteError, SampleCapError
from .linalg import vec_norm_inf

# A state is declared diverged once its inf-norm crosses this threshold; the
# run itself is only cut short when values become non-finite or cross the
# overflow guard, so genuinely explosive runs still report their final size.
DIVERGENCE_THRESHOLD = 1e12
OVERFLOW_GUARD = 1e200
MAX_SAMPLES = 10_000_000


@dataclass
class RunStats:
    """Counters populated while a solver runs."""

    rhs_evals: int = 0
    implicit_iters: int = 0
    rejected_steps: int = 0
    diverged: bool = False
    divergence_time: Optional[float] = None


@dataclass
class IvpProblem:
    """An initial value problem y' = f(t, y), y(t0) = y0 on [t0, t_end].

    ``rhs`` maps (t, y) to a length-``dim`` vector.  Optional extras:
    ``jacobian`` (t, y) -> dim x dim matrix, ``taylor_d2``/``taylor_d3``
    total time derivatives y'' and y''' for Taylor-series stepping, and
    ``exact`` (t) -> vector for error measurement.
    """

    name: str
    dim: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    t0: float
    t_end: float
    y0: np.ndarray
    jacobian: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    taylor_d2: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    taylor_d3: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    exact: Optional[Callable[[float], np.ndarray]] = None
    lipschitz_hint: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.y0 = np.atleast_1d(np.asarray(self.y0, dtype=float))
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if len(self.y0) != self.dim:
            raise ValueError("y0 length must equal dim")
        if not self.t_end > self.t0:
            raise ValueError("t_end must exceed t0")
        if self.exact is not None:
            mismatch = vec_norm_inf(self.exact_at(self.t0) - self.y0)
            if mismatch > 1e-12:
                raise ValueError(f"exact(t0) disagrees with y0 by {mismatch:.3e}")

    def exact_at(self, t: float) -> np.ndarray:
        if self.exact is None:
            raise MissingExactError(f"problem {self.name!r} has no exact solution")
        return np.atleast_1d(np.asarray(self.exact(t), dtype=float))


@dataclass
class Trajectory:
    """Ordered (t_k, y_k) samples from one solver run, plus its statistics."""

    times: np.ndarray
    states: np.ndarray
    stats: RunStats
    step_log: Optional[list] = None

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


class CountingRhs:
    """Wraps a right-hand side, counting evaluations and checking shape."""

    def __init__(self, rhs, dim: int, stats: RunStats):
        self._rhs = rhs
        self._dim = dim
        self._stats = stats

    def __call__(self, t, y):
        self._stats.rhs_evals += 1
        out = np.atleast_1d(np.asarray(self._rhs(t, y), dtype=float))
        if len(out) != self._dim:
            raise ValueError("rhs returned a vector of the wrong length")
        return out


def build_grid(t0: float, t_end: float, h: float):
    """Uniform grid t0 + k*h covering [t0, t_end].

    Returns (times, n_full) where times[k] = t0 + k*h exactly for
    k <= n_full, followed (when h does not divide the span) by one final
    shortened node at t_end.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    span = t_end - t0
    if h > span * (1 + 1e-12):
        raise ValueError("h exceeds the integration interval")
    ratio = span / h
    n = int(round(ratio))
    if n >= 1 and abs(ratio - n) <= 4 * np.finfo(float).eps * max(1.0, ratio):
        n_full = n
        times = [t0 + k * h for k in range(n_full)] + [t_end]
    else:
        n_full = int(np.floor(ratio))
        times = [t0 + k * h for k in range(n_full + 1)]
        if times[-1] < t_end:
            times.append(t_end)
    if len(times) > MAX_SAMPLES:
        raise SampleCapError(f"grid would hold {len(times)} samples (cap {MAX_SAMPLES})")
    return times, n_full


def _check_state(y, t, times, states, stats):
    """Shared divergence bookkeeping; returns True when the run must stop."""
    if not np.all(np.isfinite(y)):
        stats.diverged = True
        if stats.divergence_time is None:
            stats.divergence_time = t
        return True
    size = vec_norm_inf(y)
    if size > DIVERGENCE_THRESHOLD and not stats.diverged:
        stats.diverged = True
        stats.divergence_time = t
    times.append(t)
    states.append(np.array(y, dtype=float))
    return size > OVERFLOW_GUARD


def _finish(times, states, stats, step_log=None) -> Trajectory:
    return Trajectory(
        np.array(times, dtype=float), np.array(states, dtype=float), stats, step_log
    )


def march(problem: IvpProblem, stepper, h: float, cfg=None) -> Trajectory:
    """Drive a one-step method on the uniform grid t_k = t0 + k*h.

    ``stepper`` is a method name (see ``steppers.make_stepper``) or a
    Stepper instance.  When h does not divide t_end - t0 the last step is
    shortened to land exactly on t_end.  A run whose state grows past the
    divergence threshold is flagged; it is cut short (DivergenceError with
    the partial trajectory attached) only on non-finite values or past the
    overflow guard.
    """
    from . import steppers as _steppers

    grid, n_full = build_grid(problem.t0, problem.t_end, h)
    if isinstance(stepper, str):
        stepper = _steppers.make_stepper(stepper, problem, cfg)
    stepper.reset()

    stats = RunStats()
    f = CountingRhs(problem.rhs, problem.dim, stats)
    times = [grid[0]]
    states = [problem.y0.copy()]
    y = problem.y0.copy()
    for k in range(1, len(grid)):
        t_prev = grid[k - 1]
        hk = h if k <= n_full else grid[k] - t_prev
        try:
            y = stepper.advance(f, t_prev, y, hk, stats)
        except NonFiniteError:
            stats.diverged = True
            if stats.divergence_time is None:
                stats.divergence_time = grid[k]
            raise DivergenceError(
                f"state became non-finite near t={grid[k]:.6g}",
                _finish(times, states, stats),
            ) from None
        if _check_state(y, grid[k], times, states, stats):
            raise DivergenceError(
                f"state magnitude passed the overflow guard near t={grid[k]:.6g}",
                _finish(times, states, stats),
            )
    return _finish(times, states, stats)


def error_at_end(traj: Trajectory, problem: IvpProblem):
    """Final-time absolute and relative error in the inf-norm."""
    exact = problem.exact_at(traj.final_time)
    abs_err = vec_norm_inf(traj.final_state - exact)
    denom = vec_norm_inf(exact)
    rel_err = abs_err if denom < 1e-300 else abs_err / denom
    return abs_err, rel_err
