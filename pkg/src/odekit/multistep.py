"""Adams-Bashforth, Adams-Moulton, and BDF integrators.

A method is stored in the common form

    y_{k+1} = sum_{j=0..q} a_j y_{k-j} + h * sum_{j=-1..q} b_j f(t_{k-j}, y_{k-j})

where q is the history depth.  ``b[0]`` holds b_{-1}, the weight on the new
(implicit) derivative.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    CountingRhs,
    IvpProblem,
    RunStats,
    Trajectory,
    _check_state,
    _finish,
    build_grid,
)
from .errors import DivergenceError, ImplicitSolveError, NonFiniteError, UnsupportedOrderError
from .linalg import lu_solve, vec_norm_inf
from .steppers import DEFAULT_IMPLICIT, ImplicitSolveConfig, make_stepper


@dataclass(eq=False)
class MultistepMethod:
    """Coefficients of one linear multistep formula."""

    family: str
    label: str
    a: np.ndarray          # a_0 .. a_q
    b: np.ndarray          # b_{-1} .. b_q
    declared_order: int

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if len(self.b) != len(self.a) + 1:
            raise ValueError("b must hold one more weight than a")

    @property
    def q(self) -> int:
        return len(self.a) - 1

    @property
    def implicit(self) -> bool:
        return self.b[0] != 0.0

    def rho(self, r: complex) -> complex:
        """r^{q+1} - sum_j a_j r^{q-j}."""
        acc = r ** (self.q + 1)
        for j in range(self.q + 1):
            acc -= self.a[j] * r ** (self.q - j)
        return acc

    def sigma(self, r: complex) -> complex:
        """b_{-1} r^{q+1} + sum_j b_j r^{q-j}."""
        acc = self.b[0] * r ** (self.q + 1)
        for j in range(self.q + 1):
            acc += self.b[j + 1] * r ** (self.q - j)
        return acc

    def characteristic_coeffs(self, z: complex) -> np.ndarray:
        """Coefficients (highest first) of (1 - z b_{-1}) r^{q+1} - sum (a_j + z b_j) r^{q-j}."""
        coeffs = [1.0 - z * self.b[0]]
        for j in range(self.q + 1):
            coeffs.append(-(self.a[j] + z * self.b[j + 1]))
        return np.asarray(coeffs, dtype=complex)


F = Fraction

AB_WEIGHTS = {
    1: [F(1)],
    2: [F(3, 2), F(-1, 2)],
    3: [F(23, 12), F(-16, 12), F(5, 12)],
    4: [F(55, 24), F(-59, 24), F(37, 24), F(-9, 24)],
}

# keyed by the history parameter; order is key+1.  The one-step entry uses
# trapezoidal weights (1/2, 1/2).
AM_WEIGHTS = {
    0: (F(1), []),
    1: (F(1, 2), [F(1, 2)]),
    2: (F(5, 12), [F(8, 12), F(-1, 12)]),
    3: (F(9, 24), [F(19, 24), F(-5, 24), F(1, 24)]),
}

# Reference rationals for the generated BDF coefficients.  Each alpha row
# must sum to 1; for q=4 that forces the middle weight -36/25.
BDF_TABLE = {
    1: ([F(1)], F(1)),
    2: ([F(4, 3), F(-1, 3)], F(2, 3)),
    3: ([F(18, 11), F(-9, 11), F(2, 11)], F(6, 11)),
    4: ([F(48, 25), F(-36, 25), F(16, 25), F(-3, 25)], F(12, 25)),
    5: ([F(300, 137), F(-300, 137), F(200, 137), F(-75, 137), F(12, 137)], F(60, 137)),
    6: ([F(360, 147), F(-450, 147), F(400, 147), F(-225, 147), F(72, 147), F(-10, 147)], F(60, 147)),
}


def ab_method(q: int) -> MultistepMethod:
    """q-step Adams-Bashforth method (order q), q in 1..4."""
    if q not in AB_WEIGHTS:
        raise UnsupportedOrderError(f"AB supports q in 1..4, got {q}")
    w = AB_WEIGHTS[q]
    a = [1.0] + [0.0] * (q - 1)
    b = [0.0] + [float(x) for x in w]
    return MultistepMethod("AB", f"ab{q}", a, b, q)


def am_method(q: int) -> MultistepMethod:
    """Adams-Moulton method with history parameter q in 0..3 (order q+1)."""
    if q not in AM_WEIGHTS:
        raise UnsupportedOrderError(f"AM supports q in 0..3, got {q}")
    bm1, rest = AM_WEIGHTS[q]
    a = [1.0] + [0.0] * max(0, q - 1)
    b = [float(bm1)] + [float(x) for x in rest]
    while len(b) < len(a) + 1:
        b.append(0.0)
    return MultistepMethod("AM", f"am{q}", a, b, q + 1)


def _lagrange_derivative_at_zero(nodes: list[Fraction], i: int) -> Fraction:
    """d/dx of the i-th Lagrange basis over ``nodes``, evaluated at 0."""
    xi = nodes[i]
    denom = F(1)
    for n, xn in enumerate(nodes):
        if n != i:
            denom *= xi - xn
    total = F(0)
    for m, xm in enumerate(nodes):
        if m == i:
            continue
        prod = F(1)
        for n, xn in enumerate(nodes):
            if n != i and n != m:
                prod *= -xn
        total += prod
    return total / denom


def bdf_coefficients(q: int) -> MultistepMethod:
    """q-step BDF method, q in 1..6, generated from Lagrange derivatives.

    On the scaled nodes {0, -1, ..., -q} (0 standing for the new time
    level) the weights are beta = 1/l'_{-1}(0) and
    alpha_j = -l'_j(0)/l'_{-1}(0).
    """
    if not 1 <= q <= 6:
        raise UnsupportedOrderError(f"BDF supports q in 1..6, got {q}")
    nodes = [F(0)] + [F(-(j + 1)) for j in range(q)]
    d_new = _lagrange_derivative_at_zero(nodes, 0)
    beta = 1 / d_new
    alphas = [-_lagrange_derivative_at_zero(nodes, j + 1) / d_new for j in range(q)]
    a = [float(x) for x in alphas]
    b = [float(beta)] + [0.0] * q
    return MultistepMethod("BDF", f"bdf{q}", a, b, q)


def bdf_table_method(q: int) -> MultistepMethod:
    """The same BDF method built from the hardcoded reference rationals."""
    if q not in BDF_TABLE:
        raise UnsupportedOrderError(f"BDF supports q in 1..6, got {q}")
    alphas, beta = BDF_TABLE[q]
    a = [float(x) for x in alphas]
    b = [float(beta)] + [0.0] * q
    return MultistepMethod("BDF", f"bdf{q}", a, b, q)


def leapfrog_method() -> MultistepMethod:
    """y_{k+1} = y_{k-1} + 2h f_k in multistep form (for stability analysis)."""
    return MultistepMethod("leapfrog", "leapfrog", [0.0, 1.0], [0.0, 2.0, 0.0], 2)


def consistency_report(method: MultistepMethod, m: int) -> list[tuple[str, float]]:
    """Residuals of the order conditions up to order m.

    The first two entries are the zeroth/first-order conditions
    sum a_j = 1 and -sum j*a_j + sum b_j = 1; entry i (for i = 2..m) is the
    i-th order condition sum (-j)^i a_j + i * sum (-j)^(i-1) b_j = 1.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    a, b, q = method.a, method.b, method.q
    out = [("sum_a", abs(float(np.sum(a)) - 1.0))]
    first = -sum(j * a[j] for j in range(q + 1)) + float(np.sum(b))
    out.append(("order_1", abs(first - 1.0)))
    for i in range(2, m + 1):
        lhs = sum((-j) ** i * a[j] for j in range(q + 1))
        lhs += i * sum((-j) ** (i - 1) * b[j + 1] for j in range(-1, q + 1))
        out.append((f"order_{i}", abs(lhs - 1.0)))
    return out


def certifies_order(method: MultistepMethod, m: int, tol: float = 1e-10) -> bool:
    return all(res <= tol for _, res in consistency_report(method, m))


class HistoryBuffer:
    """Ring of the most recent (t, y, f) triples on an equispaced grid."""

    def __init__(self, depth: int, h: float):
        self.depth = depth
        self.h = h
        self._items: list[tuple[float, np.ndarray, np.ndarray]] = []

    def push(self, t, y, fy):
        if self._items:
            gap = t - self._items[-1][0]
            if abs(gap - self.h) > 1e-12 * max(1.0, abs(t)):
                raise ValueError("history spacing does not match the step size")
        self._items.append((t, y, fy))
        if len(self._items) > self.depth:
            self._items.pop(0)

    def back(self, j: int):
        """Triple j levels behind the newest (j=0 is the newest)."""
        return self._items[-1 - j]

    def __len__(self):
        return len(self._items)


def _default_predictor(method: MultistepMethod) -> MultistepMethod:
    """Explicit companion used to start implicit corrections.

    The AB method of the same order (capped at AB4), except that the
    one-step AM entries keep the plain Euler predictor so they stay
    self-starting and reproduce the implicit Euler/trapezoidal steppers.
    """
    if method.family == "AM" and method.q == 0:
        return ab_method(1)
    return ab_method(min(method.declared_order, 4))


def multistep_march(
    problem: IvpProblem,
    method: MultistepMethod,
    h: float,
    cfg: ImplicitSolveConfig | None = None,
    bootstrap: str = "rk4",
    predictor: MultistepMethod | None = None,
    corrections=1,
) -> Trajectory:
    """March a multistep method on the uniform grid.

    The first ``depth`` values come from a one-step bootstrap method
    (default RK4; "exact" samples the problem's exact solution).  Implicit
    methods evaluate an explicit predictor and then apply ``corrections``
    corrector sweeps (an integer, or "converge" to iterate to cfg.tol);
    with cfg.strategy="newton" the corrector equation is solved by Newton
    instead, using the problem's Jacobian.

    When h does not divide the interval, the final shortened step is taken
    with the bootstrap one-step method (the multistep history needs equal
    spacing).
    """
    cfg = cfg or DEFAULT_IMPLICIT
    grid, n_full = build_grid(problem.t0, problem.t_end, h)
    if method.implicit and predictor is None:
        predictor = _default_predictor(method)
    depth = method.q + 1
    if method.implicit and predictor is not None:
        depth = max(depth, predictor.q + 1)
    if depth >= len(grid):
        raise ValueError("step size leaves no room for the multistep history")

    stats = RunStats()
    f = CountingRhs(problem.rhs, problem.dim, stats)
    boot = None if bootstrap == "exact" else make_stepper(bootstrap, problem, cfg)

    times = [grid[0]]
    states = [problem.y0.copy()]
    hist = HistoryBuffer(depth, h)
    y = problem.y0.copy()
    hist.push(grid[0], y, f(grid[0], y))

    def halt(t, partial_reason):
        raise DivergenceError(partial_reason + f" near t={t:.6g}", _finish(times, states, stats))

    # seed y_1 .. y_{depth-1} with the one-step bootstrap
    for k in range(1, depth):
        if boot is None:
            y = problem.exact_at(grid[k])
        else:
            y = boot.advance(f, grid[k - 1], y, h, stats)
        if _check_state(y, grid[k], times, states, stats):
            halt(grid[k], "state magnitude passed the overflow guard")
        hist.push(grid[k], y, f(grid[k], y))

    a, b, q = method.a, method.b, method.q
    for k in range(depth, n_full + 1):
        t_new = grid[k]
        acc = a[0] * hist.back(0)[1]
        for j in range(1, q + 1):
            if a[j] != 0.0:
                acc = acc + a[j] * hist.back(j)[1]
        rhs_acc = None
        for j in range(0, q + 1):
            if b[j + 1] != 0.0:
                term = b[j + 1] * hist.back(j)[2]
                rhs_acc = term if rhs_acc is None else rhs_acc + term
        known = acc if rhs_acc is None else acc + h * rhs_acc

        try:
            if not method.implicit:
                y = known
            else:
                pa, pb, pq = predictor.a, predictor.b, predictor.q
                pred = pa[0] * hist.back(0)[1]
                for j in range(1, pq + 1):
                    if pa[j] != 0.0:
                        pred = pred + pa[j] * hist.back(j)[1]
                pracc = None
                for j in range(0, pq + 1):
                    if pb[j + 1] != 0.0:
                        term = pb[j + 1] * hist.back(j)[2]
                        pracc = term if pracc is None else pracc + term
                if pracc is not None:
                    pred = pred + h * pracc
                gamma_h = h * b[0]
                if cfg.pick_strategy(problem.jacobian) == "newton" and problem.jacobian is not None:
                    y = _newton_correct(f, problem.jacobian, t_new, known, gamma_h, pred, cfg, stats)
                else:
                    y = _sweep_correct(f, t_new, known, gamma_h, pred, cfg, corrections, stats)
        except NonFiniteError:
            stats.diverged = True
            if stats.divergence_time is None:
                stats.divergence_time = t_new
            halt(t_new, "state became non-finite")
        if not np.all(np.isfinite(y)):
            stats.diverged = True
            if stats.divergence_time is None:
                stats.divergence_time = t_new
            halt(t_new, "state became non-finite")
        if _check_state(y, t_new, times, states, stats):
            halt(t_new, "state magnitude passed the overflow guard")
        hist.push(t_new, y, f(t_new, y))

    if n_full + 1 < len(grid):
        # shortened landing step onto t_end, outside the equispaced history
        h_last = grid[-1] - grid[-2]
        stepper = boot if boot is not None else make_stepper("rk4", problem, cfg)
        y = stepper.advance(f, grid[-2], y, h_last, stats)
        if _check_state(y, grid[-1], times, states, stats):
            halt(grid[-1], "state magnitude passed the overflow guard")
    return _finish(times, states, stats)


def _sweep_correct(f, t_new, known, gamma_h, pred, cfg, corrections, stats):
    u = pred
    if corrections == "converge":
        for _ in range(cfg.max_iters):
            fu = f(t_new, u)
            stats.implicit_iters += 1
            resid = vec_norm_inf(u - known - gamma_h * fu)
            if resid <= cfg.tol * (1.0 + vec_norm_inf(u)):
                return u
            u = known + gamma_h * fu
        raise ImplicitSolveError("corrector sweeps did not converge")
    for _ in range(int(corrections)):
        u = known + gamma_h * f(t_new, u)
        stats.implicit_iters += 1
    return u


def _newton_correct(f, jacobian, t_new, known, gamma_h, pred, cfg, stats):
    u = np.asarray(pred, dtype=float)
    if not np.all(np.isfinite(u)):
        u = np.asarray(known, dtype=float)
    n = len(u)
    eye = np.eye(n)
    for _ in range(cfg.max_iters):
        fu = f(t_new, u)
        stats.implicit_iters += 1
        g = u - known - gamma_h * fu
        if vec_norm_inf(g) <= cfg.tol * (1.0 + vec_norm_inf(u)):
            return u
        m = eye - gamma_h * np.asarray(jacobian(t_new, u), dtype=float)
        u = u - lu_solve(m, g)
    raise ImplicitSolveError("Newton corrector did not converge")


MULTISTEP_NAMES = tuple(
    [f"ab{q}" for q in (1, 2, 3, 4)]
    + [f"am{q}" for q in (0, 1, 2, 3)]
    + [f"bdf{q}" for q in (1, 2, 3, 4, 5, 6)]
)


def multistep_by_name(name: str) -> MultistepMethod:
    if name.startswith("ab"):
        return ab_method(int(name[2:]))
    if name.startswith("am"):
        return am_method(int(name[2:]))
    if name.startswith("bdf"):
        return bdf_coefficients(int(name[3:]))
    if name == "leapfrog":
        return leapfrog_method()
    raise ValueError(f"unknown multistep method {name!r}")
