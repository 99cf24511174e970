"""Absolute-stability machinery: region rasters, the multistep boundary
locus, root-condition tests, A/A(alpha)/L classification, the stiffness
ratio, and a closed-form solver for linear difference equations.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import SingularMatrixError
from .linalg import (
    ComplexRootSet,
    lu_inverse,
    lu_solve,
    mat_norm_inf,
    poly_roots,
    vec_norm_inf,
)
from .multistep import MultistepMethod

ROOT_CONDITION_BAND = 1e-9


@dataclass
class StabilityRegionRaster:
    """|R(z)| <= 1 (or root-condition) membership sampled at cell centers."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int
    member: np.ndarray  # shape (ny, nx), row iy sweeps the imaginary axis

    def grid_centers(self):
        res = self.re_min + (np.arange(self.nx) + 0.5) * (self.re_max - self.re_min) / self.nx
        ims = self.im_min + (np.arange(self.ny) + 0.5) * (self.im_max - self.im_min) / self.ny
        return res, ims

    def member_fraction(self) -> float:
        return float(np.mean(self.member))


def raster_one_step(r_func: Callable[[complex], complex], bounds, nx: int, ny: int) -> StabilityRegionRaster:
    """Evaluate |R(z)| <= 1 on an nx-by-ny grid of cell centers.

    ``bounds`` is (re_min, re_max, im_min, im_max).  Poles of R count as
    non-members.
    """
    re_min, re_max, im_min, im_max = bounds
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2 per axis")
    member = np.zeros((ny, nx), dtype=bool)
    raster = StabilityRegionRaster(re_min, re_max, im_min, im_max, nx, ny, member)
    res, ims = raster.grid_centers()
    for iy, im in enumerate(ims):
        for ix, re in enumerate(res):
            z = complex(re, im)
            try:
                val = r_func(z)
            except (SingularMatrixError, ZeroDivisionError, OverflowError):
                continue
            if np.isfinite(val.real) and np.isfinite(val.imag) and abs(val) <= 1.0:
                member[iy, ix] = True
    return raster


def raster_multistep(method: MultistepMethod, bounds, nx: int, ny: int, seed: int = 0) -> StabilityRegionRaster:
    """Root-condition membership raster for a multistep method."""
    re_min, re_max, im_min, im_max = bounds
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2 per axis")
    member = np.zeros((ny, nx), dtype=bool)
    raster = StabilityRegionRaster(re_min, re_max, im_min, im_max, nx, ny, member)
    res, ims = raster.grid_centers()
    for iy, im in enumerate(ims):
        for ix, re in enumerate(res):
            try:
                member[iy, ix] = is_abs_stable(method, complex(re, im), seed=seed)
            except (SingularMatrixError, ValueError):
                continue
    return raster


def boundary_locus(method: MultistepMethod, samples: int):
    """z(theta) = rho(e^{i theta}) / sigma(e^{i theta}) at theta = 2*pi*j/samples.

    Sample points where sigma vanishes are reported as None gaps.
    """
    if samples < 8:
        raise ValueError("need at least 8 samples")
    out = []
    scale = max(1e-300, float(np.max(np.abs(method.b))))
    for j in range(samples):
        theta = 2.0 * math.pi * j / samples
        r = cmath.exp(1j * theta)
        sig = method.sigma(r)
        if abs(sig) <= 1e-12 * scale:
            out.append(None)
        else:
            out.append(method.rho(r) / sig)
    return out


def is_abs_stable(method: MultistepMethod, z: complex, seed: int = 0) -> bool:
    """Root condition at z: |r| <= 1 for simple roots, |r| < 1 for multiple."""
    coeffs = method.characteristic_coeffs(z)
    if abs(coeffs[0]) <= 1e-14:
        raise ValueError("leading characteristic coefficient vanishes at this z")
    roots = poly_roots(coeffs, seed=seed)
    for r, m in zip(roots.roots, roots.multiplicities):
        mag = abs(r)
        if m == 1:
            if mag > 1.0 + ROOT_CONDITION_BAND:
                return False
        else:
            if mag >= 1.0 - ROOT_CONDITION_BAND:
                return False
    return True


@dataclass
class StabilityClassification:
    """Sampled stability verdicts; ``sampled`` flags that no proof is implied."""

    a_stable: bool
    alpha: float                 # wedge half-angle estimate, radians
    l_stable: Optional[bool]     # None when no one-step R(z) is available
    sampled: bool = True


def _left_half_plane_probes(rng, count: int):
    """Log-radially distributed probes with Re z < 0, plus the imaginary axis."""
    probes = []
    for _ in range(count):
        re = -(10.0 ** rng.uniform(-2.0, 6.0))
        im = (10.0 ** rng.uniform(-2.0, 6.0)) * rng.choice([-1.0, 1.0])
        probes.append(complex(re, im))
    for v in np.linspace(-1e3, 1e3, 41):
        probes.append(complex(0.0, float(v)))
    return probes


def classify_stability(obj, seed: int = 0, probes: int = 2000) -> StabilityClassification:
    """Sampled A-, A(alpha)- and L-stability verdicts.

    ``obj`` is either a one-step stability function R(z) or a
    MultistepMethod (root condition).  A-stability is tested on a fixed
    seeded probe set covering Re z in [-1e6, 0]; alpha is estimated by
    bisection on the wedge half-angle (64 rays, radii 1e-2..1e6, reported
    to half a degree); L-stability additionally requires |R(z)| -> 0 along
    the negative real axis (one-step only).
    """
    if isinstance(obj, MultistepMethod):
        def stable_at(z):
            try:
                return is_abs_stable(obj, z, seed=seed)
            except (ValueError, SingularMatrixError):
                return False
        r_func = None
    else:
        r_func = obj

        def stable_at(z):
            try:
                val = r_func(z)
            except (SingularMatrixError, ZeroDivisionError, OverflowError):
                return False
            return abs(val) <= 1.0 + ROOT_CONDITION_BAND

    rng = np.random.default_rng(seed)
    a_stable = all(stable_at(z) for z in _left_half_plane_probes(rng, probes))

    def wedge_ok(phi: float) -> bool:
        radii = 10.0 ** np.linspace(-2.0, 6.0, 17)
        for frac in np.linspace(1.0 / 64.0, 1.0, 64):
            ang = math.pi - frac * phi
            d = complex(math.cos(ang), math.sin(ang))
            for rad in radii:
                if not (stable_at(rad * d) and stable_at(rad * d.conjugate())):
                    return False
        return True

    half_deg = math.radians(0.5)
    if a_stable or wedge_ok(math.pi / 2.0 - 1e-9):
        alpha = math.pi / 2.0
    else:
        lo, hi = 0.0, math.pi / 2.0
        if not wedge_ok(half_deg):
            alpha = 0.0
        else:
            lo = half_deg
            while hi - lo > half_deg:
                mid = 0.5 * (lo + hi)
                if wedge_ok(mid):
                    lo = mid
                else:
                    hi = mid
            alpha = lo

    l_stable = None
    if r_func is not None:
        tail = [abs(r_func(complex(-(10.0 ** k), 0.0))) for k in range(2, 9)]
        l_stable = bool(a_stable and tail[-1] < 1e-2 and tail[-1] <= tail[0])
    return StabilityClassification(a_stable, alpha, l_stable)


def stiffness_ratio(eigs) -> float:
    """max|Re lambda| / min|Re lambda|; inf when the minimum vanishes."""
    eigs = np.atleast_1d(np.asarray(eigs, dtype=complex))
    if eigs.size == 0:
        raise ValueError("need at least one eigenvalue")
    res = np.abs(eigs.real)
    if float(np.min(res)) < 1e-14:
        return math.inf
    return float(np.max(res) / np.min(res))


# ---------------------------------------------------------------------------
# linear difference equations


@dataclass
class DifferenceEquation:
    """Homogeneous recurrence c_p y_k + c_{p-1} y_{k-1} + ... + c_0 y_{k-p} = 0.

    ``c`` is highest-index-first (c_p .. c_0); ``initial`` holds
    y_0 .. y_{p-1}.
    """

    c: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.initial = np.atleast_1d(np.asarray(self.initial, dtype=float))
        if len(self.c) < 2:
            raise ValueError("order must be at least 1")
        if abs(self.c[0]) <= 1e-14 * float(np.max(np.abs(self.c))):
            raise ValueError("leading coefficient must be nonzero")
        if len(self.initial) != len(self.c) - 1:
            raise ValueError("need exactly p initial values for an order-p recurrence")

    @property
    def order(self) -> int:
        return len(self.c) - 1


@dataclass
class DifferenceSolution:
    """Closed form y_k = sum_j [beta_j0 + k beta_j1 + ...] r_j^k."""

    roots: ComplexRootSet
    beta: list
    equation: DifferenceEquation
    reconstruction_error: float = 0.0


def difference_recurrence(eq: DifferenceEquation, k_max: int) -> np.ndarray:
    """Forward evaluation of the recurrence up to index k_max."""
    p = eq.order
    ys = list(eq.initial)
    for k in range(p, k_max + 1):
        acc = 0.0
        for j in range(1, p + 1):
            acc += eq.c[j] * ys[k - j]
        ys.append(-acc / eq.c[0])
    return np.asarray(ys[: k_max + 1])


def solve_difference_equation(eq: DifferenceEquation, seed: int = 0) -> DifferenceSolution:
    """Characteristic roots plus coefficients fitted to the initial values.

    Multiple roots contribute the polynomial-times-power basis
    r^k, k r^k, ..., k^(m-1) r^k; the coefficients come from the resulting
    confluent Vandermonde system.
    """
    p = eq.order
    roots = poly_roots(eq.c.astype(complex), seed=seed)
    cols = []
    for r, m in zip(roots.roots, roots.multiplicities):
        for power in range(int(m)):
            col = np.array(
                [(k ** power if power else 1.0) * r ** k for k in range(p)],
                dtype=complex,
            )
            cols.append(col)
    m_matrix = np.column_stack(cols)
    cond = mat_norm_inf(m_matrix) * mat_norm_inf(lu_inverse(m_matrix))
    if cond > 1e10:
        warnings.warn(f"confluent Vandermonde condition estimate {cond:.2e}", stacklevel=2)
    beta_flat = lu_solve(m_matrix, eq.initial.astype(complex))
    beta = []
    pos = 0
    for m in roots.multiplicities:
        beta.append(np.array(beta_flat[pos: pos + int(m)]))
        pos += int(m)
    sol = DifferenceSolution(roots, beta, eq)
    scale = max(1e-300, vec_norm_inf(eq.initial))
    worst = max(
        abs(evaluate_difference_solution(sol, k) - eq.initial[k]) for k in range(p)
    )
    sol.reconstruction_error = worst / scale
    if sol.reconstruction_error > 1e-8:
        raise SingularMatrixError(
            f"closed form reproduces the initial values only to {sol.reconstruction_error:.2e}"
        )
    return sol


def evaluate_difference_solution(sol: DifferenceSolution, k: int) -> float:
    """Real part of the closed form at index k >= 0."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    acc = 0.0 + 0.0j
    for r, betas in zip(sol.roots.roots, sol.beta):
        poly = sum(b * (k ** power if power else 1.0) for power, b in enumerate(betas))
        acc += poly * r ** k
    return acc.real
