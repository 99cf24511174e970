"""Small dense linear algebra and polynomial root finding.

Everything operates on plain numpy arrays.  The systems appearing in the
benchmark problems are tiny (a few dozen unknowns at most), so the solvers
favour explicit pivot/convergence checks over raw speed.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DefectiveMatrixError,
    NonConvergenceError,
    NotSymmetricError,
    SingularMatrixError,
)

PIVOT_RTOL = 1e-14
JACOBI_MAX_SWEEPS = 100
DK_MAX_ITERS = 500
DK_UPDATE_TOL = 1e-13
ROOT_CLUSTER_TOL = 1e-6


def vec_norm_inf(v) -> float:
    v = np.asarray(v)
    return float(np.max(np.abs(v))) if v.size else 0.0


def mat_norm_inf(a) -> float:
    a = np.atleast_2d(np.asarray(a))
    return float(np.max(np.sum(np.abs(a), axis=1))) if a.size else 0.0


@dataclass
class EigenDecomposition:
    """Eigenvalues (and optionally eigenvectors as columns) of a matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    defective: bool = False


@dataclass
class ComplexRootSet:
    """Polynomial roots grouped into multiplicity clusters."""

    roots: np.ndarray
    multiplicities: np.ndarray

    @property
    def degree(self) -> int:
        return int(np.sum(self.multiplicities))


def lu_factor(a):
    """LU factorization with partial pivoting; returns (LU, perm).

    Works for real or complex square matrices.  Raises SingularMatrixError
    when the best available pivot is below ``PIVOT_RTOL * ||A||_inf``.
    """
    a = np.array(a, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    n = a.shape[0]
    if not np.all(np.isfinite(a.real)) or (np.iscomplexobj(a) and not np.all(np.isfinite(a.imag))):
        raise ValueError("matrix entries must be finite")
    scale = mat_norm_inf(a)
    perm = np.arange(n)
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(a[col:, col])))
        pivot = a[pivot_row, col]
        if abs(pivot) < PIVOT_RTOL * max(scale, 1e-300):
            raise SingularMatrixError(
                f"pivot {abs(pivot):.3e} below threshold at column {col}"
            )
        if pivot_row != col:
            a[[col, pivot_row]] = a[[pivot_row, col]]
            perm[[col, pivot_row]] = perm[[pivot_row, col]]
        if col + 1 < n:
            factors = a[col + 1:, col] / pivot
            a[col + 1:, col] = factors
            a[col + 1:, col + 1:] -= np.outer(factors, a[col, col + 1:])
    return a, perm


def lu_solve(a, b):
    """Solve ``A x = b`` by LU with partial pivoting (real or complex)."""
    lu, perm = lu_factor(a)
    b = np.asarray(b)
    x = np.array(b[perm], dtype=lu.dtype)
    n = lu.shape[0]
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            x[i] -= lu[i, i + 1:] @ x[i + 1:]
        x[i] /= lu[i, i]
    return x


def lu_inverse(a):
    """Explicit inverse via LU; only used on tiny matrices."""
    a = np.asarray(a)
    n = a.shape[0]
    eye = np.eye(n, dtype=complex if np.iscomplexobj(a) else float)
    cols = [lu_solve(a, eye[:, j]) for j in range(n)]
    return np.column_stack(cols)


def eig_2x2(a) -> EigenDecomposition:
    """Closed-form eigen decomposition of a real 2x2 matrix.

    Eigenvalues come from the quadratic formula on the characteristic
    polynomial; eigenvectors are normalized to unit inf-norm.  A defective
    repeated eigenvalue is flagged rather than raised.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2):
        raise ValueError("2x2 matrix required")
    a11, a12, a21, a22 = a[0, 0], a[0, 1], a[1, 0], a[1, 1]
    tr = a11 + a22
    det = a11 * a22 - a12 * a21
    disc = complex(tr * tr - 4.0 * det)
    s = cmath.sqrt(disc)
    lam = np.array([(tr - s) / 2.0, (tr + s) / 2.0], dtype=complex)
    scale = max(abs(a11), abs(a12), abs(a21), abs(a22), 1e-300)

    def eigvec(l):
        # rows of (A - lI) are (a11-l, a12) and (a21, a22-l); a null vector
        # can be read off whichever row is numerically nontrivial.
        v1 = np.array([a12, l - a11], dtype=complex)
        v2 = np.array([l - a22, a21], dtype=complex)
        v = v1 if vec_norm_inf(v1) >= vec_norm_inf(v2) else v2
        if vec_norm_inf(v) <= 1e-14 * scale:
            return None
        return v / vec_norm_inf(v)

    if abs(s) <= 1e-12 * scale:
        lam[:] = tr / 2.0
        if max(abs(a12), abs(a21), abs(a11 - a22)) <= 1e-14 * scale:
            vecs = np.eye(2, dtype=complex)
            return EigenDecomposition(lam, vecs, defective=False)
        v = eigvec(lam[0])
        vecs = np.column_stack([v, v])
        return EigenDecomposition(lam, vecs, defective=True)

    vecs = []
    for l in lam:
        v = eigvec(l)
        if v is None:
            # scalar matrix: every direction is an eigenvector
            v = np.array([1.0, 0.0], dtype=complex) if len(vecs) == 0 else np.array([0.0, 1.0], dtype=complex)
        vecs.append(v)
    return EigenDecomposition(lam, np.column_stack(vecs), defective=False)


def jacobi_symmetric_eig(a) -> EigenDecomposition:
    """Cyclic Jacobi eigensolver for real symmetric matrices.

    Sweeps until the off-diagonal Frobenius norm drops below
    ``1e-12 * ||A||_F`` or ``JACOBI_MAX_SWEEPS`` sweeps have run.
    Eigenvalues are returned sorted ascending with matching eigenvectors.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    scale = mat_norm_inf(a)
    if mat_norm_inf(a - a.T) > 1e-12 * max(scale, 1e-300):
        raise NotSymmetricError("matrix is not symmetric to working tolerance")
    n = a.shape[0]
    b = a.copy()
    v = np.eye(n)
    fro = math.sqrt(float(np.sum(a * a)))
    target = 1e-12 * fro

    def offdiag_norm(m):
        off = m - np.diag(np.diag(m))
        return math.sqrt(float(np.sum(off * off)))

    converged = n < 2 or offdiag_norm(b) <= target
    for _ in range(JACOBI_MAX_SWEEPS):
        if converged:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = b[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (b[q, q] - b[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * b[:, p] - s * b[:, q]
                rot_q = s * b[:, p] + c * b[:, q]
                b[:, p], b[:, q] = rot_p, rot_q
                rot_p = c * b[p, :] - s * b[q, :]
                rot_q = s * b[p, :] + c * b[q, :]
                b[p, :], b[q, :] = rot_p, rot_q
                b[p, q] = b[q, p] = 0.0
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
        converged = offdiag_norm(b) <= target
    if not converged:
        raise NonConvergenceError("Jacobi sweeps did not reduce off-diagonal norm")
    order = np.argsort(np.diag(b), kind="stable")
    return EigenDecomposition(
        np.diag(b)[order].astype(complex), v[:, order].astype(complex), defective=False
    )


def tridiag_toeplitz_eigs(m: int, dx: float) -> np.ndarray:
    """Eigenvalues of the (1/dx^2)*tridiag(1,-2,1) matrix of size m.

    Closed form: lambda_l = -(4/dx^2) sin^2(pi*l*dx/2) for l = 1..m, with
    dx = 1/(m+1).
    """
    if m < 1:
        raise ValueError("m must be positive")
    if abs(dx - 1.0 / (m + 1)) > 1e-12:
        raise ValueError("dx must equal 1/(m+1)")
    ls = np.arange(1, m + 1, dtype=float)
    return -4.0 / (dx * dx) * np.sin(0.5 * math.pi * ls * dx) ** 2


def _is_triangular(a, lower: bool) -> bool:
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            if (j > i if lower else j < i) and a[i, j] != 0.0:
                return False
    return True


def _triangular_eig(a, lower: bool) -> EigenDecomposition:
    """Eigen decomposition of a triangular matrix with distinct diagonal."""
    n = a.shape[0]
    lam = np.diag(a).astype(complex)
    scale = max(mat_norm_inf(a), 1e-300)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(lam[i] - lam[j]) <= 1e-9 * scale:
                raise DefectiveMatrixError("repeated diagonal entries on a triangular matrix")
    vecs = np.zeros((n, n), dtype=complex)
    idx = range(n) if lower else range(n - 1, -1, -1)
    for i in idx:
        v = np.zeros(n, dtype=complex)
        v[i] = 1.0
        inner = range(i + 1, n) if lower else range(i - 1, -1, -1)
        for j in inner:
            acc = 0.0 + 0.0j
            span = range(i, j) if lower else range(j + 1, i + 1)
            for k in span:
                acc += a[j, k] * v[k]
            v[j] = acc / (lam[i] - a[j, j])
        vecs[:, i] = v / vec_norm_inf(v)
    return EigenDecomposition(lam, vecs, defective=False)


def complete_eigendecomposition(a) -> EigenDecomposition:
    """Full eigenbasis for the matrix shapes the toolkit supports.

    2x2 (closed form), symmetric (Jacobi) and triangular-with-distinct-
    diagonal matrices; anything else raises DefectiveMatrixError.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return EigenDecomposition(np.array([a[0, 0]], dtype=complex),
                                  np.array([[1.0]], dtype=complex))
    if n == 2:
        dec = eig_2x2(a)
        if dec.defective:
            raise DefectiveMatrixError("2x2 matrix is defective")
        return dec
    scale = max(mat_norm_inf(a), 1e-300)
    if mat_norm_inf(a - a.T) <= 1e-12 * scale:
        return jacobi_symmetric_eig(a)
    if _is_triangular(a, lower=True):
        return _triangular_eig(a, lower=True)
    if _is_triangular(a, lower=False):
        return _triangular_eig(a, lower=False)
    raise DefectiveMatrixError(
        "no eigensolver for general nonsymmetric matrices above 2x2"
    )


def linear_exact_solution(a, y0, t: float) -> np.ndarray:
    """Exact solution ``V exp(D t) V^-1 y0`` of y' = A y, y(0) = y0."""
    a = np.asarray(a, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    dec = complete_eigendecomposition(a)
    v = dec.eigenvectors
    u0 = lu_solve(v, y0.astype(complex))
    w = u0 * np.exp(dec.eigenvalues * t)
    y = v @ w
    resid = vec_norm_inf(y.imag)
    if resid > 1e-9 * max(vec_norm_inf(y), 1e-300):
        raise DefectiveMatrixError(f"imaginary residue {resid:.3e} too large")
    return y.real


def _polyval(coeffs, z):
    acc = coeffs[0]
    for c in coeffs[1:]:
        acc = acc * z + c
    return acc


def _poly_from_roots(roots, mults):
    coeffs = np.array([1.0 + 0.0j])
    for r, m in zip(roots, mults):
        for _ in range(int(m)):
            coeffs = np.convolve(coeffs, np.array([1.0 + 0.0j, -r]))
    return coeffs


def _poly_derivative(coeffs):
    n = len(coeffs) - 1
    return coeffs[:-1] * np.arange(n, 0, -1)


def _polish_root(monic, r, mult):
    """Newton-refine a multiplicity-``mult`` root.

    A root of multiplicity m of p is a simple root of the (m-1)-th
    derivative, so Newton on that derivative converges quadratically where
    Newton on p itself stalls at the round-off scatter.
    """
    d = monic
    for _ in range(mult - 1):
        d = _poly_derivative(d)
    dd = _poly_derivative(d)
    for _ in range(100):
        dval = _polyval(dd, r)
        if abs(dval) < 1e-300:
            break
        step = _polyval(d, r) / dval
        r = r - step
        if abs(step) <= 1e-15 * max(1.0, abs(r)):
            break
    return r


def _cluster_roots(z, tol, monic):
    """Single-linkage clustering at distance tol, with polished centers."""
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    roots, mults = [], []
    for members in groups.values():
        center = complex(np.mean([z[i] for i in members]))
        roots.append(_polish_root(monic, center, len(members)))
        mults.append(len(members))
    order = sorted(range(len(roots)), key=lambda i: (roots[i].real, roots[i].imag))
    roots = np.array([roots[i] for i in order], dtype=complex)
    mults = np.array([mults[i] for i in order], dtype=int)
    return roots, mults


def poly_roots(coeffs, seed: int = 0) -> ComplexRootSet:
    """All roots of a polynomial via Durand-Kerner simultaneous iteration.

    ``coeffs`` is highest-degree-first.  Iteration starts from perturbed
    points on a circle and stops when the largest update falls below
    ``DK_UPDATE_TOL`` or every residual is at the evaluation round-off
    floor (the update criterion alone cannot trigger at multiple roots,
    whose approximations scatter like eps^(1/multiplicity)).

    Nearby approximations are merged into multiplicity clusters; the merge
    tolerance starts at ``ROOT_CLUSTER_TOL`` and is widened only while it
    improves the reconstructed-polynomial residual.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim != 1 or len(coeffs) < 2:
        raise ValueError("need a polynomial of degree >= 1")
    if abs(coeffs[0]) <= 1e-14 * float(np.max(np.abs(coeffs))):
        raise ValueError("leading coefficient is negligible")
    monic = coeffs / coeffs[0]
    n = len(monic) - 1
    if n == 1:
        return ComplexRootSet(np.array([-monic[1]]), np.array([1]))

    rng = np.random.default_rng(seed)
    radius = max(1.0, float(np.max(np.abs(monic[1:]))) ** (1.0 / n))
    angles = 2.0 * math.pi * (np.arange(n) + 0.5) / n + rng.uniform(-0.05, 0.05, size=n)
    z = radius * np.exp(1j * angles)

    abs_coeffs = np.abs(monic)
    for _ in range(DK_MAX_ITERS):
        max_update = 0.0
        max_excess = 0.0
        for j in range(n):
            pj = _polyval(monic, z[j])
            denom = 1.0 + 0.0j
            for k in range(n):
                if k != j:
                    denom *= z[j] - z[k]
            if denom == 0:
                denom = 1e-300
            delta = -pj / denom
            z[j] = z[j] + delta
            max_update = max(max_update, abs(delta))
            floor = 8.0 * n * np.finfo(float).eps * _polyval(abs_coeffs, abs(z[j]))
            max_excess = max(max_excess, abs(pj) - floor)
        if max_update < DK_UPDATE_TOL or max_excess <= 0.0:
            break
    else:
        raise NonConvergenceError("Durand-Kerner hit the iteration cap")

    best = None
    tol = ROOT_CLUSTER_TOL
    while tol <= 1e-3:
        roots, mults = _cluster_roots(z, tol, monic)
        rec = _poly_from_roots(roots, mults)
        err = float(np.max(np.abs(rec - monic))) / max(1.0, float(np.max(np.abs(monic))))
        if best is None or err < best[0]:
            best = (err, roots, mults)
        tol *= 10.0
    _, roots, mults = best
    return ComplexRootSet(roots, mults)
