"""Time marching for the convolution-kernel VIE, stability coefficients,
manufactured right-hand sides and error measurement.

The marching recursion v_n = (a_n - sum_{j>=1} q_j v_{n-j}) / q_0 and the
stability recursion p_n = -(1/q_0) sum q_j p_{n-j} run in the compiled core
when available.  Error sampling windows follow the convergence theorems: the
bounds hold in the backward variable from t_min on, which for the final-level
reconstruction excludes both ends of [0, T]; the study helpers therefore
sample grid nodes in [t_min, T - t_min].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from ._core import march_core, pn_core
from .errors import MarchingError, QuadratureError
from .kernels import Constant, Kernel, kernel_breakpoints, kernel_eval
from .timebasis import (
    BSplineIso,
    CoefficientSequence,
    ModifiedCubic,
    TemporalBasis,
    TimeGrid,
    reconstruct,
)
from .weights import WeightSequence, weights_quadrature

__all__ = [
    "VieProblem",
    "StabilitySequence",
    "SmoothProblem",
    "ConvergenceRow",
    "ConvergenceStudy",
    "march",
    "stability_coeffs",
    "manufactured_rhs",
    "vie_error",
    "error_sample_times",
    "converge_study",
    "default_smooth_problem",
    "gaussian_driver",
]


@dataclass(frozen=True)
class VieProblem:
    """A VIE instance: kernel, driving data a(t) with a(0) = 0, grid, basis."""

    kernel: Kernel
    rhs: Callable
    grid: TimeGrid
    basis: TemporalBasis


@dataclass
class StabilitySequence:
    """Impulse response p_0..p_{n_max} of the discrete scheme (p_0 = 1)."""

    p: np.ndarray
    overflowed: bool = False

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.p)))


def march(weights: WeightSequence, a_samples) -> CoefficientSequence:
    """Solve sum_j q_j v_{n-j} = a_n forward in time."""
    a = np.ascontiguousarray(a_samples, dtype=np.float64)
    q = weights.q
    if q[0] == 0.0:
        raise MarchingError("non-invertible leading weight q_0 = 0")
    if a.shape[0] != weights.grid.n_steps + 1:
        raise ValueError("a_samples must have n_steps + 1 entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if abs(a[0]) > 1e-12 * scale:
        raise MarchingError("driving data must vanish at t = 0")
    v = march_core(q[: weights.support_len], a)
    return CoefficientSequence(values=v, basis=weights.basis, grid=weights.grid)


def stability_coeffs(weights: WeightSequence, n_max: int) -> StabilitySequence:
    """Stability coefficients p_0..p_{n_max} by the defining recursion."""
    if weights.q[0] == 0.0:
        raise MarchingError("non-invertible leading weight q_0 = 0")
    navail = weights.q.shape[0] - 1
    if n_max > navail:
        raise ValueError(f"need weights up to j={n_max}, have {navail}")
    p, overflowed = pn_core(weights.q[: weights.support_len], n_max)
    return StabilitySequence(p=p, overflowed=overflowed)


def manufactured_rhs(
    u_exact: Callable, kernel: Kernel, grid: TimeGrid, tol: float = 1e-12
) -> np.ndarray:
    """a(t_n) = int_0^{t_n} K(t') u(t_n - t') dt' by adaptive quadrature."""
    times = grid.times()
    a = np.zeros_like(times)
    breaks = kernel_breakpoints(kernel)
    for i, t_n in enumerate(times[1:], start=1):
        integrand = lambda s, tn=t_n: kernel_eval(kernel, s) * u_exact(tn - s)
        pts = [b for b in breaks if 0.0 < b < t_n] or None
        val, err = integrate.quad(
            integrand, 0.0, t_n, epsabs=tol, epsrel=1e-13, limit=400, points=pts
        )
        if err > 50 * tol + 1e-13 * abs(val):
            raise QuadratureError(
                f"manufactured rhs quadrature at t={t_n} reached only {err:.2e}"
            )
        a[i] = val
    return a


def _basis_t_min(basis: TemporalBasis, dt: float) -> float:
    if isinstance(basis, BSplineIso):
        return basis.degree * dt if basis.degree > 1 else 0.0
    if isinstance(basis, ModifiedCubic):
        return dt
    return 0.0


def error_sample_times(basis: TemporalBasis, grid: TimeGrid) -> np.ndarray:
    """Grid nodes in [t_min, T - t_min], the theorem-valid window for the
    final-level reconstruction."""
    t_min = _basis_t_min(basis, grid.dt)
    times = grid.times()
    eps = 1e-9 * grid.dt
    return times[(times >= t_min - eps) & (times <= grid.T - t_min + eps)]


def vie_error(
    coeffs: CoefficientSequence,
    u_exact: Callable,
    sample_times,
    t_min: float | None = None,
) -> float:
    """max over samples of |u_exact(t) - U(t)|."""
    samples = np.atleast_1d(np.asarray(sample_times, dtype=np.float64))
    if samples.size == 0:
        raise ValueError("empty sample set")
    if t_min is None:
        t_min = _basis_t_min(coeffs.basis, coeffs.grid.dt)
    eps = 1e-9 * coeffs.grid.dt
    if np.any(samples < t_min - eps) or np.any(samples > coeffs.grid.T + eps):
        raise ValueError(f"sample times must lie in [{t_min}, {coeffs.grid.T}]")
    u_vals = np.array([u_exact(t) for t in samples], dtype=np.float64)
    return float(np.max(np.abs(u_vals - reconstruct(coeffs, samples))))


# ---------------------------------------------------------------------------
# convergence studies


@dataclass(frozen=True)
class SmoothProblem:
    """Manufactured problem: exact solution u on [0, T] with known kernel."""

    kernel: Kernel
    u_exact: Callable
    T: float
    rhs: Callable | None = None  # driver-only preset (self-convergence study)


def default_smooth_problem(kernel: Kernel | None = None, T: float = 10.0) -> SmoothProblem:
    """u(t) = t^6 e^{-t}: vanishing derivatives at 0 up to order five."""
    return SmoothProblem(
        kernel=kernel if kernel is not None else Constant(),
        u_exact=lambda t: t**6 * np.exp(-t),
        T=T,
    )


def gaussian_driver(kernel: Kernel | None = None, T: float = 10.0) -> SmoothProblem:
    """Driver preset a(t) = t^6 exp(-50 (t - 1/2)^2); no closed-form solution,
    errors are measured by self-convergence against a 4x finer run."""
    return SmoothProblem(
        kernel=kernel if kernel is not None else Constant(),
        u_exact=None,
        T=T,
        rhs=lambda t: t**6 * np.exp(-50.0 * (t - 0.5) ** 2),
    )


@dataclass
class ConvergenceRow:
    N: int
    h: float
    error: float
    order: float  # pairwise log2(e_{i-1}/e_i); NaN on the first row


@dataclass
class ConvergenceStudy:
    rows: list
    fitted_order: float


_UNDERFLOW = 1e-14


def _solve_problem(problem: SmoothProblem, basis: TemporalBasis, N: int) -> CoefficientSequence:
    grid = TimeGrid.from_horizon(problem.T, N)
    w = weights_quadrature(problem.kernel, basis, grid)
    if problem.u_exact is not None:
        a = manufactured_rhs(problem.u_exact, problem.kernel, grid)
    else:
        a = np.asarray([problem.rhs(t) for t in grid.times()], dtype=np.float64)
        a[0] = 0.0
    return march(w, a)


def converge_study(problem: SmoothProblem, basis: TemporalBasis, N_list) -> ConvergenceStudy:
    """Errors and fitted order over a dyadic refinement sequence.

    The fitted order is the least-squares slope of log error against log dt
    over the finest half of the range; errors below 1e-14 are excluded.
    """
    N_list = [int(n) for n in N_list]
    if len(N_list) < 4:
        raise ValueError("need at least 4 refinement levels")
    for a, b in zip(N_list, N_list[1:]):
        if b != 2 * a:
            raise ValueError("N_list must be dyadic (each entry twice the previous)")
    rows: list[ConvergenceRow] = []
    for N in N_list:
        coeffs = _solve_problem(problem, basis, N)
        samples = error_sample_times(basis, coeffs.grid)
        if problem.u_exact is not None:
            err = vie_error(coeffs, problem.u_exact, samples)
        else:
            ref = _solve_problem(problem, basis, 4 * N)
            err = float(
                np.max(np.abs(reconstruct(coeffs, samples) - reconstruct(ref, samples)))
            )
        order = np.nan
        if rows and rows[-1].error > _UNDERFLOW and err > _UNDERFLOW:
            order = float(np.log2(rows[-1].error / err))
        rows.append(ConvergenceRow(N=N, h=coeffs.grid.dt, error=err, order=order))

    half = [r for r in rows[-((len(rows) + 1) // 2) :] if r.error > _UNDERFLOW]
    if len(half) >= 2:
        logh = np.log([r.h for r in half])
        loge = np.log([r.error for r in half])
        fitted = float(np.polyfit(logh, loge, 1)[0])
    else:
        fitted = float("nan")
    return ConvergenceStudy(rows=rows, fitted_order=fitted)
