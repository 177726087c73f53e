"""Quadrature weights q_j = int K(t) phi_j(t/dt) dt and classical CQ weights.

Spline-family weights are computed by Gauss-Legendre quadrature per knot
subinterval of supp(phi_j), with an extra split at a step kernel's jump; the
node count starts at (degree + 3) per subinterval and is doubled until two
successive refinements agree to 1e-13 relative when the kernel is oscillatory
on the grid scale (omega * dt > 1) or user supplied.

CQ weights are the power-series coefficients of K_bar(delta(xi)/dt),
recovered by sampling on a circle |xi| = lambda at the (n_steps+1)-st roots of
unity followed by an inverse DFT; lambda^(n_steps+1) = sqrt(eps) balances
truncation against round-off amplification 1/lambda^k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError
from .kernels import (
    Constant,
    Custom,
    Kernel,
    _laplace_raw,
    kernel_breakpoints,
    kernel_eval,
    kernel_oscillation_rate,
)
from .timebasis import (
    BSplineIso,
    CQBasis,
    ModifiedCubic,
    TemporalBasis,
    TimeGrid,
    phi_pieces,
    phi_support,
)

__all__ = [
    "WeightSequence",
    "weights_quadrature",
    "weights_constant_closed_form",
    "weights_cq",
    "cq_symbol",
]

_REL_TOL = 1e-13
_MAX_DOUBLINGS = 7


@dataclass
class WeightSequence:
    """Weights q_0..q_{n_steps} for one (kernel, basis, dt) combination."""

    q: np.ndarray
    basis: TemporalBasis
    kernel: Kernel
    grid: TimeGrid

    @property
    def support_len(self) -> int:
        """Length after trimming structural trailing zeros (marching window)."""
        nz = np.nonzero(self.q)[0]
        return int(nz[-1]) + 1 if nz.size else 1


_gl_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _gl_cache:
        x, w = np.polynomial.legendre.leggauss(n)
        # map to [0, 1]
        _gl_cache[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _gl_cache[n]


def _eval_local_poly(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.full_like(x, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def _translate_mother(basis: TemporalBasis) -> tuple[int, tuple]:
    """(index of the first pure translate, its piece table)."""
    if isinstance(basis, BSplineIso):
        return basis.degree, phi_pieces(basis, basis.degree)
    if isinstance(basis, ModifiedCubic):
        return 3, phi_pieces(basis, 3)
    raise ValueError("CQ weights are computed by weights_cq, not quadrature")


def _weight_single(kernel, pieces, dt, nodes_x, nodes_w, cut) -> float:
    """Integrate K(dt*tau) * phi(tau) over explicit pieces, clipping at cut."""
    total = 0.0
    for k, coeffs in pieces:
        lo, hi = float(k), float(k + 1)
        if cut is not None:
            hi = min(hi, cut)
        if hi <= lo:
            continue
        h = hi - lo
        x = lo + h * nodes_x
        vals = _eval_local_poly(coeffs, x - k)
        total += h * np.dot(nodes_w, kernel_eval(kernel, dt * x) * vals)
    return dt * total


def _compute_all(kernel, basis, grid, n_nodes: int) -> np.ndarray:
    n = grid.n_steps
    dt = grid.dt
    q = np.zeros(n + 1)
    nodes_x, nodes_w = _gl_rule(n_nodes)

    breaks = kernel_breakpoints(kernel)
    cut = breaks[0] / dt if breaks else None

    j0, mother = _translate_mother(basis)
    # boundary members have their own shapes
    for j in range(min(j0, n + 1)):
        lo, hi = phi_support(basis, j)
        if cut is not None and lo >= cut:
            continue
        q[j] = _weight_single(kernel, phi_pieces(basis, j), dt, nodes_x, nodes_w, cut)

    if n < j0:
        return q

    shift = min(k for k, _ in mother) - j0  # piece start relative to index j
    width = len(mother)
    js = np.arange(j0, n + 1)
    if cut is not None:
        # translates fully inside the kernel support go through the batch path
        inside = js[(js + shift + width) <= cut]
        partial = js[((js + shift) < cut) & ((js + shift + width) > cut)]
        for j in partial:
            pieces = tuple((k + (j - j0), c) for k, c in mother)
            q[j] = _weight_single(kernel, pieces, dt, nodes_x, nodes_w, cut)
        js = inside
    if js.size:
        acc = np.zeros(js.size)
        for k, coeffs in mother:
            vals = _eval_local_poly(coeffs, nodes_x)
            taus = (js[:, None] - j0 + k) + nodes_x[None, :]
            acc += kernel_eval(kernel, dt * taus) @ (nodes_w * vals)
        q[js] = dt * acc
    return q


_quad_cache: dict = {}


def weights_quadrature(kernel: Kernel, basis: TemporalBasis, grid: TimeGrid) -> WeightSequence:
    """Gauss-Legendre weights for a spline-family basis.

    Kernels are time invariant, so sequences are cached per (kernel, basis,
    dt) and reused / sliced for shorter grids within a run.
    """
    if isinstance(basis, CQBasis):
        raise ValueError("CQ weights are computed by weights_cq, not quadrature")
    key = (kernel, basis, grid.dt)
    hit = _quad_cache.get(key)
    if hit is not None and hit.grid.n_steps >= grid.n_steps:
        return WeightSequence(
            q=hit.q[: grid.n_steps + 1].copy(), basis=basis, kernel=kernel, grid=grid
        )
    result = _weights_quadrature_nocache(kernel, basis, grid)
    _quad_cache[key] = result
    return result


def _weights_quadrature_nocache(
    kernel: Kernel, basis: TemporalBasis, grid: TimeGrid
) -> WeightSequence:
    degree = 3 if isinstance(basis, ModifiedCubic) else basis.degree
    base_nodes = degree + 3
    adaptive = (
        kernel_oscillation_rate(kernel) * grid.dt > 1.0 or isinstance(kernel, Custom)
    )
    q = _compute_all(kernel, basis, grid, base_nodes)
    if not np.all(np.isfinite(q)):
        raise QuadratureError("kernel produced non-finite values in weight quadrature")
    if adaptive:
        # Forming the argument omega*t in doubles already perturbs an
        # oscillatory kernel by ~eps * omega * t, so two node counts cannot
        # agree below that floor no matter how many nodes are used.
        t_max = grid.dt * (grid.n_steps + basis.translate + 2)
        noise_floor = (
            grid.dt * np.finfo(float).eps * kernel_oscillation_rate(kernel) * t_max
        )
        nodes = base_nodes
        for _ in range(_MAX_DOUBLINGS):
            nodes *= 2
            q_next = _compute_all(kernel, basis, grid, nodes)
            # q_j/dt are the dimensionless coefficients; dt is their natural
            # scale for bounded kernels, and highly oscillatory weights sit
            # far below it without being any less converged.
            scale = max(float(np.max(np.abs(q_next))), grid.dt)
            if np.max(np.abs(q_next - q)) <= max(_REL_TOL * scale, noise_floor):
                q = q_next
                break
            q = q_next
        else:
            raise QuadratureError(
                f"weight quadrature did not converge within {nodes} nodes per subinterval"
            )
    if not np.all(np.isfinite(q)):
        raise QuadratureError("kernel produced non-finite values in weight quadrature")
    return WeightSequence(q=q, basis=basis, kernel=kernel, grid=grid)


def weights_constant_closed_form(basis: TemporalBasis, grid: TimeGrid) -> WeightSequence:
    """Exact constant-kernel weights: (j+1)/(m+1) ramp, or the modified-cubic
    head 5/8, 5/6, 25/24 followed by ones (all times dt)."""
    n = grid.n_steps
    dt = grid.dt
    if isinstance(basis, BSplineIso):
        m = basis.degree
        ramp = np.minimum(np.arange(n + 1) + 1, m + 1) / (m + 1)
        q = dt * ramp
    elif isinstance(basis, ModifiedCubic):
        q = np.full(n + 1, dt)
        head = np.array([5.0 / 8.0, 5.0 / 6.0, 25.0 / 24.0])
        q[: min(3, n + 1)] = dt * head[: min(3, n + 1)]
    else:
        raise ValueError("closed-form constant weights exist only for spline bases")
    return WeightSequence(q=q, basis=basis, kernel=Constant(), grid=grid)


def cq_symbol(method: str, xi):
    """LMM symbol delta(xi) of the underlying ODE solver."""
    xi = np.asarray(xi, dtype=complex)
    if method == "bdf1":
        return 1.0 - xi
    if method == "bdf2":
        return 1.5 - 2.0 * xi + 0.5 * xi * xi
    if method == "bdf3":
        u = 1.0 - xi
        return u + u * u / 2.0 + u * u * u / 3.0
    if method == "bdf4":
        u = 1.0 - xi
        return u + u * u / 2.0 + u * u * u / 3.0 + u * u * u * u / 4.0
    if method == "trapezoidal":
        return 2.0 * (1.0 - xi) / (1.0 + xi)
    raise ValueError(f"unknown CQ method {method!r}")


def weights_cq(
    method: str,
    kernel: Kernel,
    grid: TimeGrid,
    radius_policy: float | None = None,
) -> WeightSequence:
    """Classical CQ weights from the kernel's Laplace transform."""
    n = grid.n_steps
    count = n + 1
    if radius_policy is None:
        lam = float(np.finfo(float).eps ** (0.5 / count))
    else:
        lam = float(radius_policy)
        if not 0.0 < lam < 1.0:
            raise ValueError("circle radius must lie in (0, 1)")
    k = np.arange(count)
    xi = lam * np.exp(2j * np.pi * k / count)
    samples = np.asarray(_laplace_raw(kernel, cq_symbol(method, xi) / grid.dt), dtype=complex)
    if not np.all(np.isfinite(samples)):
        raise QuadratureError(
            "CQ weight sampling hit a transform singularity; adjust the radius policy"
        )
    coeffs = np.fft.fft(samples).real / count
    q = coeffs / lam**k
    return WeightSequence(q=q, basis=CQBasis(method), kernel=kernel, grid=grid)
