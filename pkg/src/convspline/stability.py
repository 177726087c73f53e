"""Stability analysis: p_n frequency scans, rational Z-transforms for
constant/step kernels, the root-condition classifier, and the step-kernel
reference formulas.

Scans operationalize "unbounded" as max |p_n| exceeding 1e3 within the
experimental range n <= 2500; overflowing recursions report +inf, which is
itself evidence of instability.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NotRationalError
from .kernels import BesselJ0, Constant, Cosine, Kernel, Step
from .timebasis import BSplineIso, ModifiedCubic, TemporalBasis, TimeGrid
from .vie import StabilitySequence, stability_coeffs
from .weights import weights_quadrature

__all__ = [
    "RationalZ",
    "RootInfo",
    "StabilityVerdict",
    "pn_scan",
    "max_abs_pn",
    "rational_Q",
    "root_condition_check",
    "step_m1_pn_reference",
    "step_modified_growth_check",
    "UNBOUNDED_THRESHOLD",
]

UNBOUNDED_THRESHOLD = 1e3
DEFAULT_N_MAX = 2500


@dataclass
class RationalZ:
    """Q(xi) = num(xi)/den(xi), coefficient arrays in ascending powers."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self) -> None:
        self.num = np.trim_zeros(np.asarray(self.num, dtype=np.float64), "b")
        self.den = np.trim_zeros(np.asarray(self.den, dtype=np.float64), "b")
        if self.den.size == 0 or self.den[0] == 0.0:
            raise ValueError("denominator must be nonzero at xi = 0")

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=complex)
        num = np.polynomial.polynomial.polyval(xi, self.num)
        den = np.polynomial.polynomial.polyval(xi, self.den)
        return num / den


@dataclass
class RootInfo:
    value: complex
    modulus: float
    multiplicity: int


@dataclass
class StabilityVerdict:
    classification: str  # "Stable" | "Unstable" | "Marginal"
    roots: list = field(default_factory=list)
    witness: str = ""


def max_abs_pn(
    kernel: Kernel,
    basis: TemporalBasis,
    dt: float,
    n_max: int = DEFAULT_N_MAX,
) -> float:
    """max_{n <= n_max} |p_n| for one kernel/basis/step combination."""
    grid = TimeGrid(dt, n_max)
    w = weights_quadrature(kernel, basis, grid)
    seq = stability_coeffs(w, n_max)
    return seq.max_abs()


def pn_scan(
    basis: TemporalBasis,
    kernel_family: str,
    omega_dt_grid,
    n_max: int = DEFAULT_N_MAX,
    grid: TimeGrid | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Table (omega*dt, max_n |p_n|) over a frequency grid.

    kernel_family is "j0" or "cos".  Only the product omega*dt enters the
    stability coefficients; the optional grid fixes dt (default 1) and omega
    is chosen per grid point.  Rows are computed independently and written by
    index, so results do not depend on the thread count.
    """
    if kernel_family not in ("j0", "cos"):
        raise ValueError("kernel_family must be 'j0' or 'cos'")
    omega_dt = np.atleast_1d(np.asarray(omega_dt_grid, dtype=np.float64))
    if np.any(omega_dt < 0) or np.any(omega_dt > 20 * np.pi * (1 + 1e-12)):
        raise ValueError("omega*dt grid must lie within [0, 20*pi]")
    dt = grid.dt if grid is not None else 1.0
    out = np.empty((omega_dt.size, 2))
    out[:, 0] = omega_dt

    def job(i: int) -> None:
        omega = omega_dt[i] / dt
        kernel = BesselJ0(omega) if kernel_family == "j0" else Cosine(omega)
        out[i, 1] = max_abs_pn(kernel, basis, dt, n_max)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(job, range(omega_dt.size)))
    else:
        for i in range(omega_dt.size):
            job(i)
    return out


def rational_Q(basis: TemporalBasis, kernel: Kernel, grid: TimeGrid) -> RationalZ:
    """Exact rational Z-transform of the weights for constant/step kernels.

    Constant kernel: dt * (1 + xi + ... + xi^m) / ((m+1)(1-xi)) for degree-m
    splines, and the finite-difference reduction for the modified cubic.
    Step kernel: the weights vanish beyond the support window, so Q is the
    polynomial with the quadrature weights as coefficients.
    """
    dt = grid.dt
    if isinstance(kernel, Constant):
        if isinstance(basis, BSplineIso):
            m = basis.degree
            num = np.full(m + 1, dt / (m + 1))
            return RationalZ(num=num, den=np.array([1.0, -1.0]))
        if isinstance(basis, ModifiedCubic):
            # (1 - xi) * sum q_j xi^j telescopes to a cubic numerator
            num = dt / 24.0 * np.array([15.0, 5.0, 5.0, -1.0])
            return RationalZ(num=num, den=np.array([1.0, -1.0]))
        raise NotRationalError("CQ bases are out of scope for rational_Q")
    if isinstance(kernel, Step):
        support_steps = int(np.ceil(kernel.L / dt)) + basis.translate + 4
        w = weights_quadrature(kernel, basis, TimeGrid(dt, support_steps))
        return RationalZ(num=w.q[: w.support_len], den=np.array([1.0]))
    raise NotRationalError(
        "Z-transform is not rational for this kernel; use pn_scan instead"
    )


def _cluster_roots(roots: np.ndarray, tol: float) -> list[RootInfo]:
    """Greedy clustering of companion-matrix roots by complex distance."""
    remaining = list(roots)
    clusters: list[RootInfo] = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        rest = []
        for r in remaining:
            if abs(r - seed) <= tol:
                members.append(r)
            else:
                rest.append(r)
        remaining = rest
        center = complex(np.mean(members))
        clusters.append(
            RootInfo(value=center, modulus=abs(center), multiplicity=len(members))
        )
    return clusters


def root_condition_check(
    Q: RationalZ,
    dt: float,
    c: float = 10.0,
    cluster_tol: float = 1e-7,
) -> StabilityVerdict:
    """Classify stability from the numerator roots of Q.

    Unstable if a root lies strictly inside the annulus threshold
    1/(1 + c*dt), or a multiple root cluster sits within [1/(1+c*dt), 1];
    Marginal when a decision falls within cluster_tol of a boundary.
    """
    num = Q.num
    if Q.den.size > 1:
        # cancel common roots within the clustering tolerance
        den_roots = np.roots(Q.den[::-1])
    else:
        den_roots = np.array([])
    if num.size <= 1:
        return StabilityVerdict(classification="Stable", witness="constant numerator")
    roots = np.roots(num[::-1])
    if den_roots.size:
        keep = []
        cancelled = list(den_roots)
        for r in roots:
            hit = next((i for i, d in enumerate(cancelled) if abs(r - d) <= cluster_tol), None)
            if hit is None:
                keep.append(r)
            else:
                cancelled.pop(hit)
        roots = np.asarray(keep)
    clusters = _cluster_roots(roots, cluster_tol)
    threshold = 1.0 / (1.0 + c * dt)
    marginal = False
    for info in clusters:
        if info.modulus < threshold - cluster_tol:
            return StabilityVerdict(
                classification="Unstable",
                roots=clusters,
                witness=f"root {info.value:.6g} has modulus {info.modulus:.12g} "
                f"< 1/(1+c*dt) = {threshold:.12g}",
            )
        if info.multiplicity >= 2 and threshold <= info.modulus <= 1.0:
            return StabilityVerdict(
                classification="Unstable",
                roots=clusters,
                witness=f"multiplicity-{info.multiplicity} root at {info.value:.6g} "
                f"inside the unit annulus",
            )
        if abs(info.modulus - threshold) <= cluster_tol:
            marginal = True
        if info.multiplicity >= 2 and (
            abs(info.modulus - threshold) <= cluster_tol
            or abs(info.modulus - 1.0) <= cluster_tol
        ):
            marginal = True
    if marginal:
        return StabilityVerdict(
            classification="Marginal",
            roots=clusters,
            witness="a root modulus sits within cluster_tol of a decision boundary",
        )
    return StabilityVerdict(classification="Stable", roots=clusters)


def step_m1_pn_reference(M: int, r: float, n: int) -> float:
    """Closed-form p_n for the step kernel with degree-1 splines on
    M+2 <= n <= 2M-1: 2(-1)^n + (-1)^(n+M) (2 - 4r^2 - 8r(1-r)(n-M))."""
    if not 0.0 <= r < 1.0:
        raise ValueError("fractional part r must lie in [0, 1)")
    if not M + 2 <= n <= 2 * M - 1:
        raise ValueError(f"formula valid for {M + 2} <= n <= {2 * M - 1}, got n={n}")
    return 2.0 * (-1.0) ** n + (-1.0) ** (n + M) * (
        2.0 - 4.0 * r * r - 8.0 * r * (1.0 - r) * (n - M)
    )


def step_modified_growth_check(
    L: float, T: float, grid: TimeGrid
) -> tuple[float, float]:
    """(max |p_n|, max per-period growth factor) for the modified cubic basis
    with a step kernel of duration L, marched to horizon T.

    The growth factor compares window maxima G_k = max{|p_n| : t_n in
    [kL, (k+1)L)} over consecutive full periods.
    """
    dt = grid.dt
    if not L > 5 * dt:
        raise ValueError("step duration must exceed 5*dt")
    n_max = int(np.floor(T / dt + 1e-9))
    w = weights_quadrature(Step(L=L), ModifiedCubic(), TimeGrid(dt, n_max))
    seq = stability_coeffs(w, n_max)
    p = np.abs(seq.p)
    times = np.arange(n_max + 1) * dt
    n_windows = int(np.floor(T / L + 1e-9))
    maxima = []
    for k in range(n_windows):
        mask = (times >= k * L) & (times < (k + 1) * L)
        if mask.any():
            maxima.append(float(p[mask].max()))
    growth = max(
        (maxima[k + 1] / maxima[k] for k in range(len(maxima) - 1)),
        default=1.0,
    )
    return float(p.max()), float(growth)
