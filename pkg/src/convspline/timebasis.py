"""Temporal basis functions for convolution time-stepping.

Three families are supported:

* ``BSplineIso(m)`` -- B-splines of degree m in {0,1,2,3} on [0, inf) with an
  m-fold knot at the origin, in the unit-step variable tau = t/dt.  The spline
  degree doubles as the translate parameter: phi_j(tau) = b^m(tau + m - j) for
  j >= m.
* ``ModifiedCubic`` -- cubic basis whose first three members are combined to
  satisfy parabolic runout at tau = 0, which makes quasi-interpolation
  linearity preserving there.
* ``CQBasis(method)`` -- basis functions of classical convolution quadrature
  for BDF1..BDF4 and the trapezoidal rule, evaluated by recurrence.

Spline evaluation uses exact piecewise-polynomial tables generated once with
rational arithmetic; the Cox-de Boor recursion is kept (``bspline_eval_cox_de_boor``)
as an independent oracle for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import EnvelopeError

__all__ = [
    "TimeGrid",
    "BSplineIso",
    "ModifiedCubic",
    "CQBasis",
    "CoefficientSequence",
    "CQ_METHODS",
    "bspline_eval",
    "bspline_eval_cox_de_boor",
    "phi_eval",
    "modified_cubic_eval",
    "cq_basis_eval",
    "cq_basis_closed_form",
    "cq_basis_profile",
    "bspline_quasi_nodes",
    "reconstruct",
    "phi_support",
    "phi_pieces",
]

MAX_DEGREE = 3
CQ_METHODS = ("bdf1", "bdf2", "bdf3", "bdf4", "trapezoidal")

# Evaluation envelope for the CQ recurrences.
CQ_MAX_INDEX = 10_000
CQ_MAX_TIME = 1_000.0
_OVERFLOW = 1e300


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_n = n*dt, n = 0..n_steps; horizon T = n_steps*dt."""

    dt: float
    n_steps: int

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")

    @classmethod
    def from_horizon(cls, T: float, n_steps: int) -> "TimeGrid":
        return cls(T / n_steps, n_steps)

    @property
    def T(self) -> float:
        return self.n_steps * self.dt

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True)
class BSplineIso:
    """Isogeometric B-spline family of degree (= translate parameter) m."""

    degree: int

    def __post_init__(self) -> None:
        if self.degree not in range(MAX_DEGREE + 1):
            raise ValueError(f"spline degree must be in 0..{MAX_DEGREE}, got {self.degree}")

    @property
    def translate(self) -> int:
        return self.degree

    def label(self) -> str:
        return f"bspline:m={self.degree}"


@dataclass(frozen=True)
class ModifiedCubic:
    """Cubic basis with parabolic runout members at the origin."""

    @property
    def translate(self) -> int:
        return 3

    def label(self) -> str:
        return "modcubic"


@dataclass(frozen=True)
class CQBasis:
    """Convolution-quadrature basis of a linear multistep method."""

    method: str

    def __post_init__(self) -> None:
        if self.method not in CQ_METHODS:
            raise ValueError(f"unknown CQ method {self.method!r}; choose from {CQ_METHODS}")

    def label(self) -> str:
        return f"cq:{self.method}"


TemporalBasis = BSplineIso | ModifiedCubic | CQBasis


@dataclass(frozen=True)
class CoefficientSequence:
    """Coefficients v_0..v_N of the backward-in-time expansion at step N."""

    values: np.ndarray
    basis: TemporalBasis
    grid: TimeGrid

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.shape[0] != self.grid.n_steps + 1:
            raise ValueError("coefficient count must equal n_steps + 1")


# ---------------------------------------------------------------------------
# exact piecewise polynomials

# A spline piece list maps the integer breakpoint k to ascending polynomial
# coefficients valid on [k, k+1), in the global variable tau.


def _poly_add(a: tuple, b: tuple) -> tuple:
    n = max(len(a), len(b))
    return tuple(
        (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
    )


def _poly_mul_linear(p: tuple, c0: Fraction, c1: Fraction) -> tuple:
    """(c0 + c1*tau) * p(tau)."""
    out = [Fraction(0)] * (len(p) + 1)
    for i, a in enumerate(p):
        out[i] += c0 * a
        out[i + 1] += c1 * a
    return tuple(out)


def _poly_shift(p: tuple, s: int) -> tuple:
    """Coefficients of p(tau + s)."""
    out = [Fraction(0)] * len(p)
    for i, a in enumerate(p):
        for k in range(i + 1):
            out[k] += a * math.comb(i, k) * Fraction(s) ** (i - k)
    return tuple(out)


@lru_cache(maxsize=None)
def _bspline_pieces_exact(m: int, j: int) -> tuple:
    """Exact pieces of b^m_j in tau units: knots tau_i = max(i, 0)."""
    if j < -m:
        return ()
    if m == 0:
        return ((j, (Fraction(1),)),) if j >= 0 else ()

    def knot(i: int) -> Fraction:
        return Fraction(max(i, 0))

    pieces: dict[int, tuple] = {}

    def accumulate(sub: tuple, c0: Fraction, c1: Fraction) -> None:
        for k, p in sub:
            q = _poly_mul_linear(p, c0, c1)
            pieces[k] = _poly_add(pieces.get(k, (Fraction(0),)), q)

    d1 = knot(j + m) - knot(j)
    if d1 != 0:
        accumulate(_bspline_pieces_exact(m - 1, j), -knot(j) / d1, 1 / d1)
    d2 = knot(j + m + 1) - knot(j + 1)
    if d2 != 0:
        accumulate(_bspline_pieces_exact(m - 1, j + 1), knot(j + m + 1) / d2, -1 / d2)
    return tuple(sorted((k, p) for k, p in pieces.items() if any(p)))


def _cardinal_pieces_exact(m: int) -> tuple:
    # b^m_0 has no repeated knots: this is the cardinal B-spline b^m.
    return _bspline_pieces_exact(m, 0)


@lru_cache(maxsize=None)
def _modified_cubic_pieces_exact(j: int) -> tuple:
    """Exact pieces (on tau >= 0) of the modified cubic member phi_j."""
    card = _cardinal_pieces_exact(3)

    def centered(shift: int) -> list:
        # B(tau - shift) with B(t) = b^3(t + 2): pieces on [shift-2, shift+2).
        return [(k - 2 + shift, _poly_shift(p, 2 - shift)) for k, p in card]

    if j >= 3:
        combo = centered(j)
    elif j == 0:
        combo = centered(0) + [(k, _poly_mul_linear(p, Fraction(3), Fraction(0))) for k, p in centered(-1)]
    elif j == 1:
        combo = centered(1) + [(k, _poly_mul_linear(p, Fraction(-3), Fraction(0))) for k, p in centered(-1)]
    else:
        combo = centered(2) + centered(-1)
    pieces: dict[int, tuple] = {}
    for k, p in combo:
        if k < 0:
            continue
        pieces[k] = _poly_add(pieces.get(k, (Fraction(0),)), p)
    return tuple(sorted((k, p) for k, p in pieces.items() if any(p)))


@lru_cache(maxsize=None)
def _float_pieces(key) -> tuple:
    """Float piece table (k, coeffs); coeffs ascend in the local u = tau - k."""
    kind, *args = key
    if kind == "iso":
        table = _bspline_pieces_exact(*args)
    else:
        table = _modified_cubic_pieces_exact(*args)
    return tuple(
        (k, np.array([float(c) for c in _poly_shift(p, k)])) for k, p in table
    )


def _eval_pieces(table: tuple, tau: np.ndarray) -> np.ndarray:
    out = np.zeros_like(tau)
    for k, coeffs in table:
        mask = (tau >= k) & (tau < k + 1)
        if not np.any(mask):
            continue
        tk = tau[mask] - k
        acc = np.full_like(tk, coeffs[-1])
        for c in coeffs[-2::-1]:
            acc = acc * tk + c
        out[mask] = acc
    return out


# ---------------------------------------------------------------------------
# spline operations


def bspline_eval(m: int, j: int, t, dt: float = 1.0):
    """b^m_j(t) on knots t_i = max(i, 0)*dt (m-fold knot at the origin)."""
    if m not in range(MAX_DEGREE + 1):
        raise ValueError(f"degree must be in 0..{MAX_DEGREE}, got {m}")
    tau = np.asarray(t, dtype=np.float64) / dt
    scalar = tau.ndim == 0
    tau = np.atleast_1d(tau)
    if j >= 0:
        # translate of the cardinal spline
        val = _eval_pieces(_float_pieces(("iso", m, 0)), tau - j)
    else:
        val = _eval_pieces(_float_pieces(("iso", m, j)), tau)
    return float(val[0]) if scalar else val


def bspline_eval_cox_de_boor(m: int, j: int, t: float, dt: float = 1.0) -> float:
    """Cox-de Boor recursion with the 0/0 -> 0 convention (test oracle)."""
    if m not in range(MAX_DEGREE + 1):
        raise ValueError(f"degree must be in 0..{MAX_DEGREE}, got {m}")

    def knot(i: int) -> float:
        return max(i, 0) * dt

    def rec(mm: int, jj: int) -> float:
        if jj < -m:
            return 0.0
        if mm == 0:
            return 1.0 if jj >= 0 and knot(jj) <= t < knot(jj + 1) else 0.0
        left = 0.0
        d1 = knot(jj + mm) - knot(jj)
        if d1 != 0.0:
            left = (t - knot(jj)) / d1 * rec(mm - 1, jj)
        right = 0.0
        d2 = knot(jj + mm + 1) - knot(jj + 1)
        if d2 != 0.0:
            right = (knot(jj + mm + 1) - t) / d2 * rec(mm - 1, jj + 1)
        return left + right

    return rec(m, j)


def phi_support(basis: TemporalBasis, j: int) -> tuple[float, float]:
    """Support interval of phi_j in tau units (splines only)."""
    if isinstance(basis, BSplineIso):
        m = basis.degree
        return (max(0, j - m), j + 1)
    if isinstance(basis, ModifiedCubic):
        if j >= 3:
            return (j - 2, j + 2)
        return (0, (2, 3, 4)[j])
    raise ValueError("CQ basis functions do not have compact support")


def phi_pieces(basis: TemporalBasis, j: int) -> tuple:
    """Float piece table (k, ascending coeffs on [k, k+1)) of phi_j."""
    if isinstance(basis, BSplineIso):
        m = basis.degree
        if j - m >= 0:
            # caller applies the translate: piece table of b^m at origin
            return tuple((k + j - m, c) for k, c in _float_pieces(("iso", m, 0)))
        return _float_pieces(("iso", m, j - m))
    if isinstance(basis, ModifiedCubic):
        return _float_pieces(("mod", min(j, 3))) if j < 3 else tuple(
            (k + j - 3, c) for k, c in _float_pieces(("mod", 3))
        )
    raise ValueError("CQ basis functions are not piecewise polynomial")


def phi_eval(basis: TemporalBasis, j: int, tau):
    """phi_j(tau) for any basis family; tau = t/dt >= 0."""
    if j < 0:
        raise ValueError(f"basis index must be >= 0, got {j}")
    if isinstance(basis, BSplineIso):
        return bspline_eval(basis.degree, j - basis.degree, tau)
    if isinstance(basis, ModifiedCubic):
        return modified_cubic_eval(j, tau)
    return cq_basis_eval(basis.method, j, tau)


def modified_cubic_eval(j: int, tau):
    """Modified cubic member phi_j at tau >= 0."""
    if j < 0:
        raise ValueError(f"basis index must be >= 0, got {j}")
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=np.float64))
    if j < 3:
        val = _eval_pieces(_float_pieces(("mod", j)), tau_arr)
    else:
        val = _eval_pieces(_float_pieces(("mod", 3)), tau_arr - (j - 3))
    val = np.where(tau_arr >= 0, val, 0.0)
    return float(val[0]) if np.asarray(tau).ndim == 0 else val


def bspline_quasi_nodes(m: int, j: int, dt: float = 1.0) -> float:
    """Schoenberg quasi-interpolation node t^m_j; defined for m >= 1."""
    if m == 0 or m not in range(MAX_DEGREE + 1):
        raise ValueError(f"quasi-interpolation nodes need degree 1..{MAX_DEGREE}, got {m}")
    if j < -m:
        raise ValueError(f"index must be >= -{m}, got {j}")
    if j < 0:
        return dt * (m + j) * (m + j + 1) / (2 * m)
    return dt * (j + (m + 1) / 2)


# ---------------------------------------------------------------------------
# CQ basis functions

_CQ_PHI0_RATE = {
    "bdf1": 1.0,
    "bdf2": 1.5,
    "bdf3": 11.0 / 6.0,
    "bdf4": 25.0 / 12.0,
    "trapezoidal": 2.0,
}


def _check_cq_envelope(method: str, j: int, t: float) -> None:
    if method not in CQ_METHODS:
        raise ValueError(f"unknown CQ method {method!r}")
    if j < 0:
        raise ValueError(f"basis index must be >= 0, got {j}")
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if j > CQ_MAX_INDEX or t > CQ_MAX_TIME:
        raise EnvelopeError(
            f"out of evaluation envelope: j={j} (cap {CQ_MAX_INDEX}), "
            f"t={t} (cap {CQ_MAX_TIME})"
        )


def cq_basis_profile(method: str, j_max: int, t: float) -> np.ndarray:
    """phi_0(t)..phi_{j_max}(t) by the generating-function recurrence."""
    _check_cq_envelope(method, j_max, t)
    phi = np.zeros(j_max + 1)
    phi[0] = math.exp(-_CQ_PHI0_RATE[method] * t)

    def prev(arr, idx):
        return arr[idx] if idx >= 0 else 0.0

    for j in range(1, j_max + 1):
        if method == "bdf1":
            val = t * phi[j - 1] / j
        elif method == "bdf2":
            val = (2.0 * t * phi[j - 1] - t * prev(phi, j - 2)) / j
        elif method == "bdf3":
            val = (3.0 * t * phi[j - 1] - 3.0 * t * prev(phi, j - 2) + t * prev(phi, j - 3)) / j
        elif method == "bdf4":
            val = (
                4.0 * t * phi[j - 1]
                - 6.0 * t * prev(phi, j - 2)
                + 4.0 * t * prev(phi, j - 3)
                - t * prev(phi, j - 4)
            ) / j
        else:  # trapezoidal
            val = ((4.0 * t - 2.0 * (j - 1)) * phi[j - 1] - (j - 2) * prev(phi, j - 2)) / j
        if not math.isfinite(val) or abs(val) > _OVERFLOW:
            raise EnvelopeError(
                f"CQ recurrence overflow for method={method}, j={j}, t={t}"
            )
        phi[j] = val
    return phi


def cq_basis_eval(method: str, j: int, t: float) -> float:
    """phi_j(t) of the CQ basis, by recurrence."""
    _check_cq_envelope(method, j, t)
    return float(cq_basis_profile(method, j, t)[j])


def cq_basis_closed_form(method: str, j: int, t: float) -> float:
    """Independent explicit formulas for BDF1/BDF2/trapezoidal.

    BDF1 members are Erlang densities, BDF2 involves Hermite polynomials and
    the trapezoidal rule differences of Laguerre functions; the polynomial
    factors are evaluated by their classical three-term recurrences.
    """
    _check_cq_envelope(method, j, t)
    if method == "bdf1":
        if t == 0.0:
            return 1.0 if j == 0 else 0.0
        return math.exp(-t + j * math.log(t) - math.lgamma(j + 1))
    if method == "bdf2":
        x = math.sqrt(2.0 * t)
        h_prev, h = 1.0, 2.0 * x  # H_0, H_1
        if j == 0:
            hj = 1.0
        elif j == 1:
            hj = h
        else:
            for k in range(1, j):
                h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
            hj = h
        return hj * (0.5 * t) ** (j / 2.0) * math.exp(-1.5 * t) / math.factorial(j)
    if method == "trapezoidal":
        x = 4.0 * t
        # Laguerre L_0..L_j by recurrence
        l_prev, l = 1.0, 1.0 - x
        if j == 0:
            lj, ljm1 = 1.0, 0.0
        elif j == 1:
            lj, ljm1 = l, l_prev
        else:
            for k in range(1, j):
                l_prev, l = l, ((2 * k + 1 - x) * l - k * l_prev) / (k + 1)
            lj, ljm1 = l, l_prev
        return (-1.0) ** j * math.exp(-0.5 * x) * (lj - ljm1)
    raise ValueError(f"no closed form implemented for method {method!r}")


# ---------------------------------------------------------------------------
# reconstruction


def reconstruction_matrix(basis: TemporalBasis, grid: TimeGrid, times) -> np.ndarray:
    """Matrix B with B[i, k] = phi_{N-k}((T - t_i)/dt), so that B @ v evaluates
    the backward expansion at the query times for any coefficient set sharing
    the grid (columns beyond the basis window are zero)."""
    t_arr = np.atleast_1d(np.asarray(times, dtype=np.float64))
    n = grid.n_steps
    B = np.zeros((t_arr.size, n + 1))
    tau = np.maximum((grid.T - t_arr) / grid.dt, 0.0)
    if isinstance(basis, CQBasis):
        for i, tv in enumerate(tau):
            B[i, ::-1] = cq_basis_profile(basis.method, n, tv)
        return B
    width = basis.translate + 2
    for i, tv in enumerate(tau):
        j_lo = max(0, int(math.floor(tv)) - width)
        j_hi = min(n, int(math.ceil(tv)) + width)
        for j in range(j_lo, j_hi + 1):
            B[i, n - j] = phi_eval(basis, j, tv)
    return B


def reconstruct(coeffs: CoefficientSequence, t):
    """Evaluate U_N(t) = sum_j v_{N-j} phi_j((t_N - t)/dt) at physical t."""
    grid = coeffs.grid
    v = coeffs.values
    n = grid.n_steps
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(t_arr < -1e-12 * grid.dt) or np.any(t_arr > grid.T * (1 + 1e-12) + 1e-300):
        raise ValueError(f"reconstruction time outside [0, {grid.T}]")
    # round-off can push tau negative at t = T; the basis is right-open there
    tau = np.maximum((grid.T - t_arr) / grid.dt, 0.0)
    out = np.zeros_like(t_arr)
    basis = coeffs.basis
    if isinstance(basis, CQBasis):
        for i, tv in enumerate(tau):
            phi = cq_basis_profile(basis.method, n, tv)
            out[i] = np.dot(v[::-1], phi)
    else:
        width = basis.translate + 2
        for i, tv in enumerate(tau):
            j_lo = max(0, int(math.floor(tv)) - width)
            j_hi = min(n, int(math.ceil(tv)) + width)
            js = np.arange(j_lo, j_hi + 1)
            phis = np.array([phi_eval(basis, int(jj), tv) for jj in js])
            out[i] = np.dot(v[n - js], phis)
    return float(out[0]) if np.asarray(t).ndim == 0 else out
