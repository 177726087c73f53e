"""Convolution kernels K(t), their Laplace transforms, and Bessel J0.

Built-in kernels all satisfy K(0) = 1.  The step kernel is closed on the left
of its jump, K(L) = 1; weight quadrature splits integration intervals at t = L
so the convention only touches a measure-zero set.

J0 is evaluated without external special-function dependencies:

* power series for |x| <= 5 (fully accurate there),
* a Chebyshev fit on [5, 18] built at import time from the integral
  representation J0(x) = (1/pi) * int_0^pi cos(x sin a) da,
* Hankel asymptotic series beyond 18, where its optimal truncation error
  exp(-2x) is below double round-off; the phase x - pi/4 is formed in
  double-double to keep the subtraction from dominating the error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import TransformUnavailableError

__all__ = [
    "Constant",
    "Step",
    "Cosine",
    "BesselJ0",
    "Custom",
    "Kernel",
    "kernel_eval",
    "kernel_laplace",
    "kernel_breakpoints",
    "kernel_oscillation_rate",
    "kernel_label",
    "kernel_from_spec",
    "bessel_j0",
]


@dataclass(frozen=True)
class Constant:
    """K(t) = 1."""


@dataclass(frozen=True)
class Step:
    """K(t) = 1 on [0, L], 0 afterwards."""

    L: float

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ValueError(f"step duration must be positive, got {self.L}")


@dataclass(frozen=True)
class Cosine:
    """K(t) = cos(omega t)."""

    omega: float

    def __post_init__(self) -> None:
        if self.omega < 0:
            raise ValueError("frequency must be >= 0")


@dataclass(frozen=True)
class BesselJ0:
    """K(t) = J0(omega t)."""

    omega: float

    def __post_init__(self) -> None:
        if self.omega < 0:
            raise ValueError("frequency must be >= 0")


@dataclass(frozen=True)
class Custom:
    """User-supplied kernel with optional Laplace transform."""

    evaluator: Callable
    laplace: Callable | None = None
    name: str = "custom"


Kernel = Constant | Step | Cosine | BesselJ0 | Custom


def kernel_eval(kernel: Kernel, t):
    """Pointwise K(t) for t >= 0 (vectorized)."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0):
        raise ValueError("kernel evaluation requires t >= 0")
    if isinstance(kernel, Constant):
        out = np.ones_like(t_arr)
    elif isinstance(kernel, Step):
        out = np.where(t_arr <= kernel.L, 1.0, 0.0)
    elif isinstance(kernel, Cosine):
        out = np.cos(kernel.omega * t_arr)
    elif isinstance(kernel, BesselJ0):
        out = bessel_j0(kernel.omega * t_arr)
    else:
        out = np.asarray(kernel.evaluator(t_arr), dtype=np.float64)
    return float(out) if np.isscalar(t) or np.asarray(t).ndim == 0 else out


def _laplace_raw(kernel: Kernel, s):
    if isinstance(kernel, Constant):
        return 1.0 / s
    if isinstance(kernel, Step):
        return (1.0 - np.exp(-kernel.L * s)) / s
    if isinstance(kernel, Cosine):
        return s / (s * s + kernel.omega**2)
    if isinstance(kernel, BesselJ0):
        # principal branch; evaluations keep Re(s) > 0 so the cut is avoided
        return 1.0 / np.sqrt(np.asarray(s * s + kernel.omega**2, dtype=complex))
    if kernel.laplace is None:
        raise TransformUnavailableError(
            f"kernel {kernel_label(kernel)!r} has no Laplace transform attached"
        )
    return kernel.laplace(s)


def kernel_laplace(kernel: Kernel, s):
    """Laplace transform K_bar(s) for Re(s) > 0."""
    s_arr = np.asarray(s, dtype=complex)
    if np.any(np.real(s_arr) <= 0):
        raise ValueError("Laplace transform requires Re(s) > 0")
    out = np.asarray(_laplace_raw(kernel, s_arr), dtype=complex)
    return complex(out) if np.asarray(s).ndim == 0 else out


def kernel_breakpoints(kernel: Kernel) -> tuple[float, ...]:
    """Interior discontinuities that quadratures must split at."""
    return (kernel.L,) if isinstance(kernel, Step) else ()


def kernel_oscillation_rate(kernel: Kernel) -> float:
    """Oscillation frequency used to trigger adaptive quadrature."""
    if isinstance(kernel, (Cosine, BesselJ0)):
        return kernel.omega
    return 0.0


def kernel_label(kernel: Kernel) -> str:
    if isinstance(kernel, Constant):
        return "constant"
    if isinstance(kernel, Step):
        return f"step:L={kernel.L!r}"
    if isinstance(kernel, Cosine):
        return f"cos:omega={kernel.omega!r}"
    if isinstance(kernel, BesselJ0):
        return f"j0:omega={kernel.omega!r}"
    return kernel.name


def kernel_from_spec(text: str) -> Kernel:
    """Parse a CLI kernel spec: constant | step:L=<v> | cos:omega=<v> | j0:omega=<v>."""
    head, _, rest = text.strip().partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not val:
                raise ValueError(f"malformed kernel parameter {item!r} in {text!r}")
            params[key.strip()] = float(val)
    if head == "constant":
        if params:
            raise ValueError("constant kernel takes no parameters")
        return Constant()
    if head == "step":
        return Step(L=params.pop("L"))
    if head == "cos":
        return Cosine(omega=params.pop("omega"))
    if head == "j0":
        return BesselJ0(omega=params.pop("omega"))
    raise ValueError(f"unknown kernel spec {text!r}")


# ---------------------------------------------------------------------------
# Bessel J0

_SERIES_CUT = 5.0
_ASYMP_CUT = 18.0
_PI4_HI = 0.7853981633974483
_PI4_LO = 3.061616997868383e-17  # pi/4 - fl(pi/4)


def _j0_series(x: np.ndarray) -> np.ndarray:
    q = 0.25 * x * x
    term = np.ones_like(x)
    acc = np.ones_like(x)
    for k in range(1, 22):
        term = term * (-q) / (k * k)
        acc += term
    return acc


def _j0_integral(x: np.ndarray) -> np.ndarray:
    # used only to build the Chebyshev table at import time
    nodes, wts = np.polynomial.legendre.leggauss(96)
    theta = 0.5 * np.pi * (nodes + 1.0)
    w = 0.5 * wts  # absorbs the 1/pi and the interval half-length
    return np.cos(np.multiply.outer(x, np.sin(theta))) @ w


def _build_cheb_band() -> np.ndarray:
    n = 128
    k = np.arange(n)
    y = np.cos(np.pi * (k + 0.5) / n)
    x = 0.5 * (_SERIES_CUT + _ASYMP_CUT) + 0.5 * (_ASYMP_CUT - _SERIES_CUT) * y
    f = _j0_integral(x)
    coeffs = np.array(
        [2.0 / n * np.dot(f, np.cos(j * np.pi * (k + 0.5) / n)) for j in range(n)]
    )
    coeffs[0] *= 0.5
    keep = max(np.nonzero(np.abs(coeffs) > 1e-17)[0].max() + 1, 8)
    return coeffs[:keep]


_CHEB_COEFFS = _build_cheb_band()

# Hankel asymptotic coefficients A_k = prod_{i<=k} -(2i-1)^2 / (8k)
_A = [1.0]
for _k in range(1, 25):
    _A.append(_A[-1] * -((2 * _k - 1) ** 2) / (8.0 * _k))


def _j0_asymptotic(x: np.ndarray) -> np.ndarray:
    inv2 = 1.0 / (x * x)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for k in range(11, -1, -1):
        p = p * inv2 + _A[2 * k] * (-1.0) ** k
        q = q * inv2 + _A[2 * k + 1] * (-1.0) ** k
    q /= x
    # omega = x - pi/4 in double-double
    s = x - _PI4_HI
    bb = x - s
    err = (x - (s + bb)) + (bb - _PI4_HI)
    lo = err - _PI4_LO
    cw = np.cos(s) - lo * np.sin(s)
    sw = np.sin(s) + lo * np.cos(s)
    return np.sqrt(2.0 / (np.pi * x)) * (cw * p - sw * q)


def bessel_j0(x):
    """Bessel function of the first kind, order zero (vectorized)."""
    x_arr = np.abs(np.asarray(x, dtype=np.float64))
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    out = np.empty_like(x_arr)
    small = x_arr <= _SERIES_CUT
    large = x_arr > _ASYMP_CUT
    band = ~small & ~large
    if small.any():
        out[small] = _j0_series(x_arr[small])
    if band.any():
        y = (x_arr[band] - 0.5 * (_SERIES_CUT + _ASYMP_CUT)) / (
            0.5 * (_ASYMP_CUT - _SERIES_CUT)
        )
        out[band] = np.polynomial.chebyshev.chebval(y, _CHEB_COEFFS)
    if large.any():
        out[large] = _j0_asymptotic(x_arr[large])
    return float(out[0]) if scalar else out
