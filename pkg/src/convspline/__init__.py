"""Convolution-spline and convolution-quadrature time stepping for
convolution-kernel Volterra integral equations, stability analysis of the
resulting schemes, and a retarded-potential boundary-integral scattering
solver."""

from ._core import BACKEND
from .kernels import BesselJ0, Constant, Cosine, Custom, Step, bessel_j0
from .timebasis import (
    BSplineIso,
    CQBasis,
    CoefficientSequence,
    ModifiedCubic,
    TimeGrid,
    reconstruct,
)
from .vie import converge_study, march, stability_coeffs
from .weights import weights_cq, weights_constant_closed_form, weights_quadrature

__all__ = [
    "BACKEND",
    "BesselJ0",
    "BSplineIso",
    "CQBasis",
    "CoefficientSequence",
    "Constant",
    "Cosine",
    "Custom",
    "ModifiedCubic",
    "Step",
    "TimeGrid",
    "bessel_j0",
    "converge_study",
    "march",
    "reconstruct",
    "stability_coeffs",
    "weights_cq",
    "weights_constant_closed_form",
    "weights_quadrature",
]

__version__ = "0.1.0"
