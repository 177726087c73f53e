"""Sphere refinement studies: spatial-uniformity defects, midpoint-density
errors against the zeroth-harmonic reduction, and late-time norm behaviour.

With the pulse source at the centre, only the zeroth spherical harmonic is
excited, and the surface-mean density solves the step-kernel VIE

    2*pi * int_0^2 u(t - s) ds = a0(t + t0 - 1),

the reduction the kernels of the step-function stability studies come from.
Solved by the same temporal scheme on a much finer grid it provides the
reference for midpoint convergence orders; the exact density is exactly
2-periodic once the pulse has passed (closed-cavity ringing), so "no
late-time growth" means bounded norms, not decaying ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..kernels import Step
from ..timebasis import CoefficientSequence, ModifiedCubic, TimeGrid, reconstruction_matrix
from ..vie import march
from ..weights import weights_quadrature
from .assembly import IncidentField
from .marching import TDBIESolution, solution_norms
from .mesh import mesh_unit_sphere
from . import run_scattering

__all__ = [
    "SphereLevel",
    "sphere_level",
    "zeroth_harmonic_reference",
    "midpoint_error_vs_reference",
    "late_time_growth_ratio",
]


@dataclass
class SphereLevel:
    subdiv: int
    dt: float
    dx: float
    solution: TDBIESolution
    norms: np.ndarray
    uniformity_defect: float
    mean_series: np.ndarray


def sphere_level(
    subdiv: int,
    T: float = 10.0,
    mesh_ratio: float = 0.5,
    t0: float = 0.0,
    threads: int = 1,
) -> SphereLevel:
    """One scattering run on the level-`subdiv` icosphere."""
    mesh = mesh_unit_sphere(subdiv)
    field = IncidentField(t0=t0)
    sol, _ = run_scattering(mesh, T=T, mesh_ratio=mesh_ratio, field=field, threads=threads)
    norms = solution_norms(sol)
    w = mesh.areas / mesh.areas.sum()
    mean = sol.U @ w
    peak = np.abs(sol.U).max()
    defect = float(np.abs(sol.U - mean[:, None]).max() / peak) if peak else 0.0
    return SphereLevel(
        subdiv=subdiv,
        dt=sol.dt,
        dx=mesh.mean_element_size(),
        solution=sol,
        norms=norms,
        uniformity_defect=defect,
        mean_series=mean,
    )


def zeroth_harmonic_reference(T: float, t0: float = 0.0, n_steps: int = 4096):
    """Reference density u(t): the zeroth-harmonic VIE solved at fine dt.

    Returns (times, values) evaluated densely on [0, T]; values carry the same
    normalisation as the assembled system (no 4*pi prefactor).
    """
    grid = TimeGrid.from_horizon(T, n_steps)
    w = weights_quadrature(Step(L=2.0), ModifiedCubic(), grid)
    field = IncidentField(t0=t0)
    a = field.pulse(grid.times() + t0 - 1.0) / (2.0 * np.pi)
    coeffs = march(w, a)
    t_query = np.linspace(0.0, T * (1 - 1e-12), 8 * 256 + 1)
    B = reconstruction_matrix(ModifiedCubic(), grid, t_query)
    return t_query, B @ coeffs.values


def midpoint_error_vs_reference(
    level: SphereLevel, ref_times: np.ndarray, ref_values: np.ndarray,
    window: tuple[float, float] = (0.0, 6.0),
) -> float:
    """Relative max error of the element (midpoint) densities against the
    zeroth-harmonic reference, continuous in time via the temporal basis."""
    lo, hi = window
    t_query = ref_times[(ref_times >= lo) & (ref_times <= hi)]
    u_ref = np.interp(t_query, ref_times, ref_values)
    grid = TimeGrid(level.dt, level.solution.n_steps)
    B = reconstruction_matrix(ModifiedCubic(), grid, t_query)
    recon = B @ level.solution.U  # (times, elements)
    return float(np.abs(recon - u_ref[:, None]).max() / np.abs(u_ref).max())


def late_time_growth_ratio(level: SphereLevel, tail_fraction: float = 0.2) -> float:
    """max L1 norm over the final `tail_fraction` of the run divided by the
    max over the rest; values <= 1 mean the late-time norms stay below the
    peak reached during/after pulse passage."""
    norms = level.norms
    T = norms[-1, 1]
    cut = T * (1.0 - tail_fraction)
    tail = norms[norms[:, 1] > cut][:, 3].max()
    head = norms[norms[:, 1] <= cut][:, 3].max()
    return float(tail / head)
