"""Time-domain boundary integral equation solver: single-layer retarded
potential on triangulated surfaces, piecewise-constant Galerkin in space and
convolution splines in time."""

from .assembly import (
    IncidentField,
    RetardedMatrixSet,
    assemble_matrices,
    assemble_rhs,
    make_rhs_provider,
)
from .marching import TDBIESolution, solution_norms, time_march
from .mesh import SurfaceMesh, mesh_unit_sphere, mesh_unit_square, read_off, write_off
from .quadrature import triangle_quadrature

__all__ = [
    "IncidentField",
    "RetardedMatrixSet",
    "SurfaceMesh",
    "TDBIESolution",
    "assemble_matrices",
    "assemble_rhs",
    "make_rhs_provider",
    "mesh_unit_sphere",
    "mesh_unit_square",
    "read_off",
    "write_off",
    "solution_norms",
    "time_march",
    "triangle_quadrature",
    "run_scattering",
]


def run_scattering(
    mesh: SurfaceMesh,
    T: float,
    dt: float | None = None,
    mesh_ratio: float = 0.5,
    field: IncidentField | None = None,
    basis=None,
    threads: int = 1,
):
    """Assemble and march a scattering run; returns (solution, matrices).

    When dt is not given it is mesh_ratio * (mean longest edge).
    """
    if dt is None:
        dt = mesh_ratio * mesh.mean_element_size()
    field = field if field is not None else IncidentField()
    matrices = assemble_matrices(mesh, dt, basis=basis, threads=threads)
    provider = make_rhs_provider(mesh, field, dt)
    n_steps = int(round(T / dt))
    solution = time_march(matrices, provider, n_steps)
    return solution, matrices
