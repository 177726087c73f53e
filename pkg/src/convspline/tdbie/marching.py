"""Marching-on-in-time: Q^0 U^n = a^n - sum_{j>=1} Q^j U^{n-j}."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.sparse.linalg import gmres, splu

from ..errors import MarchingError
from .assembly import RetardedMatrixSet
from .mesh import SurfaceMesh

__all__ = ["TDBIESolution", "time_march", "solution_norms"]


@dataclass
class TDBIESolution:
    """Density history U[n, k] for element k at time step n."""

    U: np.ndarray
    dt: float
    mesh: SurfaceMesh

    @property
    def n_steps(self) -> int:
        return self.U.shape[0] - 1

    def times(self) -> np.ndarray:
        return np.arange(self.U.shape[0]) * self.dt


def time_march(
    matrices: RetardedMatrixSet, rhs_provider: Callable, n_steps: int
) -> TDBIESolution:
    """Solve the marching scheme with a single factorization of Q^0.

    Falls back to GMRES (relative residual 1e-12) when the factorization is
    unavailable.  The history sum runs over j in fixed ascending order so the
    result is independent of any assembly-side parallelism.
    """
    mats = matrices.matrices
    q0 = mats[0].tocsc()
    solve: Callable[[np.ndarray], np.ndarray]
    try:
        lu = splu(q0)
        solve = lu.solve
    except RuntimeError as exc:  # pragma: no cover - degenerate meshes only
        diag = np.abs(q0.diagonal())
        message = (
            f"factorization of Q^0 failed ({exc}); diagonal range "
            f"[{diag.min():.3e}, {diag.max():.3e}]"
        )

        def solve(b: np.ndarray) -> np.ndarray:
            x, info = gmres(q0, b, rtol=1e-12, atol=0.0)
            if info != 0:
                raise MarchingError(message)
            return x

    nel = matrices.mesh.n_elements
    U = np.zeros((n_steps + 1, nel))
    for n in range(n_steps + 1):
        rhs = np.asarray(rhs_provider(n), dtype=np.float64).copy()
        for j in range(1, min(n, len(mats) - 1) + 1):
            if mats[j].nnz:
                rhs -= mats[j] @ U[n - j]
        U[n] = solve(rhs)
        if not np.all(np.isfinite(U[n])):
            raise MarchingError(f"non-finite density at step {n} (instability)")
    return TDBIESolution(U=U, dt=matrices.dt, mesh=matrices.mesh)


def solution_norms(sol: TDBIESolution) -> np.ndarray:
    """Rows (n, t_n, max midpoint value, discrete L1 norm).

    Piecewise-constant densities take their element value at the midpoint, so
    the midpoint max is the plain coefficient max; the discrete L1 norm is
    area weighted.
    """
    n_rows = sol.U.shape[0]
    out = np.zeros((n_rows, 4))
    out[:, 0] = np.arange(n_rows)
    out[:, 1] = out[:, 0] * sol.dt
    out[:, 2] = np.abs(sol.U).max(axis=1) if sol.U.size else 0.0
    out[:, 3] = np.abs(sol.U) @ sol.mesh.areas
    return out
