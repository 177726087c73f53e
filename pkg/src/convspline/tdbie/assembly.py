"""Retarded matrix assembly Q^m_{jk} = int int phi_m(|x-y|/dt) / |x-y| dx dy.

Off-diagonal element pairs use the tensor product of the composite triangle
rule.  The coincident (diagonal) 4D integrals are reduced to relative
coordinates z = u - w on the reference triangle, split over the six origin
triangles of the difference hexagon, and Duffy-transformed so the jacobian
cancels the 1/|x-y| singularity; the same composite rule integrates each
smooth factor.

All basis families here are built from cardinal B-spline translates plus a
few boundary shapes, so the quadrature accumulates translate "bins"
S_g = sum w * b(|x-y|/dt - g)/|x-y| once per pair and the per-index matrices
are assembled from the bins afterwards.  Entries of structurally excluded
pairs (distance interval outside dt*supp(phi_m), bounded via centroid
distance +/- bounding radii) are exact zeros and are skipped unless
``use_filter=False``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import sparse

from .._core import batch_pair_bins
from .._core._ref import cardinal_bspline
from ..errors import AssemblyError, IncidentFieldError
from ..timebasis import BSplineIso, ModifiedCubic, TemporalBasis, phi_pieces
from .mesh import SurfaceMesh
from .quadrature import composite16_barycentric, mesh_quadrature

__all__ = [
    "RetardedMatrixSet",
    "IncidentField",
    "assemble_matrices",
    "assemble_rhs",
    "make_rhs_provider",
]

MQ_CAP = 4096


@dataclass
class RetardedMatrixSet:
    """Sparse symmetric matrices Q^0..Q^{M_Q} of the marching scheme."""

    matrices: list
    dt: float
    basis: TemporalBasis
    mesh: SurfaceMesh

    @property
    def m_count(self) -> int:
        return len(self.matrices)


@dataclass(frozen=True)
class IncidentField:
    """Spherical pulse a(x, t) = a0(t + t0 - |x - source|) / |x - source| with
    a0(t) = t^4 exp(-20 (t - 1/2)^2) for t > 0 and 0 otherwise."""

    t0: float = 0.0
    source: tuple = (0.0, 0.0, 0.0)

    def pulse(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros_like(t)
        pos = t > 0.0
        tp = t[pos]
        out[pos] = tp**4 * np.exp(-20.0 * (tp - 0.5) ** 2)
        return out

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        r = np.linalg.norm(np.asarray(x, dtype=np.float64) - np.asarray(self.source), axis=-1)
        if np.any(r < 1e-9):
            raise IncidentFieldError("incident field source lies on the surface")
        return self.pulse(t + self.t0 - r) / r


def _basis_plan(basis: TemporalBasis):
    """(degree, bin range callback, column builder) for one basis family.

    Columns m of Q^m are linear combinations of cardinal bins S_g plus, for
    the isogeometric family, m boundary shapes evaluated directly.
    """
    if isinstance(basis, ModifiedCubic):
        degree = 3
        g_min = -3  # S_{-3} carries B(tau + 1), the runout correction term

        def columns(m_count: int) -> list[list[tuple[int, float]]]:
            cols = []
            for m in range(m_count):
                if m == 0:
                    cols.append([(-2, 1.0), (-3, 3.0)])
                elif m == 1:
                    cols.append([(-1, 1.0), (-3, -3.0)])
                elif m == 2:
                    cols.append([(0, 1.0), (-3, 1.0)])
                else:
                    cols.append([(m - 2, 1.0)])
            return cols

        return degree, g_min, columns
    if isinstance(basis, BSplineIso):
        degree = basis.degree
        g_min = 0

        def columns(m_count: int) -> list[list[tuple[int, float]]]:
            # boundary columns m < degree are handled separately
            return [[(m - degree, 1.0)] if m >= degree else [] for m in range(m_count)]

        return degree, g_min, columns
    raise AssemblyError("retarded matrices need a compactly supported basis")


def _boundary_eval(basis: TemporalBasis, j: int, x: np.ndarray) -> np.ndarray:
    """phi_j (j < degree) of the isogeometric family at x >= 0."""
    out = np.zeros_like(x)
    for k, coeffs in phi_pieces(basis, j):
        mask = (x >= k) & (x < k + 1)
        if mask.any():
            xk = x[mask] - k
            acc = np.full_like(xk, coeffs[-1])
            for c in coeffs[-2::-1]:
                acc = acc * xk + c
            out[mask] = acc
    return out


# Duffy pieces of the difference hexagon: (a, b, ell) with the origin corner
# at z = 0; the overlap area factor is (1 - s * ell(w(t)))^2 / 2.
_DUFFY_PIECES = (
    ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0)),
    ((-1.0, 0.0), (0.0, -1.0), (-1.0, -1.0)),
    ((1.0, 0.0), (1.0, -1.0), (1.0, 0.0)),
    ((1.0, -1.0), (0.0, -1.0), (0.0, -1.0)),
    ((-1.0, 0.0), (-1.0, 1.0), (-1.0, 0.0)),
    ((-1.0, 1.0), (0.0, 1.0), (0.0, 1.0)),
)


def _duffy_square_rule() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(s, t, w) nodes covering the unit square with the composite rule."""
    bary, wts = composite16_barycentric()
    lower = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    upper = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    pts = np.concatenate([bary @ lower, bary @ upper])
    w = np.concatenate([wts, wts]) * 0.5
    return pts[:, 0], pts[:, 1], w


_DUFFY_S, _DUFFY_T, _DUFFY_W = _duffy_square_rule()


def _diagonal_bins(
    corners: np.ndarray,
    inv_dt: float,
    basis: TemporalBasis,
    degree: int,
    g_lo: int,
    g_hi: int,
    boundary: list,
) -> tuple[np.ndarray, np.ndarray]:
    """Cardinal bins S_g (and boundary-column values) for a coincident pair."""
    e1 = corners[1] - corners[0]
    e2 = corners[2] - corners[0]
    two_area = np.linalg.norm(np.cross(e1, e2))
    bins = np.zeros(max(g_hi - g_lo + 1, 0))
    bvals = np.zeros(len(boundary))
    s, t, w = _DUFFY_S, _DUFFY_T, _DUFFY_W
    for (ax, ay), (bx, by), (lx, ly) in _DUFFY_PIECES:
        w1 = (1.0 - t) * ax + t * bx
        w2 = (1.0 - t) * ay + t * by
        mw = np.outer(w1, e1) + np.outer(w2, e2)
        d = np.linalg.norm(mw, axis=1)
        ell = lx * w1 + ly * w2
        fac = w * (1.0 - s * ell) ** 2 / (2.0 * d)
        x = s * d * inv_dt
        for g in range(g_lo, g_hi + 1):
            bins[g - g_lo] += np.dot(fac, cardinal_bspline(degree, x - g))
        for i, j in enumerate(boundary):
            bvals[i] += np.dot(fac, _boundary_eval(basis, j, x))
    scale = two_area * two_area
    return bins * scale, bvals * scale


def assemble_matrices(
    mesh: SurfaceMesh,
    dt: float,
    basis: TemporalBasis | None = None,
    use_filter: bool = True,
    threads: int = 1,
    mq_cap: int = MQ_CAP,
) -> RetardedMatrixSet:
    """Assemble Q^0..Q^{M_Q} with M_Q = ceil(diam/dt) + 3."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    basis = basis if basis is not None else ModifiedCubic()
    degree, g_min, column_builder = _basis_plan(basis)
    diam = mesh.diameter()
    m_top = int(np.ceil(diam / dt)) + 3
    if m_top > mq_cap:
        raise AssemblyError(
            f"M_Q = {m_top} exceeds the configured cap {mq_cap}; increase dt"
        )
    m_count = m_top + 1
    g_cap = m_top - degree  # largest cardinal bin any column uses

    points, weights = mesh_quadrature(mesh)
    nel = mesh.n_elements
    inv_dt = 1.0 / dt
    cent = mesh.centroids
    rad = mesh.bounding_radii

    # pair windows
    ia, ib = np.triu_indices(nel, k=1)
    dc = np.linalg.norm(cent[ia] - cent[ib], axis=1)
    rr = rad[ia] + rad[ib]
    tau_min = np.maximum(dc - rr, 0.0) * inv_dt
    tau_max = (dc + rr) * inv_dt
    if use_filter:
        g_lo = np.maximum(np.floor(tau_min).astype(np.int64) - degree, g_min)
        g_hi = np.minimum(np.ceil(tau_max).astype(np.int64), g_cap)
    else:
        g_lo = np.full(ia.shape, g_min, dtype=np.int64)
        g_hi = np.full(ia.shape, g_cap, dtype=np.int64)
    keep = g_hi >= g_lo
    ia, ib, g_lo, g_hi = ia[keep], ib[keep], g_lo[keep], g_hi[keep]
    tau_min = tau_min[keep]
    nbins = g_hi - g_lo + 1
    out_off = np.concatenate([[0], np.cumsum(nbins)])
    flat = np.zeros(int(out_off[-1]))

    def run_chunk(lo: int, hi: int) -> None:
        batch_pair_bins(
            points,
            weights,
            np.ascontiguousarray(ia[lo:hi]),
            np.ascontiguousarray(ib[lo:hi]),
            np.ascontiguousarray(g_lo[lo:hi]),
            np.ascontiguousarray(nbins[lo:hi]),
            np.ascontiguousarray(out_off[lo:hi]),
            flat,
            inv_dt,
            degree,
        )

    npairs = ia.shape[0]
    if threads > 1 and npairs:
        bounds = np.linspace(0, npairs, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda i: run_chunk(bounds[i], bounds[i + 1]), range(threads)))
    elif npairs:
        run_chunk(0, npairs)

    # isogeometric boundary columns need their own shapes per pair
    boundary_cols = list(range(degree)) if isinstance(basis, BSplineIso) else []
    bvals_pairs = np.zeros((npairs, len(boundary_cols)))
    if boundary_cols:
        need = np.nonzero(tau_min < degree)[0] if use_filter else np.arange(npairs)
        for p in need:
            pa, pb = points[ia[p]], points[ib[p]]
            diff = pa[:, None, :] - pb[None, :, :]
            d = np.sqrt(np.einsum("abk,abk->ab", diff, diff)).ravel()
            wgt = np.multiply.outer(weights[ia[p]], weights[ib[p]]).ravel() / d
            x = d * inv_dt
            for i, j in enumerate(boundary_cols):
                bvals_pairs[p, i] = np.dot(wgt, _boundary_eval(basis, j, x))

    columns = column_builder(m_count)
    rows_m: list[list] = [[] for _ in range(m_count)]
    cols_m: list[list] = [[] for _ in range(m_count)]
    vals_m: list[list] = [[] for _ in range(m_count)]

    def push(m: int, i: int, j: int, v: float) -> None:
        if v == 0.0:
            return
        rows_m[m].append(i)
        cols_m[m].append(j)
        vals_m[m].append(v)
        if i != j:
            rows_m[m].append(j)
            cols_m[m].append(i)
            vals_m[m].append(v)

    for p in range(npairs):
        base = int(out_off[p])
        lo = int(g_lo[p])
        hi = int(g_hi[p])
        for m, combo in enumerate(columns):
            acc = 0.0
            for g, coef in combo:
                if lo <= g <= hi:
                    acc += coef * flat[base + g - lo]
            if m in boundary_cols:
                acc += bvals_pairs[p, boundary_cols.index(m)]
            push(m, int(ia[p]), int(ib[p]), acc)

    # coincident pairs via the Duffy split
    corner_arr = mesh.corner_array()
    diag_hi_all = np.floor(2.0 * rad * inv_dt).astype(np.int64)
    for e in range(nel):
        hi = min(int(diag_hi_all[e]), g_cap)
        lo = g_min
        bins, bvals = _diagonal_bins(
            corner_arr[e], inv_dt, basis, degree, lo, hi, boundary_cols
        )
        for m, combo in enumerate(columns):
            acc = 0.0
            for g, coef in combo:
                if lo <= g <= hi:
                    acc += coef * bins[g - lo]
            if m in boundary_cols:
                acc += bvals[boundary_cols.index(m)]
            push(m, e, e, acc)

    mats = [
        sparse.coo_matrix(
            (np.asarray(vals_m[m]), (np.asarray(rows_m[m], dtype=np.int64), np.asarray(cols_m[m], dtype=np.int64))),
            shape=(nel, nel),
        ).tocsr()
        for m in range(m_count)
    ]
    return RetardedMatrixSet(matrices=mats, dt=dt, basis=basis, mesh=mesh)


def assemble_rhs(mesh: SurfaceMesh, field_fn: Callable, t: float) -> np.ndarray:
    """Per-element integrals of the incident field at physical time t."""
    points, weights = mesh_quadrature(mesh)
    vals = field_fn(points.reshape(-1, 3), t).reshape(points.shape[:2])
    return np.einsum("fq,fq->f", weights, vals)


def make_rhs_provider(mesh: SurfaceMesh, field_fn: Callable, dt: float) -> Callable:
    """Step-indexed right-hand-side provider with cached geometry."""
    points, weights = mesh_quadrature(mesh)
    flat = points.reshape(-1, 3)

    def provider(n: int) -> np.ndarray:
        vals = field_fn(flat, n * dt).reshape(points.shape[:2])
        return np.einsum("fq,fq->f", weights, vals)

    return provider
