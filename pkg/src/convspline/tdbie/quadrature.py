"""Composite triangle quadrature: 16 congruent sub-triangles, each carrying a
6-point symmetric rule exact for total degree 4."""

from __future__ import annotations

import numpy as np

__all__ = [
    "rule6_barycentric",
    "composite16_barycentric",
    "triangle_quadrature",
    "mesh_quadrature",
]


def _rule6() -> tuple[np.ndarray, np.ndarray]:
    # two S21 orbits with closed-form parameters
    s10 = np.sqrt(10.0)
    t = np.sqrt(38.0 - 44.0 * np.sqrt(2.0 / 5.0))
    a_plus = (8.0 - s10 + t) / 18.0
    a_minus = (8.0 - s10 - t) / 18.0
    w_root = np.sqrt(213125.0 - 53320.0 * s10)
    w_plus = (620.0 + w_root) / 3720.0
    w_minus = (620.0 - w_root) / 3720.0
    pts = []
    wts = []
    for a, w in ((a_plus, w_plus), (a_minus, w_minus)):
        b = 1.0 - 2.0 * a
        pts += [(b, a, a), (a, b, a), (a, a, b)]
        wts += [w, w, w]
    return np.array(pts), np.array(wts)


_RULE6_PTS, _RULE6_WTS = _rule6()


def rule6_barycentric() -> tuple[np.ndarray, np.ndarray]:
    """Barycentric points (6, 3) and weights (6,) summing to one."""
    return _RULE6_PTS.copy(), _RULE6_WTS.copy()


def _composite16() -> tuple[np.ndarray, np.ndarray]:
    # vertices of the 4x4 self-similar subdivision, in barycentric coordinates
    def node(i: int, j: int) -> np.ndarray:
        return np.array([1.0 - (i + j) / 4.0, i / 4.0, j / 4.0])

    sub_tris = []
    for i in range(4):
        for j in range(4 - i):
            sub_tris.append((node(i, j), node(i + 1, j), node(i, j + 1)))
            if i + j <= 2:
                sub_tris.append((node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)))
    pts = []
    wts = []
    for tri in sub_tris:
        corners = np.stack(tri)  # (3, 3) barycentric corners
        pts.append(_RULE6_PTS @ corners)
        wts.append(_RULE6_WTS / 16.0)
    return np.concatenate(pts), np.concatenate(wts)


_COMP_PTS, _COMP_WTS = _composite16()


def composite16_barycentric() -> tuple[np.ndarray, np.ndarray]:
    """96 barycentric points and weights (summing to one) of the composite rule."""
    return _COMP_PTS.copy(), _COMP_WTS.copy()


def triangle_quadrature(tri, f) -> float:
    """Integrate f over the triangle with vertices tri (3, 3).

    f receives an (N, 3) array of points and returns N values; scalar-only
    callables are mapped row by row.
    """
    corners = np.asarray(tri, dtype=np.float64)
    points = _COMP_PTS @ corners
    area = 0.5 * np.linalg.norm(
        np.cross(corners[1] - corners[0], corners[2] - corners[0])
    )
    try:
        vals = np.asarray(f(points), dtype=np.float64)
        if vals.shape != (points.shape[0],):
            raise TypeError
    except TypeError:
        vals = np.array([f(p) for p in points], dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand produced non-finite values")
    return float(area * np.dot(_COMP_WTS, vals))


def mesh_quadrature(mesh) -> tuple[np.ndarray, np.ndarray]:
    """Physical quadrature points (F, 96, 3) and area-scaled weights (F, 96)."""
    corners = mesh.corner_array()  # (F, 3, 3)
    points = np.einsum("qb,fbk->fqk", _COMP_PTS, corners)
    weights = mesh.areas[:, None] * _COMP_WTS[None, :]
    return np.ascontiguousarray(points), np.ascontiguousarray(weights)
