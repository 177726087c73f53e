"""Triangulated surfaces: generators, OFF file I/O and cached element data."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import MeshError

__all__ = [
    "SurfaceMesh",
    "mesh_unit_square",
    "mesh_unit_sphere",
    "read_off",
    "write_off",
]

_MIN_AREA = 1e-14


@dataclass
class SurfaceMesh:
    """Triangle surface mesh with per-element centroid/area/radius caches."""

    vertices: np.ndarray
    triangles: np.ndarray
    centroids: np.ndarray = field(init=False, repr=False)
    areas: np.ndarray = field(init=False, repr=False)
    bounding_radii: np.ndarray = field(init=False, repr=False)
    edge_max: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(self.vertices, dtype=np.float64)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must be an (V, 3) array")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("triangles must be an (F, 3) index array")
        if t.size and (t.min() < 0 or t.max() >= v.shape[0]):
            raise MeshError("triangle indices out of range")
        self.vertices = v
        self.triangles = t
        corners = v[t]  # (F, 3, 3)
        e1 = corners[:, 1] - corners[:, 0]
        e2 = corners[:, 2] - corners[:, 0]
        self.areas = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)
        if np.any(self.areas <= _MIN_AREA):
            bad = int(np.argmin(self.areas))
            raise MeshError(f"degenerate triangle {bad} (area {self.areas[bad]:.3e})")
        self.centroids = corners.mean(axis=1)
        self.bounding_radii = np.linalg.norm(
            corners - self.centroids[:, None, :], axis=2
        ).max(axis=1)
        edges = np.stack(
            [
                np.linalg.norm(e1, axis=1),
                np.linalg.norm(e2, axis=1),
                np.linalg.norm(corners[:, 2] - corners[:, 1], axis=1),
            ],
            axis=1,
        )
        self.edge_max = edges.max(axis=1)

    @property
    def n_elements(self) -> int:
        return self.triangles.shape[0]

    def corner_array(self) -> np.ndarray:
        return self.vertices[self.triangles]

    def diameter(self) -> float:
        """Largest chordal distance between vertices."""
        v = self.vertices
        if v.shape[0] <= 600:
            diff = v[:, None, :] - v[None, :, :]
            return float(np.sqrt((diff**2).sum(-1)).max())
        d = 0.0
        for i in range(v.shape[0]):
            d = max(d, float(np.sqrt(((v[i] - v) ** 2).sum(-1)).max()))
        return d

    def mean_element_size(self) -> float:
        """Mean longest edge, the mesh-ratio length scale dx."""
        return float(self.edge_max.mean())

    def total_area(self) -> float:
        return float(self.areas.sum())


def mesh_unit_square(n: int) -> SurfaceMesh:
    """[0,1]^2 in the z = 0 plane; n x n cells, two triangles each."""
    if n < 1:
        raise ValueError("need at least one cell per side")
    xs = np.linspace(0.0, 1.0, n + 1)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    vertices = np.column_stack([gx.ravel(), gy.ravel(), np.zeros((n + 1) ** 2)])
    tris = []
    for i in range(n):
        for j in range(n):
            v00 = i * (n + 1) + j
            v10 = (i + 1) * (n + 1) + j
            v01 = v00 + 1
            v11 = v10 + 1
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return SurfaceMesh(vertices=vertices, triangles=np.array(tris))


_ICO_FACES = np.array(
    [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ],
    dtype=np.int64,
)


def _icosahedron_vertices() -> np.ndarray:
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    raw = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=np.float64,
    )
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def mesh_unit_sphere(subdiv: int) -> SurfaceMesh:
    """Icosahedron subdivided `subdiv` times, vertices projected to |x| = 1."""
    if subdiv < 0:
        raise ValueError("subdivision level must be >= 0")
    vertices = [tuple(v) for v in _icosahedron_vertices()]
    faces = [tuple(f) for f in _ICO_FACES]
    for _ in range(subdiv):
        midpoint: dict[tuple[int, int], int] = {}

        def mid(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            if key not in midpoint:
                p = np.asarray(vertices[i]) + np.asarray(vertices[j])
                p /= np.linalg.norm(p)
                midpoint[key] = len(vertices)
                vertices.append(tuple(p))
            return midpoint[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return SurfaceMesh(vertices=np.asarray(vertices), triangles=np.asarray(faces))


def write_off(path, mesh: SurfaceMesh) -> None:
    """OFF text format; vertex coordinates at 17 significant digits."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.vertices.shape[0]} {mesh.triangles.shape[0]} 0\n")
        for x, y, z in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"3 {a} {b} {c}\n")


def read_off(path) -> SurfaceMesh:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise MeshError(f"empty OFF file: {path}")
    if lines[0] != "OFF":
        raise MeshError(f"missing OFF header in {path}")
    try:
        nv, nf, _ = (int(x) for x in lines[1].split())
    except (IndexError, ValueError) as exc:
        raise MeshError(f"malformed OFF counts line in {path}") from exc
    if len(lines) < 2 + nv + nf:
        raise MeshError(f"truncated OFF file: {path}")
    try:
        vertices = np.array(
            [[float(x) for x in lines[2 + i].split()] for i in range(nv)]
        )
    except ValueError as exc:
        raise MeshError(f"malformed vertex line in {path}") from exc
    faces = []
    for i in range(nf):
        parts = lines[2 + nv + i].split()
        if parts[0] != "3" or len(parts) != 4:
            raise MeshError(f"non-triangle face in {path}: {lines[2 + nv + i]!r}")
        faces.append([int(x) for x in parts[1:]])
    return SurfaceMesh(vertices=vertices, triangles=np.array(faces, dtype=np.int64))
