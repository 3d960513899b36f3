"""Triangle meshes: tessellation of tagged B-Rep faces, volume, topology checks."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError
from .kernel import BRepLite
from .polygon import triangulate


@dataclass
class TriMesh:
    """Indexed triangle mesh; triangles wound CCW seen from outside."""

    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int64
    tags: list  # FaceTag per triangle
    name: str = "model"

    _tri_pts: np.ndarray | None = field(default=None, repr=False, compare=False)
    _mask_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)

    @property
    def triangle_points(self):
        """(T, 3, 3) corner coordinates, cached for distance queries."""
        if self._tri_pts is None:
            self._tri_pts = np.ascontiguousarray(self.vertices[self.triangles])
        return self._tri_pts

    def tag_mask(self, tag_filter):
        """Boolean per-triangle mask for a set of face tags (memoized)."""
        key = frozenset(tag_filter)
        mask = self._mask_cache.get(key)
        if mask is None:
            mask = np.fromiter((t in key for t in self.tags), dtype=np.bool_,
                               count=len(self.tags))
            self._mask_cache[key] = mask
        return mask

    def tag_groups(self):
        """Contiguous (tag, start, stop) runs over the triangle list."""
        groups = []
        start = 0
        for i in range(1, len(self.tags) + 1):
            if i == len(self.tags) or self.tags[i] != self.tags[start]:
                groups.append((self.tags[start], start, i))
                start = i
        return groups


def _plane_basis(vertices, normal):
    origin = np.asarray(vertices[0])
    u = np.asarray(vertices[1]) - origin
    u = u / np.linalg.norm(u)
    v = np.cross(np.asarray(normal), u)
    return origin, u, v


def tessellate(brep: BRepLite, name="model") -> TriMesh:
    """Triangulate every tagged face; vertices are shared within a feature.

    Vertex order is deterministic: features in history order, faces in role
    order, polygon vertices in stored order. Sharing is keyed on exact
    coordinates so each extrusion tessellates watertight.
    """
    vertices = []
    index_of = {}  # (feature_id, xyz) -> global index
    triangles = []
    tags = []
    for face in brep.faces:
        local = []
        for p in face.vertices:
            key = (face.tag.feature_id, p)
            idx = index_of.get(key)
            if idx is None:
                idx = len(vertices)
                index_of[key] = idx
                vertices.append(p)
            local.append(idx)
        origin, u, v = _plane_basis(face.vertices, face.normal)
        pts2d = [
            (float(np.dot(np.asarray(p) - origin, u)),
             float(np.dot(np.asarray(p) - origin, v)))
            for p in face.vertices
        ]
        try:
            tris = triangulate(pts2d)
        except GeometryError as exc:
            raise GeometryError(f"tessellation failed: {exc}",
                                face.tag.feature_id) from None
        for a, b, c in tris:
            triangles.append((local[a], local[b], local[c]))
            tags.append(face.tag)
    return TriMesh(np.array(vertices, dtype=np.float64),
                   np.array(triangles, dtype=np.int64), tags, name)


def mesh_volume(mesh: TriMesh) -> float:
    """Signed volume by the divergence theorem; positive for outward winding."""
    pts = mesh.triangle_points
    v0, v1, v2 = pts[:, 0, :], pts[:, 1, :], pts[:, 2, :]
    return float(np.einsum("ij,ij->i", v0, np.cross(v1, v2)).sum() / 6.0)


def triangle_areas(mesh: TriMesh) -> np.ndarray:
    pts = mesh.triangle_points
    cross = np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def connected_components(mesh: TriMesh):
    """Vertex index sets of each connected component (by shared vertices)."""
    parent = list(range(len(mesh.vertices)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b, c in mesh.triangles:
        ra, rb, rc = find(int(a)), find(int(b)), find(int(c))
        parent[rb] = ra
        parent[find(int(c))] = find(int(a))
        _ = rc
    groups = defaultdict(set)
    for i in range(len(mesh.vertices)):
        groups[find(i)].add(i)
    return list(groups.values())


@dataclass(frozen=True)
class TopologyReport:
    components: int
    euler_per_component: tuple  # chi per component
    boundary_edges: int  # undirected edges with != 2 incident triangles
    misoriented_edges: int  # directed edges repeated (inconsistent winding)
    degenerate_triangles: int

    @property
    def watertight(self):
        return (self.boundary_edges == 0 and self.misoriented_edges == 0
                and self.degenerate_triangles == 0
                and all(chi == 2 for chi in self.euler_per_component))


def topology_report(mesh: TriMesh) -> TopologyReport:
    """Edge census and Euler characteristic per connected component."""
    undirected = Counter()
    directed = Counter()
    for a, b, c in mesh.triangles.tolist():
        for e in ((a, b), (b, c), (c, a)):
            directed[e] += 1
            undirected[tuple(sorted(e))] += 1
    boundary = sum(1 for count in undirected.values() if count != 2)
    misoriented = sum(count - 1 for count in directed.values() if count > 1)

    components = connected_components(mesh)
    vert_comp = {}
    for ci, verts in enumerate(components):
        for v in verts:
            vert_comp[v] = ci
    v_count = Counter(vert_comp[v] for v in vert_comp)
    e_count = Counter()
    for (a, b), _ in undirected.items():
        e_count[vert_comp[a]] += 1
    f_count = Counter(vert_comp[int(t[0])] for t in mesh.triangles)
    chis = tuple(v_count[ci] - e_count[ci] + f_count[ci] for ci in range(len(components)))

    areas = triangle_areas(mesh)
    scale = float(np.abs(mesh.vertices).max()) if len(mesh.vertices) else 1.0
    degenerate = int((areas <= 1e-12 * max(scale, 1.0) ** 2).sum())
    return TopologyReport(len(components), chis, boundary, misoriented, degenerate)


def meshes_equal(a: TriMesh, b: TriMesh, tol=0.0) -> bool:
    """Structural equality; `tol` bounds coordinate differences."""
    if a.name != b.name or a.tags != b.tags:
        return False
    if a.vertices.shape != b.vertices.shape or a.triangles.shape != b.triangles.shape:
        return False
    if not np.array_equal(a.triangles, b.triangles):
        return False
    if tol == 0.0:
        return bool(np.array_equal(a.vertices, b.vertices))
    return bool(np.abs(a.vertices - b.vertices).max() <= tol)


def bounding_box(mesh: TriMesh):
    return mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)


def assert_valid(mesh: TriMesh):
    """Raise GeometryError if basic mesh invariants are violated."""
    if len(mesh.triangles) == 0:
        raise GeometryError("mesh has no triangles")
    if mesh.triangles.min() < 0 or mesh.triangles.max() >= len(mesh.vertices):
        raise GeometryError("triangle index out of range")
    report = topology_report(mesh)
    if report.degenerate_triangles:
        raise GeometryError(f"{report.degenerate_triangles} degenerate triangles")
    if report.boundary_edges or report.misoriented_edges:
        raise GeometryError(
            f"mesh is not watertight: {report.boundary_edges} boundary edges, "
            f"{report.misoriented_edges} misoriented edges")
    if any(chi != 2 for chi in report.euler_per_component):
        raise GeometryError(
            f"component Euler characteristics {report.euler_per_component}, expected 2")


_ = math, FaceTag  # re-exported names used by callers of this module
