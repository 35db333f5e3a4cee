"""Two-subdomain disk-in-disk triangulations and the integrals defined on them.

The heart Omega_m is the inner disk, the torso Omega_b the surrounding annulus.
Vertices are laid out on concentric rings; ring node counts double exactly when
the mesh size is halved, so the vertex set of a mesh is contained in the vertex
set of its refinement (useful for Richardson extrapolation at common nodes).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import InvalidGeometry, NotBoundaryEdge, NotSpd, TagEmpty


class Subdomain(IntEnum):
    HEART = 1
    TORSO = 2


class Boundary(IntEnum):
    INNER = 1  # the interface dOmega_m
    OUTER = 2  # the body surface dOmega


SUBDOMAIN_NAMES = {Subdomain.HEART: "Heart", Subdomain.TORSO: "Torso"}
BOUNDARY_NAMES = {Boundary.INNER: "InnerBoundary", Boundary.OUTER: "OuterBoundary"}


@dataclass(frozen=True)
class SpdTensor2:
    """Symmetric positive definite 2x2 conductivity/material tensor."""

    m11: float
    m12: float
    m22: float

    def __post_init__(self):
        vals = (self.m11, self.m12, self.m22)
        if not all(math.isfinite(v) for v in vals):
            raise NotSpd(f"non-finite tensor entries {vals}")
        if not (self.m11 > 0 and self.m11 * self.m22 - self.m12**2 > 0):
            raise NotSpd(f"tensor {vals} is not positive definite")

    @classmethod
    def isotropic(cls, sigma: float) -> "SpdTensor2":
        return cls(sigma, 0.0, sigma)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m12, self.m22]])

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12**2

    def scaled(self, factor: float) -> "SpdTensor2":
        return SpdTensor2(factor * self.m11, factor * self.m12, factor * self.m22)

    def is_isotropic(self) -> bool:
        return self.m12 == 0.0 and self.m11 == self.m22


@dataclass
class SubMesh:
    """Local view of one subdomain: local vertex numbering, triangles, boundary."""

    subdomain: Subdomain
    global_ids: np.ndarray  # local -> global vertex index
    vertices: np.ndarray
    triangles: np.ndarray  # local indices
    edges: np.ndarray  # boundary edges, local indices
    edge_tags: np.ndarray
    edge_normals: np.ndarray  # outward (with respect to this subdomain) unit normals
    edge_lengths: np.ndarray
    boundary_local: dict = field(default_factory=dict)  # tag -> local ids, sorted by global id

    @property
    def n(self) -> int:
        return len(self.global_ids)

    @property
    def tags(self) -> list:
        return sorted({Boundary(t) for t in self.edge_tags})

    def edges_with(self, tag: Boundary) -> np.ndarray:
        idx = np.flatnonzero(self.edge_tags == tag)
        if idx.size == 0:
            raise TagEmpty(f"{BOUNDARY_NAMES[Boundary(tag)]} has no edges on {SUBDOMAIN_NAMES[self.subdomain]}")
        return idx

    def interior_local(self) -> np.ndarray:
        on_bdry = np.zeros(self.n, dtype=bool)
        on_bdry[self.edges.ravel()] = True
        return np.flatnonzero(~on_bdry)

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


class Mesh2D:
    """Conforming triangulation of the heart disk and the torso annulus.

    Arrays are set read-only after construction; derived submeshes are cached.
    """

    def __init__(self, vertices, triangles, triangle_tags, boundary_edges, edge_tags,
                 h: float | None = None, r_inner: float | None = None, r_outer: float | None = None):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.triangle_tags = np.ascontiguousarray(triangle_tags, dtype=np.int64)
        self.boundary_edges = np.ascontiguousarray(boundary_edges, dtype=np.int64)
        self.edge_tags = np.ascontiguousarray(edge_tags, dtype=np.int64)
        for a in (self.vertices, self.triangles, self.triangle_tags, self.boundary_edges, self.edge_tags):
            a.setflags(write=False)
        self.h = float(h) if h is not None else float(self.edge_lengths_all().max())
        self.r_inner = r_inner
        self.r_outer = r_outer
        self._sub: dict = {}
        self._edge_sides = self._boundary_edge_sides()

    # -- basic queries ---------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def all_edges(self) -> np.ndarray:
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def edge_lengths_all(self) -> np.ndarray:
        e = self.all_edges()
        return np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def boundary_vertices(self, tag: Boundary) -> np.ndarray:
        e = self.boundary_edges[self.edge_tags == tag]
        if e.size == 0:
            raise TagEmpty(f"no edges carry tag {BOUNDARY_NAMES[Boundary(tag)]}")
        return np.unique(e)

    def _boundary_edge_sides(self) -> list:
        """For each boundary edge, map subdomain -> (triangle index, opposite vertex)."""
        lookup = {}
        for ti, tri in enumerate(self.triangles):
            for k in range(3):
                a, b = tri[k], tri[(k + 1) % 3]
                lookup.setdefault((min(a, b), max(a, b)), []).append((ti, tri[(k + 2) % 3]))
        sides = []
        for a, b in self.boundary_edges:
            entry = {}
            for ti, opp in lookup.get((min(a, b), max(a, b)), []):
                entry[Subdomain(self.triangle_tags[ti])] = (ti, opp)
            sides.append(entry)
        return sides

    def outward_normal(self, edge_index: int, side: Subdomain) -> np.ndarray:
        """Unit normal of a boundary edge pointing out of the named subdomain."""
        if not 0 <= edge_index < len(self.boundary_edges):
            raise NotBoundaryEdge(f"edge {edge_index} is not a boundary edge")
        entry = self._edge_sides[edge_index]
        if side not in entry:
            raise NotBoundaryEdge(f"edge {edge_index} does not bound {SUBDOMAIN_NAMES[Subdomain(side)]}")
        a, b = self.boundary_edges[edge_index]
        _, opp = entry[side]
        return _outward(self.vertices[a], self.vertices[b], self.vertices[opp])

    def find_boundary_edge(self, i: int, j: int) -> int:
        """Index of the boundary edge joining vertices i and j (NotBoundaryEdge otherwise)."""
        e = self.boundary_edges
        hit = np.flatnonzero(((e[:, 0] == i) & (e[:, 1] == j)) | ((e[:, 0] == j) & (e[:, 1] == i)))
        if hit.size == 0:
            raise NotBoundaryEdge(f"({i}, {j}) is not a boundary edge")
        return int(hit[0])

    # -- subdomain views -------------------------------------------------
    def sub(self, subdomain: Subdomain) -> SubMesh:
        subdomain = Subdomain(subdomain)
        if subdomain in self._sub:
            return self._sub[subdomain]
        tri_mask = self.triangle_tags == subdomain
        if not tri_mask.any():
            raise TagEmpty(f"no triangles tagged {SUBDOMAIN_NAMES[subdomain]}")
        tris = self.triangles[tri_mask]
        gids = np.unique(tris)
        g2l = np.full(self.n_vertices, -1, dtype=np.int64)
        g2l[gids] = np.arange(len(gids))
        edges, tags, normals = [], [], []
        for k, (a, b) in enumerate(self.boundary_edges):
            entry = self._edge_sides[k]
            if subdomain not in entry:
                continue
            _, opp = entry[subdomain]
            edges.append((g2l[a], g2l[b]))
            tags.append(self.edge_tags[k])
            normals.append(_outward(self.vertices[a], self.vertices[b], self.vertices[opp]))
        edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
        tags = np.array(tags, dtype=np.int64)
        normals = np.array(normals).reshape(-1, 2)
        verts = self.vertices[gids]
        lengths = np.linalg.norm(verts[edges[:, 0]] - verts[edges[:, 1]], axis=1)
        boundary_local = {}
        for t in np.unique(tags):
            boundary_local[Boundary(t)] = np.unique(edges[tags == t])  # sorted local == sorted global
        sm = SubMesh(subdomain, gids, verts, g2l[tris], edges, tags, normals, lengths, boundary_local)
        self._sub[subdomain] = sm
        return sm

    def __repr__(self):
        return f"Mesh2D(n_vertices={self.n_vertices}, n_triangles={self.n_triangles}, h={self.h:.4g})"


def _outward(pa, pb, popp) -> np.ndarray:
    t = pb - pa
    n = np.array([t[1], -t[0]]) / np.hypot(t[0], t[1])
    mid = 0.5 * (pa + pb)
    if np.dot(n, mid - popp) < 0:
        n = -n
    return n


# ---------------------------------------------------------------------------
# construction


def _ring(radius: float, n: int) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(n) / n
    return radius * np.column_stack([np.cos(ang), np.sin(ang)])


def _stitch(a_ids: np.ndarray, b_ids: np.ndarray) -> list:
    """Triangulate the band between two closed rings by merging their angular orders."""
    na, nb = len(a_ids), len(b_ids)
    if na == 1:
        return [(a_ids[0], b_ids[j], b_ids[(j + 1) % nb]) for j in range(nb)]
    tris = []
    i = j = 0
    while i < na or j < nb:
        ta = (i + 1) / na
        tb = (j + 1) / nb
        if j == nb or (i < na and ta <= tb + 1e-14):
            tris.append((a_ids[i % na], b_ids[j % nb], a_ids[(i + 1) % na]))
            i += 1
        else:
            tris.append((a_ids[i % na], b_ids[j % nb], b_ids[(j + 1) % nb]))
            j += 1
    return tris


def _assemble_rings(r_inner, r_outer, K):
    dr = r_inner / K
    J = max(1, math.ceil((r_outer - r_inner) / dr - 1e-9))
    pts = [np.zeros((1, 2))]
    ring_ids = [np.array([0])]
    nxt = 1
    radii = [r_inner * k / K for k in range(1, K + 1)]
    counts = [6 * k for k in range(1, K + 1)]
    for j in range(1, J + 1):
        r = r_inner + j * (r_outer - r_inner) / J
        radii.append(r)
        counts.append(max(counts[-1], 6 * round(K * r / r_inner)))
    for r, n in zip(radii, counts):
        pts.append(_ring(r, n))
        ring_ids.append(np.arange(nxt, nxt + n))
        nxt += n
    verts = np.vstack(pts)
    tris, tags = [], []
    for k in range(len(ring_ids) - 1):
        band = _stitch(ring_ids[k], ring_ids[k + 1])
        tris.extend(band)
        tags.extend([Subdomain.HEART if k < K else Subdomain.TORSO] * len(band))
    tris = np.array(tris, dtype=np.int64)
    p = verts[tris]
    area = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    flip = area < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    inner, outer = ring_ids[K], ring_ids[-1]
    edges = [(inner[i], inner[(i + 1) % len(inner)]) for i in range(len(inner))]
    etags = [Boundary.INNER] * len(inner)
    edges += [(outer[i], outer[(i + 1) % len(outer)]) for i in range(len(outer))]
    etags += [Boundary.OUTER] * len(outer)
    return verts, tris, np.array(tags), np.array(edges), np.array(etags)


def build_disk_in_disk_mesh(r_inner: float = 1.0, r_outer: float = 2.0, h: float = 0.1) -> Mesh2D:
    """Concentric disk (heart) inside a disk (torso) with every edge no longer than h."""
    if not (0 < r_inner < r_outer) or not math.isfinite(r_outer):
        raise InvalidGeometry(f"need 0 < r_inner < r_outer, got r_inner={r_inner}, r_outer={r_outer}")
    if not (0 < h < r_inner):
        raise InvalidGeometry(f"need 0 < h < r_inner, got h={h}")
    K = math.ceil(1.5 * r_inner / h)
    while True:
        verts, tris, tags, edges, etags = _assemble_rings(r_inner, r_outer, K)
        mesh = Mesh2D(verts, tris, tags, edges, etags, r_inner=r_inner, r_outer=r_outer)
        if mesh.h <= h:
            return mesh
        K += 1


# ---------------------------------------------------------------------------
# integrals and normals


def _trace_values(mesh: Mesh2D, field, tag: Boundary) -> tuple[np.ndarray, np.ndarray]:
    """Return (global boundary vertex ids, values) for a field given on a tag."""
    from .fields import BoundaryField, ScalarField

    ids = mesh.boundary_vertices(tag)
    if isinstance(field, BoundaryField):
        vals = np.asarray(field.values, dtype=float)
    elif isinstance(field, ScalarField):
        sm = mesh.sub(field.subdomain)
        g2l = {g: i for i, g in enumerate(sm.global_ids)}
        vals = np.asarray(field.values)[[g2l[g] for g in ids]]
    else:
        vals = np.asarray(field, dtype=float)
        if vals.ndim == 0:
            vals = np.full(len(ids), float(vals))
    if vals.shape[0] != len(ids):
        raise ValueError(f"field has {vals.shape[0]} values, tag has {len(ids)} vertices")
    return ids, vals


def boundary_integral(mesh: Mesh2D, field, tag: Boundary) -> float:
    """Trapezoidal line integral of a vertex field over all edges carrying tag."""
    ids, vals = _trace_values(mesh, field, Boundary(tag))
    e = mesh.boundary_edges[mesh.edge_tags == tag]
    pos = np.searchsorted(ids, e)
    length = np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]], axis=1)
    return float(np.sum(length * 0.5 * (vals[pos[:, 0]] + vals[pos[:, 1]])))


def domain_integral(mesh: Mesh2D, field, subdomain: Subdomain) -> float:
    """Exact integral of the piecewise-linear interpolant over tagged triangles."""
    from .fields import ScalarField

    sm = mesh.sub(subdomain)
    if isinstance(field, ScalarField):
        if field.subdomain != sm.subdomain:
            raise ValueError("field lives on a different subdomain")
        vals = np.asarray(field.values, dtype=float)
    else:
        vals = np.asarray(field, dtype=float)
        if vals.ndim == 0:
            vals = np.full(sm.n, float(vals))
    area = sm.triangle_areas()
    return float(np.sum(area * vals[sm.triangles].sum(axis=1) / 3.0))


def perimeter(mesh: Mesh2D, tag: Boundary) -> float:
    return boundary_integral(mesh, 1.0, tag)


def area(mesh: Mesh2D, subdomain: Subdomain) -> float:
    return domain_integral(mesh, 1.0, subdomain)


# ---------------------------------------------------------------------------
# text IO


def write_mesh(mesh: Mesh2D, path) -> None:
    with open(path, "w") as fh:
        fh.write("mesh2d v1\n")
        fh.write(f"{mesh.n_vertices}\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for (i, j, k), t in zip(mesh.triangles, mesh.triangle_tags):
            fh.write(f"{i} {j} {k} {SUBDOMAIN_NAMES[Subdomain(t)]}\n")
        for (i, j), t in zip(mesh.boundary_edges, mesh.edge_tags):
            fh.write(f"{i} {j} {BOUNDARY_NAMES[Boundary(t)]}\n")


def _parse_tag(token: str, kind):
    names = SUBDOMAIN_NAMES if kind is Subdomain else BOUNDARY_NAMES
    for k, v in names.items():
        if token == v:
            return int(k)
    return int(kind(int(token)))


def read_mesh(path) -> Mesh2D:
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    if not lines or lines[0] != ["mesh2d", "v1"]:
        raise InvalidGeometry("missing 'mesh2d v1' header")
    nv = int(lines[1][0])
    verts = np.array([[float(a), float(b)] for a, b in lines[2:2 + nv]])
    tris, ttags, edges, etags = [], [], [], []
    for tok in lines[2 + nv:]:
        if len(tok) == 4:
            tris.append([int(t) for t in tok[:3]])
            ttags.append(_parse_tag(tok[3], Subdomain))
        elif len(tok) == 3:
            edges.append([int(t) for t in tok[:2]])
            etags.append(_parse_tag(tok[2], Boundary))
        else:
            raise InvalidGeometry(f"unparseable mesh line: {' '.join(tok)}")
    verts_r = np.linalg.norm(verts, axis=1)
    etags_a = np.array(etags)
    e = np.array(edges).reshape(-1, 2)
    r_in = float(verts_r[e[etags_a == Boundary.INNER]].mean()) if (etags_a == Boundary.INNER).any() else None
    r_out = float(verts_r[e[etags_a == Boundary.OUTER]].mean()) if (etags_a == Boundary.OUTER).any() else None
    return Mesh2D(verts, np.array(tris).reshape(-1, 3), np.array(ttags), e, etags_a,
                  r_inner=r_in, r_outer=r_out)
