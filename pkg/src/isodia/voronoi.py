"""Dirichlet-Voronoi cell of ``2L``: relevant vectors, vertices, ridges, belts.

The cell ``DV(2L)`` is the intersection of the halfspaces
``<x, y> <= |y|^2`` over the relevant vectors ``y`` of ``L``; each such ``y``
is the centre of the facet it defines.
"""

from __future__ import annotations

import enum
import functools
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.spatial import HalfspaceIntersection, cKDTree

from .errors import GeometryError, ResourceLimitError
from .lattice import Lattice, enumerate_vectors

EPS_GEO = 1e-9
MAX_VREP_DIM = 7
MAX_HREP_DIM = 8


def relevant_vectors(L: Lattice) -> np.ndarray:
    """Coefficient vectors of the Voronoi-relevant vectors of ``L``.

    ``v`` is relevant iff ``+-v`` are the only shortest vectors of the coset
    ``v + 2L``.  Every coset minimum has norm at most ``2 mu(L)``, and the
    nearest-plane bound ``mu(L) <= sqrt(sum r_ii^2) / 2`` (``r_ii`` the
    Cholesky pivots) keeps the candidate list complete.
    """
    d = L.dim
    if d > MAX_HREP_DIM:
        raise ResourceLimitError(f"relevant vectors are supported for d <= {MAX_HREP_DIM}")
    pivots2 = np.diag(np.linalg.cholesky(L.gram)) ** 2
    radius = float(np.sqrt(pivots2.sum()))
    X, n2 = enumerate_vectors(L, radius)
    members = defaultdict(list)
    for k, key in enumerate(map(tuple, X % 2)):
        if any(key):
            members[key].append(k)
    keep = []
    for key, idx in members.items():
        norms = n2[idx]
        m = norms.min()
        shortest = [i for i, v in zip(idx, norms) if v <= m * (1 + 1e-9)]
        if len(shortest) == 2:
            keep.extend(shortest)
    if len(members) != 2**d - 1:
        raise GeometryError("candidate enumeration missed a coset (tolerance failure)")
    keep.sort()
    return X[keep]


@dataclass
class Facet:
    index: int
    coeffs: np.ndarray
    center: np.ndarray
    offset: float
    vertices: List[int]

    @property
    def normal(self):
        return self.center / self.offset

    @property
    def gons(self):
        return len(self.vertices)


@dataclass
class VoronoiCell:
    lattice: Lattice
    facets: List[Facet]
    vertices: np.ndarray
    incidence: np.ndarray
    ridges: list = field(default_factory=list)
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self):
        return self.lattice.dim

    @property
    def centers(self):
        return np.array([f.center for f in self.facets])

    @property
    def offsets(self):
        return np.array([f.offset for f in self.facets])

    @property
    def vertex_norms(self):
        return np.linalg.norm(self.vertices, axis=1)

    @property
    def circumradius(self):
        return float(self.vertex_norms.max())

    @property
    def inradius(self):
        return float(self.offsets.min())

    @property
    def eps(self):
        return EPS_GEO * self.circumradius

    @property
    def edges(self):
        """Vertex pairs of the ridges (3D: the edges of the polytope)."""
        return [tuple(r[1]) for r in self.ridges]

    def contains(self, points, tol: Optional[float] = None) -> np.ndarray:
        """H-representation membership test ``<x, y> <= |y|^2 (+ tol |y|)``."""
        tol = self.eps if tol is None else tol
        P = np.atleast_2d(np.asarray(points, dtype=float))
        Y = self.centers
        lhs = P @ Y.T - self.offsets**2
        return np.all(lhs <= tol * self.offsets, axis=1)

    def facet_max_norms(self):
        norms = self.vertex_norms
        return np.array([norms[f.vertices].max() for f in self.facets])

    def opposite(self, facet_index):
        """Index of the facet with centre ``-y``."""
        c = self.facets[facet_index].coeffs
        for f in self.facets:
            if np.array_equal(f.coeffs, -c):
                return f.index
        raise GeometryError("cell is not centrally symmetric")


def _merge_points(points, tol):
    tree = cKDTree(points)
    parent = list(range(len(points)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in tree.query_pairs(tol):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = defaultdict(list)
    for i in range(len(points)):
        groups[find(i)].append(i)
    return np.array([points[g].mean(axis=0) for g in groups.values()])


def _plane_frame(normal):
    n = normal / np.linalg.norm(normal)
    helper = np.eye(3)[np.argmin(np.abs(n))]
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2


def _cyclic_order(points, center, normal):
    """Indices of facet vertices sorted counter-clockwise seen from outside."""
    e1, e2 = _plane_frame(normal)
    rel = points - center
    ang = np.arctan2(rel @ e2, rel @ e1)
    return list(np.argsort(ang))


def voronoi_cell(L: Lattice, max_dim: int = MAX_VREP_DIM) -> VoronoiCell:
    """H- and V-representation of ``DV(2L)`` with facet/vertex incidences."""
    d = L.dim
    if d > max_dim:
        raise ResourceLimitError(f"vertex enumeration is supported for d <= {max_dim}")
    coeffs = relevant_vectors(L)
    Y = L.embed(coeffs)
    h2 = (Y**2).sum(axis=1)
    halfspaces = np.hstack([Y, -h2[:, None]])
    hs = HalfspaceIntersection(halfspaces, np.zeros(d))
    raw = hs.intersections
    scale = float(np.linalg.norm(raw, axis=1).max())
    eps = EPS_GEO * scale
    V = _merge_points(raw, 10 * eps)

    offsets = np.sqrt(h2)
    inc = np.abs(V @ Y.T - h2) <= eps * offsets
    # Polish each vertex against its incident hyperplanes.
    for k in range(len(V)):
        rows = np.nonzero(inc[k])[0]
        if len(rows) < d:
            raise GeometryError("vertex with fewer than d incident facets")
        V[k] = np.linalg.lstsq(Y[rows], h2[rows], rcond=None)[0]
    V = _merge_points(V, eps)
    V = V[np.lexsort(np.round(V, 9).T[::-1])]
    inc = (np.abs(V @ Y.T - h2) <= eps * offsets).T
    if np.any(V @ Y.T - h2 > eps * offsets):
        raise GeometryError("computed vertex lies outside the cell")

    facets = []
    for i in range(len(Y)):
        vids = list(np.nonzero(inc[i])[0])
        if len(vids) < d:
            raise GeometryError(f"facet {i} has only {len(vids)} vertices")
        if d == 3:
            order = _cyclic_order(V[vids], Y[i], Y[i])
            vids = [vids[j] for j in order]
        facets.append(Facet(index=i, coeffs=coeffs[i], center=Y[i],
                            offset=float(offsets[i]), vertices=[int(v) for v in vids]))
    cell = VoronoiCell(lattice=L, facets=facets, vertices=V, incidence=inc)
    cell.ridges = _ridges(cell)
    if d == 3:
        nv, ne, nf = len(V), len(cell.ridges), len(facets)
        if nv - ne + nf != 2:
            raise GeometryError(f"Euler relation fails: V={nv} E={ne} F={nf}")
    return cell


@functools.lru_cache(maxsize=128)
def cached_cell(L: Lattice) -> VoronoiCell:
    """Memoized :func:`voronoi_cell` (lattices hash by identity)."""
    return voronoi_cell(L)


def _ridges(cell: VoronoiCell):
    """Pairs of facets meeting in a (d-2)-face, with that face's vertices."""
    d = cell.dim
    V = cell.vertices
    out = []
    sets = [set(f.vertices) for f in cell.facets]
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            common = sorted(sets[i] & sets[j])
            if len(common) < d - 1:
                continue
            P = V[common] - V[common[0]]
            if np.linalg.matrix_rank(P, tol=cell.eps * 10) == d - 2:
                out.append(((i, j), common))
    return out


# ---------------------------------------------------------------------------
# Combinatorics in dimension 3


@dataclass
class Belt:
    direction: np.ndarray
    facets: List[int]

    @property
    def length(self):
        return len(self.facets)


@dataclass
class BeltReport:
    belts: List[Belt]

    def lengths(self):
        return sorted(b.length for b in self.belts)

    def belts_of(self, facet_index):
        return [b for b in self.belts if facet_index in b.facets]


def belts(cell: VoronoiCell) -> BeltReport:
    """Group facets into belts of parallel edges (d = 3)."""
    if cell.dim != 3:
        raise ValueError("belts are implemented for d = 3 only")
    V = cell.vertices
    classes = []
    for (fi, fj), (a, b) in cell.ridges:
        u = V[b] - V[a]
        u = u / np.linalg.norm(u)
        for cls in classes:
            if abs(abs(cls["dir"] @ u) - 1) < 1e-9:
                cls["facets"].update((fi, fj))
                break
        else:
            classes.append({"dir": u, "facets": {fi, fj}})
    out = []
    for cls in classes:
        u = cls["dir"]
        e1, e2 = _plane_frame(u)
        ids = sorted(cls["facets"])
        ang = [np.arctan2(cell.facets[i].center @ e2, cell.facets[i].center @ e1) for i in ids]
        ordered = [ids[k] for k in np.argsort(ang)]
        if len(ordered) not in (4, 6):
            raise GeometryError(f"belt of length {len(ordered)}")
        out.append(Belt(direction=u, facets=ordered))
    return BeltReport(belts=out)


class FedorovType(enum.Enum):
    CUBE = "Cube"
    HEXAGONAL_PRISM = "HexagonalPrism"
    RHOMBIC_DODECAHEDRON = "RhombicDodecahedron"
    HEXARHOMBIC_DODECAHEDRON = "HexarhombicDodecahedron"
    TRUNCATED_OCTAHEDRON = "TruncatedOctahedron"

    def __str__(self):
        return self.value


_SIGNATURES = {
    (6, ((4, 6),)): FedorovType.CUBE,
    (8, ((4, 6), (6, 2))): FedorovType.HEXAGONAL_PRISM,
    (12, ((4, 12),)): FedorovType.RHOMBIC_DODECAHEDRON,
    (12, ((4, 8), (6, 4))): FedorovType.HEXARHOMBIC_DODECAHEDRON,
    (14, ((4, 6), (6, 8))): FedorovType.TRUNCATED_OCTAHEDRON,
}


def facet_signature(cell: VoronoiCell):
    gons = Counter(f.gons for f in cell.facets)
    return len(cell.facets), tuple(sorted(gons.items()))


def fedorov_classify(cell: VoronoiCell) -> FedorovType:
    if cell.dim != 3:
        raise ValueError("Fedorov types are defined for d = 3 only")
    sig = facet_signature(cell)
    try:
        return _SIGNATURES[sig]
    except KeyError:
        raise GeometryError(f"facet signature {sig} matches no parallelohedron type") from None


@dataclass
class VertexClass:
    vertices: List[int]
    norm: float


def vertex_classes(cell: VoronoiCell, tol: float = 1e-8) -> List[VertexClass]:
    """Partition vertices under ``x ~ -x`` and ``x ~ x + 2y`` (``y`` in ``L``)."""
    L = cell.lattice
    V = cell.vertices
    n = len(V)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for sign in (1, -1):
        diff = (V[:, None, :] - sign * V[None, :, :]) / 2
        C = L.coordinates(diff.reshape(-1, L.dim)).reshape(n, n, L.dim)
        integral = np.all(np.abs(C - np.rint(C)) <= tol, axis=2)
        for a, b in zip(*np.nonzero(integral)):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups = defaultdict(list)
    for i in range(n):
        groups[find(i)].append(i)
    norms = cell.vertex_norms
    out = []
    for ids in sorted(groups.values()):
        vals = norms[ids]
        if vals.max() - vals.min() > tol * vals.max():
            raise GeometryError("vertex class with non-constant norm")
        out.append(VertexClass(vertices=ids, norm=float(vals.mean())))
    return out


def export_mesh(cell: VoronoiCell, fmt: str = "obj") -> bytes:
    """OBJ or OFF text of a 3D cell; faces are counter-clockwise from outside."""
    if cell.dim != 3:
        raise ValueError("mesh export needs d = 3")
    return write_mesh(cell.vertices, [f.vertices for f in cell.facets], fmt)


def write_mesh(vertices, faces, fmt="obj") -> bytes:
    buf = io.StringIO()
    if fmt == "obj":
        for v in vertices:
            buf.write("v {:.12g} {:.12g} {:.12g}\n".format(*v))
        for f in faces:
            buf.write("f " + " ".join(str(i + 1) for i in f) + "\n")
    elif fmt == "off":
        edges = {tuple(sorted((f[k], f[(k + 1) % len(f)]))) for f in faces for k in range(len(f))}
        buf.write("OFF\n{} {} {}\n".format(len(vertices), len(faces), len(edges)))
        for v in vertices:
            buf.write("{:.12g} {:.12g} {:.12g}\n".format(*v))
        for f in faces:
            buf.write(str(len(f)) + " " + " ".join(str(i) for i in f) + "\n")
    else:
        raise ValueError(f"unsupported mesh format {fmt!r}")
    return buf.getvalue().encode("ascii")
