"""Extremal bodies ``K_L(V) = B(r_L(V)) ∩ DV(2L)`` and uniqueness certificates.

Certificates record which sufficient condition established that ``K_L(V)`` is
the only body of minimum diameter:

``corollary4``
    every facet of ``DV(2L)`` has a vertex at the circumradius ``2 mu(L)``;
``corollary3``
    every facet has a vertex of norm ``> r`` (uniqueness for radii below a
    threshold);
``proposition5``
    3D truncated octahedra: the facets missing a vertex at ``2 mu(L)`` sit in
    6-belts and all other facets satisfy the vertex condition;
``ball_regime``
    ``r <= lambda(L)``, where the ball itself is the answer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .lattice import Lattice, closest_vectors, homogeneous_minimum
from .volume import (
    _chunk_rng, _run_chunks, check_volume, r_of_volume, volume,
)
from .voronoi import (
    EPS_GEO, FedorovType, VoronoiCell, belts, cached_cell, fedorov_classify,
    vertex_classes, write_mesh,
)

NORM_RTOL = 1e-9

UNIQUE_ALL_V = "unique_all_V"
UNIQUE_BELOW = "unique_for_r_below"
INCONCLUSIVE = "inconclusive"


@dataclass
class ExtremalBody:
    lattice: Lattice
    r: float
    V: float
    diameter: float
    cell: VoronoiCell
    is_ball: bool
    is_full_cell: bool
    error: float = 0.0
    method: str = ""

    def as_dict(self):
        return {"r": self.r, "V": self.V, "D": self.diameter,
                "is_ball": self.is_ball, "is_full_cell": self.is_full_cell}


def extremal_body(L: Lattice, V: float, cell: Optional[VoronoiCell] = None, **mc) -> ExtremalBody:
    """The body of minimum diameter among admissible symmetric bodies of volume V."""
    check_volume(L, V)
    cell = cached_cell(L) if cell is None else cell
    inv = r_of_volume(L, V, cell=cell, full_output=True, **mc)
    lam = homogeneous_minimum(L)
    return ExtremalBody(
        lattice=L, r=inv.r, V=V, diameter=2 * inv.r, cell=cell,
        is_ball=inv.r <= lam * (1 + 1e-12),
        is_full_cell=inv.r >= cell.circumradius * (1 - 1e-12),
        error=inv.error, method=inv.method,
    )


def diam_of_volume(L: Lattice, V: float, **kw) -> float:
    """Minimum diameter of an admissible symmetric body of volume ``V``."""
    return 2 * r_of_volume(L, V, **kw)


def upper_bound_volume(L: Lattice, D: float, cell: Optional[VoronoiCell] = None, **mc) -> float:
    """Largest volume of an admissible symmetric body of diameter ``D``: ``f(D/2)``."""
    cell = cached_cell(L) if cell is None else cell
    if not 0 < D <= 2 * cell.circumradius * (1 + 1e-12):
        raise ValueError(f"diameter {D:.12g} outside (0, 4 mu(L)]")
    return volume(L, D / 2, cell=cell, **mc).value


def distance_to_2L(L: Lattice, points) -> np.ndarray:
    P = np.atleast_2d(np.asarray(points, dtype=float))
    nearest = 2.0 * L.embed(closest_vectors(L, P / 2.0))
    return np.linalg.norm(P - nearest, axis=1)


def in_exclusion_region(L: Lattice, r: float, x) -> bool:
    """True iff every point of 2L is at distance strictly greater than ``r`` from ``x``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    return bool(distance_to_2L(L, x)[0] > r)


# ---------------------------------------------------------------------------
# Certificates


@dataclass
class Certificate:
    passed: bool
    verdict: str
    route: str
    threshold: Optional[float] = None
    witnesses: List[dict] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {"verdict": self.verdict, "route": self.route, "passed": self.passed,
                "threshold": self.threshold, "witnesses": self.witnesses,
                "details": self.details}

    def to_json(self, **kw):
        return json.dumps(_jsonable(self.as_dict()), **kw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    return obj


def _facet_witness(cell, i, maxn, bound):
    f = cell.facets[i]
    return {"facet": i, "center": f.coeffs.tolist(), "gons": f.gons,
            "max_vertex_norm": float(maxn[i]), "required_bound": float(bound)}


def check_corollary3(L: Lattice, r: float, cell: Optional[VoronoiCell] = None) -> Certificate:
    """Every facet of ``DV(2L)`` has a vertex of norm ``> r`` (margin ``EPS_GEO``)."""
    cell = cached_cell(L) if cell is None else cell
    R = cell.circumradius
    if not 0 < r <= R * (1 + 1e-12):
        raise ValueError(f"radius {r:.12g} outside (0, {R:.12g}]")
    maxn = cell.facet_max_norms()
    bad = np.nonzero(maxn <= r + EPS_GEO * R)[0]
    wit = [_facet_witness(cell, i, maxn, r) for i in bad]
    if len(bad):
        return Certificate(False, INCONCLUSIVE, "corollary3", None, wit)
    return Certificate(True, UNIQUE_BELOW, "corollary3", threshold=float(r),
                       details={"min_margin": float(maxn.min() - r)})


def check_corollary4(L: Lattice, cell: Optional[VoronoiCell] = None) -> Certificate:
    """Every facet of ``DV(2L)`` has a vertex at the circumradius (relative 1e-9)."""
    cell = cached_cell(L) if cell is None else cell
    R = cell.circumradius
    maxn = cell.facet_max_norms()
    bad = np.nonzero(np.abs(maxn - R) > NORM_RTOL * R)[0]
    wit = [_facet_witness(cell, i, maxn, R) for i in bad]
    details = {"circumradius": R, "facets": len(cell.facets)}
    if len(bad):
        return Certificate(False, INCONCLUSIVE, "corollary4", None, wit, details)
    return Certificate(True, UNIQUE_ALL_V, "corollary4", None, [], details)


def check_proposition5(L: Lattice, cell: Optional[VoronoiCell] = None) -> Certificate:
    """Six-belt certificate for 3D lattices whose cell is a truncated octahedron.

    Verifies the structure the argument relies on: three vertex classes of
    eight; each hexagon holds two opposite vertices of every class; each class
    meets four quadrilaterals; every facet without a vertex at the
    circumradius lies in a 6-belt, only it and its opposite fail, and every
    other facet reaches the circumradius (so the vertex condition covers it
    for all ``r`` below the circumradius).
    """
    cell = cached_cell(L) if cell is None else cell
    if L.dim != 3:
        return Certificate(False, INCONCLUSIVE, "proposition5",
                           details={"precondition": f"d = {L.dim}, needs d = 3"})
    ftype = fedorov_classify(cell)
    if ftype is not FedorovType.TRUNCATED_OCTAHEDRON:
        return Certificate(False, INCONCLUSIVE, "proposition5",
                           details={"precondition": f"cell is {ftype}, not TruncatedOctahedron"})
    R = cell.circumradius
    tol = NORM_RTOL * R
    classes = vertex_classes(cell)
    problems = []
    if sorted(len(c.vertices) for c in classes) != [8, 8, 8]:
        problems.append(f"vertex classes {[len(c.vertices) for c in classes]}, expected 3 x 8")
    label = {v: k for k, c in enumerate(classes) for v in c.vertices}
    V = cell.vertices
    quads_of = {k: set() for k in range(len(classes))}
    for f in cell.facets:
        if f.gons == 6:
            for k in range(len(classes)):
                mine = [v for v in f.vertices if label[v] == k]
                if len(mine) != 2 or np.linalg.norm(V[mine[0]] + V[mine[1]] - 2 * f.center) > 1e-7 * R:
                    problems.append(f"hexagon {f.index}: class {k} not an opposite pair")
        else:
            for v in f.vertices:
                quads_of[label[v]].add(f.index)
    for k, quads in quads_of.items():
        if len(quads) != 4:
            problems.append(f"class {k} meets {len(quads)} quadrilaterals, expected 4")

    maxn = cell.facet_max_norms()
    failing = [i for i in range(len(cell.facets)) if abs(maxn[i] - R) > tol]
    report = belts(cell)
    wit = []
    for i in failing:
        six = [b for b in report.belts_of(i) if b.length == 6]
        opp = cell.opposite(i)
        others_ok = all(abs(maxn[j] - R) <= tol for j in range(len(cell.facets)) if j not in (i, opp))
        w = _facet_witness(cell, i, maxn, R)
        w.update({"six_belts": [b.facets for b in six], "opposite": opp,
                  "other_facets_reach_circumradius": others_ok,
                  "belt_neighbour_max_norms": sorted({float(maxn[j]) for b in six for j in b.facets
                                                      if j not in (i, opp)})})
        wit.append(w)
        if not six:
            problems.append(f"facet {i} lies in no 6-belt")
        if not others_ok:
            problems.append(f"facet {i}: other facets also miss the circumradius")
    attaining = [k for k, c in enumerate(classes) if abs(c.norm - R) <= tol]
    details = {"vertex_classes": [{"size": len(c.vertices), "norm": c.norm} for c in classes],
               "classes_at_circumradius": len(attaining), "belt_lengths": report.lengths()}
    if problems:
        details["problems"] = problems
        return Certificate(False, INCONCLUSIVE, "proposition5", None, wit, details)
    return Certificate(True, UNIQUE_ALL_V, "proposition5", None, wit, details)


def uniqueness_certificate(L: Lattice, cell: Optional[VoronoiCell] = None) -> Certificate:
    """Strongest available certificate that ``K_L(V)`` is the unique extremal body.

    Tries the all-facets vertex condition, then (d = 3) the six-belt argument;
    otherwise reports the largest radius below which every facet still has a
    farther vertex.
    """
    cell = cached_cell(L) if cell is None else cell
    cert = check_corollary4(L, cell)
    if cert.passed:
        return cert
    failed = cert
    if L.dim == 3:
        cert5 = check_proposition5(L, cell)
        if cert5.passed:
            return cert5
        failed = cert5 if "precondition" not in cert5.details else failed
    lam = homogeneous_minimum(L)
    # Largest r passing the vertex condition is just below the smallest facet max-norm.
    threshold = float(cell.facet_max_norms().min()) - 2 * EPS_GEO * cell.circumradius
    details = {"lambda": lam, "failed_route": failed.route, "failed_details": failed.details}
    if threshold > lam and check_corollary3(L, threshold, cell).passed:
        return Certificate(False, UNIQUE_BELOW, "corollary3", threshold, failed.witnesses, details)
    if lam > 0:
        return Certificate(False, UNIQUE_BELOW, "ball_regime", lam, failed.witnesses, details)
    return Certificate(False, INCONCLUSIVE, failed.route, None, failed.witnesses, details)


# ---------------------------------------------------------------------------
# Covering check and meshes


def coverage_check(L: Lattice, V: float, samples: int = 10**5, seed: int = 0,
                   cell: Optional[VoronoiCell] = None, workers: int = 1) -> bool:
    """Sample the torus ``R^d / 2L``: each point is in ``2L + K_L(V)`` or in the exclusion region.

    For a sample ``x`` with nearest ``z`` in ``2L``, ``x - z`` must pass the
    H-representation test of ``DV(2L)`` whenever ``|x - z| <= r``; otherwise
    ``x`` must lie strictly farther than ``r`` from all of 2L.
    """
    cell = cached_cell(L) if cell is None else cell
    r = r_of_volume(L, V, cell=cell)
    eps = EPS_GEO * cell.circumradius
    d = L.dim

    def task(k, n):
        u = _chunk_rng(seed, k).random((n, d))
        x = 2.0 * L.embed(u)
        z = 2.0 * L.embed(closest_vectors(L, x / 2.0))
        w = x - z
        dist = np.linalg.norm(w, axis=1)
        in_body = (dist <= r + eps) & cell.contains(w)
        excluded = dist > r
        return int(np.sum(~(in_body | excluded)))

    return sum(_run_chunks(task, samples, workers)) == 0


def _weld(points, tol):
    """Merge points closer than ``tol``; returns (unique points, index map)."""
    from scipy.spatial import cKDTree

    parent = np.arange(len(points))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in cKDTree(points).query_pairs(tol):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(len(points))])
    uniq, index = np.unique(roots, return_inverse=True)
    return points[uniq], index


def extremal_mesh(body: ExtremalBody, sphere_subdivision: int = 8):
    """Triangle mesh of ``B(r) ∩ DV(2L)`` as ``(vertices, faces)``.

    Each facet is fanned from its centre and each fan triangle subdivided
    ``n x n``; the welded surface of the cell is then mapped radially,
    ``x -> x min(1, r/|x|)``, onto the boundary of the body.  The cell is
    star-shaped about the origin, so the result is watertight.
    """
    cell = body.cell
    if cell.dim != 3:
        raise ValueError("mesh export needs d = 3")
    n = max(1, int(sphere_subdivision))
    V = cell.vertices
    pts, tris = [], []
    grid = [(i, j) for i in range(n + 1) for j in range(n + 1 - i)]
    where = {ij: k for k, ij in enumerate(grid)}
    local = []
    for i in range(n):
        for j in range(n - i):
            local.append((where[i, j], where[i + 1, j], where[i, j + 1]))
            if i + j + 1 < n:
                local.append((where[i + 1, j], where[i + 1, j + 1], where[i, j + 1]))
    for f in cell.facets:
        ring = f.vertices
        for k in range(len(ring)):
            a, b, c = f.center, V[ring[k]], V[ring[(k + 1) % len(ring)]]
            base = len(pts)
            pts.extend(a + (b - a) * i / n + (c - a) * j / n for i, j in grid)
            tris.extend((base + p, base + q, base + s) for p, q, s in local)
    P, index = _weld(np.array(pts), 1e-9 * cell.circumradius)
    faces = index[np.array(tris)]
    norms = np.linalg.norm(P, axis=1)
    P = P * np.minimum(1.0, body.r / norms)[:, None]
    return P, faces


def export_extremal_mesh(body: ExtremalBody, sphere_subdivision: int = 8, fmt: str = "obj") -> bytes:
    P, faces = extremal_mesh(body, sphere_subdivision)
    return write_mesh(P, faces.tolist(), fmt)


def mesh_volume(vertices, faces) -> float:
    """Signed volume enclosed by an outward-oriented triangle mesh."""
    a, b, c = (vertices[faces[:, k]] for k in range(3))
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)
