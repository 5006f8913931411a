"""Volume of ``B_d(r) ∩ DV(2L)`` and its inverse.

Three independent engines:

* :func:`volume_exact` -- closed form in d = 2, 3 from an orthoscheme
  decomposition of the cell (apex at the origin);
* :func:`volume_mc` -- rejection sampling in a ball with a closest-vector
  membership test, any d;
* :func:`volume_z3_closed` -- the piecewise closed form for ``Z^3``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import MinkowskiBoundError, PrecisionError
from .lattice import Lattice, enumerate_vectors
from .voronoi import VoronoiCell, cached_cell

MC_CHUNK = 1 << 16
SQRT2, SQRT3 = math.sqrt(2.0), math.sqrt(3.0)


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    error: float
    method: str
    samples: Optional[int] = None
    seed: Optional[int] = None


def ball_volume(r: float, d: int) -> float:
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1)) * r**d


def cell_volume(L: Lattice) -> float:
    """Volume of ``DV(2L)``, i.e. ``2^d det L``."""
    return 2**L.dim * L.det


# ---------------------------------------------------------------------------
# Exact engine


class _Orthoschemes:
    """Signed right-triangle cones covering the cell, for fast evaluation in r.

    In 3D each facet (centre ``y``, distance ``h``) is fanned from ``y`` over its
    edges; each fan triangle is the signed difference of two right triangles
    with legs ``s`` (distance from ``y`` to the edge line) and ``|t|``.  In 2D
    the same is done for the polygon around the origin.
    """

    def __init__(self, cell: VoronoiCell):
        d = cell.dim
        H, S, T, W = [], [], [], []
        if d == 3:
            from .voronoi import _plane_frame

            for f in cell.facets:
                e1, e2 = _plane_frame(f.center)
                pts = cell.vertices[f.vertices] - f.center
                planar = np.column_stack([pts @ e1, pts @ e2])
                self._add_polygon(planar, f.offset, H, S, T, W)
        elif d == 2:
            V = cell.vertices
            order = np.argsort(np.arctan2(V[:, 1], V[:, 0]))
            self._add_polygon(V[order], 0.0, H, S, T, W)
        else:
            raise ValueError("exact volumes are available for d = 2, 3 only")
        self.dim = d
        self.h, self.s, self.t, self.w = map(np.array, (H, S, T, W))
        self.total = float(cell_volume(cell.lattice))

    @staticmethod
    def _add_polygon(poly, h, H, S, T, W):
        n = len(poly)
        for k in range(n):
            a, b = poly[k], poly[(k + 1) % n]
            edge = b - a
            length = math.hypot(*edge)
            if length == 0.0:
                continue
            u = edge / length
            ta, tb = a @ u, b @ u
            s = abs(a[0] * u[1] - a[1] * u[0])
            for t, sign in ((tb, 1.0), (ta, -1.0)):
                H.append(h)
                S.append(s)
                T.append(abs(t))
                W.append(sign * math.copysign(1.0, t))

    def __call__(self, r: float) -> float:
        if r <= 0:
            return 0.0
        s, t = self.s, self.t
        phimax = np.arctan2(t, s)
        if self.dim == 2:
            phi1 = np.where(r > s, np.minimum(np.arccos(np.minimum(s / r, 1.0)), phimax), 0.0)
            parts = 0.5 * s**2 * np.tan(phi1) + 0.5 * r**2 * (phimax - phi1)
            return float(np.dot(self.w, parts))
        h = self.h
        k = h / np.sqrt(h**2 + s**2)
        inside = r <= h
        rho = np.sqrt(np.maximum(r**2 - h**2, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(rho > s, np.minimum(s / np.where(rho > 0, rho, 1.0), 1.0), 1.0)
        phi1 = np.minimum(np.arccos(c), phimax)
        asin_max = np.arcsin(k * np.sin(phimax))
        clipped = (h * s**2 * np.tan(phi1) / 6.0
                   + ((0.5 * h * rho**2 + r**2 * h) * (phimax - phi1)
                      - r**3 * (asin_max - np.arcsin(k * np.sin(phi1)))) / 3.0)
        small = r**3 / 3.0 * (phimax - asin_max)
        return float(np.dot(self.w, np.where(inside, small, clipped)))


def _orthoschemes(L: Lattice, cell=None) -> _Orthoschemes:
    cell = cached_cell(L) if cell is None else cell
    if "ortho" not in cell.cache:
        cell.cache["ortho"] = _Orthoschemes(cell)
    return cell.cache["ortho"]


def volume_exact(L: Lattice, r: float, cell: Optional[VoronoiCell] = None) -> VolumeEstimate:
    """Exact ``vol(B(r) ∩ DV(2L))`` for d = 2 or 3."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if L.dim not in (2, 3):
        raise ValueError("exact volumes are available for d = 2, 3 only")
    ortho = _orthoschemes(L, cell)
    value = max(ortho(r), 0.0)
    err = 1e-12 * ortho.total
    return VolumeEstimate(value=value, error=err, method=f"exact{L.dim}d")


def volume_exact3d(L: Lattice, r: float, cell: Optional[VoronoiCell] = None) -> VolumeEstimate:
    if L.dim != 3:
        raise ValueError("volume_exact3d needs d = 3")
    return volume_exact(L, r, cell)


def volume_z3_closed(D: float) -> float:
    """Piecewise closed form of ``vol(B(D/2) ∩ [-1, 1]^3)``.

    At regime boundaries the lower-D expression is used, which keeps the
    removable singularity at ``D = 2 sqrt 2`` out of the third branch.
    """
    if not 0 < D <= 2 * SQRT3 * (1 + 1e-15):
        raise ValueError(f"D={D} outside (0, 2*sqrt(3)]")
    D = min(D, 2 * SQRT3)
    if D <= 2:
        return math.pi / 6 * D**3
    if D <= 2 * SQRT2:
        return 2 * math.pi * (-(D**3) / 6 + 3 * D**2 / 4 - 1)
    q = math.sqrt(D**2 - 8)
    return (4 * q + (3 * D**2 - 4) * math.atan((12 - D**2) / (4 * q))
            - 2.0 / 3.0 * D**3 * math.atan(D * (12 - D**2) / ((D**2 + 4) * q)))


# ---------------------------------------------------------------------------
# Monte Carlo engine


def _uniform_ball(rng, n, d, radius):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1)[:, None]
    return g * (radius * rng.random(n) ** (1.0 / d))[:, None]


def _origin_closest(points, shifts, shift_norms2):
    """``closest_vector(2L, x) == 0`` given all 2L points that could be closer."""
    if len(shifts) == 0:
        return np.ones(len(points), dtype=bool)
    return np.all(2.0 * points @ shifts.T <= shift_norms2, axis=1)


def _competitors(L: Lattice, radius: float):
    """Points of 2L within ``2 * radius``: everything that can beat 0 inside B(radius)."""
    coeffs, norms2 = enumerate_vectors(L, radius)
    return 2.0 * L.embed(coeffs), 4.0 * norms2


def _chunk_rng(seed, k):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(k,))))


def _run_chunks(task, samples, workers):
    sizes = [min(MC_CHUNK, samples - s) for s in range(0, samples, MC_CHUNK)]
    jobs = list(enumerate(sizes))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: task(*job), jobs))
    return [task(*job) for job in jobs]


def volume_mc(L: Lattice, r: float, samples: int = 10**6, seed: int = 0,
              workers: int = 1, cell: Optional[VoronoiCell] = None) -> VolumeEstimate:
    """Monte Carlo ``vol(B(r) ∩ DV(2L))`` with a 3-sigma binomial half-width.

    Samples are drawn in fixed-size chunks, chunk ``k`` from its own
    ``SeedSequence(seed, spawn_key=(k,))`` stream, so the result does not
    depend on ``workers``.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    if samples < 10**4:
        raise ValueError("volume_mc needs at least 10^4 samples")
    cell = cached_cell(L) if cell is None else cell
    rho = min(r, cell.circumradius)
    shifts, shift_n2 = _competitors(L, rho)
    d = L.dim

    def task(k, n):
        x = _uniform_ball(_chunk_rng(seed, k), n, d, rho)
        return int(_origin_closest(x, shifts, shift_n2).sum())

    hits = sum(_run_chunks(task, samples, workers))
    vb = ball_volume(rho, d)
    p = hits / samples
    return VolumeEstimate(value=vb * p, error=3 * vb * math.sqrt(p * (1 - p) / samples),
                          method="montecarlo", samples=samples, seed=seed)


def mc_radial_profile(L: Lattice, samples: int, seed: int = 0, workers: int = 1,
                      cell: Optional[VoronoiCell] = None):
    """Sorted norms of the in-cell samples of a uniform draw from ``B(circumradius)``.

    ``f(r) ~ vol(B(R)) * #{norm <= r} / samples`` is then non-decreasing in
    ``r`` for a fixed draw, which makes it safe to invert.
    """
    cell = cached_cell(L) if cell is None else cell
    R = cell.circumradius
    shifts, shift_n2 = _competitors(L, R)
    d = L.dim

    def task(k, n):
        x = _uniform_ball(_chunk_rng(seed, k), n, d, R)
        x = x[_origin_closest(x, shifts, shift_n2)]
        return np.linalg.norm(x, axis=1)

    norms = np.sort(np.concatenate(_run_chunks(task, samples, workers)))
    return norms, ball_volume(R, d)


# ---------------------------------------------------------------------------
# Dispatch and inversion


def volume(L: Lattice, r: float, cell: Optional[VoronoiCell] = None, samples: int = 10**6,
           seed: int = 0, workers: int = 1) -> VolumeEstimate:
    """``f(r)`` with the best available engine (exact for d <= 3)."""
    if L.dim in (2, 3):
        return volume_exact(L, r, cell)
    return volume_mc(L, r, samples=samples, seed=seed, workers=workers, cell=cell)


def check_volume(L: Lattice, V: float) -> float:
    top = cell_volume(L)
    if not (V > 0 and V <= top * (1 + 1e-12)):
        raise MinkowskiBoundError(
            f"volume {V:.12g} outside (0, {top:.12g}]: exceeds 2^d det L" if V > 0
            else f"volume {V:.12g} must be positive")
    return top


@dataclass(frozen=True)
class Inversion:
    r: float
    error: float
    method: str
    samples: Optional[int] = None


def r_of_volume(L: Lattice, V: float, cell: Optional[VoronoiCell] = None,
                samples: int = 10**6, seed: int = 0, tol: Optional[float] = None,
                max_samples: int = 10**8, workers: int = 1, full_output: bool = False):
    """Smallest ``r`` with ``vol(B(r) ∩ DV(2L)) = V``.

    ``V = 2^d det L`` maps to the circumradius of ``DV(2L)``.  In d <= 3 the
    exact engine is bracketed on ``[0, circumradius]``; otherwise a Monte Carlo
    radial profile is inverted, multiplying the sample count by 10 until the
    3-sigma error is at most ``tol``.
    """
    top = check_volume(L, V)
    cell = cached_cell(L) if cell is None else cell
    R = cell.circumradius
    if V >= top * (1 - 1e-15):
        out = Inversion(r=R, error=0.0, method=f"exact{L.dim}d" if L.dim <= 3 else "montecarlo")
        return out if full_output else out.r
    if L.dim in (2, 3):
        ortho = _orthoschemes(L, cell)
        r = brentq(lambda x: ortho(x) - V, 0.0, R, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                   maxiter=500)
        out = Inversion(r=float(r), error=abs(ortho(r) - V), method=f"exact{L.dim}d")
        return out if full_output else out.r
    n = samples
    while True:
        norms, vb = mc_radial_profile(L, n, seed=seed, workers=workers, cell=cell)
        k = math.ceil(V / vb * n)
        r = float(norms[k - 1]) if k <= len(norms) else R
        p = min(V / vb, 1.0)
        err = 3 * vb * math.sqrt(p * (1 - p) / n)
        if tol is None or err <= tol:
            break
        if n * 10 > max_samples:
            raise PrecisionError(f"Monte Carlo error {err:.3g} exceeds tolerance {tol:.3g}",
                                 achieved=err)
        n *= 10
    out = Inversion(r=r, error=err, method="montecarlo", samples=n)
    return out if full_output else out.r
