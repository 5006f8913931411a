"""Reference computations that share no code path with the library.

Brute-force boxes, plain bisection and a spherical quadrature; slow but simple.
"""

import itertools
import math

import numpy as np


def box_vectors(gram, radius, box):
    """Nonzero integer vectors in [-box, box]^d with norm <= radius (+1e-9)."""
    gram = np.asarray(gram, dtype=float)
    d = len(gram)
    X = np.array(list(itertools.product(range(-box, box + 1), repeat=d)), dtype=np.int64)
    n2 = np.einsum("ij,jk,ik->i", X, gram, X)
    keep = (n2 <= (radius + 1e-9) ** 2) & np.any(X != 0, axis=1)
    return X[keep], n2[keep]


def box_closest(basis, x, box):
    """Closest lattice point by scanning a coefficient box around the rounded coordinates."""
    basis = np.asarray(basis, dtype=float)
    d = len(basis)
    u = np.rint(np.linalg.solve(basis, x)).astype(int)
    X = np.array(list(itertools.product(range(-box, box + 1), repeat=d))) + u
    dist = np.linalg.norm(X @ basis.T - x, axis=1)
    return X[np.argmin(dist)], dist.min()


def brute_force_vertices(basis, box=2, tol=1e-9):
    """Vertices of DV(2L) in 3D from all triples of bisector planes of nearby 2L points."""
    basis = np.asarray(basis, dtype=float)
    X = np.array([c for c in itertools.product(range(-box, box + 1), repeat=3) if any(c)])
    Y = X @ basis.T
    h2 = (Y**2).sum(axis=1)
    T = np.array(list(itertools.combinations(range(len(Y)), 3)))
    found = []
    for part in np.array_split(T, max(1, len(T) // 50000)):
        M = Y[part]
        ok = np.abs(np.linalg.det(M)) > 1e-9
        M, rhs = M[ok], h2[part[ok]]
        v = np.linalg.solve(M, rhs[..., None])[..., 0]
        inside = np.all(v @ Y.T <= h2 + tol * max(1.0, h2.max()), axis=1)
        found.extend(v[inside])
    out = []
    for v in found:
        if not any(np.linalg.norm(v - w) < 1e-7 for w in out):
            out.append(v)
    return np.array(out)


def bisect(f, target, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def quadrature_volume(centers, r, n_theta=1200, n_phi=2400):
    """vol(B(r) ∩ {<x, y> <= |y|^2 for all y}) by midpoint rule over directions.

    Radial extent along a unit direction w is min(r, min over <w, y> > 0 of |y|^2 / <w, y>).
    """
    Y = np.asarray(centers, dtype=float)
    h2 = (Y**2).sum(axis=1)
    th = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    ph = (np.arange(n_phi) + 0.5) * 2 * math.pi / n_phi
    total = 0.0
    for t in th:
        w = np.column_stack([np.sin(t) * np.cos(ph), np.sin(t) * np.sin(ph), np.full_like(ph, np.cos(t))])
        dots = w @ Y.T
        with np.errstate(divide="ignore"):
            reach = np.where(dots > 0, h2 / np.where(dots > 0, dots, 1), np.inf).min(axis=1)
        rad = np.minimum(reach, r)
        total += (rad**3 / 3).sum() * math.sin(t)
    return total * (math.pi / n_theta) * (2 * math.pi / n_phi)


def grid_covering_radius(basis, n=400):
    """Max distance from a grid over the fundamental parallelogram to the 2D lattice."""
    basis = np.asarray(basis, dtype=float)
    s = (np.arange(n) + 0.5) / n
    U = np.array(list(itertools.product(s, s)))
    P = U @ basis.T
    shifts = np.array(list(itertools.product(range(-1, 3), repeat=2))) @ basis.T
    d = np.linalg.norm(P[:, None, :] - shifts[None], axis=2).min(axis=1)
    return d.max()
