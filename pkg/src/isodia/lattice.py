"""Lattice representations, short-vector enumeration, CVP and Selling reduction.

A :class:`Lattice` is stored as a basis matrix ``A`` whose *columns* are the
basis vectors, together with its Gram matrix ``A^T A``.  Lattice vectors are
addressed by integer coefficient vectors ``c`` and embedded as ``A @ c``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import LatticeError, ResourceLimitError

EPS_SYM = 1e-12
EPS_ENUM = 1e-9
EPS_SELLING = 1e-10
DEFAULT_MAX_ENUM = 10**7


def max_enum() -> int:
    """Enumeration cap; ``ISODIA_MAX_ENUM`` overrides the default of 10^7."""
    value = os.environ.get("ISODIA_MAX_ENUM")
    return int(value) if value else DEFAULT_MAX_ENUM


@dataclass(frozen=True, eq=False)
class Lattice:
    basis: np.ndarray
    gram: np.ndarray
    det: float
    name: Optional[str] = None

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def from_basis(cls, basis, name=None) -> "Lattice":
        A = np.array(basis, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise LatticeError(f"basis must be a square matrix, got shape {A.shape}")
        if A.shape[0] < 2:
            raise LatticeError("lattices of dimension < 2 are not supported")
        if not np.all(np.isfinite(A)):
            raise LatticeError("basis has non-finite entries")
        det = abs(np.linalg.det(A))
        scale = np.prod(np.linalg.norm(A, axis=0))
        if not det > 1e-12 * scale:
            raise LatticeError("basis is singular")
        gram = A.T @ A
        return cls(basis=A, gram=(gram + gram.T) / 2, det=float(det), name=name)

    @classmethod
    def from_gram(cls, gram, name=None) -> "Lattice":
        G = np.array(gram, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise LatticeError(f"Gram matrix must be square, got shape {G.shape}")
        if G.shape[0] < 2:
            raise LatticeError("lattices of dimension < 2 are not supported")
        if not np.all(np.isfinite(G)):
            raise LatticeError("Gram matrix has non-finite entries")
        scale = max(1.0, float(np.abs(G).max()))
        if np.abs(G - G.T).max() > EPS_SYM * scale:
            raise LatticeError("Gram matrix is not symmetric")
        G = (G + G.T) / 2
        try:
            C = np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            raise LatticeError("Gram matrix is not positive definite") from None
        if np.any(np.diag(C) <= 0):
            raise LatticeError("Gram matrix is not positive definite")
        # G = C C^T, so A = C^T is upper triangular with A^T A = G.
        A = C.T.copy()
        return cls(basis=A, gram=G, det=float(np.prod(np.diag(C))), name=name)

    def embed(self, coeffs) -> np.ndarray:
        """Map integer coefficient vectors (rows) to points of R^d."""
        return np.asarray(coeffs, dtype=float) @ self.basis.T

    def coordinates(self, points) -> np.ndarray:
        """Real coefficients of points (rows) with respect to the basis."""
        pts = np.asarray(points, dtype=float)
        return np.linalg.solve(self.basis, pts.T).T

    def scaled(self, alpha: float) -> "Lattice":
        return Lattice(
            basis=alpha * self.basis,
            gram=alpha**2 * self.gram,
            det=abs(alpha) ** self.dim * self.det,
            name=None if self.name is None else f"{alpha:g}*{self.name}",
        )

    def transformed(self, orth) -> "Lattice":
        """Same lattice, embedded via an orthogonal map."""
        Q = np.asarray(orth, dtype=float)
        return Lattice(basis=Q @ self.basis, gram=self.gram, det=self.det, name=self.name)

    def with_basis_change(self, unimodular) -> "Lattice":
        """Same point set, expressed in the basis ``A @ U`` for unimodular ``U``."""
        U = np.asarray(unimodular, dtype=float)
        if abs(abs(np.linalg.det(U)) - 1) > 1e-9:
            raise LatticeError("basis change is not unimodular")
        return Lattice.from_basis(self.basis @ U, name=self.name)

    def __repr__(self):
        label = self.name or "Lattice"
        return f"<{label} d={self.dim} det={self.det:.6g}>"


# ---------------------------------------------------------------------------
# Named catalog (Gram matrices only)


def _chain_cartan(n):
    G = 2 * np.eye(n)
    for i in range(n - 1):
        G[i, i + 1] = G[i + 1, i] = -1
    return G


def _d_basis(d):
    B = np.zeros((d, d))
    for i in range(d - 1):
        B[i, i], B[i + 1, i] = 1, -1
    B[d - 2, d - 1], B[d - 1, d - 1] = 1, 1
    return B


def _e_cartan(n):
    # Bourbaki labels: 1-3-4-5-6-7-8 chain with node 2 attached to node 4.
    edges = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)]
    G = 2 * np.eye(n)
    for a, b in edges:
        if a <= n and b <= n:
            G[a - 1, b - 1] = G[b - 1, a - 1] = -1
    return G


def catalog_gram(name: str, dim: Optional[int] = None) -> np.ndarray:
    """Gram matrix of a named lattice family.

    Families: ``Z`` (d >= 2), ``A`` (d >= 2), ``D`` (d >= 3), ``E6``, ``E7``,
    ``E8`` and the duals ``A*``, ``D*``, ``E6*``, ``E7*``, ``E8*`` (inverse Gram).
    """
    dual = name.endswith("*")
    base = name[:-1] if dual else name
    if base == "E" and dim is not None:
        base = f"E{int(dim)}"
    if base in ("E6", "E7", "E8"):
        n = int(base[1])
        if dim is not None and dim != n:
            raise LatticeError(f"{name} has dimension {n}, not {dim}")
        G = _e_cartan(n)
    elif base in ("Z", "A", "D"):
        if dim is None:
            raise LatticeError(f"family {name!r} needs a dimension")
        dim = int(dim)
        if base == "Z":
            if dim < 2:
                raise LatticeError("Z^d needs d >= 2")
            G = np.eye(dim)
        elif base == "A":
            if dim < 2:
                raise LatticeError("A_d needs d >= 2")
            G = _chain_cartan(dim)
        else:
            if dim < 3:
                raise LatticeError("D_d needs d >= 3")
            B = _d_basis(dim)
            G = B.T @ B
    else:
        raise LatticeError(f"unknown lattice family {name!r}")
    if dual:
        G = np.linalg.inv(G)
        G = (G + G.T) / 2
    return G


def named_lattice(name: str, dim: Optional[int] = None) -> Lattice:
    G = catalog_gram(name, dim)
    if name.rstrip("*") == "E" and dim is not None:
        name = f"E{int(dim)}{'*' if name.endswith('*') else ''}"
    label = name if name[0] == "E" else f"{name.rstrip('*')}{G.shape[0]}{'*' if name.endswith('*') else ''}"
    return Lattice.from_gram(G, name=label)


# ---------------------------------------------------------------------------
# Specs


@dataclass
class LatticeSpec:
    """One of: named family (+dim), basis vectors, Gram matrix, Selling parameters."""

    name: Optional[str] = None
    dim: Optional[int] = None
    basis: Optional[list] = None
    gram: Optional[list] = None
    selling: Optional[object] = None

    @classmethod
    def from_json(cls, obj) -> "LatticeSpec":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        if not isinstance(obj, Mapping):
            raise LatticeError("lattice spec must be a JSON object")
        unknown = set(obj) - {"name", "dim", "basis", "gram", "selling"}
        if unknown:
            raise LatticeError(f"unknown spec keys: {sorted(unknown)}")
        spec = cls(**obj)
        spec.validate()
        return spec

    def validate(self):
        variants = [self.name is not None, self.basis is not None,
                    self.gram is not None, self.selling is not None]
        if sum(variants) != 1:
            raise LatticeError("lattice spec needs exactly one of name, basis, gram, selling")
        if self.dim is not None and self.name is None:
            n = len(self.basis or self.gram or []) or (3 if self.selling is not None else None)
            if n is not None and n != self.dim:
                raise LatticeError(f"dim={self.dim} inconsistent with the given matrix")


def lattice_from_spec(spec) -> Lattice:
    """Build a :class:`Lattice` from a :class:`LatticeSpec` or its JSON/dict form.

    ``basis`` lists the basis vectors (one per row); they become the columns of
    the stored basis matrix.
    """
    if not isinstance(spec, LatticeSpec):
        spec = LatticeSpec.from_json(spec)
    if spec.name is not None:
        return named_lattice(spec.name, spec.dim)
    if spec.basis is not None:
        return Lattice.from_basis(np.array(spec.basis, dtype=float).T)
    if spec.gram is not None:
        return Lattice.from_gram(spec.gram)
    params = SellingParameters.from_json(spec.selling)
    return Lattice.from_gram(selling_to_gram(params))


# ---------------------------------------------------------------------------
# Enumeration


def _fincke_pohst(gram, center, radius2, cap):
    """All integer x with (x - center)^T gram (x - center) <= radius2.

    Breadth-first over levels d-1..0 using the upper Cholesky factor, so each
    level is a handful of vectorized numpy operations.
    """
    R = np.linalg.cholesky(gram).T
    d = R.shape[0]
    q = np.diag(R) ** 2
    mu = R / np.diag(R)[:, None]
    center = np.asarray(center, dtype=float)
    X = np.zeros((1, d), dtype=np.int64)
    budget = np.array([radius2 * (1 + 1e-12) + 1e-300])
    for i in range(d - 1, -1, -1):
        if i < d - 1:
            offset = (X[:, i + 1:] - center[i + 1:]) @ mu[i, i + 1:]
        else:
            offset = np.zeros(len(X))
        c = center[i] - offset
        half = np.sqrt(np.maximum(budget, 0) / q[i])
        lo = np.ceil(c - half).astype(np.int64)
        hi = np.floor(c + half).astype(np.int64)
        counts = np.maximum(hi - lo + 1, 0)
        total = int(counts.sum())
        if total > cap:
            raise ResourceLimitError(
                f"enumeration exceeds cap of {cap} candidates (set ISODIA_MAX_ENUM)")
        rows = np.repeat(np.arange(len(X)), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        xi = lo[rows] + (np.arange(total) - starts)
        X = X[rows]
        X[:, i] = xi
        budget = budget[rows] - q[i] * (xi - c[rows]) ** 2
    return X


def enumerate_vectors(L: Lattice, radius: float, cap: Optional[int] = None):
    """All nonzero lattice vectors of norm at most ``radius`` (+1e-9).

    Returns ``(coeffs, norms2)``: an integer array of coefficient vectors and
    their squared norms, sorted by norm then lexicographically.  Both ``v`` and
    ``-v`` are listed.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    cap = max_enum() if cap is None else cap
    bound2 = (radius + EPS_ENUM) ** 2
    X = _fincke_pohst(L.gram, np.zeros(L.dim), bound2, cap)
    norms2 = np.einsum("ij,jk,ik->i", X, L.gram, X)
    keep = (norms2 <= bound2) & np.any(X != 0, axis=1)
    X, norms2 = X[keep], norms2[keep]
    order = np.lexsort(tuple(X[:, k] for k in range(L.dim - 1, -1, -1)) + (np.round(norms2, 9),))
    return X[order], norms2[order]


def homogeneous_minimum(L: Lattice) -> float:
    """Length of a shortest nonzero lattice vector."""
    radius = float(np.sqrt(np.min(np.diag(L.gram))))
    _, norms2 = enumerate_vectors(L, radius)
    return float(np.sqrt(norms2.min()))


def _lex_smallest(rows):
    return min(range(len(rows)), key=lambda k: tuple(rows[k]))


def closest_vectors(L: Lattice, points, tie_tol: float = 1e-12, chunk: int = 4096):
    """Batch closest-vector search.

    Returns integer coefficient vectors (one row per point).  Ties within
    ``tie_tol`` (relative) are broken by the lexicographically smallest
    coefficient vector.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if not np.all(np.isfinite(P)):
        raise ValueError("points must be finite")
    U = L.coordinates(P)
    babai = np.rint(U).astype(np.int64)
    resid = P - L.embed(babai)
    worst = float(np.sqrt((resid**2).sum(axis=1).max()))
    out = np.empty_like(babai)
    if worst == 0.0:
        return babai
    # Any better candidate z satisfies |z - babai| <= 2 * worst.
    offsets, _ = enumerate_vectors(L, 2 * worst)
    offsets = np.vstack([np.zeros((1, L.dim), dtype=np.int64), offsets])
    shifts = L.embed(offsets)
    for s in range(0, len(P), chunk):
        r = resid[s:s + chunk]
        d2 = ((r[:, None, :] - shifts[None, :, :]) ** 2).sum(axis=2)
        best = d2.min(axis=1)
        tol = tie_tol * np.maximum(best, 1e-300) + 1e-300
        near = d2 <= (best + tol)[:, None]
        pick = d2.argmin(axis=1)
        for k in np.nonzero(near.sum(axis=1) > 1)[0]:
            cand = babai[s + k] + offsets[near[k]]
            pick[k] = np.nonzero(near[k])[0][_lex_smallest(cand)]
        out[s:s + chunk] = babai[s:s + chunk] + offsets[pick]
    return out


def closest_vector(L: Lattice, x):
    """Closest lattice point to ``x``: returns ``(coeffs, point)``."""
    c = closest_vectors(L, [x])[0]
    return c, L.embed(c)


# ---------------------------------------------------------------------------
# Selling reduction (d = 3)

_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


@dataclass
class SellingParameters:
    """Selling parameters ``p[(i, j)] = -<v_i, v_j>`` of an obtuse superbase.

    ``superbase`` holds the coefficient vectors of ``v_0..v_3`` (rows) in the
    original basis when produced by :func:`selling_reduce`.
    """

    p: dict
    superbase: Optional[np.ndarray] = field(default=None, repr=False)

    def multiset(self):
        return sorted(self.p.values(), reverse=True)

    def is_reduced(self, eps=EPS_SELLING):
        return all(v >= -eps for v in self.p.values())

    @classmethod
    def from_json(cls, obj) -> "SellingParameters":
        if isinstance(obj, Mapping):
            p = {}
            for key, value in obj.items():
                i, j = sorted(int(ch) for ch in str(key).replace(",", "").strip())
                p[(i, j)] = float(value)
            if set(p) != set(_PAIRS):
                raise LatticeError("Selling parameters need keys 01,02,03,12,13,23")
        else:
            values = list(obj)
            if len(values) != 6:
                raise LatticeError("Selling parameters need six values p01,p02,p03,p12,p13,p23")
            p = dict(zip(_PAIRS, map(float, values)))
        return cls(p=p)

    def to_json(self):
        return {f"{i}{j}": v for (i, j), v in sorted(self.p.items())}


def selling_reduce(gram, max_iter: int = 10_000) -> SellingParameters:
    """Reduce a 3x3 Gram matrix to an obtuse superbase (all p_ij >= 0).

    Uses the superbase ``v_1, v_2, v_3 = basis``, ``v_0 = -(v_1+v_2+v_3)``.  A
    step on a pair with ``p_ij < 0`` replaces ``(v_i, v_j, v_k, v_l)`` by
    ``(-v_i, v_j, v_k + v_i, v_l + v_i)``, which lowers the sum of squared
    norms by ``-2 p_ij``.
    """
    G = Lattice.from_gram(gram).gram
    if G.shape != (3, 3):
        raise LatticeError("Selling reduction is defined for d = 3 only")
    V = np.array([[-1, -1, -1], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=np.int64)
    scale = float(np.trace(G))
    for _ in range(max_iter):
        P = -(V @ G @ V.T)
        i, j = min(_PAIRS, key=lambda ij: P[ij])
        if P[i, j] >= -EPS_SELLING * scale:
            p = {(a, b): float(P[a, b]) + 0.0 for a, b in _PAIRS}
            return SellingParameters(p=p, superbase=V)
        k, l = [m for m in range(4) if m not in (i, j)]
        vi = V[i].copy()
        V[i] = -vi
        V[k] += vi
        V[l] += vi
    raise LatticeError("Selling reduction did not terminate (degenerate input?)")


def selling_to_gram(params: SellingParameters) -> np.ndarray:
    """Gram matrix of ``v_1, v_2, v_3`` from the six Selling parameters."""
    p = params.p
    if any(v < -EPS_SELLING for v in p.values()):
        raise LatticeError("Selling parameters must be non-negative")
    full = np.zeros((4, 4))
    for (i, j), v in p.items():
        full[i, j] = full[j, i] = v
    G = np.empty((3, 3))
    for a in range(1, 4):
        for b in range(1, 4):
            G[a - 1, b - 1] = full[a].sum() if a == b else -full[a, b]
    if np.any(np.linalg.eigvalsh(G) <= 1e-12 * max(1.0, np.abs(G).max())):
        raise LatticeError("Selling parameters are degenerate (Gram not positive definite)")
    return G


# ---------------------------------------------------------------------------
# Random lattices


def random_gram(rng: np.random.Generator, d: int = 3, max_cond: float = 50.0) -> np.ndarray:
    """Gram matrix of a random Gaussian basis, rejecting cond(Gram) > max_cond."""
    while True:
        A = rng.normal(size=(d, d))
        G = A.T @ A
        if np.linalg.cond(G) <= max_cond:
            return G


def as_lattice(obj) -> Lattice:
    if isinstance(obj, Lattice):
        return obj
    if isinstance(obj, (LatticeSpec, Mapping, str)):
        return lattice_from_spec(obj)
    if isinstance(obj, Sequence) or isinstance(obj, np.ndarray):
        return Lattice.from_gram(obj)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a lattice")
