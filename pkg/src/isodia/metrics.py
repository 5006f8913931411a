"""Packing and covering quantities of a lattice and of its cell ``DV(2L)``."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

from .lattice import Lattice, homogeneous_minimum
from .voronoi import VoronoiCell, voronoi_cell


@dataclass(frozen=True)
class LatticeMetrics:
    lam: float
    mu: float
    cell_inradius: float
    cell_circumradius: float
    cell_diameter: float

    def scaled(self, alpha):
        return LatticeMetrics(*(alpha * v for v in asdict(self).values()))

    def as_dict(self):
        return {"lambda": self.lam, "mu": self.mu, "cell_inradius": self.cell_inradius,
                "cell_circumradius": self.cell_circumradius, "cell_diameter": self.cell_diameter}


def covering_radius(L: Lattice, cell: Optional[VoronoiCell] = None) -> float:
    """Covering radius ``mu(L)``: half the largest vertex norm of ``DV(2L)``."""
    cell = voronoi_cell(L) if cell is None else cell
    return cell.circumradius / 2


def metrics(L: Lattice, cell: Optional[VoronoiCell] = None) -> LatticeMetrics:
    cell = voronoi_cell(L) if cell is None else cell
    mu = covering_radius(L, cell)
    return LatticeMetrics(
        lam=homogeneous_minimum(L),
        mu=mu,
        cell_inradius=cell.inradius,
        cell_circumradius=cell.circumradius,
        cell_diameter=2 * cell.circumradius,
    )
