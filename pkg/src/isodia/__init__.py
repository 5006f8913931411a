"""Isodiametric problem with lattice-point constraints."""

from .errors import (
    GeometryError, IsodiaError, LatticeError, MinkowskiBoundError, PrecisionError,
    ResourceLimitError,
)
from .isodiametric import (
    Certificate, ExtremalBody, check_corollary3, check_corollary4, check_proposition5,
    coverage_check, diam_of_volume, export_extremal_mesh, extremal_body, in_exclusion_region,
    uniqueness_certificate, upper_bound_volume,
)
from .lattice import (
    Lattice, LatticeSpec, SellingParameters, closest_vector, enumerate_vectors,
    homogeneous_minimum, lattice_from_spec, named_lattice, selling_reduce, selling_to_gram,
)
from .metrics import LatticeMetrics, covering_radius, metrics
from .volume import (
    VolumeEstimate, r_of_volume, volume, volume_exact, volume_exact3d, volume_mc,
    volume_z3_closed,
)
from .voronoi import (
    BeltReport, FedorovType, VoronoiCell, belts, export_mesh, fedorov_classify,
    relevant_vectors, vertex_classes, voronoi_cell,
)

__version__ = "0.1.0"
