import json
import math
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from isodia import (
    Lattice, MinkowskiBoundError, SellingParameters, check_corollary3, check_corollary4,
    check_proposition5, coverage_check, diam_of_volume, extremal_body, fedorov_classify,
    in_exclusion_region, named_lattice, selling_to_gram, uniqueness_certificate,
    upper_bound_volume, vertex_classes, volume, voronoi_cell,
)
from isodia.isodiametric import extremal_mesh, export_extremal_mesh, mesh_volume
from isodia.lattice import random_gram
from isodia.volume import ball_volume, cell_volume

SQ2, SQ3 = math.sqrt(2), math.sqrt(3)


# extremal bodies

def test_extremal_examples(z3):
    b = extremal_body(z3, 8)
    assert b.r == pytest.approx(SQ3, abs=1e-12) and b.is_full_cell and not b.is_ball
    assert b.diameter == pytest.approx(2 * SQ3)
    b = extremal_body(z3, math.pi / 6)
    assert b.r == pytest.approx(0.5) and b.is_ball and not b.is_full_cell
    b = extremal_body(z3, 6)
    assert 1 < b.r < SQ2 and not b.is_ball and not b.is_full_cell


def test_extremal_rejects_large_volume(z3):
    with pytest.raises(MinkowskiBoundError):
        extremal_body(z3, 8.5)


def test_diam_and_upper_bound_examples(z3, remark):
    assert diam_of_volume(z3, 4 * math.pi / 3) == pytest.approx(2, abs=1e-12)
    assert diam_of_volume(z3, 8) == pytest.approx(2 * SQ3, abs=1e-12)
    for V in (1e-6, 1e-3):
        assert diam_of_volume(z3, V) == pytest.approx((6 * V / math.pi) ** (1 / 3), rel=1e-10)
    assert upper_bound_volume(z3, 2) == pytest.approx(4 * math.pi / 3, abs=1e-12)
    assert upper_bound_volume(z3, 2 * SQ3) == pytest.approx(8, abs=1e-12)
    assert upper_bound_volume(remark, 2 * SQ3) == pytest.approx(ball_volume(SQ3, 3), rel=1e-12)
    with pytest.raises(ValueError):
        upper_bound_volume(z3, 4)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.05, 0.99))
def test_duality(seed, frac):
    L = Lattice.from_gram(random_gram(np.random.default_rng(seed), 3))
    V = frac * cell_volume(L)
    D = diam_of_volume(L, V)
    assert upper_bound_volume(L, D) == pytest.approx(V, rel=1e-9)


@pytest.mark.parametrize("alpha", [0.5, 2.0, 3.0])
def test_diameter_scaling(remark, alpha):
    V = 30.0
    assert diam_of_volume(remark.scaled(alpha), alpha**3 * V) == pytest.approx(
        alpha * diam_of_volume(remark, V), rel=1e-10)


# exclusion region

def test_exclusion_examples(z3):
    assert in_exclusion_region(z3, 1, [1, 1, 1])
    assert not in_exclusion_region(z3, 1, [0.5, 0, 0])
    assert not in_exclusion_region(z3, 1, [1, 0, 0])
    assert not in_exclusion_region(z3, 1, [2, 0, 0])
    with pytest.raises(ValueError):
        in_exclusion_region(z3, 0, [1, 1, 1])


@pytest.mark.parametrize("V_rel", [0.3, 0.75, 0.98, 1.0])
def test_coverage(z3, remark, V_rel):
    assert coverage_check(z3, V_rel * 8, samples=20_000)
    assert coverage_check(remark, V_rel * cell_volume(remark), samples=20_000)


def test_coverage_examples(z3, remark):
    assert coverage_check(z3, 6, samples=10**5)
    assert coverage_check(remark, 4 * remark.det, samples=10**5)


# certificates

def test_corollary3_examples(z3, remark):
    assert check_corollary3(z3, 1.5).passed
    assert not check_corollary3(z3, SQ3).passed
    r = math.sqrt(35 / 24) + math.sqrt(1.5)  # between the two doubled vertex norms
    cert = check_corollary3(remark, r)
    assert not cert.passed
    assert cert.witnesses and all(w["gons"] == 4 for w in cert.witnesses)


def test_corollary4_examples(z3, remark, a2):
    for d in range(2, 6):
        assert check_corollary4(named_lattice("Z", d)).passed
    assert check_corollary4(a2).passed
    cert = check_corollary4(remark)
    assert not cert.passed
    assert len(cert.witnesses) == 2 and all(w["gons"] == 4 for w in cert.witnesses)
    assert cert.witnesses[0]["max_vertex_norm"] == pytest.approx(2 * math.sqrt(35 / 24), abs=1e-9)


def test_proposition5_examples(z3, remark):
    cert = check_proposition5(remark)
    assert cert.passed and cert.verdict == "unique_all_V"
    assert all(w["six_belts"] for w in cert.witnesses)
    cert = check_proposition5(z3)
    assert not cert.passed and "precondition" in cert.details
    assert "precondition" in check_proposition5(named_lattice("Z", 4)).details


def test_uniqueness_examples(remark):
    cert = uniqueness_certificate(named_lattice("D", 4))
    assert (cert.verdict, cert.route) == ("unique_all_V", "corollary4")
    cert = uniqueness_certificate(remark)
    assert (cert.verdict, cert.route) == ("unique_all_V", "proposition5")
    assert json.loads(cert.to_json())["route"] == "proposition5"


def _generic_to_lattice():
    p = {"01": 0.8, "02": 1.1, "03": 1.45, "12": 0.95, "13": 1.3, "23": 1.7}
    return Lattice.from_gram(selling_to_gram(SellingParameters.from_json(p)))


def test_generic_truncated_octahedron():
    L = _generic_to_lattice()
    cell = voronoi_cell(L)
    assert str(fedorov_classify(cell)) == "TruncatedOctahedron"
    norms = sorted(c.norm for c in vertex_classes(cell))
    assert norms[0] < norms[1] - 1e-6 < norms[2] - 2e-6
    assert sum(abs(n - cell.circumradius) < 1e-9 for n in norms) == 1
    assert not check_corollary4(L).passed
    cert = uniqueness_certificate(L)
    assert (cert.verdict, cert.route) == ("unique_all_V", "proposition5")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.2, 3.0), min_size=6, max_size=6))
def test_random_selling_never_inconclusive(values):
    L = Lattice.from_gram(selling_to_gram(SellingParameters.from_json(values)))
    assert uniqueness_certificate(L).verdict == "unique_all_V"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_corollary4_implies_corollary3(seed):
    L = Lattice.from_gram(random_gram(np.random.default_rng(seed), 3))
    cell = voronoi_cell(L)
    if check_corollary4(L, cell).passed:
        for r in np.linspace(0.05, 0.999, 10) * cell.circumradius:
            assert check_corollary3(L, r, cell).passed


def test_certificate_invariance(remark, d3):
    rng = np.random.default_rng(4)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    U = np.array([[1, 2, 0], [0, 1, 0], [1, 1, 1]])
    for L in (remark, d3, _generic_to_lattice()):
        base = uniqueness_certificate(L)
        for other in (L.scaled(2.5), L.scaled(0.3), L.with_basis_change(U), L.transformed(Q)):
            cert = uniqueness_certificate(other)
            assert (cert.verdict, cert.route) == (base.verdict, base.route)


def test_partial_certificate_in_4d():
    # Z ⊕ (scaled A_3*) style lattice where not every facet reaches the circumradius
    G = np.eye(4)
    G[1:, 1:] = np.array([[3, -1, -1], [-1, 3, -1], [-1, -1, 3]]) * 0.7
    L = Lattice.from_gram(G)
    cert = uniqueness_certificate(L)
    assert cert.verdict in ("unique_all_V", "unique_for_r_below")
    if cert.verdict == "unique_for_r_below":
        assert cert.threshold > 0
        assert check_corollary3(L, cert.threshold).passed


# meshes

def _components(F):
    edges = defaultdict(list)
    for i, t in enumerate(F):
        for k in range(3):
            edges[tuple(sorted((t[k], t[(k + 1) % 3])))].append(i)
    pairs = [v for v in edges.values() if len(v) == 2]
    rows = [a for a, _ in pairs] + [b for _, b in pairs]
    cols = [b for _, b in pairs] + [a for a, _ in pairs]
    m = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(F), len(F)))
    return connected_components(m)[0]


def _watertight(F):
    count = defaultdict(int)
    for t in F:
        for k in range(3):
            count[tuple(sorted((t[k], t[(k + 1) % 3])))] += 1
    return set(count.values()) == {2}


def _pieces(z3, r, n=10):
    body = extremal_body(z3, volume(z3, r).value)
    P, F = extremal_mesh(body, n)
    norms = np.linalg.norm(P, axis=1)
    sph = np.all(np.abs(norms[F] - r) < 1e-9, axis=1)
    cell = body.cell
    on_plane = np.abs(P @ cell.centers.T - cell.offsets**2) < 1e-9
    planes = {int(np.nonzero(on_plane[t].all(axis=0))[0][0]) for t in F if on_plane[t].all(axis=0).any()}
    return P, F, body, _components(F[sph]) if sph.any() else 0, len(planes)


def test_mesh_full_cube(z3):
    P, F, body, n_sph, n_planes = _pieces(z3, SQ3)
    assert n_sph == 0 and n_planes == 6
    assert mesh_volume(P, F) == pytest.approx(8, abs=1e-9)


def test_mesh_r12(z3):
    # below sqrt(2): six flat disks inside one connected spherical region
    P, F, body, n_sph, n_planes = _pieces(z3, 1.2)
    assert n_planes == 6 and n_sph == 1
    assert _watertight(F)
    assert _components(F[~np.all(np.abs(np.linalg.norm(P, axis=1)[F] - 1.2) < 1e-9, axis=1)]) == 6


def test_mesh_r16(z3):
    # above sqrt(2): six clipped squares and eight spherical corner patches
    P, F, body, n_sph, n_planes = _pieces(z3, 1.6)
    assert n_planes == 6 and n_sph == 8
    assert _watertight(F)


def test_mesh_volume_converges(z3):
    for r in (1.2, 1.6):
        V = volume(z3, r).value
        body = extremal_body(z3, V)
        coarse = abs(mesh_volume(*extremal_mesh(body, 4)) - V)
        fine = abs(mesh_volume(*extremal_mesh(body, 16)) - V)
        assert fine < coarse / 8 and fine / V < 5e-3


def test_mesh_remark_watertight_and_export(remark):
    body = extremal_body(remark, 0.8 * cell_volume(remark))
    P, F = extremal_mesh(body, 6)
    assert _watertight(F)
    assert np.all(np.linalg.norm(P, axis=1) <= body.r * (1 + 1e-12))
    text = export_extremal_mesh(body, 4, fmt="off").decode()
    assert text.startswith("OFF\n")
