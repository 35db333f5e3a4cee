import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transmission_lab.errors import InvalidGeometry, NotBoundaryEdge, NotSpd, TagEmpty
from transmission_lab.fields import BoundaryField, ScalarField, VectorField2
from transmission_lab.geometry import (Boundary, SpdTensor2, Subdomain, area, boundary_integral,
                                       build_disk_in_disk_mesh, domain_integral, perimeter, read_mesh, write_mesh)

INNER, OUTER = Boundary.INNER, Boundary.OUTER
HEART, TORSO = Subdomain.HEART, Subdomain.TORSO


def test_mesh_respects_size_and_orientation(coarse):
    assert coarse.h <= 0.1
    assert np.all(coarse.signed_areas() > 0)
    assert coarse.sub(HEART).n + coarse.sub(TORSO).n - len(coarse.boundary_vertices(INNER)) == coarse.n_vertices


def test_perimeters_and_areas_approach_circles(coarse, fine):
    for m in (coarse, fine):
        assert perimeter(m, INNER) == pytest.approx(2 * math.pi, rel=2e-3)
        assert perimeter(m, OUTER) == pytest.approx(4 * math.pi, rel=2e-3)
        assert area(m, HEART) + area(m, TORSO) == pytest.approx(4 * math.pi, rel=5e-3)
    # polygon perimeter error is O(h^2)
    e1 = abs(perimeter(coarse, INNER) - 2 * math.pi)
    e2 = abs(perimeter(fine, INNER) - 2 * math.pi)
    assert e1 / e2 > 3.5


def test_meshes_nested_at_vertices(coarse, fine):
    from scipy.spatial import cKDTree

    d, _ = cKDTree(fine.vertices).query(coarse.vertices)
    assert d.max() < 1e-12


def test_normals_point_out_of_each_side(coarse):
    for side, sign in ((HEART, 1.0), (TORSO, -1.0)):
        sm = coarse.sub(side)
        idx = sm.edges_with(INNER)
        mid = 0.5 * (sm.vertices[sm.edges[idx, 0]] + sm.vertices[sm.edges[idx, 1]])
        radial = mid / np.linalg.norm(mid, axis=1)[:, None]
        assert np.all(sign * np.sum(sm.edge_normals[idx] * radial, axis=1) > 0.99)
    k = coarse.find_boundary_edge(*coarse.boundary_edges[0])
    n_h = coarse.outward_normal(k, HEART)
    n_t = coarse.outward_normal(k, TORSO)
    assert np.allclose(n_h, -n_t)


def test_invalid_queries_raise(coarse):
    with pytest.raises(NotBoundaryEdge):
        coarse.outward_normal(10**6, HEART)
    with pytest.raises(TagEmpty):
        coarse.sub(HEART).edges_with(OUTER)
    with pytest.raises(InvalidGeometry):
        build_disk_in_disk_mesh(2.0, 1.0, 0.1)
    with pytest.raises(InvalidGeometry):
        build_disk_in_disk_mesh(1.0, 2.0, 1.5)


@given(st.floats(-5, 5), st.floats(0.05, 5), st.floats(0.05, 5))
def test_spd_tensor_accepts_exactly_positive_definite(m12, m11, m22):
    if m11 * m22 - m12 ** 2 > 0:
        t = SpdTensor2(m11, m12, m22)
        assert np.all(np.linalg.eigvalsh(t.matrix) > 0)
        assert t.det == pytest.approx(np.linalg.det(t.matrix))
    else:
        with pytest.raises(NotSpd):
            SpdTensor2(m11, m12, m22)


def test_spd_tensor_rejects_non_finite():
    with pytest.raises(NotSpd):
        SpdTensor2(float("nan"), 0.0, 1.0)
    with pytest.raises(NotSpd):
        SpdTensor2(-1.0, 0.0, -1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_integrals_exact_for_linear_fields(a, b, c):
    from transmission_lab.acceptance import mesh

    m = mesh(0.25)
    fn = lambda x, y: a + b * x + c * y
    # linear fields integrate exactly over the polygon; centred disks kill the x, y terms
    assert domain_integral(m, ScalarField.from_function(m, fn, HEART), HEART) == pytest.approx(
        a * area(m, HEART), abs=1e-10)
    assert boundary_integral(m, BoundaryField.from_function(m, fn, OUTER), OUTER) == pytest.approx(
        a * perimeter(m, OUTER), abs=1e-10)


def test_mesh_roundtrip(tmp_path, rough):
    p = tmp_path / "mesh.txt"
    write_mesh(rough, p)
    back = read_mesh(p)
    assert np.array_equal(back.vertices, rough.vertices)
    assert np.array_equal(back.triangles, rough.triangles)
    assert np.array_equal(back.edge_tags, rough.edge_tags)
    assert back.r_inner == pytest.approx(1.0)


def test_read_mesh_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("not a mesh\n")
    with pytest.raises(InvalidGeometry):
        read_mesh(p)


def test_field_containers(rough):
    u = ScalarField.from_function(rough, lambda x, y: x + 2 * y, HEART)
    tr = u.trace(rough, INNER)
    X = rough.vertices[rough.boundary_vertices(INNER)]
    assert np.allclose(tr.values, X[:, 0] + 2 * X[:, 1])
    v = VectorField2.from_function(rough, lambda x, y: (x, -y), TORSO)
    assert np.array_equal(VectorField2.from_flat(v.flat, TORSO).values, v.values)
    assert np.allclose((2 * u - u).values, u.values)
