import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transmission_lab import biharmonic as bh
from transmission_lab.acceptance import biharmonic_errors, mesh
from transmission_lab.geometry import SpdTensor2, Subdomain
from transmission_lab.transmission import TransmissionSetup, reconstruct_ue_analytic

I2 = SpdTensor2.isotropic(1.0)


@given(st.integers(1, 6), st.integers(0, 11), st.integers(0, 11))
def test_triangle_rule_exact_to_its_degree(n, a, b):
    if a + b > 2 * n - 2:
        return
    pts, w = bh.triangle_rule(n)
    # int over the reference triangle of x^a y^b = a! b! / (a + b + 2)!
    from math import factorial

    exact = factorial(a) * factorial(b) / factorial(a + b + 2)
    assert np.sum(w * pts[:, 0] ** a * pts[:, 1] ** b) == pytest.approx(exact, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_lagrange_basis_interpolates_polynomials(rough, k):
    space = bh.LagrangeSpace(rough.sub(Subdomain.HEART), k)
    pts, _ = bh.triangle_rule(3)
    assert np.allclose(space.ref_values(pts).sum(axis=1), 1.0)
    fn = lambda x, y: (1 + x - 2 * y) ** k
    c = space.interpolate(fn)
    X = space.physical_points(pts)
    assert np.max(np.abs(space.evaluate(c, pts) - fn(X[..., 0], X[..., 1]))) < 1e-11


def test_p1_embedding_is_exact(rough):
    space = bh.LagrangeSpace(rough.sub(Subdomain.HEART), 3)
    v = space.sm.vertices
    lin = 0.3 + v[:, 0] - 2 * v[:, 1]
    c = space.interpolate_p1(lin)
    assert np.allclose(c, space.interpolate(lambda x, y: 0.3 + x - 2 * y))


def test_c0ip_matrix_is_spd(rough):
    space = bh.LagrangeSpace(rough.sub(Subdomain.HEART), 3)
    op = bh.assemble_c0ip(space, SpdTensor2(1.2, 0.1, 0.9))
    fixed = space.boundary_dofs()
    free = np.setdiff1d(np.arange(space.ndof), fixed)
    A = op.matrix[free][:, free].toarray()
    assert np.allclose(A, A.T)
    assert np.linalg.eigvalsh(A).min() > 0


@settings(max_examples=8, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_cubic_clamped_solutions_are_reproduced(c):
    # cubics are annihilated by the fourth-order operator and lie in the P3 space,
    # so exact clamped data must reproduce them to roundoff
    m = mesh(0.25)
    setup = TransmissionSetup(m, I2, SpdTensor2(1.3, 0.2, 0.7), I2)
    fn = lambda x, y: c[0] * x**3 + c[1] * x * x * y + c[2] * y**3 + c[3] * x * y
    gr = lambda x, y: (3 * c[0] * x**2 + 2 * c[1] * x * y + c[3] * y,
                       c[1] * x * x + 3 * c[2] * y**2 + c[3] * x)
    sol = reconstruct_ue_analytic(setup, 0.0, fn, gr, degree=3)
    e0, e1 = sol.space.errors(sol.coeffs, fn, gr)
    assert e0 < 1e-9 and e1 < 1e-8


def test_biharmonic_h1_convergence():
    e1, e2 = biharmonic_errors(0.1), biharmonic_errors(0.05)
    assert e1[1] / e2[1] >= 1.8
    assert e2[0] < e1[0]


def test_low_degree_rejected(rough):
    with pytest.raises(ValueError):
        bh.assemble_c0ip(bh.LagrangeSpace(rough.sub(Subdomain.HEART), 1), I2)
