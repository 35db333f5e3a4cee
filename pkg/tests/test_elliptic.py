import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transmission_lab.acceptance import M_ANISO, manufactured_errors, mesh
from transmission_lab.elliptic import (assemble, compatibility_defect, conormal_vector, green_identity_residual,
                                       green_scale, poincare_constant_probe, solve_dirichlet, solve_mixed,
                                       solve_neumann)
from transmission_lab.errors import GuardError, IncompatibleData, TagEmpty
from transmission_lab.fields import BoundaryField
from transmission_lab.geometry import Boundary, SpdTensor2, Subdomain, boundary_integral

INNER, OUTER = Boundary.INNER, Boundary.OUTER
HEART, TORSO = Subdomain.HEART, Subdomain.TORSO

tensors = st.tuples(st.floats(0.3, 3.0), st.floats(-0.5, 0.5), st.floats(0.3, 3.0)).filter(
    lambda t: t[0] * t[2] - t[1] ** 2 > 0.05)


def test_stiffness_kills_constants_and_is_symmetric(coarse):
    sys = assemble(coarse, M_ANISO, TORSO)
    K = sys.stiffness
    assert abs(K - K.T).max() < 1e-14
    assert np.max(np.abs(K @ np.ones(sys.n))) < 1e-12
    assert sys.lumped.sum() == pytest.approx(sys.mass.sum())


def test_conormal_of_linear_field_matches_analytic(fine):
    # for a linear u the variational trace converges to nu . M grad u
    M = SpdTensor2(2.0, 0.4, 1.0)
    sys = assemble(fine, M, HEART)
    V = sys.sm.vertices
    u = 1.5 * V[:, 0] - 0.5 * V[:, 1]
    b = conormal_vector(sys, u, INNER, 0.0)
    X = V[sys.sm.boundary_local[INNER]]
    nu = X / np.linalg.norm(X, axis=1)[:, None]
    ex = nu @ (M.matrix @ np.array([1.5, -0.5]))
    assert np.max(np.abs(b - ex)) < 0.05 * np.max(np.abs(ex))


@settings(max_examples=20, deadline=None)
@given(tensors, st.integers(0, 2**32 - 1), st.sampled_from([HEART, TORSO]))
def test_green_identity_holds_for_random_pairs(t, seed, side):
    sys = assemble(mesh(0.25), SpdTensor2(*t), side)
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal(sys.n), rng.standard_normal(sys.n)
    assert green_identity_residual(sys, u, v) <= 1e-10 * green_scale(sys, u, v)


def test_manufactured_convergence():
    e1, e2 = manufactured_errors(0.1), manufactured_errors(0.05)
    for key in ("dirichlet", "neumann", "mixed"):
        assert e1[key] / e2[key] >= 3.0, key


def test_dirichlet_reproduces_linear_fields_exactly(coarse):
    sys = assemble(coarse, M_ANISO, HEART)
    fn = lambda x, y: 2.0 - x + 3.0 * y
    X = sys.sm.vertices
    Xb = X[sys.sm.boundary_local[INNER]]
    u = solve_dirichlet(sys, 0.0, {INNER: fn(*Xb.T)})
    assert np.max(np.abs(u.values - fn(*X.T))) < 1e-12


def test_dirichlet_needs_every_tag(coarse):
    sys = assemble(coarse, M_ANISO, TORSO)
    with pytest.raises(ValueError):
        solve_dirichlet(sys, 0.0, {INNER: 0.0})


def test_mixed_needs_a_partition(coarse):
    sys = assemble(coarse, M_ANISO, TORSO)
    with pytest.raises(TagEmpty):
        solve_mixed(sys, 0.0, (INNER, 0.0), (INNER, 0.0))


def test_neumann_gate_rejects_incompatible_data(coarse):
    sys = assemble(coarse, M_ANISO, HEART)
    with pytest.raises(IncompatibleData):
        solve_neumann(sys, 0.0, 1.0)
    with pytest.raises(IncompatibleData):
        solve_neumann(sys, 1.0, 0.0)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_neumann_solution_has_zero_boundary_mean(coef):
    m = mesh(0.25)
    sys = assemble(m, M_ANISO, HEART)
    X = sys.sm.vertices[sys.sm.boundary_local[INNER]]
    th = np.arctan2(X[:, 1], X[:, 0])
    u1 = coef[0] * np.cos(th) + coef[1] * np.sin(2 * th) + coef[2] * np.cos(3 * th)
    u1 = u1 - boundary_integral(m, BoundaryField(u1, INNER), INNER) / boundary_integral(m, 1.0, INNER)
    u = solve_neumann(sys, 0.0, BoundaryField(u1, INNER))
    mean = boundary_integral(m, u.trace(m, INNER), INNER)
    assert abs(mean) <= 1e-10 * max(1.0, np.max(np.abs(u.values)))
    # the conormal trace returns the prescribed flux functional: lumped weight * b == consistent mass @ u1
    bl = sys.sm.boundary_local[INNER]
    b = conormal_vector(sys, u.values, INNER, 0.0)
    lhs = sys.boundary_lumped[INNER][bl] * b
    rhs = sys.boundary_mass[INNER][bl][:, bl] @ u1
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(rhs)))


def test_compatibility_defect_is_linear(coarse):
    sys = assemble(coarse, M_ANISO, TORSO)
    a = compatibility_defect(sys, 1.0, {OUTER: 0.5})
    b = compatibility_defect(sys, 2.0, {OUTER: 1.0})
    assert b == pytest.approx(2 * a)


def test_poincare_probe(coarse):
    sys = assemble(coarse, SpdTensor2.isotropic(1.0), HEART)
    c = poincare_constant_probe(sys)
    # eigen-based constant dominates the Rayleigh quotient of any nonconstant field
    X = sys.sm.vertices
    for fld in (X[:, 0], X[:, 0] * X[:, 1], np.cos(3 * X[:, 1])):
        assert poincare_constant_probe(sys, fld) <= c * (1 + 1e-8)
    with pytest.raises(GuardError):
        poincare_constant_probe(sys, np.ones(sys.n))
