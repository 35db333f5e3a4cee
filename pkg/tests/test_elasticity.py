import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from transmission_lab import elasticity as el
from transmission_lab.acceptance import mesh
from transmission_lab.errors import AtSingularity, NotElliptic, NotH20
from transmission_lab.fields import VectorField2
from transmission_lab.geometry import Boundary, Subdomain
from transmission_lab.transmission import TransmissionCoefficients

INNER = Boundary.INNER
HEART = Subdomain.HEART

lame = st.tuples(st.floats(0.2, 3.0), st.floats(-0.9, 3.0)).map(lambda t: (t[0] * t[1], t[0]))


def test_parameter_validation():
    with pytest.raises(NotElliptic):
        el.LameParameters(1.0, 0.0)
    with pytest.raises(NotElliptic):
        el.LameParameters(-2.5, 1.0)
    with pytest.raises(NotElliptic):
        el.LameParameters(1.0, 1.0, m0=0.0)
    assert el.LameParameters(1.0, 2.0).scaled(3.0) == el.LameParameters(3.0, 6.0)


def test_energy_kernels(rough):
    p = el.LameParameters(2.0, 1.0)
    grad = el.assemble_lame(rough, p, HEART, "gradient")
    strain = el.assemble_lame(rough, p, HEART, "strain")
    X = grad.sm.vertices
    rot = VectorField2(np.column_stack([-X[:, 1], X[:, 0]]), HEART).flat
    const = np.concatenate([np.ones(grad.n), np.zeros(grad.n)])
    assert np.max(np.abs(strain.stiffness @ rot)) < 1e-12
    assert np.max(np.abs(strain.stiffness @ const)) < 1e-12
    assert np.max(np.abs(grad.stiffness @ const)) < 1e-12
    assert rot @ (grad.stiffness @ rot) > 1.0
    # the two energies differ by a null Lagrangian: interior rows coincide
    inter = grad.sm.interior_local()
    rows = np.concatenate([inter, grad.n + inter])
    rng = np.random.default_rng(1)
    u = rng.standard_normal(grad.ndof)
    assert np.max(np.abs((grad.stiffness @ u - strain.stiffness @ u)[rows])) < 1e-11


def test_unknown_energy_rejected(rough):
    with pytest.raises(ValueError):
        el.assemble_lame(rough, el.LameParameters(1.0, 1.0), HEART, "bogus")


@settings(max_examples=10, deadline=None)
@given(lame, st.integers(0, 2**32 - 1), st.sampled_from(["conormal", "stress"]))
def test_green_identity_for_both_boundary_operators(lm, seed, op):
    p = el.LameParameters(*lm)
    m = mesh(0.25)
    rng = np.random.default_rng(seed)
    n = m.sub(HEART).n
    u, v = rng.standard_normal(2 * n), rng.standard_normal(2 * n)
    r, s = el.elasticity_green_residual(m, u, v, p, HEART, op)
    assert r <= 1e-10 * s


def test_traction_of_linear_field(fine):
    p = el.LameParameters(2.0, 1.0)
    sys = el.assemble_lame(fine, p, HEART, "strain")
    X = sys.sm.vertices
    u = VectorField2(np.column_stack([X[:, 0], -X[:, 1]]), HEART)
    t = el.stress_operator(sys, u, INNER, np.zeros(sys.ndof))
    Xb = X[sys.sm.boundary_local[INNER]]
    nu = Xb / np.linalg.norm(Xb, axis=1)[:, None]
    # div u = 0, eps = diag(1, -1): sigma nu = 2 mu (nu_x, -nu_y)
    ex = 2 * p.mu * np.column_stack([nu[:, 0], -nu[:, 1]])
    assert np.max(np.abs(t - ex)) < 0.02 * np.max(np.abs(ex))
    rot = VectorField2(np.column_stack([-X[:, 1], X[:, 0]]), HEART)
    assert np.max(np.abs(el.stress_operator(sys, rot, INNER, np.zeros(sys.ndof)))) < 1e-10


def test_conormal_of_rotation_is_not_zero(coarse):
    p = el.LameParameters(2.0, 1.0)
    sys = el.assemble_lame(coarse, p, HEART, "gradient")
    X = sys.sm.vertices
    rot = VectorField2(np.column_stack([-X[:, 1], X[:, 0]]), HEART)
    assert np.max(np.abs(el.lame_conormal(sys, rot, INNER, np.zeros(sys.ndof)))) > 0.5


@settings(max_examples=40, deadline=None)
@given(lame, st.floats(0.1, 3.0), st.floats(0, 2 * np.pi))
def test_kelvin_matrix_is_annihilated(lm, r, th):
    p = el.LameParameters(*lm)
    y = np.array([0.3, -0.2])
    x = y + r * np.array([np.cos(th), np.sin(th)])
    assert el.kelvin_annihilation(x, y, p) <= 1e-6


def test_kelvin_matrix_is_symmetric_and_singular_at_pole():
    p = el.LameParameters(1.5, 0.7)
    K = el.kelvin_somigliana([0.4, -1.1], p)
    assert np.allclose(K, K.T)
    with pytest.raises(AtSingularity):
        el.kelvin_somigliana([0.0, 0.0], p)


@given(lame, st.tuples(st.floats(-3, 3), st.floats(-3, 3)), st.tuples(*[st.floats(-2, 2)] * 4))
def test_symbol_closed_forms(lm, z, w):
    z = np.array(z)
    w = np.array([w[0] + 1j * w[1], w[2] + 1j * w[3]])
    assume(z @ z > 1e-3 and np.vdot(w, w).real > 1e-3)
    p = el.LameParameters(*lm)
    rec = el.symbol_check(p, z, w)
    assert abs(rec.det_value - rec.det_closed) <= 1e-12 * abs(rec.det_closed)
    assert abs(rec.quadratic_form - rec.quadratic_closed) <= 1e-12 * abs(rec.quadratic_closed)
    assert rec.quadratic_form > 0


def test_symbol_determinant_at_unit_parameters():
    rec = el.symbol_check(el.LameParameters(1.0, 1.0), [1.0, 0.0], [1.0, 0.0])
    assert rec.det_value.real == pytest.approx(3.0, abs=1e-12)


def test_elastic_nullspace_residuals_shrink():
    coeffs = TransmissionCoefficients(1.0, 1.0, 1.0, 0.0)
    ps = (el.LameParameters(2.0, 1.0), el.LameParameters(1.0, 0.5), el.LameParameters(1.0, 1.0))
    worst = []
    for h in (0.1, 0.05):
        m = mesh(h)
        _, res = el.elastic_transmission_demo(m, coeffs, *ps, center=(0.1, 0.0), radius=0.8, direction=(1.0, 0.5))
        worst.append(max(res.values()))
        assert res["r8"] == 0.0 and res["r9"] == 0.0
    assert worst[0] / worst[1] >= 2.5


def test_elastic_nullspace_requires_h20(coarse):
    es = el.ElasticSetup(coarse, el.LameParameters(2.0, 1.0), el.LameParameters(1.0, 0.5), el.LameParameters(1.0, 1.0))
    X = coarse.sub(HEART).vertices
    u = VectorField2(np.column_stack([np.ones(len(X)), X[:, 0]]), HEART)
    with pytest.raises(NotH20):
        el.elastic_nullspace(es, u, (0.0, 0.0), TransmissionCoefficients(1.0, 1.0, 1.0, 0.0))


def test_demo_rejects_unsupported_coefficients(rough):
    p = el.LameParameters(1.0, 1.0)
    with pytest.raises(ValueError):
        el.elastic_transmission_demo(rough, TransmissionCoefficients(1.0, 2.0, 1.0, 0.0), p, p, p, radius=0.5)
