import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transmission_lab.acceptance import (M_ANISO, M_ANISO_E, M_ANISO_I, NULLSPACE_COEFFS, criterion_5, criterion_8,
                                         mesh, nullspace_levels)
from transmission_lab.errors import AlphaIZero, NotH20, NotPositive, SupportNotInside
from transmission_lab.fields import BoundaryField, ScalarField
from transmission_lab.geometry import Boundary, SpdTensor2, Subdomain, boundary_integral
from transmission_lab.transmission import (CardioConstants, PotentialTriple, TransmissionCoefficients,
                                           TransmissionSetup, calibration_constant, calibration_residual,
                                           existence_condition, is_h20, make_h20_bump, nullspace_generate,
                                           reconstruct_ui, supplement_solve, transmission_residuals)

INNER, OUTER = Boundary.INNER, Boundary.OUTER
HEART, TORSO = Subdomain.HEART, Subdomain.TORSO
I2 = SpdTensor2.isotropic(1.0)


@pytest.fixture(scope="module")
def aniso(coarse):
    return TransmissionSetup(coarse, M_ANISO_I, M_ANISO_E, M_ANISO)


def test_coefficient_validation():
    with pytest.raises(ValueError):
        TransmissionCoefficients(0.0, 0.0, -1.0, 0.0)
    with pytest.raises(ValueError):
        TransmissionCoefficients(1.0, 1.0, 0.0, 0.0)
    with pytest.raises(NotPositive):
        TransmissionCoefficients(1.0, 1.0, -1.0, 0.0, gamma=0.0)
    assert TransmissionCoefficients(2.0, 3.0, 0.5, -1.0).prefactor == pytest.approx(0.5 * 3.0 - 2.0)


def test_bump_membership(aniso):
    u = make_h20_bump(aniso.mesh, (0.1, 0.2), 0.5)
    assert is_h20(aniso.sys_e, u)
    assert not is_h20(aniso.sys_e, ScalarField.from_function(aniso.mesh, lambda x, y: 1 + x, HEART))
    with pytest.raises(SupportNotInside):
        make_h20_bump(aniso.mesh, (0.6, 0.0), 0.5)


def test_nullspace_rejects_fields_outside_h20(aniso):
    u = ScalarField.from_function(aniso.mesh, lambda x, y: 1 - x * x - y * y, HEART)
    with pytest.raises(NotH20):
        nullspace_generate(aniso, u, 0.0, NULLSPACE_COEFFS[0])


def test_nullspace_triple_residuals_shrink_with_h():
    coeffs = NULLSPACE_COEFFS[1]
    coarse_lv, fine_lv = nullspace_levels((0.2, -0.1, 0.5), coeffs)
    for L in (coarse_lv, fine_lv):
        assert max(L["res"].values()) <= 10.0 * L["h"] * L["norm"]
        assert L["cal"] <= 1e-8 * max(L["cal_scale"], 1.0)
    # u_b = 0 makes the torso residuals vanish identically
    for key in ("r8", "r12", "r6"):
        assert coarse_lv["res"][key] == 0.0


def test_nullspace_with_vanishing_alpha_i(aniso):
    coeffs = TransmissionCoefficients(0.0, 1.0, -1.0, 1.0)
    u = make_h20_bump(aniso.mesh, (0.0, 0.0), 0.8)
    t = nullspace_generate(aniso, u, 0.0, coeffs)
    assert np.array_equal(t.u_i.values, u.values)
    assert not np.any(t.u_e.values)


def test_nonzero_constant_breaks_calibration():
    h0 = 0.7
    for L in nullspace_levels((0.2, -0.1, 0.5), NULLSPACE_COEFFS[1], h0=h0):
        assert L["cal"] > 0.1 * h0 * L["perimeter"]


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_existence_condition_is_linear(a, b, seed):
    setup = TransmissionSetup(mesh(0.25), M_ANISO_I, M_ANISO_E, M_ANISO)
    coeffs = TransmissionCoefficients(1.0, 2.0, -1.0, 0.5)
    rng = np.random.default_rng(seed)
    nb, no = setup.sys_b.n, len(setup.sys_b.sm.boundary_local[OUTER])
    f, g, f1, g1 = rng.standard_normal(nb), rng.standard_normal(nb), rng.standard_normal(no), rng.standard_normal(no)
    E = lambda x, x1: existence_condition(setup, ScalarField(x, TORSO), BoundaryField(x1, OUTER), coeffs)
    lhs = E(a * f + b * g, a * f1 + b * g1)
    rhs = a * E(f, f1) + b * E(g, g1)
    assert abs(lhs - rhs) <= 1e-12 * (abs(a * E(f, f1)) + abs(b * E(g, g1)) + 1e-300) + 1e-13


def test_existence_condition_vanishes_with_prefactor(aniso):
    coeffs = TransmissionCoefficients(1.0, 1.0, -1.0, 1.0)
    assert coeffs.prefactor == 0.0
    assert existence_condition(aniso, 1.0, 2.0, coeffs) == 0.0


def test_existence_condition_of_constants(aniso):
    # f = 1, f1 = 0 gives prefactor times the torso polygon area
    from transmission_lab.geometry import area

    coeffs = TransmissionCoefficients(1.0, 2.0, -1.0, 0.5)
    assert existence_condition(aniso, 1.0, None, coeffs) == pytest.approx(coeffs.prefactor * area(aniso.mesh, TORSO))


def test_calibration_constant_is_mean_of_torso_trace(aniso):
    ub = ScalarField.from_function(aniso.mesh, lambda x, y: 2.0 + x, TORSO)
    h0 = calibration_constant(aniso, ub, 0.5)
    assert h0 == pytest.approx(-0.5 * 2.0, abs=1e-12)


def test_reconstruct_ui_needs_alpha_i(aniso):
    ub = ScalarField.zeros(aniso.mesh, TORSO)
    ue = ScalarField.zeros(aniso.mesh, HEART)
    with pytest.raises(AlphaIZero):
        reconstruct_ui(aniso, ue, ub, TransmissionCoefficients(0.0, 1.0, -1.0, 1.0))


def test_shortcut_agrees_with_general_path():
    res = criterion_5()
    assert res.parts["shortcut_vs_general"] <= 1e-8
    assert res.parts["constant_rel"] <= 1e-10


def test_supplemented_solve_is_calibrated(coarse):
    from transmission_lab.spectral import spectral_disk_oracle

    coeffs = TransmissionCoefficients(1.0, 1.0, -1.0, 0.0, c0=0.5)
    setup = TransmissionSetup(coarse, I2, I2, I2)
    tr = spectral_disk_oracle(1, coeffs, 1.0, 0.5)
    ub = ScalarField.from_function(coarse, tr.u_b.value, TORSO)
    res = supplement_solve(setup, ub, 0.0, coeffs)
    assert res.min_pivot_ratio > 1e-14
    assert calibration_residual(coarse, res.triple.u_i, res.triple.u_e, coeffs.c0) <= 1e-10
    X = coarse.sub(HEART).vertices
    err = np.max(np.abs(res.triple.u_e.values - tr.u_e.value(*X.T)))
    assert err <= 1e-3 * np.max(np.abs(tr.u_e.value(*X.T)))
    r = transmission_residuals(setup, res.triple, coeffs)
    assert r["r9"] <= 1e-10


def test_potential_triple_validates_subdomains(rough):
    z_h, z_t = ScalarField.zeros(rough, HEART), ScalarField.zeros(rough, TORSO)
    with pytest.raises(ValueError):
        PotentialTriple(z_t, z_h, z_t)
    with pytest.raises(ValueError):
        PotentialTriple(z_h + np.nan, z_h, z_t)


def test_cardio_constants():
    c = CardioConstants(1.0, 2.0, 1.0, 1.0, 0.3)
    assert c.leading == pytest.approx(1.0 * 2.0 * 0.3 / 3.0, rel=1e-15)
    with pytest.raises(NotPositive):
        CardioConstants(1.0, 2.0, 1.0, 1.0, 0.0)


def test_cardio_operator_matches_scaled_assembly():
    res = criterion_8()
    assert res.passed, res.parts


def test_interface_perimeter_matches_boundary_integral(aniso):
    assert boundary_integral(aniso.mesh, 1.0, INNER) == pytest.approx(aniso.sys_e.boundary_measure(INNER))
