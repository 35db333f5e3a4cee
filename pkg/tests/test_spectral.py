import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transmission_lab.acceptance import spectral_extrapolation_error
from transmission_lab.errors import IncompatibleData, ModeUnsupported
from transmission_lab.spectral import (RadialMode, annulus_cauchy, annulus_harmonic, disk_clamped, disk_neumann,
                                       spectral_disk_oracle)
from transmission_lab.transmission import TransmissionCoefficients


def laplacian(mode: RadialMode, r):
    # Lap (R cos m th) = (R'' + R'/r - m^2 R / r^2) cos m th, with R'' by differences
    h = 1e-4
    d2 = (mode.R(r + h) - 2 * mode.R(r) + mode.R(r - h)) / h**2
    return d2 + mode.dR(r) / r - mode.m**2 * mode.R(r) / r**2


@given(st.integers(0, 4), st.floats(-2, 2), st.floats(-2, 2))
def test_annulus_cauchy_matches_data_and_is_harmonic(m, f0, f1):
    u = annulus_cauchy(m, 2.0, f0, f1, sigma=1.5)
    assert u.R(2.0) == pytest.approx(f0, abs=1e-12)
    assert 1.5 * u.dR(2.0) == pytest.approx(f1, abs=1e-12)
    r = np.linspace(1.0, 2.0, 5)
    assert np.max(np.abs(laplacian(u, r))) < 1e-5 * (1 + abs(f0) + abs(f1)) * 10 ** m


@given(st.integers(1, 4), st.floats(-2, 2), st.floats(-2, 2))
def test_annulus_harmonic_mixed_conditions(m, a, b):
    u = annulus_harmonic(m, 1.0, 2.0, ("dirichlet", a), ("neumann", b), sigma=2.0)
    assert u.R(1.0) == pytest.approx(a, abs=1e-12)
    assert 2.0 * u.dR(2.0) == pytest.approx(b, abs=1e-12)


def test_disk_modes():
    u = disk_clamped(2, 1.0, 0.3, -0.4, sigma=2.0)
    assert u.R(1.0) == pytest.approx(0.3)
    assert 2.0 * u.dR(1.0) == pytest.approx(-0.4)
    v = disk_neumann(3, 1.0, 0.6)
    assert v.dR(1.0) == pytest.approx(0.6)
    with pytest.raises(IncompatibleData):
        disk_neumann(0, 1.0, 0.1)


def test_gradient_agrees_with_differences():
    u = RadialMode(2, (2, 4), (0.5, -0.3))
    x, y, h = 0.4, -0.3, 1e-6
    gx, gy = u.grad(x, y)
    assert gx == pytest.approx((u.value(x + h, y) - u.value(x - h, y)) / (2 * h), rel=1e-7)
    assert gy == pytest.approx((u.value(x, y + h) - u.value(x, y - h)) / (2 * h), rel=1e-7)


@settings(max_examples=30)
@given(st.integers(1, 3), st.floats(0.5, 2), st.floats(0.5, 2), st.floats(-1, 1))
def test_oracle_satisfies_interface_conditions(m, s_e, s_b, beta_i):
    coeffs = TransmissionCoefficients(1.0, 2.0, -1.0, beta_i)
    tr = spectral_disk_oracle(m, coeffs, 1.0, 0.5, 1.0, 2.0, 1.0, s_e, s_b)
    a = 1.0
    flux_b = -s_b * tr.u_b.dR(a)  # torso-outward conormal on the interface
    assert tr.u_e.R(a) == pytest.approx(tr.u_b.R(a), abs=1e-12)
    assert s_e * tr.u_e.dR(a) == pytest.approx(coeffs.beta_e * flux_b, abs=1e-12)
    assert 1.0 * tr.u_i.dR(a) == pytest.approx(beta_i * flux_b, abs=1e-10)


def test_mode_zero_respects_existence_condition():
    coeffs = TransmissionCoefficients(1.0, 1.0, -1.0, 0.0, c0=0.5)
    tr = spectral_disk_oracle(0, coeffs, 1.0, 0.0)
    assert tr.h0 == pytest.approx(-0.5 * tr.u_b.R(1.0))
    with pytest.raises(IncompatibleData):
        spectral_disk_oracle(0, TransmissionCoefficients(1.0, 1.0, -1.0, 0.5), 1.0, 0.5)
    # a vanishing prefactor admits any radial flux
    spectral_disk_oracle(0, TransmissionCoefficients(1.0, 1.0, -1.0, 1.0), 1.0, 0.5)


def test_unsupported_modes():
    with pytest.raises(ModeUnsupported):
        spectral_disk_oracle(-1, TransmissionCoefficients(1.0, 1.0, -1.0, 0.0), 1.0, 0.0)
    with pytest.raises(ModeUnsupported):
        spectral_disk_oracle(1, TransmissionCoefficients(0.0, 1.0, -1.0, 0.0), 1.0, 0.0)


def test_extrapolated_fourth_order_solution_matches_mode_one():
    assert spectral_extrapolation_error(1) <= 1e-6
