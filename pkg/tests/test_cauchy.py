import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transmission_lab import cauchy as ca
from transmission_lab.acceptance import CAUCHY_LAMBDAS, criterion_12
from transmission_lab.errors import AtSingularity, OnBoundary
from transmission_lab.geometry import SpdTensor2

I2 = SpdTensor2.isotropic(1.0)


@pytest.fixture(scope="module")
def solver(coarse):
    return ca.CauchySolver(coarse, I2)


def harmonic_data(mesh, M=I2):
    fn = lambda x, y: x * x - y * y + 0.5 * x
    gr = lambda x, y: (2 * x + 0.5, -2 * y)
    return fn, gr, ca.cauchy_data_from_solution(mesh, fn, gr, M)


def test_recovery_and_zero_data():
    res = criterion_12()
    assert res.parts["recovery_error"] <= 0.05
    assert res.parts["zero_data_max"] == 0.0


def test_misfit_decreases_and_penalty_grows_as_lambda_shrinks(coarse, solver):
    _, _, data = harmonic_data(coarse)
    sols = [solver.solve(data, lam) for lam in CAUCHY_LAMBDAS]
    mis = [s.misfit for s in sols]
    pen = [s.penalty for s in sols]
    assert all(a >= b * (1 - 1e-9) for a, b in zip(mis, mis[1:]))
    assert all(a <= b * (1 + 1e-9) for a, b in zip(pen, pen[1:]))


def test_mode_two_recovery_converges_with_h(coarse, fine, solver):
    # ill-posedness amplifies the O(h^2) data error; at fixed lambda it still shrinks with h
    fn, _, data = harmonic_data(coarse)
    assert ca.trace_recovery_error(coarse, solver.solve(data, 1e-6), fn) < 0.05
    e_c = ca.trace_recovery_error(coarse, solver.solve(data, 1e-8), fn)
    fn, _, data_f = harmonic_data(fine)
    e_f = ca.trace_recovery_error(fine, ca.CauchySolver(fine, I2).solve(data_f, 1e-8), fn)
    assert e_c / e_f >= 3.0


@settings(max_examples=10, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_solution_map_is_linear_in_data(a, b):
    from transmission_lab.acceptance import mesh

    m = mesh(0.25)
    s = ca.CauchySolver(m, I2)
    d1 = ca.cauchy_data_from_solution(m, lambda x, y: x, lambda x, y: (1 + 0 * x, 0 * y), I2)
    d2 = ca.cauchy_data_from_solution(m, lambda x, y: x * y, lambda x, y: (y, x), I2)
    u = s.solve(d1.scaled(a) + d2.scaled(b), 1e-4).field.values
    v = a * s.solve(d1, 1e-4).field.values + b * s.solve(d2, 1e-4).field.values
    assert np.max(np.abs(u - v)) <= 1e-9 * (1 + np.max(np.abs(v)))


def test_invalid_lambda(coarse, solver):
    _, _, data = harmonic_data(coarse)
    with pytest.raises(ValueError):
        ca.tikhonov_cauchy(coarse, data, 0.0, solver)
    with pytest.raises(ValueError):
        solver.solve(data, -1.0)


def test_fundamental_solution():
    x = np.array([0.0, 0.0])
    y = np.array([[1.0], [0.0]])
    ye = np.array([[np.e], [0.0]])
    assert ca.FundamentalSolution(I2).value(x, y)[0] == pytest.approx(0.0, abs=1e-15)
    # for M = sigma I it is -log|x - y| / (2 pi sigma) plus a constant
    phi = ca.FundamentalSolution(SpdTensor2.isotropic(2.0))
    assert phi.value(x, ye)[0] - phi.value(x, y)[0] == pytest.approx(-1.0 / (2 * np.pi * 2.0))
    with pytest.raises(AtSingularity):
        phi.value(x, np.array([[0.0], [0.0]]))


def test_green_representation_reproduces_harmonic_fields(fine):
    fn, gr, _ = harmonic_data(fine)
    inside, outside = ca.reproduction_check(fine, fn, I2, grad=gr, n_angles=6)
    assert inside < 1e-3 and outside < 1e-3


def test_anisotropic_reproduction(fine):
    M = SpdTensor2(1.5, 0.3, 1.0)
    # M-harmonic quadratic: m11 a + 2 m12 b + m22 c = 0
    a, b = 1.0, 0.5
    c = -(M.m11 * a + 2 * M.m12 * b) / M.m22
    fn = lambda x, y: a * x * x + 2 * b * x * y + c * y * y
    gr = lambda x, y: (2 * a * x + 2 * b * y, 2 * b * x + 2 * c * y)
    inside, outside = ca.reproduction_check(fine, fn, M, grad=gr, n_angles=6)
    assert inside < 1e-3 and outside < 1e-3


def test_potential_refuses_boundary_points(coarse):
    _, _, data = harmonic_data(coarse)
    with pytest.raises(OnBoundary):
        ca.potential_F(coarse, (2.0, 0.0), data)
