import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from transmission_lab import parabolic as pa
from transmission_lab.acceptance import mesh
from transmission_lab.errors import DegenerateReduction, NonPositiveTime, UnstableStep
from transmission_lab.geometry import SpdTensor2, Subdomain
from transmission_lab.transmission import make_h20_bump

I2 = SpdTensor2.isotropic(1.0)
HEART = Subdomain.HEART


@given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.1, 3))
def test_kappa_formula(mu_i, mu_e, a_i, a_e, g):
    c = pa.CableCoefficients(mu_i, mu_e, a_i, a_e, g)
    assert c.kappa == pytest.approx((mu_e * a_i + mu_i * a_e) / (a_i + a_e * g))
    assert c.classification == "parabolic"


def test_classification_and_degeneracy():
    assert pa.CableCoefficients(-1.0, -1.0).classification == "backward_parabolic"
    assert pa.CableCoefficients(1.0, -1.0).classification == "degenerate"
    with pytest.raises(DegenerateReduction):
        pa.CableCoefficients(1.0, 1.0, alpha_i=1.0, alpha_e=-1.0, gamma=1.0).kappa
    with pytest.raises(DegenerateReduction):
        pa.CableCoefficients(0.0, 0.0)


@pytest.fixture(scope="module")
def heat_op(coarse):
    return pa.build_cable_operator(pa.CableCoefficients.pure_heat(1.0), I2, coarse)


def test_backward_operator_refused(coarse):
    op = pa.build_cable_operator(pa.CableCoefficients(-1.0, -1.0), I2, coarse)
    with pytest.raises(UnstableStep):
        pa.step_cable(op, np.zeros(op.D.shape[0]), 1.0, 0.01)


def test_explicit_step_beyond_bound_refused(heat_op):
    bound = heat_op.stability_bound(0.0)
    assert heat_op.stability_bound(0.5) == math.inf
    with pytest.raises(UnstableStep):
        pa.step_cable(heat_op, np.zeros(heat_op.D.shape[0]), 0.0, 2 * bound)


def test_zero_stays_zero(heat_op):
    traj = pa.evolve(heat_op, np.zeros(heat_op.D.shape[0]), 0.01, 5)
    assert not np.any(traj.values)


def test_lowest_mode_decays_at_its_rate(heat_op):
    lam, v = pa.lowest_dirichlet_mode(heat_op)
    # continuous first Dirichlet eigenvalue of the unit disk is j_{0,1}^2
    from scipy.special import jn_zeros

    assert lam == pytest.approx(jn_zeros(0, 1)[0] ** 2, rel=0.02)
    dt = 0.01
    w1 = pa.step_cable(heat_op, v, 1.0, dt)
    assert np.allclose(w1, v / (1 + dt * lam), atol=1e-10 * np.max(np.abs(v)))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_implicit_steps_do_not_increase_energy(seed):
    m = mesh(0.25)
    op = pa.build_cable_operator(pa.CableCoefficients.pure_heat(0.7), SpdTensor2(1.2, 0.3, 0.8), m)
    w = np.random.default_rng(seed).standard_normal(op.D.shape[0])
    traj = pa.evolve(op, w, 0.02, 5, theta=1.0)
    norms = [math.sqrt(x @ (op.mass @ x)) for x in traj.values]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_manufactured_cable_solution_converges():
    # w = exp(-t) (1 - r^2) solves w_t + Lap_M w = f with f = -w + 4 exp(-t)
    errs = []
    for h in (0.1, 0.05):
        m = mesh(h)
        src = lambda x, y, t: math.exp(-t) * (-(1 - x * x - y * y) + 4.0)
        op = pa.build_cable_operator(pa.CableCoefficients.pure_heat(1.0), I2, m, source=src)
        V = m.sub(HEART).vertices
        w0 = 1 - V[:, 0] ** 2 - V[:, 1] ** 2
        traj = pa.evolve(op, w0, 0.0025, 40, theta=0.5)
        ex = math.exp(-traj.T) * w0
        errs.append(math.sqrt((traj.values[-1] - ex) @ (op.mass @ (traj.values[-1] - ex))))
    assert errs[1] < errs[0]
    assert errs[0] < 2e-3


def test_space_time_field(tmp_path, rough):
    f = pa.SpaceTimeField.from_function(rough, lambda x, y, t: x + t, 0.1, 4)
    assert f.T == pytest.approx(0.4)
    V = rough.sub(HEART).vertices
    assert np.allclose(f.at(0.25), V[:, 0] + 0.25)
    f.write_csv(tmp_path / "w.csv")
    lines = (tmp_path / "w.csv").read_text().splitlines()
    assert lines[0] == "t,vertex_index,value"
    assert len(lines) == 1 + 5 * len(V)
    with pytest.raises(ValueError):
        pa.SpaceTimeField(np.zeros((2, 3)), 0.0)


HEAT_C = pa.CableCoefficients(1.0, 1.0, a1=0.3, a2=-0.2, a0=0.5)


@pytest.mark.parametrize("t", [0.01, 0.1, 1.0])
def test_kernel_mass(t):
    assert pa.kernel_mass(t, HEAT_C, SpdTensor2(1.2, 0.2, 0.8)) == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.01, 1.0))
def test_kernel_is_annihilated(x, y, t):
    assert pa.heat_annihilation(np.array([x, y]), t, HEAT_C, SpdTensor2(1.2, 0.2, 0.8)) <= 1e-6


def test_kernel_needs_positive_time():
    with pytest.raises(NonPositiveTime):
        pa.heat_fundamental(np.zeros(2), 0.0, HEAT_C, I2)
    with pytest.raises(NonPositiveTime):
        pa.heat_fundamental(np.zeros(2), -1.0, HEAT_C, I2)


def test_kernel_gradient_matches_differences():
    M = SpdTensor2(1.2, 0.2, 0.8)
    x, t, h = np.array([0.3, -0.4]), 0.2, 1e-6
    g = pa.heat_kernel_grad(x, t, HEAT_C, M)
    for i in range(2):
        e = np.eye(2)[i] * h
        fd = (pa.heat_fundamental(x + e, t, HEAT_C, M) - pa.heat_fundamental(x - e, t, HEAT_C, M)) / (2 * h)
        assert g[i] == pytest.approx(fd, rel=1e-6)


@pytest.fixture(scope="module")
def heat_ctx(fine):
    return pa.HeatContext(fine, pa.CableCoefficients.pure_heat(1.0), I2)


def disk_mass(x, s, kappa=1.0, a=1.0):
    """Probability that N(x, 2 kappa s I) falls in the disk of radius a."""
    sig = math.sqrt(2 * kappa * s)
    return stats.rice(np.linalg.norm(x) / sig, scale=sig).cdf(a)


def test_zero_density_potentials(heat_ctx):
    for kind in "IGVW":
        assert pa.heat_potential(heat_ctx, kind, 0.0, np.array([0.2, 0.1]), 0.1) == 0.0
    with pytest.raises(NonPositiveTime):
        pa.heat_potential(heat_ctx, "I", 1.0, np.zeros(2), 0.0)


@pytest.mark.parametrize("x", [(0.0, 0.0), (0.6, 0.3), (0.9, 0.0), (1.2, 0.0)])
def test_initial_potential_of_one_matches_rice(heat_ctx, x):
    x = np.array(x)
    t = 0.05
    assert pa.heat_potential(heat_ctx, "I", 1.0, x, t) == pytest.approx(disk_mass(x, t), abs=0.01)


@pytest.mark.parametrize("x", [(0.0, 0.0), (0.8, 0.2), (1.3, 0.0)])
def test_volume_potential_of_one_matches_rice(heat_ctx, x):
    x = np.array(x)
    t = 0.1
    exact, _ = integrate.quad(lambda s: disk_mass(x, s), 0.0, t, limit=200)
    assert pa.heat_potential(heat_ctx, "G", 1.0, x, t) == pytest.approx(exact, rel=0.01, abs=1e-4 * t)


def test_initial_potential_tends_to_density(heat_ctx):
    assert pa.heat_potential(heat_ctx, "I", 1.0, np.array([0.1, 0.2]), 1e-4) == pytest.approx(1.0, abs=1e-10)


def test_dual_pair_identity(coarse):
    rng = np.random.default_rng(3)
    cu, cv = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    r, s = pa.dual_pair_residual(coarse, HEAT_C, SpdTensor2(1.2, 0.2, 0.8), cu, cv)
    assert r <= 1e-10 * s


def test_green_formula_reproduces_constant(coarse):
    c = pa.CableCoefficients(1.0, 1.0, a1=0.3, a2=-0.2)
    one = pa.SpaceTimeField.from_function(coarse, lambda X, Y, t: 1.0 + 0 * X, 0.02, 10)
    gi, go = pa.green_heat_residual(coarse, one, c, I2, n_angles=4, u_exact=lambda X, Y, t: 1.0 + 0 * X)
    assert gi <= 0.02 and go <= 0.02


def test_probe_zero_positive_and_quadratic(coarse):
    c = pa.CableCoefficients.pure_heat(1.0)
    zero = np.zeros(coarse.sub(HEART).n)
    assert pa.uniqueness_probe(zero, c, I2, coarse) == 0.0
    b = make_h20_bump(coarse, (0.1, -0.2), 0.6)
    p1 = pa.uniqueness_probe(b, c, I2, coarse)
    p10 = pa.uniqueness_probe(b.values * 10, c, I2, coarse)
    assert p1 > 10 * pa.probe_floor(b, I2, coarse)
    assert p10 == pytest.approx(100 * p1, rel=0.01)
