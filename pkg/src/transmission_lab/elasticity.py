"""Lame instance of the transmission framework (plane, constant coefficients).

Two energies are used. The gradient energy mu grad u : grad v + (lam + mu) div u div v
has the constants as kernel and conormal mu d_nu u + (lam + mu) nu div u. The
symmetric-strain energy lam div u div v + 2 mu eps(u) : eps(v) has the classical
traction sigma(u) nu as its conormal. Both share the strong operator
-mu Lap u - (lam + mu) grad div u.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .elliptic import EllipticSystem, boundary_mass_matrix, conormal_vector, discrete_operator, mass_matrix, \
    neumann_from_load, p1_gradients
from .errors import AtSingularity, NotElliptic, NotH20
from .fields import VectorField2
from .geometry import Boundary, Mesh2D, Subdomain

INNER, OUTER = Boundary.INNER, Boundary.OUTER
HEART, TORSO = Subdomain.HEART, Subdomain.TORSO


@dataclass(frozen=True)
class LameParameters:
    lam: float
    mu: float
    m0: float = 1e-6

    def __post_init__(self):
        if not self.m0 > 0:
            raise NotElliptic(f"ellipticity margin m0 must be positive, got {self.m0}")
        if self.mu < self.m0:
            raise NotElliptic(f"mu = {self.mu} < m0 = {self.m0}")
        if self.lam + 2 * self.mu < self.m0:
            raise NotElliptic(f"lam + 2 mu = {self.lam + 2 * self.mu} < m0 = {self.m0}")
        if self.lam + self.mu < 0:
            raise NotElliptic(f"lam + mu = {self.lam + self.mu} < 0")

    def scaled(self, g: float) -> "LameParameters":
        return LameParameters(g * self.lam, g * self.mu, self.m0)


def _lame_stiffness(sm, p: LameParameters, form: str) -> sp.csr_matrix:
    g, a = p1_gradients(sm)
    n = sm.n
    t = sm.triangles
    blocks = {}
    for ca in range(2):  # component of the trial function (column)
        for cb in range(2):  # component of the test function (row)
            if form == "gradient":
                loc = (p.lam + p.mu) * np.einsum("ti,tj->tij", g[:, :, cb], g[:, :, ca])
                if ca == cb:
                    loc = loc + p.mu * np.einsum("tia,tja->tij", g, g)
            elif form == "strain":
                # lam div u div v + mu (grad u + grad u^T) : grad v
                loc = p.lam * np.einsum("ti,tj->tij", g[:, :, cb], g[:, :, ca])
                loc = loc + p.mu * np.einsum("ti,tj->tij", g[:, :, ca], g[:, :, cb])
                if ca == cb:
                    loc = loc + p.mu * np.einsum("tia,tja->tij", g, g)
            else:
                raise ValueError(form)
            loc = loc * a[:, None, None]
            rows = np.repeat(t, 3, axis=1).ravel()
            cols = np.tile(t, (1, 3)).ravel()
            blocks[(cb, ca)] = sp.csr_matrix((loc.ravel(), (rows, cols)), shape=(n, n))
    K = sp.bmat([[blocks[(0, 0)], blocks[(0, 1)]], [blocks[(1, 0)], blocks[(1, 1)]]], format="csr")
    return ((K + K.T) * 0.5).tocsr()


def assemble_lame(mesh: Mesh2D, p: LameParameters, subdomain: Subdomain, form: str = "gradient") -> EllipticSystem:
    """Vector P1 system (block ordering) for the gradient or the strain energy."""
    sm = mesh.sub(subdomain)
    K = _lame_stiffness(sm, p, form)
    bm = {t: boundary_mass_matrix(sm, t) for t in sm.tags}
    return EllipticSystem(mesh, sm, K, mass_matrix(sm), bm, ncomp=2)


# ---------------------------------------------------------------------------
# fundamental solution


def kelvin_somigliana(x, p: LameParameters) -> np.ndarray:
    """2x2 matrix Phi_mj(x) = (delta_mj (lam + 3 mu) phi2 - (lam + mu) x_j d_m phi2) / (2 mu (lam + 2 mu)).

    phi2 = -log|x| / (2 pi), so d_m phi2 = -x_m / (2 pi |x|^2).
    """
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    if r2 < 1e-28:
        raise AtSingularity("Kelvin-Somigliana matrix is singular at the origin")
    phi2 = -math.log(r2) / (4 * math.pi)
    dphi = -x / (2 * math.pi * r2)
    lam, mu = p.lam, p.mu
    out = (lam + 3 * mu) * phi2 * np.eye(2) - (lam + mu) * np.outer(dphi, x)  # [m, j] = dphi_m x_j
    return out / (2 * mu * (lam + 2 * mu))


def lame_apply_fd(fn, x, p: LameParameters, step: float | None = None) -> tuple[np.ndarray, float]:
    """Apply -mu Lap - (lam + mu) grad div to a matrix-valued field by 4th-order differences.

    fn(x) returns a 2x2 matrix whose columns are displacement fields. Returns the
    result and the magnitude of the individual terms (for relative checks).
    """
    x = np.asarray(x, dtype=float)
    h = step or 1e-2 * max(np.linalg.norm(x), 1e-3)
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h * h)
    offs = np.array([-2, -1, 0, 1, 2]) * h
    e = np.eye(2)

    def d2(a, b):
        if a == b:
            return sum(ck * fn(x + o * e[a]) for ck, o in zip(c, offs))
        w = np.array([1.0, -8.0, 8.0, -1.0]) / (12 * h)
        o1 = np.array([-2, -1, 1, 2]) * h
        tot = 0.0
        for wi, oi in zip(w, o1):
            for wj, oj in zip(w, o1):
                tot = tot + wi * wj * fn(x + oi * e[a] + oj * e[b])
        return tot

    H = {(a, b): d2(a, b) for a in range(2) for b in range(a, 2)}
    H[(1, 0)] = H[(0, 1)]
    lap = H[(0, 0)] + H[(1, 1)]
    # (grad div U)_m,col = sum_k d_m d_k U[k, col]
    gd = np.array([[sum(H[(m, k)][k, col] for k in range(2)) for col in range(2)] for m in range(2)])
    res = -p.mu * lap - (p.lam + p.mu) * gd
    scale = float(np.max(np.abs(p.mu * lap)) + np.max(np.abs((p.lam + p.mu) * gd)))
    return res, scale


def kelvin_annihilation(x, y, p: LameParameters) -> float:
    """Relative size of the Lame operator applied to Phi(. - y) at x != y."""
    y = np.asarray(y, dtype=float)
    step = 4e-3 * float(np.linalg.norm(np.asarray(x, dtype=float) - y))
    res, scale = lame_apply_fd(lambda z: kelvin_somigliana(z - y, p), x, p, step)
    return float(np.max(np.abs(res)) / scale)


# ---------------------------------------------------------------------------
# symbol


@dataclass
class SymbolRecord:
    det_value: complex
    det_closed: float
    quadratic_form: float
    quadratic_closed: float


def lame_symbol(p: LameParameters, zeta) -> np.ndarray:
    """Principal symbol of mu Lap + (lam + mu) grad div at zeta, from its coefficient tensor."""
    z = np.asarray(zeta, dtype=float)
    C = np.zeros((2, 2, 2, 2))  # C[m, j, a, b] multiplies d_a d_b u_j in row m
    for m in range(2):
        for j in range(2):
            for a in range(2):
                for b in range(2):
                    C[m, j, a, b] = p.mu * (m == j) * (a == b) + 0.5 * (p.lam + p.mu) * ((m == a) * (j == b) + (m == b) * (j == a))
    # d_a d_b -> (i zeta_a)(i zeta_b)
    return -np.einsum("mjab,a,b->mj", C, z, z)


def symbol_check(p: LameParameters, zeta, w) -> SymbolRecord:
    z = np.asarray(zeta, dtype=float)
    w = np.asarray(w, dtype=complex)
    S = lame_symbol(p, z)
    n = 2
    z2 = float(z @ z)
    det_closed = z2**n * p.mu ** (n - 1) * (p.lam + 2 * p.mu)
    q_direct = float(-np.real(np.conj(w) @ S @ w))
    q_closed = p.mu * z2 * float(np.real(np.conj(w) @ w)) + (p.lam + p.mu) * abs(z @ w) ** 2
    return SymbolRecord(complex(np.linalg.det(S)), det_closed, q_direct, q_closed)


# ---------------------------------------------------------------------------
# boundary operators and Green identity


def _as_flat(sys: EllipticSystem, u) -> np.ndarray:
    return sys.volume_data(u)


def stress_operator(sys_strain: EllipticSystem, u, tag: Boundary, g=None) -> np.ndarray:
    """Traction sigma(u) nu on tag as an (nb, 2) array, from the strain-energy system."""
    b = conormal_vector(sys_strain, _as_flat(sys_strain, u), tag, g)
    nb = b.size // 2
    return np.column_stack([b[:nb], b[nb:]])


def lame_conormal(sys_grad: EllipticSystem, u, tag: Boundary, g=None) -> np.ndarray:
    """mu d_nu u + (lam + mu) nu div u on tag as an (nb, 2) array."""
    b = conormal_vector(sys_grad, _as_flat(sys_grad, u), tag, g)
    nb = b.size // 2
    return np.column_stack([b[:nb], b[nb:]])


def elasticity_green_residual(mesh: Mesh2D, u, v, p: LameParameters, subdomain: Subdomain,
                              boundary_operator: str = "conormal") -> tuple[float, float]:
    """(residual, scale) of int v . Bu - a(u, v) + int v . (Lame u).

    boundary_operator "conormal" pairs the gradient energy with its conormal,
    "stress" pairs the strain energy with the traction.
    """
    from .elliptic import green_identity_residual, green_scale

    form = "gradient" if boundary_operator == "conormal" else "strain"
    sys = assemble_lame(mesh, p, subdomain, form)
    uu, vv = _as_flat(sys, u), _as_flat(sys, v)
    return green_identity_residual(sys, uu, vv), green_scale(sys, uu, vv)


def lame_operator_nodal(sys: EllipticSystem, u) -> np.ndarray:
    """Nodal representative (n, 2) of the strong Lame operator applied to u."""
    g = discrete_operator(sys, _as_flat(sys, u))
    n = g.size // 2
    return np.column_stack([g[:n], g[n:]])


# ---------------------------------------------------------------------------
# transmission demo


@dataclass
class VectorTriple:
    u_i: VectorField2
    u_e: VectorField2
    u_b: VectorField2


def vector_bump(mesh: Mesh2D, center, radius: float, direction, amplitude: float = 1.0) -> VectorField2:
    from .transmission import make_h20_bump

    s = make_h20_bump(mesh, center, radius, amplitude).values
    d = np.asarray(direction, dtype=float)
    return VectorField2(np.outer(s, d), HEART)


@dataclass
class ElasticSetup:
    mesh: Mesh2D
    p_i: LameParameters
    p_e: LameParameters
    p_b: LameParameters

    def __post_init__(self):
        self.sys_i = assemble_lame(self.mesh, self.p_i, HEART)
        self.sys_e = assemble_lame(self.mesh, self.p_e, HEART)
        self.sys_b = assemble_lame(self.mesh, self.p_b, TORSO)


def elastic_nullspace(es: ElasticSetup, u: VectorField2, h0, coeffs) -> VectorTriple:
    """(u_i, u_e, u_b) = (-alpha_e/alpha_i N_i(L_e u, 0) + h0, u, 0) with h0 in R^2."""
    se = es.sys_e
    uf = u.flat
    bl = se.sm.boundary_local[INNER]
    sup = float(np.max(np.abs(u.values[bl])))
    cn = se.boundary_l2(INNER, conormal_vector(se, uf, INNER))
    allowed = 10.0 * es.mesh.h * se.l2(uf)
    if sup > 1e-10 or cn > allowed:
        raise NotH20(f"vector field is not in H2_0 (trace {sup:.3e}, conormal {cn:.3e} > {allowed:.3e})")
    load = se.stiffness @ uf
    w = neumann_from_load(es.sys_i, load, scale=float(np.sum(np.abs(load))))
    h0 = np.asarray(h0, dtype=float) * np.ones(2)
    ui = -(coeffs.alpha_e / coeffs.alpha_i) * w
    n = es.sys_i.n
    ui[:n] += h0[0]
    ui[n:] += h0[1]
    zero_b = VectorField2(np.zeros((es.sys_b.n, 2)), TORSO)
    return VectorTriple(VectorField2.from_flat(ui, HEART), VectorField2(u.values.copy(), HEART), zero_b)


def elastic_residuals(es: ElasticSetup, t: VectorTriple, coeffs) -> dict:
    si, se, sb = es.sys_i, es.sys_e, es.sys_b
    ui, ue, ub = t.u_i.flat, t.u_e.flat, t.u_b.flat
    n_h = si.n
    hl = se.sm.boundary_local[INNER]
    tl = sb.sm.boundary_local[INNER]
    r7 = _dual_norm_vec(si, coeffs.alpha_i * (si.stiffness @ ui) + coeffs.alpha_e * (se.stiffness @ ue))
    r8 = _dual_norm_vec(sb, sb.stiffness @ ub)
    d9 = np.concatenate([ue[hl] - ub[tl], ue[n_h + hl] - ub[sb.n + tl]])
    r9 = se.boundary_l2(INNER, d9)
    Bb = conormal_vector(sb, ub, INNER)
    r10 = se.boundary_l2(INNER, conormal_vector(se, ue, INNER) - coeffs.beta_e * Bb)
    r11 = si.boundary_l2(INNER, conormal_vector(si, ui, INNER) - coeffs.beta_i * Bb)
    r12 = sb.boundary_l2(OUTER, conormal_vector(sb, ub, OUTER))
    ob = sb.sm.boundary_local[OUTER]
    r6 = sb.boundary_l2(OUTER, np.concatenate([ub[ob], ub[sb.n + ob]]))
    return {"r7": r7, "r8": r8, "r9": r9, "r10": r10, "r11": r11, "r12": r12, "r6": r6}


def _dual_norm_vec(sys: EllipticSystem, r: np.ndarray) -> float:
    inter = sys.sm.interior_local()
    n = sys.n
    w = sys.lumped[inter]
    return float(np.sqrt(np.sum(r[inter] ** 2 / w) + np.sum(r[n + inter] ** 2 / w)))


def elastic_transmission_demo(mesh: Mesh2D, coeffs, p_i: LameParameters, p_e: LameParameters,
                              p_b: LameParameters, center=(0.0, 0.0), radius: float = 1.0,
                              direction=(1.0, 0.0), amplitude: float = 1.0, h0=(0.0, 0.0)):
    """Null-space triple of the Lame transmission problem and its residuals."""
    if coeffs.alpha_i != coeffs.alpha_e or coeffs.beta_i != 0 or coeffs.beta_e != 1:
        raise ValueError("demo expects alpha_i = alpha_e, beta_i = 0, beta_e = 1")
    es = ElasticSetup(mesh, p_i, p_e, p_b)
    u = vector_bump(mesh, center, radius, direction, amplitude)
    t = elastic_nullspace(es, u, h0, coeffs)
    return t, elastic_residuals(es, t, coeffs)
