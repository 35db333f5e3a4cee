"""Reduced cable dynamics on the heart and the constant-coefficient heat calculus.

The operator is  L w = w_t + kappa Lap_M w + a . grad w + a0 w  with
Lap_M = -div M grad, so kappa > 0 is a forward heat operator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import LinearNDInterpolator
from scipy.spatial import Delaunay

from .biharmonic import gauss_segment, triangle_rule
from .elliptic import assemble, conormal_vector, discrete_operator, p1_gradients
from .errors import DegenerateReduction, NonPositiveTime, UnstableStep
from .fields import ScalarField
from .geometry import Boundary, Mesh2D, SpdTensor2, Subdomain

HEART = Subdomain.HEART
INNER = Boundary.INNER


@dataclass(frozen=True)
class CableCoefficients:
    mu_i: float
    mu_e: float
    alpha_i: float = 1.0
    alpha_e: float = 1.0
    gamma: float = 1.0
    a1: float = 0.0
    a2: float = 0.0
    a0: float = 0.0

    def __post_init__(self):
        if self.mu_i == 0 and self.mu_e == 0:
            raise DegenerateReduction("mu_i and mu_e vanish simultaneously")

    @property
    def time_weight(self) -> float:
        return self.alpha_i + self.alpha_e * self.gamma

    @property
    def kappa(self) -> float:
        d = self.time_weight
        if d == 0:
            raise DegenerateReduction(
                "alpha_i + alpha_e gamma = 0: the reduction is elliptic (w vanishes by Cauchy uniqueness)")
        return (self.mu_e * self.alpha_i + self.mu_i * self.alpha_e) / d

    @property
    def drift(self) -> np.ndarray:
        return np.array([self.a1, self.a2], dtype=float)

    @property
    def classification(self) -> str:
        k = self.kappa
        if k > 0:
            return "parabolic"
        if k < 0:
            return "backward_parabolic"
        return "degenerate"

    @classmethod
    def pure_heat(cls, kappa: float = 1.0) -> "CableCoefficients":
        return cls(mu_i=kappa, mu_e=kappa, alpha_i=1.0, alpha_e=1.0, gamma=1.0)


@dataclass
class SpaceTimeField:
    """Nodal values on a uniform time grid: values[k] lives at t = k dt."""

    values: np.ndarray
    dt: float
    subdomain: Subdomain = HEART

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(self.values)):
            raise ValueError("space-time field has non-finite values")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def T(self) -> float:
        return self.dt * (len(self.values) - 1)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation in time."""
        s = min(max(t / self.dt, 0.0), len(self.values) - 1.0)
        k = min(int(math.floor(s)), len(self.values) - 2) if len(self.values) > 1 else 0
        if len(self.values) == 1:
            return self.values[0]
        th = s - k
        return (1 - th) * self.values[k] + th * self.values[k + 1]

    @classmethod
    def from_function(cls, mesh: Mesh2D, fn, dt: float, n_steps: int, subdomain=HEART) -> "SpaceTimeField":
        v = mesh.sub(subdomain).vertices
        vals = [np.ones(len(v)) * fn(v[:, 0], v[:, 1], k * dt) for k in range(n_steps + 1)]
        return cls(np.array(vals), dt, subdomain)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t,vertex_index,value\n")
            for k, row in enumerate(self.values):
                t = k * self.dt
                for i, val in enumerate(row):
                    fh.write(f"{t:.10g},{i},{val:.17g}\n")


# ---------------------------------------------------------------------------
# discrete cable operator


def convection_matrix(sm, a) -> sp.csr_matrix:
    """P1 matrix of int (a . grad u) v."""
    g, area = p1_gradients(sm)
    ag = g @ np.asarray(a, dtype=float)  # (ntri, 3): a . grad phi_j
    loc = (area[:, None, None] / 3.0) * np.broadcast_to(ag[:, None, :], (len(area), 3, 3))
    t = sm.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    return sp.csr_matrix((loc.ravel(), (rows, cols)), shape=(sm.n, sm.n))


@dataclass
class CableOperator:
    mesh: Mesh2D
    coeffs: CableCoefficients
    M: SpdTensor2
    D: sp.csr_matrix
    mass: sp.csr_matrix
    fixed: np.ndarray
    classification: str
    source: Callable | None = None
    _factors: dict = field(default_factory=dict, repr=False)

    @cached_property
    def free(self) -> np.ndarray:
        mask = np.ones(self.D.shape[0], dtype=bool)
        mask[self.fixed] = False
        return np.flatnonzero(mask)

    @cached_property
    def lambda_max(self) -> float:
        """Largest generalized eigenvalue of the symmetric part of D against the mass."""
        f = self.free
        A = ((self.D + self.D.T) * 0.5)[f][:, f]
        B = self.mass[f][:, f]
        val = spla.eigsh(A.tocsc(), k=1, M=B.tocsc(), which="LA", return_eigenvectors=False, tol=1e-8)
        return float(val[0])

    def stability_bound(self, theta: float) -> float:
        if theta >= 0.5:
            return math.inf
        return 2.0 / ((1.0 - 2.0 * theta) * self.lambda_max)

    def load(self, t: float) -> np.ndarray:
        if self.source is None:
            return np.zeros(self.D.shape[0])
        v = self.mesh.sub(HEART).vertices
        return self.mass @ (np.ones(len(v)) * self.source(v[:, 0], v[:, 1], t))


def build_cable_operator(c: CableCoefficients, M_e: SpdTensor2, mesh: Mesh2D, source=None) -> CableOperator:
    """D = kappa K_M + C_a + a0 Mass on the heart, zero Dirichlet on its boundary.

    source(x, y, t), if given, is a right-hand side of the reduced equation.
    """
    if not isinstance(M_e, SpdTensor2):
        M_e = SpdTensor2(*M_e)
    kappa = c.kappa
    sys = assemble(mesh, M_e, HEART)
    D = kappa * sys.stiffness + convection_matrix(sys.sm, c.drift) + c.a0 * sys.mass
    fixed = sys.sm.boundary_local[INNER]
    return CableOperator(mesh, c, M_e, D.tocsr(), sys.mass, fixed, c.classification, source)


def step_cable(op: CableOperator, w: np.ndarray, theta: float, dt: float, t: float = 0.0) -> np.ndarray:
    """One theta step of  Mass w' + D w = Mass f  with zero boundary values."""
    if op.classification != "parabolic":
        raise UnstableStep(f"forward stepping refused for a {op.classification} operator")
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > op.stability_bound(theta) * (1 + 1e-12):
        raise UnstableStep(f"dt = {dt:.3e} exceeds the stability bound {op.stability_bound(theta):.3e}")
    f = op.free
    w = np.asarray(w, dtype=float)
    key = (theta, dt)
    if key not in op._factors:
        A = (op.mass + theta * dt * op.D)[f][:, f].tocsc()
        op._factors[key] = spla.splu(A)
    rhs = op.mass @ w - (1 - theta) * dt * (op.D @ w)
    if op.source is not None:
        rhs = rhs + dt * (theta * op.load(t + dt) + (1 - theta) * op.load(t))
    out = np.zeros_like(w)
    if np.any(rhs[f]):
        out[f] = op._factors[key].solve(rhs[f])
    return out


def evolve(op: CableOperator, w0, dt: float, n_steps: int, theta: float = 1.0) -> SpaceTimeField:
    w = np.asarray(getattr(w0, "values", w0), dtype=float).copy()
    w[op.fixed] = 0.0
    out = [w]
    for k in range(n_steps):
        w = step_cable(op, w, theta, dt, k * dt)
        out.append(w)
    return SpaceTimeField(np.array(out), dt, HEART)


def lowest_dirichlet_mode(op: CableOperator) -> tuple[float, np.ndarray]:
    """Smallest generalized eigenpair of the symmetric part of D (zero Dirichlet)."""
    f = op.free
    A = ((op.D + op.D.T) * 0.5)[f][:, f].tocsc()
    B = op.mass[f][:, f].tocsc()
    vals, vecs = spla.eigsh(A, k=1, M=B, sigma=0.0, which="LM")
    v = np.zeros(op.D.shape[0])
    v[f] = vecs[:, 0]
    return float(vals[0]), v


def uniqueness_probe(w0, c: CableCoefficients, M_e: SpdTensor2, mesh: Mesh2D, n_steps: int = 20,
                     dt: float = 0.005, theta: float = 1.0, include_initial: bool = False) -> float:
    """Accumulated conormal energy  sum_k ||B w(t_k)||^2 dt  of the zero-Dirichlet evolution.

    A null-space evolution would need both traces to vanish at every time.
    """
    op = build_cable_operator(c, M_e, mesh)
    sys = assemble(mesh, op.M, HEART)
    traj = evolve(op, w0, dt, n_steps, theta)
    start = 0 if include_initial else 1
    total = 0.0
    for w in traj.values[start:]:
        if not np.any(w):
            continue
        total += sys.boundary_l2(INNER, conormal_vector(sys, w, INNER)) ** 2 * dt
    return float(total)


def probe_floor(w0, M_e: SpdTensor2, mesh: Mesh2D, n_steps: int = 20, dt: float = 0.005) -> float:
    """Probe value a stationary w0 would produce: its own discrete conormal defect over the horizon."""
    sys = assemble(mesh, M_e if isinstance(M_e, SpdTensor2) else SpdTensor2(*M_e), HEART)
    w = np.asarray(getattr(w0, "values", w0), dtype=float)
    if not np.any(w):
        return 0.0
    return float(sys.boundary_l2(INNER, conormal_vector(sys, w, INNER)) ** 2 * dt * n_steps)


# ---------------------------------------------------------------------------
# heat kernel


def heat_fundamental(x, t, c: CableCoefficients, M: SpdTensor2):
    """Psi(x, t) = exp(-a0 t) exp(-(x - a t)^T M^-1 (x - a t) / (4 kappa t)) / (4 pi kappa t sqrt(det M))."""
    if not isinstance(M, SpdTensor2):
        M = SpdTensor2(*M)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise NonPositiveTime("heat kernel needs t > 0")
    x = np.asarray(x, dtype=float)
    k = c.kappa
    z = x - np.multiply.outer(t, c.drift) if t.ndim else x - t * c.drift
    Mi = np.linalg.inv(M.matrix)
    q = np.einsum("...i,ij,...j->...", z, Mi, z)
    return np.exp(-c.a0 * t) * np.exp(-q / (4 * k * t)) / (4 * math.pi * k * t * math.sqrt(M.det))


def heat_kernel_grad(x, t, c: CableCoefficients, M: SpdTensor2):
    """Gradient of Psi in x; x has shape (..., 2), t scalar."""
    x = np.asarray(x, dtype=float)
    z = x - t * c.drift
    Mi = np.linalg.inv(M.matrix)
    psi = heat_fundamental(x, t, c, M)
    return -psi[..., None] * (z @ Mi) / (2 * c.kappa * t)


def kernel_mass(t: float, c: CableCoefficients, M: SpdTensor2) -> float:
    """int Psi(x, t) exp(a0 t) dx by adaptive quadrature on a box covering 12 standard deviations."""
    from scipy.integrate import dblquad

    if not isinstance(M, SpdTensor2):
        M = SpdTensor2(*M)
    ctr = t * c.drift
    sd = np.sqrt(2 * c.kappa * t * np.diag(M.matrix))
    L = 12 * sd
    val, _ = dblquad(lambda y, x: float(heat_fundamental(np.array([x, y]), t, c, M)) * math.exp(c.a0 * t),
                     ctr[0] - L[0], ctr[0] + L[0], ctr[1] - L[1], ctr[1] + L[1], epsabs=1e-12, epsrel=1e-10)
    return float(val)


def heat_annihilation(x, t: float, c: CableCoefficients, M: SpdTensor2) -> float:
    """Relative size of L Psi at (x, t), by fourth-order central differences."""
    if not isinstance(M, SpdTensor2):
        M = SpdTensor2(*M)
    x = np.asarray(x, dtype=float)
    h = 1e-2 * math.sqrt(c.kappa * t)
    ht = 1e-2 * t
    f = lambda y, s: float(heat_fundamental(y, s, c, M))
    d1 = lambda g, hh: (g(-2 * hh) - 8 * g(-hh) + 8 * g(hh) - g(2 * hh)) / (12 * hh)
    d2 = lambda g, hh: (-g(-2 * hh) + 16 * g(-hh) - 30 * g(0.0) + 16 * g(hh) - g(2 * hh)) / (12 * hh * hh)
    e = np.eye(2)
    ut = d1(lambda s: f(x, t + s), ht)
    grad = np.array([d1(lambda s: f(x + s * e[i], t), h) for i in range(2)])
    H = np.zeros((2, 2))
    for i in range(2):
        H[i, i] = d2(lambda s: f(x + s * e[i], t), h)
    H[0, 1] = H[1, 0] = d1(lambda s: d1(lambda r: f(x + s * e[0] + r * e[1], t), h), h)
    M2 = M.matrix
    diff = -c.kappa * float(np.sum(M2 * H))
    adv = float(c.drift @ grad)
    reac = c.a0 * f(x, t)
    res = ut + diff + adv + reac
    scale = abs(ut) + abs(diff) + abs(adv) + abs(reac)
    return abs(res) / scale


# ---------------------------------------------------------------------------
# potentials


class HeatContext:
    """Quadrature on the heart polygon for the heat potentials."""

    def __init__(self, mesh: Mesh2D, c: CableCoefficients, M: SpdTensor2, n_time: int = 20,
                 tri_order: int = 3, seg_order: int = 4, gh_order: int = 12):
        if not isinstance(M, SpdTensor2):
            M = SpdTensor2(*M)
        self.mesh, self.c, self.M = mesh, c, M
        self.sm = sm = mesh.sub(HEART)
        self.n_time = n_time
        ref, w = triangle_rule(tri_order)
        lam = np.column_stack([1 - ref[:, 0] - ref[:, 1], ref[:, 0], ref[:, 1]])
        V = sm.vertices[sm.triangles]  # (nt, 3, 2)
        area = np.abs(sm.triangle_areas())
        self.Y = np.einsum("qk,tkd->tqd", lam, V).reshape(-1, 2)
        self.W = (2 * area[:, None] * w[None, :]).ravel()
        self.tri_bary = lam
        self.tris = sm.triangles
        sp_, sw = gauss_segment(seg_order)
        self._seg = (sp_, sw)
        self.Mi = np.linalg.inv(M.matrix)
        self.L = np.linalg.cholesky(M.matrix)
        self.sig_scale = math.sqrt(float(np.max(np.linalg.eigvalsh(M.matrix))))
        z, zw = np.polynomial.hermite_e.hermegauss(gh_order)
        Z1, Z2 = np.meshgrid(z, z, indexing="ij")
        self.gh_pts = np.column_stack([Z1.ravel(), Z2.ravel()])
        self.gh_w = np.outer(zw, zw).ravel() / (2 * math.pi)
        self.gh_reach = float(np.max(np.abs(z)))
        self.r_in = mesh.r_inner

    def boundary(self, tag: Boundary = INNER):
        ei = self.sm.edges_with(tag)
        E = self.sm.edges[ei]
        nrm = self.sm.edge_normals[ei]
        ln = self.sm.edge_lengths[ei]
        s, w = self._seg
        P = self.sm.vertices[E[:, 0]][:, None, :] * (1 - s)[None, :, None] + \
            self.sm.vertices[E[:, 1]][:, None, :] * s[None, :, None]
        return E, s, P.reshape(-1, 2), np.repeat(nrm, len(s), axis=0), (ln[:, None] * w[None, :]).ravel()

    def time_nodes(self, t: float):
        """Nodes tau and weights for int_0^t d tau via s = sqrt(t - tau)."""
        s, w = gauss_segment(self.n_time)
        rt = math.sqrt(t)
        s = s * rt
        return t - s * s, 2 * s * w * rt

    def kernel(self, x, Y, s):
        return heat_fundamental(x[None, :] - Y, s, self.c, self.M)

    def volume(self, x, s: float, dens) -> float:
        """int_Omega Psi(x - y, s) f(y) dy, with f given by a density object at a fixed time."""
        sigma = math.sqrt(2 * self.c.kappa * s) * self.sig_scale
        ctr = x - self.c.drift * s
        dist = self.r_in - float(np.linalg.norm(ctr))
        reach = (self.gh_reach + 1.0) * sigma
        if abs(dist) > reach:
            if dist < 0:
                return 0.0
            Y = ctr[None, :] + math.sqrt(2 * self.c.kappa * s) * self.gh_pts @ self.L.T
            return math.exp(-self.c.a0 * s) * float(self.gh_w @ dens.points(Y))
        return float(np.sum(self.W * self.kernel(x, self.Y, s) * dens.quad()))


class _Density:
    """Uniform access to a density at a fixed time: at mesh quadrature points or anywhere."""

    def __init__(self, ctx: HeatContext, spec, t: float):
        self.ctx, self.spec, self.t = ctx, spec, t
        self._nodal = None
        if isinstance(spec, SpaceTimeField):
            self._nodal = spec.at(t)
        elif isinstance(spec, np.ndarray):
            self._nodal = spec
        elif isinstance(spec, ScalarField):
            self._nodal = spec.values

    def quad(self):
        if self._nodal is not None:
            return np.einsum("qk,tk->tq", self.ctx.tri_bary, self._nodal[self.ctx.tris]).ravel()
        return self.points(self.ctx.Y)

    def points(self, P):
        if self._nodal is not None:
            tri = getattr(self.ctx, "_delaunay", None)
            if tri is None:
                tri = self.ctx._delaunay = Delaunay(self.ctx.sm.vertices)
            return np.nan_to_num(LinearNDInterpolator(tri, self._nodal)(P), nan=0.0)
        if callable(self.spec):
            return np.ones(len(P)) * self.spec(P[:, 0], P[:, 1], self.t)
        return np.full(len(P), float(self.spec))


def _boundary_values(ctx: HeatContext, spec, t: float, tag: Boundary):
    """Density values at boundary quadrature points.

    spec is a callable (x, y, nx, ny, t), a scalar, or an array of boundary nodal
    values in sorted-vertex order (per time level if 2-D, then with attribute dt).
    """
    E, s, P, nrm, w = ctx.boundary(tag)
    if callable(spec):
        return np.ones(len(P)) * spec(P[:, 0], P[:, 1], nrm[:, 0], nrm[:, 1], t), P, nrm, w
    if np.isscalar(spec):
        return np.full(len(P), float(spec)), P, nrm, w
    vals = spec.at(t) if isinstance(spec, _BoundarySeries) else np.asarray(spec, dtype=float)
    bl = ctx.sm.boundary_local[tag]
    ia, ib = np.searchsorted(bl, E[:, 0]), np.searchsorted(bl, E[:, 1])
    out = vals[ia][:, None] * (1 - s)[None, :] + vals[ib][:, None] * s[None, :]
    return out.ravel(), P, nrm, w


@dataclass
class _BoundarySeries:
    values: np.ndarray
    dt: float

    def at(self, t):
        return SpaceTimeField(self.values, self.dt).at(t)


def heat_potential(ctx: HeatContext, kind: str, density, x, t: float, tag: Boundary = INNER) -> float:
    """Evaluate I, G, V or W at (x, t).

    I: int Psi(x - y, t) h(y) dy.     G: int_0^t int Psi f dy d tau.
    V: int_0^t int_S (-kappa Psi) v.  W: -int_0^t int_S (kappa nu.M grad_y Psi + (a.nu) Psi) w.
    """
    if t <= 0:
        raise NonPositiveTime("potentials need t > 0")
    x = np.asarray(x, dtype=float)
    c = ctx.c
    if kind == "I":
        spec = density.at(0.0) if isinstance(density, SpaceTimeField) else density
        if callable(spec):
            fn = spec
            spec = lambda X, Y, tt: fn(X, Y, 0.0)
        return ctx.volume(x, t, _Density(ctx, spec, 0.0))
    taus, wts = ctx.time_nodes(t)
    total = 0.0
    for tau, wt in zip(taus, wts):
        s = t - tau
        if kind == "G":
            total += wt * ctx.volume(x, s, _Density(ctx, density, tau))
        elif kind in ("V", "W"):
            vals, P, nrm, w = _boundary_values(ctx, density, tau, tag)
            if kind == "V":
                ker = -c.kappa * ctx.kernel(x, P, s)
            else:
                gy = -heat_kernel_grad(x[None, :] - P, s, c, ctx.M)  # grad in y
                ker = -(c.kappa * np.einsum("qi,ij,qj->q", nrm, ctx.M.matrix, gy) + (nrm @ c.drift) * ctx.kernel(x, P, s))
            total += wt * float(np.sum(w * ker * vals))
        else:
            raise ValueError(f"unknown potential kind {kind!r}")
    return total


# ---------------------------------------------------------------------------
# Green representation


@dataclass
class HeatData:
    """u, its conormal trace and L u as evaluable objects for the potentials."""

    u: object
    conormal: object
    Lu: object
    T: float
    scale: float


def heat_data_from_field(mesh: Mesh2D, u: SpaceTimeField, c: CableCoefficients, M: SpdTensor2) -> HeatData:
    """Discrete L u (one-sided in time at the ends) and conormal trace from nodal values."""
    if not isinstance(M, SpdTensor2):
        M = SpdTensor2(*M)
    sys = assemble(mesh, M, HEART)
    sm = sys.sm
    vals = u.values
    ut = np.gradient(vals, u.dt, axis=0, edge_order=2) if len(vals) > 2 else np.zeros_like(vals)
    g, area = p1_gradients(sm)
    lump = sys.lumped
    Lu = np.empty_like(vals)
    cn = []
    for k, w in enumerate(vals):
        op = discrete_operator(sys, w)
        gt = np.einsum("tid,ti->td", g, w[sm.triangles])  # gradient per triangle
        acc = np.zeros((sm.n, 2))
        for j in range(3):
            np.add.at(acc, sm.triangles[:, j], gt * (area / 3)[:, None])
        grad = acc / lump[:, None]
        Lu[k] = ut[k] + c.kappa * op + grad @ c.drift + c.a0 * w
        cn.append(conormal_vector(sys, w, INNER))
    return HeatData(u, _BoundarySeries(np.array(cn), u.dt), SpaceTimeField(Lu, u.dt), u.T,
                    float(np.max(np.abs(vals))))


def heat_data_from_functions(u_fn, grad_fn, Lu_fn, T: float, M: SpdTensor2, scale: float) -> HeatData:
    """Analytic variant: u_fn(x, y, t), grad_fn(x, y, t) -> (ux, uy), Lu_fn(x, y, t)."""
    Mm = M.matrix if isinstance(M, SpdTensor2) else np.asarray(M)

    def conormal(x, y, nx, ny, t):
        gx, gy = grad_fn(x, y, t)
        return nx * (Mm[0, 0] * gx + Mm[0, 1] * gy) + ny * (Mm[1, 0] * gx + Mm[1, 1] * gy)

    return HeatData(u_fn, conormal, Lu_fn, T, scale)


def heat_representation(ctx: HeatContext, data: HeatData, x, t: float) -> float:
    """I(u(., 0)) + G(L u) - V(conormal u) + W(u)  at (x, t)."""
    u_b = data.u
    if isinstance(u_b, SpaceTimeField):
        sm = ctx.sm
        bl = sm.boundary_local[INNER]
        u_b = _BoundarySeries(data.u.values[:, bl], data.u.dt)
    else:
        fn = data.u
        u_b = lambda X, Y, nx, ny, tt: fn(X, Y, tt)
    return (heat_potential(ctx, "I", data.u, x, t) + heat_potential(ctx, "G", data.Lu, x, t)
            - heat_potential(ctx, "V", data.conormal, x, t) + heat_potential(ctx, "W", u_b, x, t))


def heat_sample_points(mesh: Mesh2D, n_angles: int = 6):
    a = mesh.r_inner
    th = 2 * np.pi * (np.arange(n_angles) + 0.25) / n_angles
    inside = np.vstack([[0.0, 0.0], 0.5 * a * np.column_stack([np.cos(th), np.sin(th)])])
    outside = 1.5 * a * np.column_stack([np.cos(th), np.sin(th)])
    return inside, outside


def green_heat_residual(mesh: Mesh2D, u, c: CableCoefficients, M: SpdTensor2, t: float | None = None,
                        n_angles: int = 6, ctx: HeatContext | None = None, u_exact=None) -> tuple[float, float]:
    """(interior_error, exterior_value), both relative to max |u|.

    u is a SpaceTimeField on the heart or a HeatData. Interior values are
    compared with u_exact(x, y, t) when given, else with the field itself.
    """
    data = heat_data_from_field(mesh, u, c, M) if isinstance(u, SpaceTimeField) else u
    if data.scale == 0:
        return 0.0, 0.0
    ctx = ctx or HeatContext(mesh, c, M)
    t = data.T if t is None else t
    inside, outside = heat_sample_points(mesh, n_angles)
    if u_exact is None:
        if isinstance(data.u, SpaceTimeField):
            vals = data.u.at(t)
            interp = LinearNDInterpolator(Delaunay(ctx.sm.vertices), vals)
            u_exact = lambda X, Y, tt: interp(np.column_stack([X, Y]))
        else:
            u_exact = data.u
    err = max(abs(heat_representation(ctx, data, p, t) - float(np.ravel(u_exact(p[0:1], p[1:2], t))[0]))
              for p in inside)
    leak = max(abs(heat_representation(ctx, data, p, t)) for p in outside)
    return err / data.scale, leak / data.scale


def dual_pair_residual(mesh: Mesh2D, c: CableCoefficients, M: SpdTensor2, cu: np.ndarray, cv: np.ndarray) -> tuple[float, float]:
    """Residual and scale of the duality identity for polynomial u, v (2-D coefficient arrays).

    int_dO ((B1~ v) u + (B0~ v) B1 u) = int_O (v D u - (D* v) u), with
    B0~ v = -kappa v, B1~ v = kappa nu.M grad v + (a.nu) v, D = kappa Lap_M + a.grad + a0.
    """
    from numpy.polynomial import polynomial as P

    Mm = M.matrix if isinstance(M, SpdTensor2) else np.asarray(M)
    k, a, a0 = c.kappa, c.drift, c.a0

    def derivs(cf):
        dx, dy = P.polyder(cf, axis=0), P.polyder(cf, axis=1)
        dxx, dyy, dxy = P.polyder(dx, axis=0), P.polyder(dy, axis=1), P.polyder(dx, axis=1)
        return dx, dy, dxx, dyy, dxy

    def ev(cf, X):
        return P.polyval2d(X[:, 0], X[:, 1], cf)

    du, dv = derivs(cu), derivs(cv)
    lapM = lambda d, X: -(Mm[0, 0] * ev(d[2], X) + Mm[1, 1] * ev(d[3], X) + 2 * Mm[0, 1] * ev(d[4], X))
    grad = lambda d, X: np.column_stack([ev(d[0], X), ev(d[1], X)])
    sm = mesh.sub(HEART)
    ref, w = triangle_rule(4)
    lam = np.column_stack([1 - ref[:, 0] - ref[:, 1], ref[:, 0], ref[:, 1]])
    X = np.einsum("qk,tkd->tqd", lam, sm.vertices[sm.triangles]).reshape(-1, 2)
    W = (2 * np.abs(sm.triangle_areas())[:, None] * w[None, :]).ravel()
    u, v = ev(cu, X), ev(cv, X)
    Du = k * lapM(du, X) + grad(du, X) @ a + a0 * u
    Dsv = k * lapM(dv, X) - grad(dv, X) @ a + a0 * v
    vol = float(W @ (v * Du - Dsv * u))
    s, sw = gauss_segment(4)
    ei = sm.edges_with(INNER)
    E, nrm, ln = sm.edges[ei], sm.edge_normals[ei], sm.edge_lengths[ei]
    B = (sm.vertices[E[:, 0]][:, None, :] * (1 - s)[None, :, None] + sm.vertices[E[:, 1]][:, None, :] * s[None, :, None]).reshape(-1, 2)
    N = np.repeat(nrm, len(s), axis=0)
    BW = (ln[:, None] * sw[None, :]).ravel()
    ub, vb = ev(cu, B), ev(cv, B)
    cn_u = np.einsum("qi,ij,qj->q", N, Mm, grad(du, B))
    cn_v = np.einsum("qi,ij,qj->q", N, Mm, grad(dv, B))
    bnd = float(BW @ ((k * cn_v + (N @ a) * vb) * ub + (-k * vb) * cn_u))
    scale = float(W @ (np.abs(v * Du) + np.abs(Dsv * u)))
    return abs(bnd - vol), scale
