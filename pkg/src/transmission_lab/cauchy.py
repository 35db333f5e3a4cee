"""Regularized Cauchy problem on the torso and the Green-type potential F."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .biharmonic import gauss_segment, triangle_rule
from .elliptic import EllipticSystem, assemble, conormal_vector
from .errors import AtSingularity, OnBoundary, SingularNormalEquations
from .fields import BoundaryField, ScalarField
from .geometry import Boundary, Mesh2D, SpdTensor2, Subdomain

INNER, OUTER = Boundary.INNER, Boundary.OUTER
TORSO = Subdomain.TORSO


@dataclass
class CauchyData:
    """Torso source f, outer Dirichlet datum f0 and outer conormal datum f1."""

    f: ScalarField | None
    f0: BoundaryField
    f1: BoundaryField
    M_b: SpdTensor2

    def __post_init__(self):
        for name in ("f0", "f1"):
            v = getattr(self, name)
            if v is not None and not np.all(np.isfinite(v.values)):
                raise ValueError(f"{name} has non-finite values")
        if self.f is not None and not np.all(np.isfinite(self.f.values)):
            raise ValueError("f has non-finite values")

    def scaled(self, a: float) -> "CauchyData":
        f = None if self.f is None else a * self.f
        return CauchyData(f, a * self.f0, a * self.f1, self.M_b)

    def __add__(self, other: "CauchyData") -> "CauchyData":
        if self.f is None and other.f is None:
            f = None
        elif self.f is None:
            f = other.f
        elif other.f is None:
            f = self.f
        else:
            f = self.f + other.f
        return CauchyData(f, self.f0 + other.f0, self.f1 + other.f1, self.M_b)


def cauchy_data_from_solution(mesh: Mesh2D, u_fn, grad_fn, M_b: SpdTensor2, f_fn=None) -> CauchyData:
    """Outer Cauchy data of an analytic field: f0 = u, f1 = nu . M_b grad u with circle normals."""
    ids = mesh.boundary_vertices(OUTER)
    x, y = mesh.vertices[ids].T
    r = np.hypot(x, y)
    nx, ny = x / r, y / r
    gx, gy = grad_fn(x, y)
    Mm = M_b.matrix
    flux = nx * (Mm[0, 0] * gx + Mm[0, 1] * gy) + ny * (Mm[1, 0] * gx + Mm[1, 1] * gy)
    f = None if f_fn is None else ScalarField.from_function(mesh, f_fn, TORSO)
    return CauchyData(f, BoundaryField(u_fn(x, y) * np.ones_like(x), OUTER), BoundaryField(flux, OUTER), M_b)


# ---------------------------------------------------------------------------
# Tikhonov


@dataclass
class CauchySolution:
    field: ScalarField
    trace: np.ndarray  # Dirichlet trace on the interface (torso local order)
    misfit: float
    penalty: float
    lam: float


class CauchySolver:
    """Affine forward map phi -> u(phi) from interface traces to torso fields.

    u(phi) solves L_b u = f, u = phi on the interface, conormal = f1 on the outer
    circle. Columns of the map come from one sparse factorization.
    """

    def __init__(self, mesh: Mesh2D, M_b: SpdTensor2, sys: EllipticSystem | None = None):
        self.mesh = mesh
        self.sys = sys or assemble(mesh, M_b, TORSO)
        s = self.sys
        self.inner = s.sm.boundary_local[INNER]
        self.outer = s.sm.boundary_local[OUTER]
        self.free = np.setdiff1d(np.arange(s.n), self.inner)
        K = s.stiffness
        from .elliptic import _factor

        self._lu = _factor(K[self.free][:, self.free])
        Kfi = K[self.free][:, self.inner].toarray()
        cols = np.zeros((s.n, len(self.inner)))
        cols[self.inner] = np.eye(len(self.inner))
        cols[self.free] = -self._lu.solve(Kfi)
        self.G = cols
        B_out = s.boundary_mass[OUTER][self.outer][:, self.outer].toarray()
        B_in = s.boundary_mass[INNER][self.inner][:, self.inner].toarray()
        self.R_out = np.linalg.cholesky(B_out).T
        self.R_in = np.linalg.cholesky(B_in).T

    def particular(self, data: CauchyData) -> np.ndarray:
        s = self.sys
        load = s.mass @ s.volume_data(data.f) + s.boundary_load(OUTER, data.f1)
        u = np.zeros(s.n)
        u[self.free] = self._lu.solve(load[self.free])
        return u

    def solve(self, data: CauchyData, lam: float) -> CauchySolution:
        if lam < 0 or not math.isfinite(lam):
            raise ValueError(f"lambda must be >= 0, got {lam}")
        u0 = self.particular(data)
        f0 = self.sys.boundary_data(OUTER, data.f0)
        A = np.vstack([self.R_out @ self.G[self.outer], math.sqrt(lam) * self.R_in])
        b = np.concatenate([self.R_out @ (f0 - u0[self.outer]), np.zeros(len(self.inner))])
        Q, R = sla.qr(A, mode="economic")
        d = np.abs(np.diag(R))
        if d.min() <= 1e-13 * d.max():
            raise SingularNormalEquations("regularized least-squares system is rank deficient")
        phi = sla.solve_triangular(R, Q.T @ b)
        u = u0 + self.G @ phi
        mis = float(np.linalg.norm(self.R_out @ (u[self.outer] - f0)))
        pen = float(np.linalg.norm(self.R_in @ phi))
        return CauchySolution(ScalarField(u, TORSO), phi, mis, pen, lam)


def tikhonov_cauchy(mesh: Mesh2D, data: CauchyData, lam: float, solver: CauchySolver | None = None) -> CauchySolution:
    """argmin over interface traces of ||u|_outer - f0||^2 + lam ||phi||^2 (boundary L2 norms)."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    solver = solver or CauchySolver(mesh, data.M_b)
    return solver.solve(data, lam)


def trace_recovery_error(mesh: Mesh2D, sol: CauchySolution, u_fn) -> float:
    """Relative boundary-L2 error of the recovered interface trace."""
    ids = mesh.boundary_vertices(INNER)
    ex = u_fn(*mesh.vertices[ids].T) * np.ones(len(ids))
    sys = assemble(mesh, SpdTensor2.isotropic(1.0), TORSO) if not hasattr(sol, "_sys") else sol._sys
    B = sys.boundary_mass[INNER]
    inner = sys.sm.boundary_local[INNER]
    Bi = B[inner][:, inner]
    e = sol.trace - ex
    den = float(np.sqrt(ex @ (Bi @ ex)))
    return float(np.sqrt(e @ (Bi @ e))) / (den if den > 0 else 1.0)


# ---------------------------------------------------------------------------
# fundamental solution and layer potentials


@dataclass(frozen=True)
class FundamentalSolution:
    """phi(x, y) = -log(rho) / (2 pi sqrt(det M)), rho^2 = (y - x)^T M^-1 (y - x).

    For M = sigma I this is -log|x - y| / (2 pi sigma) up to an additive constant;
    in every case (-div M grad) phi = delta.
    """

    M: SpdTensor2 = SpdTensor2(1.0, 0.0, 1.0)
    kind: str = "laplace2d"

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(self.M.det)

    def _rho2(self, dx, dy):
        Mi = np.linalg.inv(self.M.matrix)
        return Mi[0, 0] * dx * dx + 2 * Mi[0, 1] * dx * dy + Mi[1, 1] * dy * dy

    def value(self, x, y):
        """phi at separation d = y - x given as arrays (x = point, y = source)."""
        dx = np.asarray(y[0]) - x[0]
        dy = np.asarray(y[1]) - x[1]
        rho2 = self._rho2(dx, dy)
        if np.any(rho2 < 1e-28):
            raise AtSingularity("fundamental solution evaluated at its pole")
        return -self.scale / (4 * math.pi) * np.log(rho2)

    def conormal_y(self, x, y, ny):
        """nu(y) . M grad_y phi(x, y)."""
        dx = np.asarray(y[0]) - x[0]
        dy = np.asarray(y[1]) - x[1]
        rho2 = self._rho2(dx, dy)
        if np.any(rho2 < 1e-28):
            raise AtSingularity("fundamental solution evaluated at its pole")
        return -self.scale / (2 * math.pi) * (ny[0] * dx + ny[1] * dy) / rho2


def _edge_geometry(mesh: Mesh2D, tag: Boundary, side: Subdomain = TORSO):
    sm = mesh.sub(side)
    idx = sm.edges_with(tag)
    e = sm.edges[idx]
    A = sm.vertices[e[:, 0]]
    B = sm.vertices[e[:, 1]]
    return sm, e, A, B, sm.edge_normals[idx]


def _segment_rule(A, B, x, base: int = 4, near: float = 2.0, depth: int = 6):
    """Gauss points on segments, bisected while the target is near (relative to length)."""
    t, w = gauss_segment(base)
    pts, wts, owner, param = [], [], [], []
    stack = [(k, 0.0, 1.0, 0) for k in range(len(A))]
    L_all = np.linalg.norm(B - A, axis=1)
    while stack:
        k, s0, s1, d = stack.pop()
        a = A[k] + s0 * (B[k] - A[k])
        b = A[k] + s1 * (B[k] - A[k])
        L = L_all[k] * (s1 - s0)
        mid = 0.5 * (a + b)
        if d < depth and np.hypot(*(mid - x)) < near * L:
            sm_ = 0.5 * (s0 + s1)
            stack.append((k, s0, sm_, d + 1))
            stack.append((k, sm_, s1, d + 1))
            continue
        pts.append(a[None] + t[:, None] * (b - a)[None])
        wts.append(w * L)
        owner.append(np.full(len(t), k))
        param.append(s0 + t * (s1 - s0))
    return np.vstack(pts), np.concatenate(wts), np.concatenate(owner), np.concatenate(param)


def _boundary_distance(mesh: Mesh2D, x, tag: Boundary) -> float:
    e = mesh.boundary_edges[mesh.edge_tags == tag]
    A = mesh.vertices[e[:, 0]]
    B = mesh.vertices[e[:, 1]]
    d = B - A
    t = np.clip(np.einsum("ij,ij->i", x - A, d) / np.einsum("ij,ij->i", d, d), 0, 1)
    P = A + t[:, None] * d
    return float(np.min(np.hypot(*(P - x).T)))


def layer_terms(mesh: Mesh2D, x, phi: FundamentalSolution, tag: Boundary, value, flux) -> float:
    """int over tag of (phi f1 - f0 B_y phi), normals outward from the torso.

    value/flux are callables (x, y, nx, ny) -> array or vertex data in global
    boundary order (linear along each edge).
    """
    x = np.asarray(x, dtype=float)
    sm, e, A, B, N = _edge_geometry(mesh, tag)
    P, W, own, s = _segment_rule(A, B, x)
    nrm = N[own]

    def sample(d):
        if callable(d):
            return np.asarray(d(P[:, 0], P[:, 1], nrm[:, 0], nrm[:, 1]), dtype=float) * np.ones(len(P))
        vals = np.asarray(d.values if isinstance(d, BoundaryField) else d, dtype=float)
        gid = mesh.boundary_vertices(tag)
        pos = np.searchsorted(gid, sm.global_ids[e])
        va, vb = vals[pos[:, 0]], vals[pos[:, 1]]
        return va[own] * (1 - s) + vb[own] * s

    f0 = sample(value)
    f1 = sample(flux)
    ph = phi.value(x, P.T)
    dph = phi.conormal_y(x, P.T, nrm.T)
    return float(np.sum(W * (ph * f1 - f0 * dph)))


def volume_term(mesh: Mesh2D, x, phi: FundamentalSolution, f, subdomain: Subdomain = TORSO) -> float:
    """int phi(x, y) f(y) dy over the subdomain; triangles near x are split at x."""
    if f is None:
        return 0.0
    x = np.asarray(x, dtype=float)
    sm = mesh.sub(subdomain)
    pts, w = triangle_rule(4)
    P = sm.vertices[sm.triangles]
    total = 0.0
    lam = np.column_stack([1 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]])
    vals = None if callable(f) else np.asarray(f.values if isinstance(f, ScalarField) else f, float)
    cen = P.mean(axis=1)
    diam = np.max(np.linalg.norm(P - cen[:, None], axis=2), axis=1)
    near = np.hypot(*(cen - x).T) < 3 * diam
    for sel, rule_n in ((~near, 4), (near, 12)):
        if not sel.any():
            continue
        tri = P[sel]
        if rule_n != 4:
            pts_n, w_n = triangle_rule(rule_n)
            lam_n = np.column_stack([1 - pts_n[:, 0] - pts_n[:, 1], pts_n[:, 0], pts_n[:, 1]])
            subs, fvals_sub = [], []
            for k, T in zip(np.flatnonzero(sel), tri):
                fv = None if vals is None else vals[sm.triangles[k]]
                for S in _split_at(T, x):
                    subs.append(S)
                    fvals_sub.append(fv if fv is None else _bary_values(T, S, fv))
            for S, fv in zip(subs, fvals_sub):
                # collapse the first vertex (x when split) so the log weight is integrable
                J = np.column_stack([S[1] - S[0], S[2] - S[0]])
                det = abs(np.linalg.det(J))
                Y = S[0] + pts_n @ J.T
                if np.min(np.hypot(*(Y - x).T)) < 1e-15:
                    continue
                fy = f(Y[:, 0], Y[:, 1]) if vals is None else lam_n @ fv
                total += det * float(np.sum(w_n * phi.value(x, Y.T) * fy))
            continue
        J = np.stack([tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]], axis=-1)
        det = np.abs(np.linalg.det(J))
        Y = tri[:, 0][:, None, :] + np.einsum("tab,qb->tqa", J, pts)
        if vals is None:
            fy = f(Y[..., 0], Y[..., 1])
        else:
            fy = vals[sm.triangles[sel]] @ lam.T
        ph = phi.value(x, (Y[..., 0], Y[..., 1]))
        total += float(np.sum(det[:, None] * w[None] * ph * fy))
    return total


def _split_at(T, x):
    """Split triangle T into sub-triangles with apex x when x is inside; else return T."""
    d1, d2 = T[1] - T[0], T[2] - T[0]
    M = np.column_stack([d1, d2])
    l1, l2 = np.linalg.solve(M, x - T[0])
    if l1 >= 0 and l2 >= 0 and l1 + l2 <= 1:
        out = []
        for a, b in ((0, 1), (1, 2), (2, 0)):
            S = np.array([x, T[a], T[b]])
            if abs(np.cross(S[1] - S[0], S[2] - S[0])) > 1e-30:
                out.append(S)
        return out
    return [T]


def _bary_values(T, S, fv):
    """Values at the vertices of S of the linear function with vertex values fv on T."""
    M = np.column_stack([T[1] - T[0], T[2] - T[0]])
    out = []
    for p in S:
        l1, l2 = np.linalg.solve(M, p - T[0])
        out.append((1 - l1 - l2) * fv[0] + l1 * fv[1] + l2 * fv[2])
    return np.array(out)


def potential_F(mesh: Mesh2D, x, data: CauchyData, phi: FundamentalSolution | None = None,
                f0=None, f1=None) -> float:
    """F(x) = int_torso phi f + int_outer (phi f1 - f0 B_y phi).

    Optional callables f0(x, y, nx, ny), f1(...) replace the vertex data on the
    outer boundary (used with analytic data).
    """
    phi = phi or FundamentalSolution(data.M_b)
    x = np.asarray(x, dtype=float)
    if _boundary_distance(mesh, x, OUTER) < 0.5 * mesh.h:
        raise OnBoundary(f"x = {tuple(x)} lies within h/2 of the outer boundary")
    val = volume_term(mesh, x, phi, data.f)
    val += layer_terms(mesh, x, phi, OUTER, f0 if f0 is not None else data.f0,
                       f1 if f1 is not None else data.f1)
    return val


def green_representation(mesh: Mesh2D, x, phi: FundamentalSolution, f, traces: dict) -> float:
    """Volume term plus layer terms on every tag in traces (tag -> (value, flux))."""
    x = np.asarray(x, dtype=float)
    for tag in traces:
        if _boundary_distance(mesh, x, tag) < 0.5 * mesh.h:
            raise OnBoundary(f"x = {tuple(x)} lies within h/2 of boundary {tag.name}")
    val = volume_term(mesh, x, phi, f)
    for tag, (v, fl) in traces.items():
        val += layer_terms(mesh, x, phi, tag, v, fl)
    return val


def sample_points(mesh: Mesh2D, n_angles: int = 12, margin: float = 3.0):
    """Interior torso points at distance >= margin*h from both circles, plus exterior points."""
    a, R, h = mesh.r_inner, mesh.r_outer, mesh.h
    th = 2 * np.pi * (np.arange(n_angles) + 0.37) / n_angles
    rs = np.linspace(a + margin * h, R - margin * h, 3)
    interior = np.array([[r * np.cos(t), r * np.sin(t)] for r in rs for t in th])
    exterior = np.array([[3.0 * np.cos(t), 3.0 * np.sin(t)] for t in th]
                        + [[0.5 * a * np.cos(t), 0.5 * a * np.sin(t)] for t in th])
    return interior, exterior


def reproduction_check(mesh: Mesh2D, u_star, M_b: SpdTensor2, grad=None, f=None,
                       n_angles: int = 12) -> tuple[float, float]:
    """Green representation with full-boundary data of u_star.

    u_star is a callable (then ``grad`` is its analytic gradient and edge
    normals are exact) or a torso ScalarField (traces and variational conormals
    are used). Returns (max interior deviation, max exterior value), both
    relative to max |u_star| over the interior samples.
    """
    phi = FundamentalSolution(M_b)
    interior, exterior = sample_points(mesh, n_angles)
    Mm = M_b.matrix
    if callable(u_star):
        if grad is None:
            raise ValueError("analytic u_star needs its gradient")

        def value(x, y, nx, ny):
            return u_star(x, y)

        def flux(x, y, nx, ny):
            gx, gy = grad(x, y)
            return nx * (Mm[0, 0] * gx + Mm[0, 1] * gy) + ny * (Mm[1, 0] * gx + Mm[1, 1] * gy)

        traces = {INNER: (value, flux), OUTER: (value, flux)}
        ref = np.array([u_star(*p) for p in interior], dtype=float)
    else:
        sys = assemble(mesh, M_b, TORSO)
        traces = {}
        for tag in (INNER, OUTER):
            bl = sys.sm.boundary_local[tag]
            traces[tag] = (u_star.values[bl], conormal_vector(sys, u_star.values, tag, f))
        from scipy.interpolate import LinearNDInterpolator

        interp = LinearNDInterpolator(sys.sm.vertices, u_star.values)
        ref = interp(interior)
    inside = np.array([green_representation(mesh, p, phi, f, traces) for p in interior])
    outside = np.array([green_representation(mesh, p, phi, f, traces) for p in exterior])
    scale = float(np.max(np.abs(ref)))
    if scale == 0.0:
        return float(np.max(np.abs(inside))), float(np.max(np.abs(outside)))
    return float(np.max(np.abs(inside - ref)) / scale), float(np.max(np.abs(outside)) / scale)
