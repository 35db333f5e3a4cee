"""Steady generalized transmission problem, scalar instance.

Unknowns are u_i, u_e on the heart and u_b on the torso. Boundary operators are
conormal derivatives: B^(i), B^(e) use the heart-outward normal, B^(b) the
torso-outward normal (so on the interface it points into the heart).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import biharmonic as bh
from .elliptic import (EllipticSystem, assemble, conormal_vector, neumann_from_load)
from .errors import (AlphaIZero, IncompatibleData, NotH20, NotPositive, SingularSystem,
                     SupportNotInside)
from .fields import BoundaryField, ScalarField
from .geometry import Boundary, Mesh2D, SpdTensor2, Subdomain, boundary_integral

INNER, OUTER = Boundary.INNER, Boundary.OUTER
HEART, TORSO = Subdomain.HEART, Subdomain.TORSO


@dataclass(frozen=True)
class TransmissionCoefficients:
    alpha_i: float
    alpha_e: float
    beta_e: float
    beta_i: float
    gamma: float = 1.0
    c0: float = 0.0

    def __post_init__(self):
        if self.alpha_i == 0 and self.alpha_e == 0:
            raise ValueError("alpha_i and alpha_e cannot both vanish")
        if self.beta_i == 0 and self.beta_e == 0:
            raise ValueError("beta_i and beta_e cannot both vanish")
        if not self.gamma > 0:
            raise NotPositive(f"gamma must be positive, got {self.gamma}")

    @property
    def prefactor(self) -> float:
        return self.beta_e * self.alpha_e + self.alpha_i * self.beta_i


ECG = TransmissionCoefficients(1.0, 1.0, -1.0, 0.0)


@dataclass
class PotentialTriple:
    u_i: ScalarField
    u_e: ScalarField
    u_b: ScalarField

    def __post_init__(self):
        if self.u_i.subdomain != HEART or self.u_e.subdomain != HEART or self.u_b.subdomain != TORSO:
            raise ValueError("u_i, u_e live on the heart and u_b on the torso")
        for f in (self.u_i, self.u_e, self.u_b):
            if not np.all(np.isfinite(f.values)):
                raise ValueError("triple has non-finite values")

    @classmethod
    def zeros(cls, mesh: Mesh2D) -> "PotentialTriple":
        return cls(ScalarField.zeros(mesh, HEART), ScalarField.zeros(mesh, HEART), ScalarField.zeros(mesh, TORSO))


@dataclass
class TransmissionSetup:
    """Mesh plus the three conductivity tensors, with assembled systems cached."""

    mesh: Mesh2D
    M_i: SpdTensor2
    M_e: SpdTensor2
    M_b: SpdTensor2
    _c: dict = field(default_factory=dict, repr=False)

    @property
    def sys_i(self) -> EllipticSystem:
        if "i" not in self._c:
            self._c["i"] = assemble(self.mesh, self.M_i, HEART)
        return self._c["i"]

    @property
    def sys_e(self) -> EllipticSystem:
        if "e" not in self._c:
            self._c["e"] = assemble(self.mesh, self.M_e, HEART)
        return self._c["e"]

    @property
    def sys_b(self) -> EllipticSystem:
        if "b" not in self._c:
            self._c["b"] = assemble(self.mesh, self.M_b, TORSO)
        return self._c["b"]

    def space(self, degree: int = 3) -> bh.LagrangeSpace:
        key = ("space", degree)
        if key not in self._c:
            self._c[key] = bh.LagrangeSpace(self.mesh.sub(HEART), degree)
        return self._c[key]

    def c0ip(self, degree: int = 3, M: SpdTensor2 | None = None, penalty: float = 10.0) -> bh.C0IPOperator:
        M = M or self.M_e
        key = ("c0ip", degree, M, penalty)
        if key not in self._c:
            self._c[key] = bh.assemble_c0ip(self.space(degree), M, penalty)
        return self._c[key]

    def heart_to_torso_inner(self) -> tuple[np.ndarray, np.ndarray]:
        """Local ids of the interface vertices in the heart and the torso (same order)."""
        return self.sys_e.sm.boundary_local[INNER], self.sys_b.sm.boundary_local[INNER]


# ---------------------------------------------------------------------------
# H2_0 test functions


def make_h20_bump(mesh: Mesh2D, center, radius: float, amplitude: float = 1.0) -> ScalarField:
    """Nodal interpolant of amplitude * max(0, R^2 - |x - c|^2)^2 / R^4."""
    cx, cy = float(center[0]), float(center[1])
    r_in = mesh.r_inner if mesh.r_inner is not None else float(
        np.linalg.norm(mesh.vertices[mesh.boundary_vertices(INNER)], axis=1).max())
    if not radius > 0 or math.hypot(cx, cy) + radius > r_in * (1 + 1e-12):
        raise SupportNotInside(f"support disk |x - ({cx}, {cy})| <= {radius} leaves the heart of radius {r_in}")

    def fn(x, y):
        s = np.maximum(0.0, radius**2 - (x - cx) ** 2 - (y - cy) ** 2)
        return amplitude * s**2 / radius**4

    return ScalarField.from_function(mesh, fn, HEART)


def h20_defect(sys: EllipticSystem, u: ScalarField) -> tuple[float, float, float]:
    """(boundary sup of u, L2 norm of its conormal trace, allowed conormal size 10 h ||u||)."""
    bl = sys.sm.boundary_local[INNER]
    sup = float(np.max(np.abs(u.values[bl]))) if bl.size else 0.0
    cn = sys.boundary_l2(INNER, conormal_vector(sys, u.values, INNER))
    return sup, cn, 10.0 * sys.mesh.h * sys.l2(u.values)


def is_h20(sys: EllipticSystem, u: ScalarField) -> bool:
    sup, cn, allowed = h20_defect(sys, u)
    return sup <= 1e-10 and cn <= allowed


# ---------------------------------------------------------------------------
# null space


def nullspace_generate(setup: TransmissionSetup, u: ScalarField, h0: float,
                       coeffs: TransmissionCoefficients) -> PotentialTriple:
    """Null-space triple generated by u (and the constant h0).

    alpha_i != 0: (u_i, u_e, u_b) = (-alpha_e/alpha_i N_i(L_e u, 0) + h0, u, 0), u in H2_0.
    alpha_i == 0: (u, 0, 0) with zero intracellular conormal trace.
    """
    mesh = setup.mesh
    zero_b = ScalarField.zeros(mesh, TORSO)
    if coeffs.alpha_i == 0:
        sys = setup.sys_i
        cn = sys.boundary_l2(INNER, conormal_vector(sys, u.values, INNER))
        if cn > 10.0 * mesh.h * sys.l2(u.values):
            raise NotH20(f"conormal trace {cn:.3e} of u is not zero")
        return PotentialTriple(ScalarField(u.values.copy(), HEART), ScalarField.zeros(mesh, HEART), zero_b)
    sup, cn, allowed = h20_defect(setup.sys_e, u)
    if sup > 1e-10 or cn > allowed:
        raise NotH20(f"trace sup {sup:.3e} or conormal {cn:.3e} (allowed {allowed:.3e}) too large")
    # for u in H2_0 the functional v -> int v L_e u equals v -> (grad v, M_e grad u)
    load = setup.sys_e.stiffness @ u.values
    w = neumann_from_load(setup.sys_i, load, scale=float(np.sum(np.abs(load))))
    ui = -(coeffs.alpha_e / coeffs.alpha_i) * w + h0
    return PotentialTriple(ScalarField(ui, HEART), ScalarField(u.values.copy(), HEART), zero_b)


# ---------------------------------------------------------------------------
# residuals


def _dual_norm(sys: EllipticSystem, r: np.ndarray) -> float:
    """Lumped-mass weighted norm of a residual functional over interior rows."""
    inter = sys.sm.interior_local()
    return float(np.sqrt(np.sum(r[inter] ** 2 / sys.lumped[inter])))


def torso_conormal(setup: TransmissionSetup, u_b: ScalarField, tag: Boundary, f=None) -> np.ndarray:
    return conormal_vector(setup.sys_b, u_b.values, tag, None if f is None else f)


def transmission_residuals(setup: TransmissionSetup, triple: PotentialTriple, coeffs: TransmissionCoefficients,
                           data=None) -> dict:
    """The seven residual norms of the transmission problem.

    data may be None (all zero) or any object with attributes f (torso field or
    None), f0, f1 (outer boundary data or None).
    """
    si, se, sb = setup.sys_i, setup.sys_e, setup.sys_b
    f = getattr(data, "f", None) if data is not None else None
    f0 = getattr(data, "f0", None) if data is not None else None
    f1 = getattr(data, "f1", None) if data is not None else None
    fv = sb.volume_data(f)
    ui, ue, ub = triple.u_i.values, triple.u_e.values, triple.u_b.values
    hl, tl = setup.heart_to_torso_inner()
    r7 = _dual_norm(si, coeffs.alpha_i * (si.stiffness @ ui) + coeffs.alpha_e * (se.stiffness @ ue))
    r8 = _dual_norm(sb, sb.stiffness @ ub - sb.mass @ fv)
    r9 = se.boundary_l2(INNER, ue[hl] - ub[tl])
    gb = None if f is None else fv
    Bb_in = conormal_vector(sb, ub, INNER, gb)
    Be = conormal_vector(se, ue, INNER)
    Bi = conormal_vector(si, ui, INNER)
    r10 = se.boundary_l2(INNER, Be - coeffs.beta_e * Bb_in)
    r11 = si.boundary_l2(INNER, Bi - coeffs.beta_i * Bb_in)
    Bb_out = conormal_vector(sb, ub, OUTER, gb)
    r12 = sb.boundary_l2(OUTER, Bb_out - sb.boundary_data(OUTER, f1))
    ob = sb.sm.boundary_local[OUTER]
    r6 = sb.boundary_l2(OUTER, ub[ob] - sb.boundary_data(OUTER, f0))
    return {"r7": r7, "r8": r8, "r9": r9, "r10": r10, "r11": r11, "r12": r12, "r6": r6}


# ---------------------------------------------------------------------------
# existence condition and calibration


def existence_condition(setup: TransmissionSetup, f, f1, coeffs: TransmissionCoefficients) -> float:
    """prefactor * (int_torso f + int over the given boundary pieces of f1).

    f1 is outer boundary data, or a dict tag -> data covering the whole torso boundary.
    """
    mesh = setup.mesh
    sb = setup.sys_b
    total = 0.0
    if f is not None:
        fv = sb.volume_data(f)
        from .geometry import domain_integral

        total += domain_integral(mesh, fv, TORSO)
    if f1 is not None:
        pieces = f1 if isinstance(f1, dict) else {OUTER: f1}
        for tag, d in pieces.items():
            total += boundary_integral(mesh, sb.boundary_data(tag, d), tag)
    return coeffs.prefactor * total


def calibration_residual(mesh: Mesh2D, u_i: ScalarField, u_e: ScalarField, c0: float) -> float:
    return abs(boundary_integral(mesh, u_i + c0 * u_e, INNER))


def calibration_constant(setup: TransmissionSetup, u_b: ScalarField, c0: float) -> float:
    """h0 = -c0 * boundary mean of u_b over the interface."""
    mesh = setup.mesh
    tr = u_b.trace(mesh, INNER)
    return -c0 * boundary_integral(mesh, tr, INNER) / boundary_integral(mesh, 1.0, INNER)


# ---------------------------------------------------------------------------
# reconstruction


def _heart_boundary_array(setup: TransmissionSetup, heart_bvals: np.ndarray) -> np.ndarray:
    out = np.zeros(setup.sys_e.n)
    out[setup.sys_e.sm.boundary_local[INNER]] = heart_bvals
    return out


@dataclass
class UeReconstruction:
    field: ScalarField
    solution: bh.ClampedSolution


def reconstruct_ue(setup: TransmissionSetup, u_b: ScalarField, g, coeffs: TransmissionCoefficients,
                   degree: int = 3, penalty: float = 10.0, f=None, return_solution: bool = False):
    """Clamped fourth-order solve (L_e)^2 u = g with u = u_b and B^(e) u = beta_e B^(b) u_b on the interface."""
    hl, tl = setup.heart_to_torso_inner()
    dir_vals = _heart_boundary_array(setup, u_b.values[tl])
    psi = coeffs.beta_e * torso_conormal(setup, u_b, INNER, f)
    psi_vals = _heart_boundary_array(setup, psi)
    op = setup.c0ip(degree, setup.M_e, penalty)
    gv = 0.0 if g is None else (g.values if isinstance(g, ScalarField) else g)
    sol = bh.solve_clamped(op, gv, dir_vals, psi_vals)
    out = ScalarField(sol.vertex_values.copy(), HEART)
    return UeReconstruction(out, sol) if return_solution else out


def reconstruct_ue_analytic(setup: TransmissionSetup, g_fn, u_fn, grad_fn, degree: int = 3,
                            penalty: float = 10.0) -> bh.ClampedSolution:
    """Clamped solve with analytic data; the conormal uses the polygon edge normals.

    Used for convergence studies: the discrete problem is then posed on the
    polygonal heart with data of the exact solution, so no geometric error enters.
    """
    Mm = setup.M_e.matrix

    def psi(x, y, nx, ny):
        gx, gy = grad_fn(x, y)
        return nx * (Mm[0, 0] * gx + Mm[0, 1] * gy) + ny * (Mm[1, 0] * gx + Mm[1, 1] * gy)

    return bh.solve_clamped(setup.c0ip(degree, setup.M_e, penalty), g_fn, u_fn, psi)


def reconstruct_ui(setup: TransmissionSetup, u_e: ScalarField, u_b: ScalarField, coeffs: TransmissionCoefficients,
                   f=None, return_h0: bool = False):
    """u_i = N_i(-alpha_e/alpha_i L_e u_e, beta_i B^(b) u_b) + h0 with h0 = -c0 mean(u_b).

    The functional of L_e u_e uses the interface condition B^(e) u_e = beta_e B^(b) u_b.
    """
    if coeffs.alpha_i == 0:
        raise AlphaIZero("alpha_i = 0: u_i is not determined by a Neumann problem")
    si, se = setup.sys_i, setup.sys_e
    Bb = torso_conormal(setup, u_b, INNER, f)
    Gamma = se.boundary_mass[INNER]
    bvec = _heart_boundary_array(setup, Bb)
    flux_load = Gamma @ bvec
    ratio = coeffs.alpha_e / coeffs.alpha_i
    load = -ratio * (se.stiffness @ u_e.values - coeffs.beta_e * flux_load) + coeffs.beta_i * flux_load
    scale = float(np.sum(np.abs(ratio * (se.stiffness @ u_e.values))) + np.sum(np.abs(flux_load)) * (
        abs(ratio * coeffs.beta_e) + abs(coeffs.beta_i)))
    w = neumann_from_load(si, load, scale=scale)
    h0 = calibration_constant(setup, u_b, coeffs.c0)
    out = ScalarField(w + h0, HEART)
    return (out, h0) if return_h0 else out


def reconstruct_ui_proportional(setup: TransmissionSetup, u_e: ScalarField, u_b: ScalarField,
                                coeffs: TransmissionCoefficients, f=None) -> ScalarField:
    """Shortcut valid when L_e = gamma L_i:

    u_i = -(alpha_e/alpha_i) gamma u_e + (beta_i + (alpha_e/alpha_i) beta_e) N_i(0, B^(b) u_b) + const,
    where the constant restores the calibration.
    """
    if coeffs.alpha_i == 0:
        raise AlphaIZero("alpha_i = 0")
    if not np.allclose(setup.M_e.matrix, coeffs.gamma * setup.M_i.matrix, rtol=1e-14, atol=0):
        raise ValueError("shortcut needs M_e = gamma M_i")
    si = setup.sys_i
    ratio = coeffs.alpha_e / coeffs.alpha_i
    Bb = torso_conormal(setup, u_b, INNER, f)
    flux_load = si.boundary_mass[INNER] @ _heart_boundary_array(setup, Bb)
    N = neumann_from_load(si, flux_load, scale=float(np.sum(np.abs(flux_load))))
    mesh = setup.mesh
    perim = boundary_integral(mesh, 1.0, INNER)
    mean_ue = boundary_integral(mesh, u_e.trace(mesh, INNER), INNER) / perim
    const = calibration_constant(setup, u_b, coeffs.c0) + ratio * coeffs.gamma * mean_ue
    vals = -ratio * coeffs.gamma * u_e.values + (coeffs.beta_i + ratio * coeffs.beta_e) * N + const
    return ScalarField(vals, HEART)


# ---------------------------------------------------------------------------
# supplemented system


@dataclass
class SupplementResult:
    triple: PotentialTriple
    h0: float
    min_pivot_ratio: float
    condition_estimate: float


def supplemented_block_matrix(setup: TransmissionSetup, coeffs: TransmissionCoefficients, degree: int = 3,
                              penalty: float = 10.0) -> sp.csc_matrix:
    """Block matrix of the clamped solve for u_e and the bordered Neumann solve for u_i.

    Unknowns: free Pk dofs of u_e, then P1 values of u_i, then the normalization multiplier.
    """
    op = setup.c0ip(degree, setup.M_e, penalty)
    space = op.space
    fixed = space.boundary_dofs()
    free = np.setdiff1d(np.arange(space.ndof), fixed)
    Aff = op.matrix[free][:, free]
    si, se = setup.sys_i, setup.sys_e
    n = si.n
    # coupling: alpha_i K_i u_i + alpha_e K_e (vertex values of u_e) on the free vertex dofs
    vert_free = np.flatnonzero(free < n)
    P = sp.csr_matrix((np.ones(len(vert_free)), (free[vert_free], vert_free)), shape=(n, len(free)))
    coupling = coeffs.alpha_e * (se.stiffness @ P)
    w = np.zeros(n)
    w[si.sm.boundary_local[INNER]] = si.boundary_lumped[INNER][si.sm.boundary_local[INNER]]
    C = sp.csr_matrix(w[None, :])
    top = sp.hstack([Aff, sp.csr_matrix((len(free), n + 1))])
    mid = sp.hstack([coupling, coeffs.alpha_i * si.stiffness, C.T])
    bot = sp.hstack([sp.csr_matrix((1, len(free))), C, sp.csr_matrix((1, 1))])
    return sp.vstack([top, mid, bot]).tocsc()


def block_nonsingularity(A: sp.csc_matrix) -> tuple[float, float]:
    """(min/max pivot magnitude of a sparse LU, 1-norm condition estimate)."""
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    d = np.abs(lu.U.diagonal())
    ratio = float(d.min() / d.max())
    inv = spla.LinearOperator(A.shape, matvec=lu.solve, rmatvec=lambda x: lu.solve(x, trans="T"),
                              dtype=float)
    try:
        est = float(spla.onenormest(inv) * spla.norm(A, 1))
    except Exception:  # estimator failures only affect the report
        est = float("nan")
    return ratio, est


def supplement_solve(setup: TransmissionSetup, u_b: ScalarField, g, coeffs: TransmissionCoefficients,
                     degree: int = 3, f=None) -> SupplementResult:
    """Solve the supplemented problem: clamped solve for u_e then calibrated Neumann solve for u_i."""
    ue = reconstruct_ue(setup, u_b, g, coeffs, degree=degree, f=f)
    ui, h0 = reconstruct_ui(setup, ue, u_b, coeffs, f=f, return_h0=True)
    ratio, est = block_nonsingularity(supplemented_block_matrix(setup, coeffs, degree))
    if ratio <= 1e-14:
        raise SingularSystem("supplemented block system is numerically singular")
    return SupplementResult(PotentialTriple(ui, ue, u_b), h0, ratio, est)


# ---------------------------------------------------------------------------
# cardio fourth-order operator


@dataclass(frozen=True)
class CardioConstants:
    sigma_i: float
    sigma_e: float
    chi: float
    C_m: float
    eps_eps0: float
    a1: float = 0.0
    a2: float = 0.0
    a0: float = 0.0

    def __post_init__(self):
        for name in ("sigma_i", "sigma_e", "chi", "C_m", "eps_eps0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise NotPositive(f"{name} must be positive, got {v}")
        for name in ("a1", "a2", "a0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def leading(self) -> float:
        return self.sigma_i * self.sigma_e * self.eps_eps0 / (self.sigma_e + self.sigma_i)


@dataclass
class CardioOperator:
    """Discrete fourth-order cardio operator on the heart with clamped boundary rows."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    leading_coefficient: float
    Q: sp.csr_matrix
    S: sp.csr_matrix
    space: bh.LagrangeSpace

    def solve(self) -> ScalarField:
        n = self.space.ndof
        free = np.setdiff1d(np.arange(n), self.fixed)
        A = self.matrix
        try:
            lu = spla.splu(A[free][:, free].tocsc())
        except RuntimeError as exc:
            raise SingularSystem(str(exc)) from exc
        u = np.zeros(n)
        u[self.fixed] = self.fixed_values
        u[free] = lu.solve(self.rhs[free] - A[free][:, self.fixed] @ self.fixed_values)
        return ScalarField(u[: self.space.sm.n], HEART)


def cardio_fourth_order_operator(setup: TransmissionSetup, consts: CardioConstants, u_b: ScalarField | None = None,
                                 b: np.ndarray | None = None, degree: int = 3, penalty: float = 10.0,
                                 beta_e: float = -1.0) -> CardioOperator:
    """Assemble c4 Lap^2 u + chi C_m sigma_e Lap u + k1 I(u) + chi sigma_e eps Lap I(u) = rhs.

    c4 = sigma_i sigma_e eps / (sigma_e + sigma_i), k1 = chi C_m (sigma_e + sigma_i) / sigma_i,
    I(v) = a . grad v + a0 v + b. The right side is -(sigma_e/sigma_i) chi C_m I(N) with
    N the intracellular Neumann solution for the flux nu_i . M_b grad u_b, plus the terms
    of b moved from the left. Lap is the ordinary Laplacian.
    """
    c = consts
    space = setup.space(degree)
    I2 = SpdTensor2(1.0, 0.0, 1.0)
    op = setup.c0ip(degree, I2, penalty)
    Q = op.matrix
    S = space.stiffness_matrix(I2)
    Mk = space.mass_matrix()
    a = np.array([c.a1, c.a2])
    Cv = space.convection_matrix(a)
    c4 = c.leading
    k1 = c.chi * c.C_m * (c.sigma_e + c.sigma_i) / c.sigma_i
    kL = c.chi * c.sigma_e * c.eps_eps0

    def lin_values(ref_pts, tris):
        phi = space.ref_values(ref_pts)
        G = space.gradients(ref_pts, tris)
        nt = len(space.det) if tris is None else len(tris)
        return np.einsum("tqia,a->tqi", G, a) + c.a0 * np.broadcast_to(phi, (nt,) + phi.shape)

    def id_values(ref_pts, tris):
        phi = space.ref_values(ref_pts)
        nt = len(space.det) if tris is None else len(tris)
        return np.broadcast_to(phi, (nt,) + phi.shape).copy()

    A = c4 * Q - c.chi * c.C_m * c.sigma_e * S
    if c.a1 or c.a2 or c.a0:
        Plin = bh.broken_laplacian_pairing(space, op.edges, lin_values)
        A = A + k1 * (Cv + c.a0 * Mk) + kL * Plin
    A = A.tocsr()

    rhs = np.zeros(space.ndof)
    fixed = space.boundary_dofs()
    fixed_vals = np.zeros(len(fixed))
    if u_b is not None:
        hl, tl = setup.heart_to_torso_inner()
        dir_vals = _heart_boundary_array(setup, u_b.values[tl])
        fixed_vals = space.interpolate_p1(dir_vals)[fixed]
        Bb = torso_conormal(setup, u_b, INNER)
        # nu_i . M_e grad u_e = beta_e B^(b) u_b with M_e = sigma_e I, so d_nu u_e = beta_e B / sigma_e
        rhs += c4 * op.boundary_rhs(_heart_boundary_array(setup, beta_e * Bb / c.sigma_e))
        si = setup.sys_i
        flux = si.boundary_mass[INNER] @ _heart_boundary_array(setup, -Bb)
        N = neumann_from_load(si, flux, scale=float(np.sum(np.abs(flux))) + 1e-300)
        Nk = space.interpolate_p1(N)
        rhs += -(c.sigma_e / c.sigma_i) * c.chi * c.C_m * (Cv @ Nk + c.a0 * (Mk @ Nk))
    if b is not None:
        bk = space.interpolate_p1(np.asarray(b, float))
        Pid = bh.broken_laplacian_pairing(space, op.edges, id_values)
        rhs += -(c.sigma_e / c.sigma_i) * c.chi * c.C_m * (Mk @ bk) - k1 * (Mk @ bk) - kL * (Pid @ bk)
    return CardioOperator(A, rhs, fixed, fixed_vals, c4, Q, S, space)
