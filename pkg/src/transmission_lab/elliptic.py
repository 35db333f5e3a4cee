"""P1 Galerkin assembly and solvers for the second-order operator -div M grad.

Everything is generic in the number of field components so the Lame system can
reuse the Dirichlet/Neumann/mixed machinery. Vector unknowns use block ordering
(all first components, then all second components).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import GuardError, IncompatibleData, SingularSystem, TagEmpty
from .fields import BoundaryField, ScalarField
from .geometry import Boundary, Mesh2D, SpdTensor2, SubMesh, Subdomain

TOL_COMPAT = 1e-8


# ---------------------------------------------------------------------------
# element kernels


def p1_gradients(sm: SubMesh) -> tuple[np.ndarray, np.ndarray]:
    """Per-triangle basis gradients (nt, 3, 2) and areas (nt,)."""
    p = sm.vertices[sm.triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    inv = np.empty((len(p), 2, 2))
    inv[:, 0, 0] = d2[:, 1] / det
    inv[:, 0, 1] = -d2[:, 0] / det
    inv[:, 1, 0] = -d1[:, 1] / det
    inv[:, 1, 1] = d1[:, 0] / det
    ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    grads = np.einsum("ka,tab->tkb", ref, inv)
    return grads, 0.5 * det


def _scatter(sm: SubMesh, local: np.ndarray, n: int) -> sp.csr_matrix:
    t = sm.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))


def stiffness_matrix(sm: SubMesh, M: SpdTensor2) -> sp.csr_matrix:
    g, a = p1_gradients(sm)
    Kloc = np.einsum("tib,bc,tjc->tij", g, M.matrix, g) * a[:, None, None]
    K = _scatter(sm, Kloc, sm.n)
    return ((K + K.T) * 0.5).tocsr()


def mass_matrix(sm: SubMesh) -> sp.csr_matrix:
    _, a = p1_gradients(sm)
    ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    return _scatter(sm, a[:, None, None] * ref[None], sm.n)


def boundary_mass_matrix(sm: SubMesh, tag: Boundary) -> sp.csr_matrix:
    idx = sm.edges_with(tag)
    e = sm.edges[idx]
    L = sm.edge_lengths[idx]
    ref = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    loc = L[:, None, None] * ref[None]
    rows = np.repeat(e, 2, axis=1).ravel()
    cols = np.tile(e, (1, 2)).ravel()
    return sp.csr_matrix((loc.ravel(), (rows, cols)), shape=(sm.n, sm.n))


def _block(A: sp.spmatrix, ncomp: int) -> sp.csr_matrix:
    return sp.block_diag([A] * ncomp, format="csr") if ncomp > 1 else A.tocsr()


# ---------------------------------------------------------------------------
# the system


@dataclass
class EllipticSystem:
    """Galerkin matrices on one subdomain plus cached factorizations.

    ``stiffness`` discretizes the energy form, ``mass`` the L2 pairing and
    ``boundary_mass[tag]`` the boundary L2 pairing; ``lumped`` and
    ``boundary_lumped`` are their row-sum diagonals used by the conormal trace.
    """

    mesh: Mesh2D
    sm: SubMesh
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    boundary_mass: dict
    ncomp: int = 1
    M: SpdTensor2 | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.lumped = np.asarray(self.mass.sum(axis=1)).ravel()
        self.boundary_lumped = {t: np.asarray(B.sum(axis=1)).ravel() for t, B in self.boundary_mass.items()}

    @property
    def subdomain(self) -> Subdomain:
        return self.sm.subdomain

    @property
    def n(self) -> int:
        return self.sm.n

    @property
    def ndof(self) -> int:
        return self.ncomp * self.sm.n

    @property
    def tags(self) -> list:
        return sorted(self.boundary_mass)

    def bdofs(self, tag: Boundary) -> np.ndarray:
        tag = Boundary(tag)
        if tag not in self.boundary_mass:
            raise TagEmpty(f"tag {tag.name} does not bound this subdomain")
        bl = self.sm.boundary_local[tag]
        return np.concatenate([c * self.n + bl for c in range(self.ncomp)])

    def all_bdofs(self) -> np.ndarray:
        return np.unique(np.concatenate([self.bdofs(t) for t in self.tags]))

    def boundary_data(self, tag: Boundary, data) -> np.ndarray:
        """Flatten boundary data (BoundaryField, array, scalar) to the dof order of bdofs(tag)."""
        nb = len(self.sm.boundary_local[Boundary(tag)])
        if data is None:
            return np.zeros(nb * self.ncomp)
        if isinstance(data, BoundaryField):
            data = data.values
        a = np.asarray(data, dtype=float)
        if a.ndim == 0:
            return np.full(nb * self.ncomp, float(a))
        if self.ncomp > 1 and a.ndim == 2:
            a = a.T.ravel()
        if a.size != nb * self.ncomp:
            raise ValueError(f"boundary data has {a.size} entries, expected {nb * self.ncomp}")
        return a.ravel()

    def volume_data(self, g) -> np.ndarray:
        if g is None:
            return np.zeros(self.ndof)
        if isinstance(g, ScalarField):
            if g.subdomain != self.subdomain:
                raise ValueError("source lives on a different subdomain")
            g = g.values
        if hasattr(g, "flat") and hasattr(g, "subdomain"):
            g = g.flat
        a = np.asarray(g, dtype=float)
        if a.ndim == 0:
            return np.full(self.ndof, float(a))
        if self.ncomp > 1 and a.ndim == 2:
            a = a.T.ravel()
        return a.ravel()

    def boundary_load(self, tag: Boundary, data) -> np.ndarray:
        """Functional v -> int_tag v . data, as a full dof vector."""
        out = np.zeros(self.ndof)
        d = np.zeros(self.ndof)
        d[self.bdofs(tag)] = self.boundary_data(tag, data)
        out += _block(self.boundary_mass[Boundary(tag)], self.ncomp) @ d
        return out

    # norms -----------------------------------------------------------
    def l2(self, values) -> float:
        v = self.volume_data(values)
        return float(np.sqrt(max(v @ (self.Mass @ v), 0.0)))

    def boundary_l2(self, tag: Boundary, data) -> float:
        d = np.zeros(self.ndof)
        d[self.bdofs(tag)] = self.boundary_data(tag, data)
        return float(np.sqrt(max(d @ (_block(self.boundary_mass[Boundary(tag)], self.ncomp) @ d), 0.0)))

    def boundary_measure(self, tag: Boundary) -> float:
        return float(self.boundary_lumped[Boundary(tag)].sum())

    @property
    def Mass(self) -> sp.csr_matrix:
        if "Mass" not in self._cache:
            self._cache["Mass"] = _block(self.mass, self.ncomp)
        return self._cache["Mass"]

    @property
    def Lumped(self) -> np.ndarray:
        return np.tile(self.lumped, self.ncomp)

    def kernel_basis(self) -> np.ndarray:
        """Columns spanning the constants (one per component)."""
        Z = np.zeros((self.ndof, self.ncomp))
        for c in range(self.ncomp):
            Z[c * self.n:(c + 1) * self.n, c] = 1.0
        return Z


def assemble(mesh: Mesh2D, M: SpdTensor2, subdomain: Subdomain) -> EllipticSystem:
    """Stiffness for (grad v) . M grad u, consistent mass and boundary masses."""
    if not isinstance(M, SpdTensor2):
        M = SpdTensor2(*M)
    sm = mesh.sub(subdomain)
    K = stiffness_matrix(sm, M)
    bm = {t: boundary_mass_matrix(sm, t) for t in sm.tags}
    return EllipticSystem(mesh, sm, K, mass_matrix(sm), bm, 1, M)


# ---------------------------------------------------------------------------
# conormal trace and Green identity


def _neighbours(sys: EllipticSystem) -> sp.csr_matrix:
    if "adj" not in sys._cache:
        A = sys.stiffness if sys.ncomp == 1 else sys.stiffness[: sys.n, : sys.n]
        A = (abs(A) > 0).astype(float).tocsr()
        A.setdiag(0.0)
        A.eliminate_zeros()
        sys._cache["adj"] = A
    return sys._cache["adj"]


def discrete_operator(sys: EllipticSystem, u) -> np.ndarray:
    """Nodal representative of the strong operator applied to u.

    Interior nodes take the lumped-mass residual; boundary nodes the average of
    their interior neighbours (all neighbours if none is interior).
    """
    u = sys.volume_data(u)
    Ku = sys.stiffness @ u
    g = Ku / sys.Lumped
    n = sys.n
    bnodes = np.unique(np.concatenate([sys.sm.boundary_local[t] for t in sys.tags]))
    interior = np.ones(n, dtype=bool)
    interior[bnodes] = False
    A = _neighbours(sys)
    Ai = A[bnodes][:, interior]
    cnt_i = np.asarray(Ai.sum(axis=1)).ravel()
    Ab = A[bnodes]
    cnt_all = np.asarray(Ab.sum(axis=1)).ravel()
    for c in range(sys.ncomp):
        gc = g[c * n:(c + 1) * n]
        avg_i = (Ai @ gc[interior]) / np.maximum(cnt_i, 1)
        tmp = gc.copy()
        tmp[bnodes] = 0.0
        avg_all = (Ab @ gc) / np.maximum(cnt_all, 1)
        gc_new = gc.copy()
        gc_new[bnodes] = np.where(cnt_i > 0, avg_i, avg_all)
        g[c * n:(c + 1) * n] = gc_new
    return g


def conormal_vector(sys: EllipticSystem, u, tag: Boundary, g=None) -> np.ndarray:
    """Variational conormal trace on tag in bdofs order.

    b solves W b = (K u - L g) restricted to boundary dofs, with W and L the
    lumped boundary and volume masses, so the discrete Green identity is exact.
    """
    u = sys.volume_data(u)
    gv = discrete_operator(sys, u) if g is None else sys.volume_data(g)
    r = sys.stiffness @ u - sys.Lumped * gv
    tag = Boundary(tag)
    W = np.zeros(sys.ndof)
    for t in sys.tags:
        W[sys.bdofs(t)] += np.tile(sys.boundary_lumped[t][sys.sm.boundary_local[t]], sys.ncomp)
    d = sys.bdofs(tag)
    # nodes shared by two tags (none on the disk geometry) split by weight
    share = np.tile(sys.boundary_lumped[tag][sys.sm.boundary_local[tag]], sys.ncomp) / W[d]
    return r[d] * share / np.tile(sys.boundary_lumped[tag][sys.sm.boundary_local[tag]], sys.ncomp)


def conormal_derivative(sys: EllipticSystem, u, tag: Boundary, g=None) -> BoundaryField:
    """Boundary field approximating nu . M grad u on tag (outward for sys.subdomain)."""
    return BoundaryField(conormal_vector(sys, u, tag, g), tag)


def green_identity_residual(sys: EllipticSystem, u, v, g=None) -> float:
    """|int_bdry v b - int grad v . M grad u + int v Lu| with the lumped pairings."""
    u = sys.volume_data(u)
    v = sys.volume_data(v)
    gv = discrete_operator(sys, u) if g is None else sys.volume_data(g)
    bterm = 0.0
    for t in sys.tags:
        b = conormal_vector(sys, u, t, gv)
        w = np.tile(sys.boundary_lumped[t][sys.sm.boundary_local[t]], sys.ncomp)
        bterm += float(np.sum(v[sys.bdofs(t)] * w * b))
    return abs(bterm - float(v @ (sys.stiffness @ u)) + float(np.sum(v * sys.Lumped * gv)))


def green_scale(sys: EllipticSystem, u, v) -> float:
    """Natural magnitude of the three terms in the Green identity."""
    u = sys.volume_data(u)
    v = sys.volume_data(v)
    Ku = sys.stiffness @ u
    return float(np.sum(np.abs(v) * np.abs(Ku))) + 1e-300


# ---------------------------------------------------------------------------
# solvers


def _factor(A: sp.spmatrix):
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    d = lu.U.diagonal()
    if not np.all(np.isfinite(d)) or np.min(np.abs(d)) <= 1e-14 * np.max(np.abs(d)):
        raise SingularSystem("factorization produced a (near) zero pivot")
    return lu


def _cached_factor(sys: EllipticSystem, key, builder):
    if key not in sys._cache:
        sys._cache[key] = _factor(builder())
    return sys._cache[key]


def solve_with_dirichlet(sys: EllipticSystem, load: np.ndarray, fixed: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Solve K u = load on free dofs with u[fixed] = values."""
    fixed = np.asarray(fixed)
    free = np.setdiff1d(np.arange(sys.ndof), fixed)
    key = ("dir", fixed.tobytes())
    K = sys.stiffness
    lu = _cached_factor(sys, key, lambda: K[free][:, free])
    u = np.zeros(sys.ndof)
    u[fixed] = values
    rhs = load[free] - K[free][:, fixed] @ values if fixed.size else load[free]
    u[free] = lu.solve(rhs)
    return u


def _wrap(sys: EllipticSystem, vals: np.ndarray):
    if sys.ncomp == 1:
        return ScalarField(vals, sys.subdomain)
    from .fields import VectorField2

    return VectorField2.from_flat(vals, sys.subdomain)


def solve_dirichlet(sys: EllipticSystem, g, bc: dict):
    """Discrete L u = g with u = bc[tag] on every boundary tag of the subdomain."""
    missing = [t for t in sys.tags if t not in bc]
    if missing:
        raise ValueError(f"Dirichlet data missing on {[t.name for t in missing]}")
    load = sys.Mass @ sys.volume_data(g)
    fixed = np.concatenate([sys.bdofs(t) for t in sys.tags])
    vals = np.concatenate([sys.boundary_data(t, bc[t]) for t in sys.tags])
    return _wrap(sys, solve_with_dirichlet(sys, load, fixed, vals))


def solve_mixed(sys: EllipticSystem, g, dirichlet: tuple, neumann: tuple):
    """Dirichlet data on one tag, conormal data on the other; both given as (tag, data)."""
    (tD, dD), (tN, dN) = dirichlet, neumann
    tD, tN = Boundary(tD), Boundary(tN)
    if tD == tN or set(sys.tags) != {tD, tN}:
        raise TagEmpty("Dirichlet and Neumann tags must partition the boundary")
    load = sys.Mass @ sys.volume_data(g) + sys.boundary_load(tN, dN)
    return _wrap(sys, solve_with_dirichlet(sys, load, sys.bdofs(tD), sys.boundary_data(tD, dD)))


def _normalization_rows(sys: EllipticSystem) -> np.ndarray:
    """Rows c_k with c_k . u = int_bdry u_k (one per component)."""
    w = np.zeros(sys.n)
    for t in sys.tags:
        w += sys.boundary_lumped[t]
    C = np.zeros((sys.ncomp, sys.ndof))
    for c in range(sys.ncomp):
        C[c, c * sys.n:(c + 1) * sys.n] = w
    return C


def _neumann_factor(sys: EllipticSystem):
    def build():
        C = sp.csr_matrix(_normalization_rows(sys))
        return sp.bmat([[sys.stiffness, C.T], [C, None]], format="csc")

    return _cached_factor(sys, "neumann", build)


def neumann_from_load(sys: EllipticSystem, load: np.ndarray, scale: float | None = None,
                      tol: float = TOL_COMPAT) -> np.ndarray:
    """Solve K u = load with zero boundary mean, after the compatibility gate.

    The defect 1.load (per component) must be within tol * scale; it is then
    removed by a constant volume source before the solve.
    """
    load = np.asarray(load, dtype=float).copy()
    Z = sys.kernel_basis()
    defect = Z.T @ load
    if scale is None:
        scale = float(np.sum(np.abs(load)))
    if np.any(np.abs(defect) > tol * scale) or not np.all(np.isfinite(defect)):
        raise IncompatibleData(
            f"compatibility defect {np.max(np.abs(defect)):.3e} exceeds {tol:.0e} x scale {scale:.3e}")
    area = sys.lumped.sum()
    for c in range(sys.ncomp):
        load[c * sys.n:(c + 1) * sys.n] -= defect[c] * sys.lumped / area
    lu = _neumann_factor(sys)
    sol = lu.solve(np.concatenate([load, np.zeros(sys.ncomp)]))
    return sol[: sys.ndof]


def solve_neumann(sys: EllipticSystem, g, u1):
    """Normalized solution of L u = g with conormal data u1.

    u1 is either boundary data for the single boundary tag, or a dict tag -> data
    (missing tags mean zero flux). Raises IncompatibleData when the integral of g
    plus the flux of u1 is not zero within the relative tolerance.
    """
    if not isinstance(u1, dict):
        tag = u1.tag if isinstance(u1, BoundaryField) else sys.tags[0]
        if len(sys.tags) > 1 and not isinstance(u1, BoundaryField):
            raise ValueError("give Neumann data as a dict on multi-tag boundaries")
        u1 = {tag: u1}
    gv = sys.volume_data(g)
    load = sys.Mass @ gv
    scale = sys.l2(gv) * np.sqrt(sys.lumped.sum())
    for t, d in u1.items():
        load += sys.boundary_load(t, d)
        scale += sys.boundary_l2(t, d) * np.sqrt(sys.boundary_measure(t))
    return _wrap(sys, neumann_from_load(sys, load, scale))


def compatibility_defect(sys: EllipticSystem, g, u1: dict) -> np.ndarray:
    """int g + sum over tags of int u1 (per component)."""
    load = sys.Mass @ sys.volume_data(g)
    for t, d in u1.items():
        load += sys.boundary_load(t, d)
    return sys.kernel_basis().T @ load


# ---------------------------------------------------------------------------
# coercivity probe


def poincare_constant_probe(sys: EllipticSystem, field=None) -> float:
    """Best constant c in ||u||_H1 <= c ||M^(1/2) grad u|| off the constants.

    Without ``field`` returns 1/sqrt(lambda_2) for K_M x = lambda (K_I + mass) x;
    with ``field`` returns the ratio for that field after removing its mean.
    """
    if sys.ncomp != 1:
        raise ValueError("probe is defined for scalar systems")
    KI = stiffness_matrix(sys.sm, SpdTensor2.isotropic(1.0))
    B = (KI + sys.mass).tocsc()
    if field is not None:
        u = sys.volume_data(field)
        u = u - (sys.mass @ u).sum() / sys.lumped.sum()
        num = float(u @ (B @ u))
        den = float(u @ (sys.stiffness @ u))
        if den <= 1e-12 * max(num, 1e-300) or num <= 0:
            raise GuardError("probe field lies in the constants")
        return float(np.sqrt(num / den))
    try:
        vals = spla.eigsh(sys.stiffness.tocsc(), k=2, M=B, sigma=-1e-3, which="LM",
                          return_eigenvectors=False)
    except Exception as exc:  # ARPACK failures
        raise SingularSystem(f"eigenvalue probe failed: {exc}") from exc
    vals = np.sort(vals)
    lam2 = vals[1]
    if not lam2 > 1e-12:
        raise SingularSystem("no positive eigenvalue beyond the constants")
    return float(1.0 / np.sqrt(lam2))
