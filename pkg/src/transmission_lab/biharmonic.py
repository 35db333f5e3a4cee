"""Continuous Lagrange spaces of arbitrary degree and a C0 interior-penalty
discretization of the clamped problem (-div M grad)^2 u = g.

Both clamped conditions are imposed: the value strongly at the boundary nodes,
the conormal derivative weakly through the symmetric consistency and penalty
edge terms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularSystem
from .geometry import SpdTensor2, SubMesh

_REF = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def gauss_segment(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def triangle_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss rule on the reference triangle; exact to degree 2n - 2."""
    a, wa = np.polynomial.legendre.leggauss(n)
    a = 0.5 * (a + 1.0)
    wa = 0.5 * wa
    X, Y = np.meshgrid(a, a, indexing="ij")
    WX, WY = np.meshgrid(wa, wa, indexing="ij")
    pts = np.column_stack([X.ravel() * (1.0 - Y.ravel()), Y.ravel()])
    return pts, (WX * WY * (1.0 - Y)).ravel()


class LagrangeSpace:
    """Degree-k continuous Lagrange space on a submesh.

    Dofs 0..n_vertices-1 coincide with the submesh vertex numbering, so vertex
    values of a solution are ``coeffs[:sm.n]``.
    """

    def __init__(self, sm: SubMesh, degree: int = 3):
        if degree < 1:
            raise ValueError("degree must be >= 1")
        self.sm = sm
        self.k = k = degree
        self.lattice = [(i, j) for j in range(k + 1) for i in range(k + 1 - j)]
        self.exps = [(a, b) for a in range(k + 1) for b in range(k + 1 - a)]
        ref_nodes = np.array(self.lattice, dtype=float) / k
        V = self._monomials(ref_nodes)
        self.coef = np.linalg.inv(V)
        self.nloc = len(self.lattice)
        self._number_dofs()
        self._geometry()

    # reference basis ------------------------------------------------
    def _monomials(self, p: np.ndarray) -> np.ndarray:
        return np.column_stack([p[:, 0] ** a * p[:, 1] ** b for a, b in self.exps])

    def _dmon(self, p, dx: int, dy: int) -> np.ndarray:
        cols = []
        for a, b in self.exps:
            if a < dx or b < dy:
                cols.append(np.zeros(len(p)))
                continue
            ca = np.prod(np.arange(a - dx + 1, a + 1)) if dx else 1.0
            cb = np.prod(np.arange(b - dy + 1, b + 1)) if dy else 1.0
            cols.append(ca * cb * p[:, 0] ** (a - dx) * p[:, 1] ** (b - dy))
        return np.column_stack(cols)

    def ref_values(self, p) -> np.ndarray:
        return self._monomials(np.atleast_2d(p)) @ self.coef

    def ref_grads(self, p) -> np.ndarray:
        p = np.atleast_2d(p)
        return np.stack([self._dmon(p, 1, 0) @ self.coef, self._dmon(p, 0, 1) @ self.coef], axis=-1)

    def ref_hessians(self, p) -> np.ndarray:
        p = np.atleast_2d(p)
        hxx = self._dmon(p, 2, 0) @ self.coef
        hxy = self._dmon(p, 1, 1) @ self.coef
        hyy = self._dmon(p, 0, 2) @ self.coef
        return np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hyy], -1)], -2)

    # numbering ------------------------------------------------------
    def _number_dofs(self):
        sm, k = self.sm, self.k
        keys: dict = {}
        nxt = sm.n
        cell = np.empty((len(sm.triangles), self.nloc), dtype=np.int64)
        coords = [None] * 0
        extra = []
        for t, tri in enumerate(sm.triangles):
            for li, (i, j) in enumerate(self.lattice):
                bary = (k - i - j, i, j)
                nz = [(int(tri[q]), bary[q]) for q in range(3) if bary[q] > 0]
                if len(nz) == 1:
                    cell[t, li] = nz[0][0]
                    continue
                key = tuple(sorted(nz))
                d = keys.get(key)
                if d is None:
                    d = nxt
                    keys[key] = d
                    nxt += 1
                    extra.append(sum(w * sm.vertices[g] for g, w in key) / k)
                cell[t, li] = d
        del coords
        self.cell_dofs = cell
        self.ndof = nxt
        self.nodes = np.vstack([sm.vertices] + ([np.array(extra)] if extra else []))
        self._keys = keys

    def boundary_dofs(self, tag=None) -> np.ndarray:
        """Dofs on boundary edges (optionally of one tag)."""
        sel = np.ones(len(self.sm.edges), dtype=bool) if tag is None else (self.sm.edge_tags == tag)
        out = [self.sm.edges[sel].ravel()]
        k = self.k
        for a, b in self.sm.edges[sel]:
            for s in range(1, k):
                key = tuple(sorted([(int(a), k - s), (int(b), s)]))
                out.append(np.array([self._keys[key]]))
        return np.unique(np.concatenate(out))

    def _geometry(self):
        p = self.sm.vertices[self.sm.triangles]
        J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)  # columns
        self.J = J
        self.det = np.linalg.det(J)
        self.Jinv = np.linalg.inv(J)
        self.origin = p[:, 0]

    # interpolation ---------------------------------------------------
    def interpolate(self, fn) -> np.ndarray:
        return np.asarray(fn(self.nodes[:, 0], self.nodes[:, 1]), dtype=float) * np.ones(self.ndof)

    def interpolate_p1(self, vertex_values: np.ndarray) -> np.ndarray:
        """Pk coefficients of a P1 field (exact: P1 is contained in Pk)."""
        out = np.empty(self.ndof)
        out[: self.sm.n] = vertex_values
        for key, d in self._keys.items():
            out[d] = sum(w * vertex_values[g] for g, w in key) / self.k
        return out

    # element quadrature helpers ---------------------------------------
    def physical_points(self, ref_pts: np.ndarray) -> np.ndarray:
        """(nt, nq, 2) physical coordinates of reference points in every triangle."""
        return self.origin[:, None, :] + np.einsum("tab,qb->tqa", self.J, ref_pts)

    def operator_values(self, M: SpdTensor2, ref_pts: np.ndarray, tris=None) -> np.ndarray:
        """-tr(M Hess phi) at reference points: (nt, nq, nloc)."""
        Ji = self.Jinv if tris is None else self.Jinv[tris]
        A = np.einsum("tab,bc,tdc->tad", Ji, M.matrix, Ji)
        H = self.ref_hessians(ref_pts)
        return -np.einsum("tab,qiab->tqi", A, H)

    def gradients(self, ref_pts: np.ndarray, tris=None) -> np.ndarray:
        Ji = self.Jinv if tris is None else self.Jinv[tris]
        G = self.ref_grads(ref_pts)
        return np.einsum("tba,qib->tqia", Ji, G)

    def evaluate(self, coeffs: np.ndarray, ref_pts: np.ndarray) -> np.ndarray:
        return np.einsum("qi,ti->tq", self.ref_values(ref_pts), coeffs[self.cell_dofs])

    def mass_matrix(self) -> sp.csr_matrix:
        pts, w = triangle_rule(self.k + 1)
        phi = self.ref_values(pts)
        loc = np.einsum("q,qi,qj->ij", w, phi, phi)
        return self._scatter(self.det[:, None, None] * loc[None])

    def stiffness_matrix(self, M: SpdTensor2) -> sp.csr_matrix:
        pts, w = triangle_rule(max(self.k, 1))
        G = self.gradients(pts)
        loc = np.einsum("q,tqia,ab,tqjb->tij", w, G, M.matrix, G) * self.det[:, None, None]
        return self._scatter(loc)

    def convection_matrix(self, a: np.ndarray) -> sp.csr_matrix:
        """Rows v, columns u: int (a . grad u) v."""
        pts, w = triangle_rule(self.k + 1)
        G = self.gradients(pts)
        phi = self.ref_values(pts)
        loc = np.einsum("q,qi,tqja,a->tij", w, phi, G, np.asarray(a, float)) * self.det[:, None, None]
        return self._scatter(loc)

    def _scatter(self, loc: np.ndarray) -> sp.csr_matrix:
        c = self.cell_dofs
        n = self.nloc
        rows = np.repeat(c, n, axis=1).ravel()
        cols = np.tile(c, (1, n)).ravel()
        return sp.csr_matrix((loc.ravel(), (rows, cols)), shape=(self.ndof, self.ndof))

    def load_vector(self, g, qdeg: int | None = None) -> np.ndarray:
        """int g v for a callable g or P1 vertex values of g."""
        n = qdeg or (self.k + 4)
        pts, w = triangle_rule(n)
        phi = self.ref_values(pts)
        if callable(g):
            X = self.physical_points(pts)
            gq = np.asarray(g(X[..., 0], X[..., 1]), dtype=float) * np.ones(X.shape[:2])
        else:
            gv = np.asarray(g, dtype=float)
            if gv.ndim == 0:
                gq = np.full((len(self.det), len(w)), float(gv))
            else:
                lam = np.column_stack([1 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]])
                gq = gv[self.sm.triangles] @ lam.T
        loc = np.einsum("q,tq,qi->ti", w, gq, phi) * self.det[:, None]
        out = np.zeros(self.ndof)
        np.add.at(out, self.cell_dofs, loc)
        return out

    def errors(self, coeffs: np.ndarray, fn, grad_fn) -> tuple[float, float]:
        """(L2 error, H1 seminorm error) against an analytic function and gradient."""
        pts, w = triangle_rule(self.k + 3)
        X = self.physical_points(pts)
        uh = self.evaluate(coeffs, pts)
        G = self.gradients(pts)
        guh = np.einsum("tqia,ti->tqa", G, coeffs[self.cell_dofs])
        ue = fn(X[..., 0], X[..., 1])
        gx, gy = grad_fn(X[..., 0], X[..., 1])
        e0 = np.einsum("q,tq->t", w, (uh - ue) ** 2) @ self.det
        e1 = np.einsum("q,tq->t", w, (guh[..., 0] - gx) ** 2 + (guh[..., 1] - gy) ** 2) @ self.det
        return float(np.sqrt(e0)), float(np.sqrt(e1))


# ---------------------------------------------------------------------------
# edge structures


@dataclass
class EdgeSides:
    """Every triangle side that is a mesh edge, grouped into interior pairs and boundary singles."""

    tri: np.ndarray  # (ns,) triangle of each side
    pa: np.ndarray  # local vertex index at the low-global-id end
    pb: np.ndarray
    normal: np.ndarray  # (ns, 2) outward for that triangle
    length: np.ndarray
    pairs: np.ndarray  # (ni, 2) side indices of interior edges
    singles: np.ndarray  # (nb,) side indices of boundary edges
    single_tags: np.ndarray
    endpoints: np.ndarray  # (ns, 2) physical endpoints in the low -> high order


def edge_sides(sm: SubMesh) -> EdgeSides:
    tris = sm.triangles
    sides = {}
    tri_l, pa_l, pb_l = [], [], []
    for t, tri in enumerate(tris):
        for q in range(3):
            a, b = q, (q + 1) % 3
            ga, gb = tri[a], tri[b]
            if ga > gb:
                a, b = b, a
                ga, gb = gb, ga
            sides.setdefault((int(ga), int(gb)), []).append(len(tri_l))
            tri_l.append(t)
            pa_l.append(a)
            pb_l.append(b)
    tri_a = np.array(tri_l)
    pa = np.array(pa_l)
    pb = np.array(pb_l)
    P = sm.vertices[tris]
    A = P[tri_a, pa]
    B = P[tri_a, pb]
    C = P[tri_a, 3 - pa - pb]
    t = B - A
    L = np.hypot(t[:, 0], t[:, 1])
    nrm = np.column_stack([t[:, 1], -t[:, 0]]) / L[:, None]
    flip = np.einsum("ij,ij->i", nrm, 0.5 * (A + B) - C) < 0
    nrm[flip] *= -1
    pairs, singles = [], []
    for key, lst in sides.items():
        if len(lst) == 2:
            pairs.append(lst)
        else:
            singles.append(lst[0])
    singles = np.array(singles, dtype=np.int64)
    etag = {}
    for (a, b), tg in zip(sm.edges, sm.edge_tags):
        etag[(min(a, b), max(a, b))] = tg
    stags = np.array([etag[(int(tris[tri_a[s], pa[s]]), int(tris[tri_a[s], pb[s]]))] for s in singles], dtype=np.int64)
    return EdgeSides(tri_a, pa, pb, nrm, L, np.array(pairs, dtype=np.int64).reshape(-1, 2), singles, stags,
                     np.stack([A, B], axis=1))


def _side_ref_points(es: EdgeSides, tq: np.ndarray) -> np.ndarray:
    """(ns, nq, 2) reference coordinates of the edge Gauss points on each side."""
    Pa = _REF[es.pa]
    Pb = _REF[es.pb]
    return Pa[:, None, :] + tq[None, :, None] * (Pb - Pa)[:, None, :]


def side_traces(space: LagrangeSpace, es: EdgeSides, M: SpdTensor2, tq: np.ndarray):
    """Conormal derivative (nu . M grad phi) and operator value (-tr M Hess phi)
    of every local basis function at the Gauss points of every side."""
    rp = _side_ref_points(es, tq)
    ns, nq = rp.shape[:2]
    flat = rp.reshape(-1, 2)
    # only six distinct point sets exist; evaluating per side keeps the code simple
    combo = es.pa * 3 + es.pb
    G = np.empty((ns, nq, space.nloc, 2))
    H = np.empty((ns, nq, space.nloc, 2, 2))
    for c in np.unique(combo):
        idx = np.flatnonzero(combo == c)
        pts = rp[idx[0]]
        G[idx] = space.ref_grads(pts)[None]
        H[idx] = space.ref_hessians(pts)[None]
    del flat
    Ji = space.Jinv[es.tri]
    Mm = M.matrix
    grad = np.einsum("sba,sqib->sqia", Ji, G)
    D = np.einsum("sa,ab,sqib->sqi", es.normal, Mm, grad)
    A = np.einsum("sab,bc,sdc->sad", Ji, Mm, Ji)
    Lv = -np.einsum("sab,sqiab->sqi", A, H)
    return D, Lv


def penalty_parameter(degree: int, factor: float = 10.0) -> float:
    return factor * degree * (degree - 1) / 2.0 if degree > 1 else factor


@dataclass
class C0IPOperator:
    space: LagrangeSpace
    M: SpdTensor2
    sigma: float
    matrix: sp.csr_matrix
    edges: EdgeSides
    nq: int

    def boundary_rhs(self, psi) -> np.ndarray:
        """Weak conormal data: int psi (L v + sigma/h nu.M grad v) over boundary edges.

        psi is a callable psi(x, y, nx, ny) or P1 vertex values on the submesh.
        """
        es = self.edges
        tq, wq = gauss_segment(self.nq + 2)
        D, Lv = side_traces(self.space, _subset(es, es.singles), self.M, tq)
        s = es.singles
        A, B = es.endpoints[s, 0], es.endpoints[s, 1]
        X = A[:, None, :] + tq[None, :, None] * (B - A)[:, None, :]
        if callable(psi):
            nrm = es.normal[s]
            pq = psi(X[..., 0], X[..., 1], nrm[:, None, 0] * np.ones_like(X[..., 0]), nrm[:, None, 1] * np.ones_like(X[..., 0]))
        else:
            pv = np.asarray(psi, float)
            tri = self.space.sm.triangles[es.tri[s]]
            ga = tri[np.arange(len(s)), es.pa[s]]
            gb = tri[np.arange(len(s)), es.pb[s]]
            pq = pv[ga][:, None] * (1 - tq)[None] + pv[gb][:, None] * tq[None]
        h = es.length[s]
        loc = np.einsum("q,sq,sqi->si", wq, pq, Lv + (self.sigma / h)[:, None, None] * D) * h[:, None]
        out = np.zeros(self.space.ndof)
        np.add.at(out, self.space.cell_dofs[es.tri[s]], loc)
        return out


def _subset(es: EdgeSides, idx: np.ndarray) -> EdgeSides:
    return EdgeSides(es.tri[idx], es.pa[idx], es.pb[idx], es.normal[idx], es.length[idx],
                     np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64),
                     np.zeros(0, dtype=np.int64), es.endpoints[idx])


def assemble_c0ip(space: LagrangeSpace, M: SpdTensor2, penalty: float = 10.0) -> C0IPOperator:
    """Symmetric C0 interior-penalty matrix for the clamped fourth-order problem."""
    k = space.k
    if k < 2:
        raise ValueError("C0IP needs degree >= 2")
    sigma = penalty_parameter(k, penalty)
    pts, w = triangle_rule(k)
    Lq = space.operator_values(M, pts)
    vol = np.einsum("q,tqi,tqj->tij", w, Lq, Lq) * space.det[:, None, None]
    mats = [space._scatter(vol)]

    es = edge_sides(space.sm)
    nq = k + 1
    tq, wq = gauss_segment(nq)
    D, Lv = side_traces(space, es, M, tq)
    cd = space.cell_dofs
    n = space.nloc

    def add(Jm, Am, dofs, h):
        loc = (np.einsum("q,sqi,sqj->sij", wq, Am, Jm) + np.einsum("q,sqi,sqj->sij", wq, Jm, Am)
               + (sigma / h)[:, None, None] * np.einsum("q,sqi,sqj->sij", wq, Jm, Jm)) * h[:, None, None]
        m = dofs.shape[1]
        rows = np.repeat(dofs, m, axis=1).ravel()
        cols = np.tile(dofs, (1, m)).ravel()
        mats.append(sp.csr_matrix((loc.ravel(), (rows, cols)), shape=(space.ndof, space.ndof)))

    p, q = es.pairs[:, 0], es.pairs[:, 1]
    if len(p):
        Jm = np.concatenate([D[p], D[q]], axis=2)
        Am = 0.5 * np.concatenate([Lv[p], Lv[q]], axis=2)
        dofs = np.concatenate([cd[es.tri[p]], cd[es.tri[q]]], axis=1)
        add(Jm, Am, dofs, es.length[p])
    s = es.singles
    add(D[s], Lv[s], cd[es.tri[s]], es.length[s])
    A = sum(mats[1:], mats[0])
    A = ((A + A.T) * 0.5).tocsr()
    del n
    return C0IPOperator(space, M, sigma, A, es, nq)


def broken_laplacian_pairing(space: LagrangeSpace, es: EdgeSides, W: np.ndarray, tq_n: int | None = None) -> sp.csr_matrix:
    """Matrix P with v . P c = sum_T int (w_c) Lap v - sum_e int {w_c} [[d_nu v]].

    W maps a coefficient vector c to the Pk coefficients of a field w_c through
    the local action: W is a callable (space, ref_pts, tris) -> (nt, nq, nloc)
    giving the values of w for each local basis function at reference points.
    This is the consistent weak form of int (Lap w) v for v vanishing on the
    boundary.
    """
    k = space.k
    pts, w = triangle_rule(k + 1)
    wq_vol = W(pts, None)  # (nt, nq, nloc) values of w(phi_j)
    I2 = SpdTensor2(1.0, 0.0, 1.0)
    lap_v = -space.operator_values(I2, pts)  # Lap phi_i
    vol = np.einsum("q,tqi,tqj->tij", w, lap_v, wq_vol) * space.det[:, None, None]
    mats = [space._scatter(vol)]
    n_e = tq_n or (k + 1)
    tq, wq = gauss_segment(n_e)
    D, _ = side_traces(space, es, I2, tq)  # d_nu phi (outward)
    rp = _side_ref_points(es, tq)
    Wside = np.empty((len(es.tri), len(tq), space.nloc))
    for c in np.unique(es.pa * 3 + es.pb):
        idx = np.flatnonzero(es.pa * 3 + es.pb == c)
        Wside[idx] = W(rp[idx[0]], es.tri[idx])
    cd = space.cell_dofs

    def add(Jm, Am, rows_d, cols_d, h):
        loc = -np.einsum("q,sqi,sqj->sij", wq, Jm, Am) * h[:, None, None]
        m1, m2 = rows_d.shape[1], cols_d.shape[1]
        rows = np.repeat(rows_d, m2, axis=1).ravel()
        cols = np.tile(cols_d, (1, m1)).ravel()
        mats.append(sp.csr_matrix((loc.ravel(), (rows, cols)), shape=(space.ndof, space.ndof)))

    p, q = es.pairs[:, 0], es.pairs[:, 1]
    if len(p):
        dofs = np.concatenate([cd[es.tri[p]], cd[es.tri[q]]], axis=1)
        add(np.concatenate([D[p], D[q]], axis=2), 0.5 * np.concatenate([Wside[p], Wside[q]], axis=2),
            dofs, dofs, es.length[p])
    s = es.singles
    add(D[s], Wside[s], cd[es.tri[s]], cd[es.tri[s]], es.length[s])
    return sum(mats[1:], mats[0]).tocsr()


# ---------------------------------------------------------------------------
# solve


def factor_spd(A: sp.spmatrix):
    """Sparse LU with diagonal pivoting; a non-positive pivot means A is not positive definite."""
    try:
        lu = spla.splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                       options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise SingularSystem(f"factorization failed: {exc}") from exc
    d = lu.U.diagonal()
    if not np.all(np.isfinite(d)) or d.min() <= 1e-13 * np.abs(d).max():
        raise SingularSystem("interior-penalty matrix is not positive definite; increase the penalty")
    return lu


@dataclass
class ClampedSolution:
    space: LagrangeSpace
    coeffs: np.ndarray

    @property
    def vertex_values(self) -> np.ndarray:
        return self.coeffs[: self.space.sm.n]


def solve_clamped(op: C0IPOperator, g, dirichlet, conormal, extra: sp.spmatrix | None = None,
                  extra_rhs: np.ndarray | None = None) -> ClampedSolution:
    """Solve with u = dirichlet on the boundary and nu . M grad u = conormal weakly.

    ``dirichlet`` is a callable or P1 vertex values; ``conormal`` a callable
    psi(x, y, nx, ny) or P1 vertex values; ``g`` a callable or P1 vertex values.
    ``extra`` adds a matrix to the operator (used by the cardio assembly).
    """
    space = op.space
    A = op.matrix if extra is None else (op.matrix + extra).tocsr()
    rhs = space.load_vector(g) + op.boundary_rhs(conormal)
    if extra_rhs is not None:
        rhs = rhs + extra_rhs
    fixed = space.boundary_dofs()
    if callable(dirichlet):
        vals = space.interpolate(dirichlet)[fixed]
    else:
        vals = space.interpolate_p1(np.asarray(dirichlet, float))[fixed]
    free = np.setdiff1d(np.arange(space.ndof), fixed)
    Aff = A[free][:, free]
    lu = factor_spd(Aff) if extra is None else _factor_general(Aff)
    u = np.zeros(space.ndof)
    u[fixed] = vals
    u[free] = lu.solve(rhs[free] - A[free][:, fixed] @ vals)
    return ClampedSolution(space, u)


def _factor_general(A):
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    d = np.abs(lu.U.diagonal())
    if d.min() <= 1e-13 * d.max():
        raise SingularSystem("operator is numerically singular")
    return lu
