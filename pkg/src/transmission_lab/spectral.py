"""Closed-form separable solutions on concentric disks (isotropic conductivities).

Fields are u(r, theta) = R(r) cos(m theta). The torso field is harmonic,
R = A r^m + B r^-m (A + B log r for m = 0); the heart field solves the clamped
biharmonic problem, R = C r^m + D r^(m+2); the intracellular field follows from
the Neumann problem with the biharmonic source. Radial coefficients come from
2x2 linear solves.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IncompatibleData, ModeUnsupported


def _polar(x, y):
    r = np.hypot(x, y)
    th = np.arctan2(y, x)
    return r, th


@dataclass
class RadialMode:
    """u = R(r) cos(m theta) with R = sum c_k r^p_k (+ c_log log r)."""

    m: int
    powers: tuple
    coeffs: tuple
    log_coeff: float = 0.0

    def R(self, r):
        out = sum(c * r**p for c, p in zip(self.coeffs, self.powers)) + 0.0 * r
        return out + self.log_coeff * np.log(r) if self.log_coeff else out

    def dR(self, r):
        out = sum(c * p * r ** (p - 1) for c, p in zip(self.coeffs, self.powers) if p != 0)
        return out + self.log_coeff / r + 0.0 * r if self.log_coeff else out + 0.0 * r

    def value(self, x, y):
        r, th = _polar(x, y)
        return self.R(r) * np.cos(self.m * th)

    def grad(self, x, y):
        r, th = _polar(x, y)
        r = np.where(r == 0, 1e-300, r)
        R, dR = self.R(r), self.dR(r)
        c, s = np.cos(self.m * th), np.sin(self.m * th)
        ur = dR * c
        ut = -self.m * R * s / r  # (1/r) d/dtheta
        ct, st = np.cos(th), np.sin(th)
        return ur * ct - ut * st, ur * st + ut * ct

    def __add__(self, other: "RadialMode") -> "RadialMode":
        assert self.m == other.m
        terms: dict = {}
        for c, p in list(zip(self.coeffs, self.powers)) + list(zip(other.coeffs, other.powers)):
            terms[p] = terms.get(p, 0.0) + c
        return RadialMode(self.m, tuple(terms), tuple(terms.values()), self.log_coeff + other.log_coeff)


def annulus_harmonic(m: int, a: float, R: float, inner: tuple, outer: tuple, sigma: float = 1.0) -> RadialMode:
    """Harmonic mode on a < r < R with one condition per circle.

    Conditions are ("dirichlet", value) or ("neumann", flux) where flux is the
    outward conormal sigma d_nu u (outward = -e_r on r = a, +e_r on r = R).
    """
    if m < 0:
        raise ModeUnsupported(f"mode {m} < 0")
    rows, rhs = [], []
    for (kind, val), r, sgn in ((inner, a, -1.0), (outer, R, 1.0)):
        if kind == "dirichlet":
            rows.append([r**m, r**-m] if m else [1.0, np.log(r)])
        elif kind == "neumann":
            rows.append([sgn * sigma * m * r ** (m - 1), -sgn * sigma * m * r ** (-m - 1)] if m
                        else [0.0, sgn * sigma / r])
        else:
            raise ValueError(kind)
        rhs.append(val)
    A, B = np.linalg.solve(np.array(rows), np.array(rhs, dtype=float))
    if m == 0:
        return RadialMode(0, (0,), (A,), B)
    return RadialMode(m, (m, -m), (A, B))


def annulus_cauchy(m: int, R: float, f0: float, f1: float, sigma: float = 1.0) -> RadialMode:
    """Harmonic mode with both Dirichlet f0 and outward flux f1 on r = R."""
    if m == 0:
        B = f1 * R / sigma
        return RadialMode(0, (0,), (f0 - B * np.log(R),), B)
    M = np.array([[R**m, R**-m], [sigma * m * R ** (m - 1), -sigma * m * R ** (-m - 1)]])
    A, B = np.linalg.solve(M, [f0, f1])
    return RadialMode(m, (m, -m), (A, B))


def disk_clamped(m: int, a: float, value: float, flux: float, sigma: float = 1.0) -> RadialMode:
    """Biharmonic mode C r^m + D r^(m+2) on r < a with u = value, sigma d_r u = flux at r = a."""
    M = np.array([[a**m, a ** (m + 2)], [sigma * m * a ** (m - 1) if m else 0.0, sigma * (m + 2) * a ** (m + 1)]])
    C, D = np.linalg.solve(M, [value, flux])
    return RadialMode(m, (m, m + 2), (C, D))


def disk_neumann(m: int, a: float, flux: float, sigma: float = 1.0) -> RadialMode:
    """Harmonic mode on r < a with sigma d_r u = flux at r = a and zero boundary mean."""
    if m == 0:
        if abs(flux) > 0:
            raise IncompatibleData("mode-0 flux has nonzero boundary integral")
        return RadialMode(0, (0,), (0.0,))
    return RadialMode(m, (m,), (flux / (sigma * m * a ** (m - 1)),))


@dataclass
class SpectralTriple:
    """Exact (u_i, u_e, u_b) for one mode; each entry is a RadialMode."""

    u_i: RadialMode
    u_e: RadialMode
    u_b: RadialMode
    h0: float
    m: int

    def on_mesh(self, mesh):
        from .fields import ScalarField
        from .geometry import Subdomain
        from .transmission import PotentialTriple

        return PotentialTriple(
            ScalarField.from_function(mesh, self.u_i.value, Subdomain.HEART),
            ScalarField.from_function(mesh, self.u_e.value, Subdomain.HEART),
            ScalarField.from_function(mesh, self.u_b.value, Subdomain.TORSO),
        )

    @property
    def functions(self) -> dict[str, Callable]:
        return {"u_i": self.u_i.value, "u_e": self.u_e.value, "u_b": self.u_b.value}


def spectral_disk_oracle(m: int, coeffs, f0_amp: float, f1_amp: float, r_inner: float = 1.0,
                         r_outer: float = 2.0, sigma_i: float = 1.0, sigma_e: float = 1.0,
                         sigma_b: float = 1.0) -> SpectralTriple:
    """Exact mode-m triple for outer Cauchy data f0 = f0_amp cos, f1 = f1_amp cos.

    The heart field solves the clamped problem (sigma_e Lap)^2 u_e = 0 with the
    interface conditions; u_i solves the Neumann problem and is calibrated
    with h0 = -c0 * mean of u_b over the interface.
    """
    if m < 0:
        raise ModeUnsupported(f"mode {m} < 0")
    a = r_inner
    ub = annulus_cauchy(m, r_outer, f0_amp, f1_amp, sigma_b)
    value = float(ub.R(a))
    flux_b = -sigma_b * float(ub.dR(a))  # torso-outward conormal amplitude on r = a
    ue = disk_clamped(m, a, value, coeffs.beta_e * flux_b, sigma_e)
    D = ue.coeffs[1]
    if coeffs.alpha_i == 0:
        raise ModeUnsupported("alpha_i = 0 has no Neumann reconstruction")
    ratio = coeffs.alpha_e / coeffs.alpha_i
    # particular solution of sigma_i (-Lap) u = -ratio * sigma_e (-Lap) (D r^(m+2))
    P = RadialMode(m, (m + 2,), (-ratio * sigma_e / sigma_i * D,))
    flux_needed = coeffs.beta_i * flux_b - sigma_i * float(P.dR(a))
    if m == 0:
        if abs(flux_needed) > 1e-12 * (abs(coeffs.beta_i * flux_b) + abs(sigma_i * P.dR(a)) + 1e-300):
            raise IncompatibleData(f"mode-0 data violate the existence condition (defect {flux_needed:.3e})")
        hom = RadialMode(0, (0,), (-float(P.R(a)),))
    else:
        hom = disk_neumann(m, a, flux_needed, sigma_i)
    h0 = -coeffs.c0 * value if m == 0 else 0.0
    ui = P + hom + RadialMode(m, (0,), (h0,)) if m == 0 else P + hom
    return SpectralTriple(ui, ue, ub, h0, m)
