"""Nodal field containers and their CSV exports."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .geometry import Boundary, Mesh2D, Subdomain


@dataclass
class ScalarField:
    """One value per vertex of a subdomain, in the subdomain's local ordering."""

    values: np.ndarray
    subdomain: Subdomain

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.subdomain = Subdomain(self.subdomain)

    @classmethod
    def from_function(cls, mesh: Mesh2D, fn, subdomain: Subdomain) -> "ScalarField":
        v = mesh.sub(subdomain).vertices
        return cls(np.asarray(fn(v[:, 0], v[:, 1]), dtype=float) * np.ones(len(v)), subdomain)

    @classmethod
    def zeros(cls, mesh: Mesh2D, subdomain: Subdomain) -> "ScalarField":
        return cls(np.zeros(mesh.sub(subdomain).n), subdomain)

    def trace(self, mesh: Mesh2D, tag: Boundary) -> "BoundaryField":
        sm = mesh.sub(self.subdomain)
        return BoundaryField(self.values[sm.boundary_local[Boundary(tag)]], tag)

    def __add__(self, other):
        if isinstance(other, ScalarField):
            return ScalarField(self.values + other.values, self.subdomain)
        return ScalarField(self.values + other, self.subdomain)

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            return ScalarField(self.values - other.values, self.subdomain)
        return ScalarField(self.values - other, self.subdomain)

    def __mul__(self, a: float):
        return ScalarField(a * self.values, self.subdomain)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(-self.values, self.subdomain)


@dataclass
class BoundaryField:
    """Values at the vertices of one boundary tag, sorted by global vertex id."""

    values: np.ndarray
    tag: Boundary

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.tag = Boundary(self.tag)

    @classmethod
    def from_function(cls, mesh: Mesh2D, fn, tag: Boundary) -> "BoundaryField":
        v = mesh.vertices[mesh.boundary_vertices(tag)]
        return cls(np.asarray(fn(v[:, 0], v[:, 1]), dtype=float) * np.ones(len(v)), tag)

    @classmethod
    def constant(cls, mesh: Mesh2D, value: float, tag: Boundary) -> "BoundaryField":
        return cls(np.full(len(mesh.boundary_vertices(tag)), float(value)), tag)

    def __add__(self, other):
        o = other.values if isinstance(other, BoundaryField) else other
        return BoundaryField(self.values + o, self.tag)

    def __sub__(self, other):
        o = other.values if isinstance(other, BoundaryField) else other
        return BoundaryField(self.values - o, self.tag)

    def __mul__(self, a: float):
        return BoundaryField(a * self.values, self.tag)

    __rmul__ = __mul__

    def __neg__(self):
        return BoundaryField(-self.values, self.tag)


@dataclass
class VectorField2:
    """Two displacement components per vertex of a subdomain; values has shape (n, 2)."""

    values: np.ndarray
    subdomain: Subdomain

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1, 2)
        self.subdomain = Subdomain(self.subdomain)

    @classmethod
    def from_function(cls, mesh: Mesh2D, fn, subdomain: Subdomain) -> "VectorField2":
        v = mesh.sub(subdomain).vertices
        a, b = fn(v[:, 0], v[:, 1])
        n = len(v)
        return cls(np.column_stack([np.ones(n) * a, np.ones(n) * b]), subdomain)

    @property
    def flat(self) -> np.ndarray:
        """Block ordering: all x-components, then all y-components."""
        return np.concatenate([self.values[:, 0], self.values[:, 1]])

    @classmethod
    def from_flat(cls, flat, subdomain: Subdomain) -> "VectorField2":
        flat = np.asarray(flat)
        n = flat.size // 2
        return cls(np.column_stack([flat[:n], flat[n:]]), subdomain)


def write_scalar_csv(mesh: Mesh2D, field: ScalarField, path) -> None:
    sm = mesh.sub(field.subdomain)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex_index", "x", "y", "value"])
        for g, (x, y), val in zip(sm.global_ids, sm.vertices, field.values):
            w.writerow([int(g), repr(float(x)), repr(float(y)), repr(float(val))])


def write_vector_csv(mesh: Mesh2D, field: VectorField2, path) -> None:
    sm = mesh.sub(field.subdomain)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex_index", "x", "y", "ux", "uy"])
        for g, (x, y), (a, b) in zip(sm.global_ids, sm.vertices, field.values):
            w.writerow([int(g), repr(float(x)), repr(float(y)), repr(float(a)), repr(float(b))])
