"""Centered-difference gradient and Hessian, and pointwise Frobenius norms.

All stencils are evaluated with periodic rolls of the full array and then
masked to interior nodes; wrapped-around garbage can only land at positions
that are never interior (interior indices keep distance >= 3 from the array
edge), so the masked result is exact.

Symmetric matrices are stored as their n(n+1)/2 upper-triangle components.
The component order for n = 2 is (0,0), (0,1), (1,1) and for n = 3 it is
(0,0), (0,1), (0,2), (1,1), (1,2), (2,2); off-diagonal entries carry
multiplicity 2 in norms and contractions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArg
from .mesh import DiscMesh, ScalarField


def triangle_index_pairs(n: int) -> list:
    """Upper-triangle (i, j) pairs in storage order."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def triangle_multiplicity(n: int) -> np.ndarray:
    """Frobenius multiplicity (1 on the diagonal, 2 off it) per component."""
    return np.array([1.0 if i == j else 2.0 for i, j in triangle_index_pairs(n)])


@dataclass
class VectorField:
    """n real components per node, meaningful on INTERIOR nodes."""

    mesh: DiscMesh
    values: np.ndarray  # shape mesh.shape + (n,)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = self.mesh.shape + (self.mesh.n,)
        if self.values.shape != expected:
            raise InvalidArg(f"vector field shape {self.values.shape} != {expected}")
        if not np.all(np.isfinite(self.values)):
            raise InvalidArg("vector field values must be finite")

    def euclidean_norm(self) -> ScalarField:
        return ScalarField(self.mesh, np.sqrt(np.sum(self.values**2, axis=-1)))


@dataclass
class HessianField:
    """Symmetric n x n matrix per interior node, upper triangle stored."""

    mesh: DiscMesh
    values: np.ndarray  # shape mesh.shape + (n(n+1)/2,)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = self.mesh.n
        expected = self.mesh.shape + (n * (n + 1) // 2,)
        if self.values.shape != expected:
            raise InvalidArg(f"hessian field shape {self.values.shape} != {expected}")
        if not np.all(np.isfinite(self.values)):
            raise InvalidArg("hessian field values must be finite")


def _shift(u: np.ndarray, axis: int, step: int) -> np.ndarray:
    # roll so the value at index i+step lands at index i
    return np.roll(u, -step, axis=axis)


def _second_diff(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (_shift(u, axis, 1) - 2.0 * u + _shift(u, axis, -1)) / (h * h)


def _cross_diff(u: np.ndarray, ax_i: int, ax_j: int, h: float) -> np.ndarray:
    upp = _shift(_shift(u, ax_i, 1), ax_j, 1)
    upm = _shift(_shift(u, ax_i, 1), ax_j, -1)
    ump = _shift(_shift(u, ax_i, -1), ax_j, 1)
    umm = _shift(_shift(u, ax_i, -1), ax_j, -1)
    return (upp - upm - ump + umm) / (4.0 * h * h)


def apply_component_stencil(
    u: np.ndarray, i: int, j: int, h: float
) -> np.ndarray:
    """The (i, j) Hessian stencil applied to a raw array.

    The stencils are even-symmetric, hence self-adjoint, which is what lets
    the energy gradient reuse them in transposed order.
    """
    if i == j:
        return _second_diff(u, i, h)
    return _cross_diff(u, i, j, h)


def gradient(u: ScalarField) -> VectorField:
    """Centered first differences, component i = (u(x+h e_i) - u(x-h e_i)) / 2h.

    Exact on affine and quadratic fields at interior nodes; zero elsewhere.
    """
    mesh = u.mesh
    n, h = mesh.n, mesh.h
    comps = np.zeros(mesh.shape + (n,))
    inner = mesh.interior
    for i in range(n):
        d = (_shift(u.values, i, 1) - _shift(u.values, i, -1)) / (2.0 * h)
        comps[..., i] = np.where(inner, d, 0.0)
    return VectorField(mesh, comps)


def hessian(u: ScalarField) -> HessianField:
    """Discrete Hessian by centered second and 4-point cross differences.

    Exact on every polynomial of total degree <= 2; the pure second
    difference is exact on single-variable cubics as well.
    """
    mesh = u.mesh
    n, h = mesh.n, mesh.h
    pairs = triangle_index_pairs(n)
    comps = np.zeros(mesh.shape + (len(pairs),))
    inner = mesh.interior
    for k, (i, j) in enumerate(pairs):
        comps[..., k] = np.where(inner, apply_component_stencil(u.values, i, j, h), 0.0)
    return HessianField(mesh, comps)


def frob_norm(H: HessianField) -> ScalarField:
    """Pointwise Frobenius norm, off-diagonal entries counted twice."""
    mult = triangle_multiplicity(H.mesh.n)
    sq = np.einsum("...k,k->...", H.values**2, mult)
    return ScalarField(H.mesh, np.sqrt(sq))


def contract(A: HessianField, B: HessianField) -> np.ndarray:
    """Pointwise full-matrix contraction A : B (off-diagonals doubled)."""
    if A.mesh != B.mesh:
        raise InvalidArg("contract needs fields on the same mesh")
    mult = triangle_multiplicity(A.mesh.n)
    return np.einsum("...k,...k,k->...", A.values, B.values, mult)
