"""Masked uniform grid over the closed unit ball of R^n with midpoint quadrature.

The grid covers [-1, 1]^n with N nodes per axis and spacing h = 2/(N-1).
Nodes are classified by distance from the origin:

    EXTERIOR   |x| > 1          carried but never read,
    BAND       1 - 2h <= |x| <= 1   Dirichlet data lives here,
    INTERIOR   |x| < 1 - 2h     where differential operators act.

The 2h band guarantees that the Hessian stencil of any interior node
(axis offsets +-h, diagonal offsets (+-h, +-h), reach sqrt(2)*h < 2h)
never touches an exterior node.

Node positions are always derived from indices, coord_i = (i - (N-1)/2) * h,
so classification is exactly symmetric under axis reflections and geometry
cannot drift from data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArg, RegionOutOfRange, RejectedGeometry

# slack for radius comparisons against 1 - 2h, a few ulps of the geometry
_GEOM_TOL = 1e-12


class NodeClass(IntEnum):
    INTERIOR = 0
    BAND = 1
    EXTERIOR = 2


@dataclass(frozen=True)
class DiscMesh:
    """Masked uniform grid over the unit ball.

    Attributes:
        n: spatial dimension, 2 or 3.
        N: nodes per axis (odd).
        h: grid spacing 2/(N-1).
    """

    n: int
    N: int
    h: float

    @cached_property
    def axis_coords(self) -> np.ndarray:
        c = (self.N - 1) // 2
        return (np.arange(self.N) - c) * self.h

    @cached_property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @cached_property
    def coord_grids(self) -> tuple:
        grids = np.meshgrid(*([self.axis_coords] * self.n), indexing="ij")
        for g in grids:
            g.setflags(write=False)
        return tuple(grids)

    @cached_property
    def radius(self) -> np.ndarray:
        r = np.sqrt(sum(g * g for g in self.coord_grids))
        r.setflags(write=False)
        return r

    @cached_property
    def node_class(self) -> np.ndarray:
        r = self.radius
        cls = np.full(self.shape, NodeClass.BAND, dtype=np.int8)
        cls[r < 1.0 - 2.0 * self.h] = NodeClass.INTERIOR
        cls[r > 1.0] = NodeClass.EXTERIOR
        cls.setflags(write=False)
        return cls

    @cached_property
    def interior(self) -> np.ndarray:
        m = self.node_class == NodeClass.INTERIOR
        m.setflags(write=False)
        return m

    @cached_property
    def band(self) -> np.ndarray:
        m = self.node_class == NodeClass.BAND
        m.setflags(write=False)
        return m

    @cached_property
    def exterior(self) -> np.ndarray:
        m = self.node_class == NodeClass.EXTERIOR
        m.setflags(write=False)
        return m

    @property
    def interior_count(self) -> int:
        return int(self.interior.sum())

    def dist_from(self, x0: Sequence[float]) -> np.ndarray:
        """Euclidean distance of every node from the point x0."""
        if len(x0) != self.n:
            raise InvalidArg(f"point has {len(x0)} components, mesh is {self.n}-d")
        deltas = [g - float(c) for g, c in zip(self.coord_grids, x0)]
        return np.sqrt(sum(d * d for d in deltas))


def hessian_stencil_offsets(n: int) -> list:
    """Lattice offsets read by the discrete Hessian at a node."""
    offs = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        offs.append(tuple(e))
        offs.append(tuple(-v for v in e))
    for i in range(n):
        for j in range(i + 1, n):
            for si in (1, -1):
                for sj in (1, -1):
                    e = [0] * n
                    e[i] = si
                    e[j] = sj
                    offs.append(tuple(e))
    return offs


def deep_interior_mask(mesh: DiscMesh) -> np.ndarray:
    """Interior nodes whose full Hessian stencil is again interior.

    These are the nodes at which the adjoint stencil sums telescope, so a
    globally quadratic field has an exactly vanishing first variation there;
    the solver uses them as its free set.
    """
    m = mesh.interior.copy()
    axes = tuple(range(mesh.n))
    for off in hessian_stencil_offsets(mesh.n):
        m &= np.roll(mesh.interior, tuple(-o for o in off), axis=axes)
    return m


@dataclass
class ScalarField:
    """One real value per grid node. Exterior values are carried, never read."""

    mesh: DiscMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.mesh.shape:
            raise InvalidArg(
                f"field shape {self.values.shape} does not match mesh {self.mesh.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidArg("field values must be finite")

    @classmethod
    def from_function(cls, mesh: DiscMesh, fn: Callable) -> "ScalarField":
        """Sample fn(x1, ..., xn) at every node."""
        vals = np.asarray(fn(*mesh.coord_grids), dtype=float)
        if vals.shape != mesh.shape:
            vals = np.broadcast_to(vals, mesh.shape).copy()
        return cls(mesh, vals)

    @classmethod
    def full(cls, mesh: DiscMesh, value: float) -> "ScalarField":
        return cls(mesh, np.full(mesh.shape, float(value)))

    @classmethod
    def zeros(cls, mesh: DiscMesh) -> "ScalarField":
        return cls(mesh, np.zeros(mesh.shape))

    def copy(self) -> "ScalarField":
        return ScalarField(self.mesh, self.values.copy())


def build_mesh(n: int, N: int) -> DiscMesh:
    """Build the masked grid for the unit ball of R^n.

    Args:
        n: spatial dimension, 2 or 3.
        N: nodes per axis, odd and >= 9.

    Raises:
        InvalidArg: even N or unsupported n.
        RejectedGeometry: no interior node exists (1 - 2h <= 0).
    """
    if n not in (2, 3):
        raise InvalidArg(f"dimension n must be 2 or 3, got {n}")
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise InvalidArg(f"N must be an integer >= 2, got {N!r}")
    if N % 2 == 0:
        raise InvalidArg(f"N must be odd, got {N}")
    h = 2.0 / (N - 1)
    mesh = DiscMesh(n=int(n), N=int(N), h=h)
    if 1.0 - 2.0 * h <= 0.0 or mesh.interior_count == 0:
        raise RejectedGeometry(
            f"N={N} gives h={h:g}; interior zone 1-2h={1 - 2 * h:g} holds no nodes"
        )
    return mesh


def _check_same_mesh(f: ScalarField, mesh: DiscMesh) -> None:
    if f.mesh != mesh:
        raise InvalidArg("field is defined on a different mesh")


def _require_ball_inside(mesh: DiscMesh, x0: Sequence[float], r: float) -> None:
    if r <= 0:
        raise InvalidArg(f"radius must be positive, got {r}")
    c = math.sqrt(sum(float(v) ** 2 for v in x0))
    if c + r > 1.0 - 2.0 * mesh.h + _GEOM_TOL:
        raise RegionOutOfRange(
            f"ball B_{r:g}({tuple(x0)}) exits the interior zone |x| <= {1 - 2 * mesh.h:g}"
        )


def integrate_ball(f: ScalarField, x0: Sequence[float], r: float) -> float:
    """Midpoint-rule integral of f over the ball of radius r around x0.

    Sums f(x_i) * h^n over nodes with |x_i - x0| <= r (ties included).
    Accumulation uses math.fsum, so the result is independent of node
    enumeration order.

    Raises:
        RegionOutOfRange: if the ball is not contained in the interior zone.
    """
    mesh = f.mesh
    _require_ball_inside(mesh, x0, r)
    sel = mesh.dist_from(x0) <= r
    return math.fsum(f.values[sel].tolist()) * mesh.h**mesh.n


def integrate_annulus(
    f: ScalarField, x0: Sequence[float], r_in: float, r_out: float
) -> float:
    """Midpoint-rule integral of f over the annulus r_in < |x - x0| <= r_out.

    The membership rule (inner radius excluded, outer included) makes the
    annulus the exact set difference of the two balls.
    """
    if r_in <= 0 or r_in >= r_out:
        raise InvalidArg(f"need 0 < r_in < r_out, got r_in={r_in}, r_out={r_out}")
    mesh = f.mesh
    _require_ball_inside(mesh, x0, r_out)
    d = mesh.dist_from(x0)
    sel = (d > r_in) & (d <= r_out)
    return math.fsum(f.values[sel].tolist()) * mesh.h**mesh.n
