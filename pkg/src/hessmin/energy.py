"""Discrete energy functional, its first variation, and the weak residual.

The energy of a field u with weight a and exponent p >= 2 is

    E(u) = w * sum over interior nodes of a(x)^p * (|H(x)|^2 + eps^2)^(p/2),

where H is the discrete Hessian, |.| the Frobenius norm, and
w = h^n / (1 - 2h)^n the ball-normalized midpoint weight (the interior zone
misses the 2h band, so plain h^n weights would undercount the unit ball by
the factor (1 - 2h)^n; the normalization makes constant integrands integrate
to their full-ball values and leaves minimizers untouched).

The eps term removes the degenerate |H|^(p-2) factor at H = 0; derivative
based operations therefore require eps > 0 whenever p != 2.

Energy sums run over interior nodes only. The band carries Dirichlet data,
so varying an interior value changes the Hessian at the stencil-neighbor
interior nodes; the gradient assembly applies the same (self-adjoint)
stencils to the weighted Hessian components in transposed order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DegenerateModel,
    InvalidArg,
    NonFiniteEnergy,
    UnsupportedTestFunction,
)
from .mesh import DiscMesh, ScalarField
from .operators import (
    apply_component_stencil,
    triangle_index_pairs,
    triangle_multiplicity,
)


@dataclass
class EnergyModel:
    """Integrand exponent, regularization, and optional positive weight.

    Attributes:
        p: integrand exponent, real >= 2 (featured case p = n).
        eps: regularization parameter >= 0.
        weight: a(x) >= delta > 0, entering the integrand as a(x)^p;
            None means a == 1.
        delta: positive lower bound of the weight; inferred from the
            interior minimum when a weight is given and delta is None.
    """

    p: float = 2.0
    eps: float = 0.0
    weight: Optional[ScalarField] = None
    delta: Optional[float] = None

    def __post_init__(self):
        self.p = float(self.p)
        self.eps = float(self.eps)
        if self.p < 2.0:
            raise InvalidArg(f"exponent p must be >= 2, got {self.p}")
        if self.eps < 0.0:
            raise InvalidArg(f"eps must be >= 0, got {self.eps}")
        if self.weight is not None:
            wmin = float(self.weight.values[self.weight.mesh.interior].min())
            if self.delta is None:
                self.delta = wmin
            if self.delta <= 0.0 or wmin < self.delta:
                raise InvalidArg(
                    f"weight must satisfy a >= delta > 0 on interior nodes "
                    f"(min {wmin:g}, delta {self.delta})"
                )
        elif self.delta is None:
            self.delta = 1.0

    def with_eps(self, eps: float) -> "EnergyModel":
        return EnergyModel(p=self.p, eps=eps, weight=self.weight, delta=self.delta)

    def needs_regularization(self) -> bool:
        return self.p != 2.0

    def check_smooth(self) -> None:
        if self.needs_regularization() and self.eps == 0.0:
            raise DegenerateModel(
                f"p = {self.p} with eps = 0 is degenerate at H = 0; "
                "use an eps > 0 (continuation schedule) for derivative work"
            )


class EnergyKernel:
    """Raw-array energy and gradient evaluations for one (model, mesh) pair.

    The solver's hot loop runs on this object to avoid re-validating field
    wrappers every iteration. All methods are pure.
    """

    def __init__(self, model: EnergyModel, mesh: DiscMesh):
        if model.weight is not None and model.weight.mesh != mesh:
            raise InvalidArg("weight field lives on a different mesh")
        self.model = model
        self.mesh = mesh
        self.pairs = triangle_index_pairs(mesh.n)
        self.mult = triangle_multiplicity(mesh.n)
        self.interior = mesh.interior
        self.w_quad = mesh.h**mesh.n / (1.0 - 2.0 * mesh.h) ** mesh.n
        if model.weight is None:
            self.a_pow_p = None
        else:
            self.a_pow_p = np.where(
                self.interior, model.weight.values**model.p, 0.0
            )

    def hess_components(self, values: np.ndarray) -> list:
        h = self.mesh.h
        return [
            np.where(self.interior, apply_component_stencil(values, i, j, h), 0.0)
            for (i, j) in self.pairs
        ]

    def h2(self, comps: list) -> np.ndarray:
        out = np.zeros(self.mesh.shape)
        for m, c in zip(self.mult, comps):
            out += m * (c * c)
        return out

    def energy_value(self, values: np.ndarray, eps: float) -> float:
        p = self.model.p
        dens = (self.h2(self.hess_components(values))[self.interior] + eps * eps) ** (
            p / 2.0
        )
        if self.a_pow_p is not None:
            dens = dens * self.a_pow_p[self.interior]
        total = float(np.sum(dens)) * self.w_quad
        if not math.isfinite(total):
            raise NonFiniteEnergy("energy evaluation produced a non-finite value")
        return total

    def grad_density(self, values: np.ndarray, eps: float) -> np.ndarray:
        """First variation as a density: pairing sum(grad * v * h^n) = dE/dt.

        Assembled as p * (w/h^n) * L^T(a^p * (|H|^2+eps^2)^((p-2)/2) * H)
        with L the Hessian operator, masked to interior nodes.
        """
        p = self.model.p
        comps = self.hess_components(values)
        if p == 2.0:
            G = np.where(self.interior, 2.0, 0.0)
        else:
            G = np.where(
                self.interior, p * (self.h2(comps) + eps * eps) ** ((p - 2.0) / 2.0), 0.0
            )
        if self.a_pow_p is not None:
            G = G * self.a_pow_p
        out = np.zeros(self.mesh.shape)
        h = self.mesh.h
        for m, (i, j), c in zip(self.mult, self.pairs, comps):
            out += m * apply_component_stencil(G * c, i, j, h)
        scale = self.w_quad / self.mesh.h**self.mesh.n
        out = np.where(self.interior, out * scale, 0.0)
        if not np.all(np.isfinite(out)):
            raise NonFiniteEnergy("energy gradient produced non-finite values")
        return out


def energy(m: EnergyModel, u: ScalarField) -> float:
    """Total energy of u under the model m (finite, nonnegative)."""
    kern = EnergyKernel(m, u.mesh)
    return kern.energy_value(u.values, m.eps)


def energy_gradient(m: EnergyModel, u: ScalarField) -> ScalarField:
    """Density-scaled first variation of the energy, supported on interior nodes.

    For every direction field v vanishing off interior nodes,
    sum(gradient * v) * h^n equals d/dt energy(u + t v) at t = 0.

    Raises:
        DegenerateModel: if p != 2 and eps = 0.
    """
    m.check_smooth()
    kern = EnergyKernel(m, u.mesh)
    return ScalarField(u.mesh, kern.grad_density(u.values, m.eps))


def el_residual(m: EnergyModel, u: ScalarField, phi: ScalarField) -> float:
    """Weak Euler-Lagrange residual of u against the test function phi.

    Computed as p * w * sum over interior of a^p (|H_u|^2+eps^2)^((p-2)/2)
    (H_u : H_phi); identical (to roundoff) to the pairing of
    energy_gradient(m, u) with phi, being the same assembly in the other
    order. Vanishes at minimizers for admissible phi.

    Raises:
        UnsupportedTestFunction: if phi is nonzero on band or exterior nodes.
    """
    m.check_smooth()
    mesh = u.mesh
    if phi.mesh != mesh:
        raise InvalidArg("test function lives on a different mesh")
    off_support = ~mesh.interior
    if np.any(phi.values[off_support] != 0.0):
        raise UnsupportedTestFunction(
            "test function must vanish on BAND and EXTERIOR nodes"
        )
    kern = EnergyKernel(m, mesh)
    comps_u = kern.hess_components(u.values)
    comps_phi = kern.hess_components(phi.values)
    p = m.p
    if p == 2.0:
        G = np.where(mesh.interior, 2.0, 0.0)
    else:
        G = np.where(
            mesh.interior,
            p * (kern.h2(comps_u) + m.eps**2) ** ((p - 2.0) / 2.0),
            0.0,
        )
    if kern.a_pow_p is not None:
        G = G * kern.a_pow_p
    dens = np.zeros(mesh.shape)
    for mult, cu, cp in zip(kern.mult, comps_u, comps_phi):
        dens += mult * cu * cp
    total = float(np.sum(G * dens)) * kern.w_quad
    if not math.isfinite(total):
        raise NonFiniteEnergy("residual evaluation produced a non-finite value")
    return total
