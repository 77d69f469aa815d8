"""Monotone line-search descent for the discrete energy, with continuation.

The iterate keeps the boundary datum g fixed outside the solver's free set
and descends the energy over the free values with Barzilai-Borwein initial
steps safeguarded by Armijo backtracking (factor 0.5, sufficient-decrease
constant 1e-4), so every accepted step strictly decreases the energy.

Free set: interior nodes whose full Hessian stencil stays interior. At the
remaining interior shell (within stencil reach of the band) the adjoint
stencil sums do not telescope, so no smooth competitor can zero the first
variation there; pinning the shell to g is what makes globally quadratic
data an exact discrete minimizer, which the linear oracle and the
reproduction tests rely on.

For p > 2 the degenerate factor |H|^(p-2) is handled by a decreasing eps
schedule with warm starts; the eps = 0 minimizer is approximated and the
final eps is reported alongside the results.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg as sla
from scipy import ndimage

from .energy import EnergyKernel, EnergyModel
from .errors import InvalidArg, LineSearchStall, SingularSystem, TooLarge
from .mesh import ScalarField, deep_interior_mask

logger = logging.getLogger("hessmin")

_ARMIJO_C1 = 1e-4
_BACKTRACK = 0.5
_MAX_HALVINGS = 60
_PLATEAU_PATIENCE = 25

INIT_MODES = ("zero", "boundary-extension", "seeded-random")


@dataclass
class SolveConfig:
    """Stopping rules, continuation schedule, and initialization."""

    tol_grad: float = 1e-7
    tol_energy: float = 1e-15
    max_iter: int = 100000
    eps_schedule: Optional[Sequence[float]] = None  # None: pick from the model
    init: str = "boundary-extension"
    seed: int = 0

    def __post_init__(self):
        if self.tol_grad <= 0 or self.tol_energy <= 0:
            raise InvalidArg("tolerances must be positive")
        if self.max_iter < 1:
            raise InvalidArg("max_iter must be >= 1")
        if self.init not in INIT_MODES:
            raise InvalidArg(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.eps_schedule is not None:
            sched = [float(e) for e in self.eps_schedule]
            if not sched:
                raise InvalidArg("eps_schedule must be nonempty")
            if any(b >= a for a, b in zip(sched, sched[1:])):
                raise InvalidArg("eps_schedule must be strictly decreasing")
            if sched[-1] < 0:
                raise InvalidArg("eps_schedule must end at eps_final >= 0")
            self.eps_schedule = tuple(sched)


@dataclass
class SolveReport:
    """Trace of one minimize() run."""

    stage_eps: list = field(default_factory=list)
    stage_iterations: list = field(default_factory=list)
    energy_traces: list = field(default_factory=list)  # per stage, nonincreasing
    final_grad_sup: float = np.inf
    final_energy: float = np.inf  # unregularized (eps = 0) energy
    final_energy_regularized: float = np.inf
    eps_final: float = 0.0
    wall_time_s: float = 0.0
    max_iter_hit: bool = False
    stalled: bool = False

    @property
    def total_iterations(self) -> int:
        return int(sum(self.stage_iterations))


def resolve_eps_schedule(m: EnergyModel, cfg: SolveConfig) -> tuple:
    """Config schedule if given, else [0] for p = 2 and the default ladder otherwise."""
    if cfg.eps_schedule is None:
        return (0.0,) if m.p == 2.0 else (1e-1, 1e-2, 1e-3, 1e-4)
    sched = tuple(cfg.eps_schedule)
    if sched[-1] == 0.0 and m.p != 2.0:
        raise InvalidArg(
            f"eps_schedule may end at 0 only for p = 2 (model has p = {m.p})"
        )
    return sched


def _initial_guess(
    g: ScalarField, free: np.ndarray, idx: np.ndarray, cfg: SolveConfig
) -> np.ndarray:
    if cfg.init == "zero":
        return np.zeros(idx.size)
    if cfg.init == "boundary-extension":
        # copy the nearest pinned (band or interior-shell) value inward
        nearest = ndimage.distance_transform_edt(
            free, return_distances=False, return_indices=True
        )
        u0 = g.values[tuple(nearest)]
        return u0.reshape(-1)[idx]
    rng = np.random.default_rng(cfg.seed)
    return g.values.reshape(-1)[idx] + 0.5 * rng.standard_normal(idx.size)


class _Problem:
    """Packed view of the reduced problem over the free node set."""

    def __init__(self, m: EnergyModel, g: ScalarField):
        self.kern = EnergyKernel(m, g.mesh)
        self.free = deep_interior_mask(g.mesh)
        self.idx = np.flatnonzero(self.free.reshape(-1))
        if self.idx.size == 0:
            raise InvalidArg("mesh has no stencil-interior nodes to optimize over")
        self.base = g.values.reshape(-1).copy()
        self.shape = g.mesh.shape
        self.hn = g.mesh.h**g.mesh.n

    def field_values(self, z: np.ndarray) -> np.ndarray:
        u = self.base.copy()
        u[self.idx] = z
        return u.reshape(self.shape)

    def energy(self, z: np.ndarray, eps: float) -> float:
        return self.kern.energy_value(self.field_values(z), eps)

    def grad(self, z: np.ndarray, eps: float) -> np.ndarray:
        return self.kern.grad_density(self.field_values(z), eps).reshape(-1)[self.idx]


def _descend_stage(
    prob: _Problem, z: np.ndarray, eps: float, cfg: SolveConfig, report: SolveReport
) -> np.ndarray:
    E = prob.energy(z, eps)
    g = prob.grad(z, eps)
    trace = [E]
    alpha = 1.0
    it = 0
    flat = 0
    accepted_any = False
    while it < cfg.max_iter:
        gsup = float(np.abs(g).max())
        if gsup <= cfg.tol_grad:
            break
        d = -g
        dir_deriv = -float(np.dot(g, g)) * prob.hn  # dE/dalpha along d
        a = alpha
        ok = False
        for _ in range(_MAX_HALVINGS):
            z_new = z + a * d
            E_new = prob.energy(z_new, eps)
            if E_new <= E + _ARMIJO_C1 * a * dir_deriv:
                ok = True
                break
            a *= _BACKTRACK
        if not ok:
            if not accepted_any:
                raise LineSearchStall(
                    f"no decreasing step found at eps={eps:g} "
                    f"(gradient sup {gsup:.3e} above tol {cfg.tol_grad:g})"
                )
            report.stalled = True
            logger.debug("stage eps=%g stalled at roundoff after %d iterations", eps, it)
            break
        g_new = prob.grad(z_new, eps)
        s = a * d
        y = g_new - g
        sy = float(np.dot(s, y))
        if sy > 0:
            # alternate the two Barzilai-Borwein step estimates
            alpha = float(np.dot(s, s)) / sy if it % 2 == 0 else sy / float(np.dot(y, y))
        else:
            alpha = 2.0 * a
        flat = flat + 1 if E - E_new <= cfg.tol_energy * max(abs(E_new), 1.0) else 0
        z, E, g = z_new, E_new, g_new
        trace.append(E)
        accepted_any = True
        it += 1
        if flat >= _PLATEAU_PATIENCE:
            logger.debug("stage eps=%g: energy plateau after %d iterations", eps, it)
            break
    else:
        report.max_iter_hit = True
    report.stage_eps.append(eps)
    report.stage_iterations.append(it)
    report.energy_traces.append(trace)
    report.final_grad_sup = float(np.abs(g).max())
    return z


def minimize(m: EnergyModel, g: ScalarField, cfg: SolveConfig):
    """Minimize the energy with the trace of g fixed.

    Returns:
        (u, report): the computed minimizer (equal to g off the free set)
        and the SolveReport. The energy trace is nonincreasing within each
        eps stage; stages are warm-started from the previous one.
    """
    schedule = resolve_eps_schedule(m, cfg)
    prob = _Problem(m, g)
    t0 = time.perf_counter()
    report = SolveReport()
    z = _initial_guess(g, prob.free, prob.idx, cfg)
    for eps in schedule:
        z = _descend_stage(prob, z, eps, cfg, report)
    values = prob.field_values(z)
    report.eps_final = schedule[-1]
    report.final_energy = prob.kern.energy_value(values, 0.0)
    report.final_energy_regularized = prob.kern.energy_value(values, schedule[-1])
    report.wall_time_s = time.perf_counter() - t0
    if report.max_iter_hit:
        logger.warning("minimize hit max_iter=%d in at least one stage", cfg.max_iter)
    return ScalarField(g.mesh, values), report


def solve_linear_oracle(
    m: EnergyModel, g: ScalarField, cap: int = 4000
) -> ScalarField:
    """Exact minimizer for p = 2 by dense SPD factorization.

    With p = 2 the first variation is linear in the free values, so the
    reduced system is assembled column by column from the gradient map and
    solved with a Cholesky factorization.

    Raises:
        InvalidArg: if p != 2 or eps != 0.
        TooLarge: if the free node count exceeds the dense cap.
        SingularSystem: if the factorization fails.
    """
    if m.p != 2.0 or m.eps != 0.0:
        raise InvalidArg("the linear oracle requires p = 2 and eps = 0")
    prob = _Problem(m, g)
    mcount = prob.idx.size
    if mcount > cap:
        raise TooLarge(f"{mcount} unknowns exceed the dense-factorization cap {cap}")
    z0 = np.zeros(mcount)
    r0 = prob.grad(z0, 0.0)
    A = np.empty((mcount, mcount))
    e = np.zeros(mcount)
    for k in range(mcount):
        e[k] = 1.0
        A[:, k] = prob.grad(e, 0.0) - r0
        e[k] = 0.0
    A = 0.5 * (A + A.T)  # symmetrize away assembly roundoff
    try:
        chol = sla.cho_factor(A)
        z = sla.cho_solve(chol, -r0)
    except sla.LinAlgError as exc:
        raise SingularSystem(f"oracle factorization failed: {exc}") from exc
    return ScalarField(g.mesh, prob.field_values(z))


def uniqueness_check(
    m: EnergyModel,
    g: ScalarField,
    cfg: SolveConfig,
    k: int,
    seeds: Optional[Sequence[int]] = None,
) -> float:
    """Max pairwise sup-norm distance between k independently seeded solves.

    Strict convexity predicts a unique minimizer, so the returned value is a
    direct numerical uniqueness certificate.
    """
    if k < 2:
        raise InvalidArg("uniqueness check needs k >= 2 initializations")
    if seeds is None:
        seeds = [cfg.seed + i for i in range(k)]
    if len(seeds) != k:
        raise InvalidArg(f"expected {k} seeds, got {len(seeds)}")
    solutions = []
    for seed in seeds:
        run_cfg = SolveConfig(
            tol_grad=cfg.tol_grad,
            tol_energy=cfg.tol_energy,
            max_iter=cfg.max_iter,
            eps_schedule=cfg.eps_schedule,
            init="seeded-random",
            seed=int(seed),
        )
        u, _ = minimize(m, g, run_cfg)
        solutions.append(u.values)
    worst = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            worst = max(worst, float(np.abs(solutions[i] - solutions[j]).max()))
    return worst
