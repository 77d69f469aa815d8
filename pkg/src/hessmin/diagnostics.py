"""Numerical regularity diagnostics for computed fields.

Implements the decay-profile machinery (Hessian and gradient p-mass on
nested balls), power-law exponent fitting, Caccioppoli-type ratios in raw
and scale-normalized form, Holder seminorm estimation by pair supremum,
the lower-order interpolation check, the exponential cutoff with its
|D eta|^2 / eta bound, and numeric checkers for the two iteration lemmas.

Profiles always use the unregularized norms |H|^p and |Du|^p even when the
field came from an eps-regularized solve; callers record eps separately.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .energy import EnergyModel
from .errors import (
    DegenerateDenominator,
    EmptyRegion,
    InsufficientData,
    InvalidArg,
    InvalidParams,
    NoMatchingPairs,
    RadiiTooFine,
    RegionOutOfRange,
)
from .mesh import DiscMesh, ScalarField, integrate_annulus, integrate_ball
from .operators import VectorField, frob_norm, gradient, hessian

logger = logging.getLogger("hessmin")

_REL_TOL = 1e-12  # slack for inequality checks meant to hold with equality

ALL_PAIRS_NODE_CAP = 5000


@dataclass
class DecayProfile:
    """phi(r) = Hessian p-mass and sigma(r) = gradient p-mass on nested balls."""

    x0: tuple
    radii: np.ndarray
    phi: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if not (self.radii.size == self.phi.size == self.sigma.size):
            raise InvalidArg("profile arrays must have equal length")
        if np.any(np.diff(self.radii) <= 0):
            raise InvalidArg("profile radii must be strictly increasing")
        if np.any(self.phi < 0) or np.any(self.sigma < 0):
            raise InvalidArg("profile values must be nonnegative")
        if np.any(np.diff(self.phi) < 0) or np.any(np.diff(self.sigma) < 0):
            raise InvalidArg("profile values must be nondecreasing in r")


@dataclass
class HolderReport:
    """Estimated Holder seminorm over a centered ball."""

    alpha: float
    seminorm: float
    region_radius: float
    node_count: int
    sampling: str
    pair_count: int
    seed: Optional[int] = None


@dataclass
class LemmaParams:
    """Constants for the two iteration-lemma checkers.

    c1, alpha, beta, mu, c2 parametrize the power-decay hypothesis of the
    first lemma; gamma, tau the scale-contraction hypothesis of the second;
    sigma_exp is the target exponent of the first lemma's conclusion. For
    the second lemma's conclusion fit, alpha doubles as the supplied
    exponent of the (R/R0)^alpha term.
    """

    c1: float = 1.0
    alpha: float = 1.0
    beta: float = 0.5
    mu: float = 0.0
    c2: float = 0.0
    gamma: float = 0.5
    tau: float = 0.5
    sigma_exp: float = 0.5

    def __post_init__(self):
        if self.c1 <= 0 or self.alpha <= 0 or self.beta <= 0:
            raise InvalidParams("c1, alpha, beta must be positive")
        if self.c2 < 0 or self.mu < 0:
            raise InvalidParams("c2 and mu must be nonnegative")
        if self.beta >= self.alpha:
            raise InvalidParams(f"need beta < alpha, got beta={self.beta}, alpha={self.alpha}")
        if self.gamma <= 0:
            raise InvalidParams("gamma must be positive")
        if not (0.0 < self.tau < 1.0):
            raise InvalidParams(f"tau must lie in (0, 1), got {self.tau}")


@dataclass
class LemmaVerdict:
    """Outcome of a lemma check: flags, fitted minimal constants, violations."""

    hypothesis_ok: bool
    conclusion_ok: bool
    fitted: dict = field(default_factory=dict)
    hypothesis_violations: list = field(default_factory=list)
    conclusion_violations: list = field(default_factory=list)


def default_radius_ladder(mesh: DiscMesh, r_top: float = 0.4, factor: float = 0.75) -> np.ndarray:
    """Geometric ladder r_j = r_top * factor^j down to the 3h resolution floor."""
    floor = 3.0 * mesh.h
    radii = []
    r = r_top
    while r >= floor:
        radii.append(r)
        r *= factor
    if len(radii) < 3:
        raise RadiiTooFine(
            f"ladder from {r_top:g} holds fewer than 3 radii above 3h = {floor:g}"
        )
    return np.array(sorted(radii))


def decay_profile(
    u: ScalarField, m: EnergyModel, x0: Sequence[float], radii: Sequence[float]
) -> DecayProfile:
    """Sample phi(r) = int_{B_r} |H|^p and sigma(r) = int_{B_r} |Du|^p.

    Raises:
        RadiiTooFine: if any radius is below 3h.
        RegionOutOfRange: if the largest ball leaves the interior zone.
    """
    mesh = u.mesh
    radii = np.asarray([float(r) for r in radii])
    if radii.size == 0 or np.any(np.diff(radii) <= 0):
        raise InvalidArg("radii must be a nonempty strictly increasing sequence")
    if np.any(radii < 3.0 * mesh.h - 1e-12):
        raise RadiiTooFine(f"all radii must be >= 3h = {3 * mesh.h:g}")
    p = m.p
    hess_p = ScalarField(mesh, frob_norm(hessian(u)).values ** p)
    grad_p = ScalarField(mesh, gradient(u).euclidean_norm().values ** p)
    phi = np.array([integrate_ball(hess_p, x0, r) for r in radii])
    sigma = np.array([integrate_ball(grad_p, x0, r) for r in radii])
    return DecayProfile(x0=tuple(float(c) for c in x0), radii=radii, phi=phi, sigma=sigma)


def fit_power_exponent(profile: DecayProfile, use: str = "phi"):
    """Least-squares power-law fit value ~ C * r^beta in log-log space.

    Returns:
        (beta, C, residual): slope, exp(intercept), and RMS log misfit.

    Raises:
        InsufficientData: fewer than 3 strictly positive samples.
    """
    if use not in ("phi", "sigma"):
        raise InvalidArg(f"use must be 'phi' or 'sigma', got {use!r}")
    vals = profile.phi if use == "phi" else profile.sigma
    keep = vals > 0
    dropped = int(np.sum(~keep))
    if dropped:
        logger.info("fit_power_exponent: excluded %d nonpositive samples", dropped)
    if int(np.sum(keep)) < 3:
        raise InsufficientData(
            f"power-law fit needs >= 3 positive samples, have {int(np.sum(keep))}"
        )
    x = np.log(profile.radii[keep])
    y = np.log(vals[keep])
    beta, intercept = np.polyfit(x, y, 1)
    misfit = y - (beta * x + intercept)
    return float(beta), float(np.exp(intercept)), float(np.sqrt(np.mean(misfit**2)))


def caccioppoli_ratio(
    u: ScalarField,
    m: EnergyModel,
    x0: Sequence[float],
    R: float,
    normalized: bool = True,
) -> float:
    """Hessian mass on B_R over gradient mass on the annulus B_2R minus B_R.

    The normalized form divides |Du| by R, which removes the cutoff-derived
    R-scaling and makes the ratio comparable across scales.

    Raises:
        DegenerateDenominator: annulus gradient mass is zero while the
            Hessian mass is positive.
    """
    mesh = u.mesh
    p = m.p
    hess_p = ScalarField(mesh, frob_norm(hessian(u)).values ** p)
    grad_p = ScalarField(mesh, gradient(u).euclidean_norm().values ** p)
    lhs = integrate_ball(hess_p, x0, R)
    rhs = integrate_annulus(grad_p, x0, R, 2.0 * R)
    if normalized:
        rhs = rhs / R**p
    if lhs == 0.0:
        return 0.0
    if rhs == 0.0:
        raise DegenerateDenominator(
            "gradient mass vanishes on the annulus while the ball has Hessian mass"
        )
    return lhs / rhs


def holder_seminorm(
    v: Union[VectorField, ScalarField],
    alpha: float,
    region_radius: float,
    sampling: str = "auto",
    x0: Optional[Sequence[float]] = None,
    count: int = 200000,
    seed: int = 0,
) -> HolderReport:
    """Estimate [v]_{C^{0,alpha}} = sup |v(x)-v(y)| / |x-y|^alpha over B_{r0}.

    Vector fields are measured component-wise and the max over components is
    reported. With sampling "auto" the exact all-pairs supremum is used up
    to 5000 region nodes, and seeded random pair sampling beyond that.

    Raises:
        EmptyRegion: the region holds no interior nodes.
        InvalidArg: "all-pairs" requested for more than 5000 nodes.
    """
    if not (0.0 < alpha <= 1.0):
        raise InvalidArg(f"alpha must lie in (0, 1], got {alpha}")
    mesh = v.mesh
    if x0 is None:
        x0 = (0.0,) * mesh.n
    c = math.sqrt(sum(float(t) ** 2 for t in x0))
    if region_radius <= 0 or c + region_radius > 1.0 - 2.0 * mesh.h + 1e-12:
        raise RegionOutOfRange("region ball must sit inside the interior zone")
    sel = mesh.interior & (mesh.dist_from(x0) <= region_radius)
    node_count = int(sel.sum())
    if node_count == 0:
        raise EmptyRegion("no interior nodes in the requested region")
    coords = np.stack([g[sel] for g in mesh.coord_grids], axis=1)
    vals = v.values[sel]
    if vals.ndim == 1:
        vals = vals[:, None]

    if sampling == "auto":
        sampling = "all-pairs" if node_count <= ALL_PAIRS_NODE_CAP else "random"
    if sampling == "all-pairs":
        if node_count > ALL_PAIRS_NODE_CAP:
            raise InvalidArg(
                f"all-pairs limited to {ALL_PAIRS_NODE_CAP} nodes, region has {node_count}"
            )
        best = 0.0
        chunk = max(1, int(2**22 // max(node_count, 1)))
        for start in range(0, node_count, chunk):
            stop = min(start + chunk, node_count)
            diff = coords[start:stop, None, :] - coords[None, :, :]
            dist = np.sqrt(np.sum(diff**2, axis=-1))
            dv = np.abs(vals[start:stop, None, :] - vals[None, :, :]).max(axis=-1)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(dist > 0, dv / dist**alpha, 0.0)
            best = max(best, float(ratio.max()))
        pair_count = node_count * (node_count - 1) // 2
        return HolderReport(alpha, best, region_radius, node_count, "all-pairs", pair_count)
    if sampling == "random":
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, node_count, size=count)
        jj = rng.integers(0, node_count, size=count)
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
        dist = np.sqrt(np.sum((coords[ii] - coords[jj]) ** 2, axis=-1))
        dv = np.abs(vals[ii] - vals[jj]).max(axis=-1)
        best = float(np.max(dv / dist**alpha)) if ii.size else 0.0
        return HolderReport(
            alpha, best, region_radius, node_count, "random", int(ii.size), seed
        )
    raise InvalidArg(f"sampling must be 'auto', 'all-pairs' or 'random', got {sampling!r}")


def interpolation_check(u: ScalarField, m: EnergyModel, R: float):
    """Smallest constant making the lower-order interpolation bound hold.

    Returns:
        (lhs, c_min) with lhs = int_{B_R} |Du|^p and
        c_min = lhs / (phi(R) + R^p * max_interior|u|^p).
    """
    mesh = u.mesh
    p = m.p
    x0 = (0.0,) * mesh.n
    grad_p = ScalarField(mesh, gradient(u).euclidean_norm().values ** p)
    hess_p = ScalarField(mesh, frob_norm(hessian(u)).values ** p)
    lhs = integrate_ball(grad_p, x0, R)
    phi_R = integrate_ball(hess_p, x0, R)
    umax = float(np.abs(u.values[mesh.interior]).max())
    denom = phi_R + R**p * umax**p
    if lhs == 0.0:
        return 0.0, 0.0
    if denom == 0.0:
        raise DegenerateDenominator("u vanishes identically but |Du| mass is positive")
    return lhs, lhs / denom


def cutoff_eta(x0: Sequence[float], R: float, mesh: DiscMesh):
    """Exponential bump supported in B_2R(x0), normalized to unit mass.

    eta(x) = C_eta * exp(1 / (|x-x0|^2 - 4R^2)) inside B_2R and 0 outside,
    with C_eta fixed by midpoint quadrature. The returned max_ratio is the
    grid maximum of the analytic |D eta|^2 / eta, which stays finite because
    the exponential beats the polynomial blow-up at the support boundary.

    Returns:
        (eta, max_ratio, mass)
    """
    if R <= 0:
        raise InvalidArg(f"R must be positive, got {R}")
    c = math.sqrt(sum(float(t) ** 2 for t in x0))
    if c + 2.0 * R > 1.0 + 1e-12:
        raise RegionOutOfRange("B_2R(x0) must be contained in the unit ball")
    d = mesh.dist_from(x0)
    inside = d < 2.0 * R
    q = np.where(inside, d * d - 4.0 * R * R, -1.0)  # strictly negative inside
    vals = np.where(inside, np.exp(1.0 / q), 0.0)
    raw_mass = math.fsum(vals[inside].tolist()) * mesh.h**mesh.n
    c_eta = 1.0 / raw_mass
    eta = ScalarField(mesh, c_eta * vals)
    mass = math.fsum(eta.values[inside].tolist()) * mesh.h**mesh.n
    # analytic |D eta|^2 / eta = C_eta * 4 t^2 / q^4 * exp(1/q), in log space
    # to dodge the 1/q^4 overflow against the exp underflow near t = 2R
    t = d[inside]
    qq = q[inside]
    pos = t > 0
    with np.errstate(divide="ignore"):
        log_ratio = (
            math.log(4.0 * c_eta)
            + 2.0 * np.log(np.where(pos, t, 1.0))
            - 4.0 * np.log(-qq)
            + 1.0 / qq
        )
    ratios = np.where(pos, np.exp(log_ratio), 0.0)
    max_ratio = float(ratios.max()) if ratios.size else 0.0
    return eta, max_ratio, mass


def radial_cutoff_ratio_oracle(R: float, c_eta: float, samples: int = 100000) -> float:
    """Dense 1-D evaluation of the analytic cutoff ratio, for verification."""
    t = np.linspace(0.0, 2.0 * R, samples + 1)[1:-1]
    q = t * t - 4.0 * R * R
    log_ratio = math.log(4.0 * c_eta) + 2.0 * np.log(t) - 4.0 * np.log(-q) + 1.0 / q
    return float(np.exp(log_ratio).max())


def _le_with_slack(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + _REL_TOL * max(abs(lhs), abs(rhs), 1e-300)


def check_lemma_A(
    radii: Sequence[float],
    phi: Sequence[float],
    params: LemmaParams,
    c4: Optional[float] = None,
) -> LemmaVerdict:
    """Check the power-decay iteration hypothesis and conclusion on samples.

    Hypothesis: phi(r) <= c1 [ (r/R)^alpha + mu ] phi(R) + c2 R^beta for all
    sampled pairs r <= R. Conclusion: phi(r) <= C4 r^sigma_exp, checked with
    the supplied c4 when given; the minimal empirical C4 = max phi_j / r_j^sigma
    is always reported.

    Raises:
        InvalidParams: beta >= alpha or sigma_exp > beta.
    """
    if params.sigma_exp > params.beta:
        raise InvalidParams(
            f"need sigma_exp <= beta, got sigma={params.sigma_exp}, beta={params.beta}"
        )
    r = np.asarray([float(v) for v in radii])
    f = np.asarray([float(v) for v in phi])
    if r.size != f.size or r.size == 0:
        raise InvalidArg("radii and phi must be nonempty and of equal length")
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise InvalidArg("radii must be positive and ascending")

    hyp_viol = []
    for k in range(r.size):
        for j in range(k + 1):
            bound = (
                params.c1 * ((r[j] / r[k]) ** params.alpha + params.mu) * f[k]
                + params.c2 * r[k] ** params.beta
            )
            if not _le_with_slack(f[j], bound):
                hyp_viol.append((float(r[j]), float(r[k])))

    c4_min = float(np.max(f / r**params.sigma_exp))
    conc_viol = []
    c4_used = c4 if c4 is not None else c4_min
    for j in range(r.size):
        if not _le_with_slack(f[j], c4_used * r[j] ** params.sigma_exp):
            conc_viol.append((float(r[j]),))
    return LemmaVerdict(
        hypothesis_ok=not hyp_viol,
        conclusion_ok=not conc_viol,
        fitted={"c4_min": c4_min},
        hypothesis_violations=hyp_viol,
        conclusion_violations=conc_viol,
    )


def check_lemma_B(
    radii: Sequence[float],
    phi: Sequence[float],
    sigma: Sequence[float],
    params: LemmaParams,
    mu_interp: float,
    match_tol: float,
    c_conclusion: Optional[float] = None,
) -> LemmaVerdict:
    """Check the scale-contraction hypothesis phi(tau R) <= gamma phi(R) + sigma(R).

    Pairs (tau R, R) are matched to the nearest sampled radius within
    match_tol. The conclusion fit finds the smallest C with
    phi(R) <= C [ (R/R0)^a phi(R0) + sigma(R^mu R0^(1-mu)) ], a = params.alpha.

    Raises:
        NoMatchingPairs: no (tau R, R) pair aligns within the tolerance.
        InvalidParams: mu_interp outside (0, 1).
    """
    if not (0.0 < mu_interp < 1.0):
        raise InvalidParams(f"mu_interp must lie in (0, 1), got {mu_interp}")
    r = np.asarray([float(v) for v in radii])
    f = np.asarray([float(v) for v in phi])
    s = np.asarray([float(v) for v in sigma])
    if not (r.size == f.size == s.size) or r.size == 0:
        raise InvalidArg("radii, phi, sigma must be nonempty and of equal length")
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise InvalidArg("radii must be positive and ascending")

    pairs = []
    for k in range(r.size):
        target = params.tau * r[k]
        j = int(np.argmin(np.abs(r - target)))
        if abs(r[j] - target) <= match_tol and j != k:
            pairs.append((j, k))
    if not pairs:
        raise NoMatchingPairs(
            f"no sampled radius matches tau*R within tolerance {match_tol:g}"
        )

    hyp_viol = []
    gamma_emp = -np.inf
    for j, k in pairs:
        bound = params.gamma * f[k] + s[k]
        if not _le_with_slack(f[j], bound):
            hyp_viol.append((float(r[j]), float(r[k])))
        if f[k] > 0:
            gamma_emp = max(gamma_emp, (f[j] - s[k]) / f[k])

    # conclusion fit against the largest sampled radius R0
    r0, phi0 = r[-1], f[-1]
    a = params.alpha
    c_min = 0.0
    bounds = []
    for k in range(r.size):
        rho = r[k] ** mu_interp * r0 ** (1.0 - mu_interp)
        s_rho = s[int(np.argmin(np.abs(r - rho)))]
        bound = (r[k] / r0) ** a * phi0 + s_rho
        bounds.append(bound)
        if bound > 0:
            c_min = max(c_min, f[k] / bound)
    conc_viol = []
    c_used = c_conclusion if c_conclusion is not None else c_min
    for k in range(r.size):
        if bounds[k] > 0 and not _le_with_slack(f[k], c_used * bounds[k]):
            conc_viol.append((float(r[k]),))
    return LemmaVerdict(
        hypothesis_ok=not hyp_viol,
        conclusion_ok=not conc_viol,
        fitted={"gamma_emp": float(gamma_emp), "c_min": float(c_min)},
        hypothesis_violations=hyp_viol,
        conclusion_violations=conc_viol,
    )


def morrey_exponent(profile: DecayProfile, m: EnergyModel) -> float:
    """Holder exponent estimate alpha = beta / p from the phi decay fit.

    Returns the raw quotient; values outside (0, 1) are logged (the smooth
    saturating case overshoots 1) and clamped only in pipeline reports.
    """
    beta, _, _ = fit_power_exponent(profile, "phi")
    alpha = beta / m.p
    if not (0.0 < alpha < 1.0):
        logger.warning(
            "morrey exponent beta/p = %.4f falls outside (0, 1); raw value returned",
            alpha,
        )
    return alpha
