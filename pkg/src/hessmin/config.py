"""Run configuration: parsing, validation, and field construction.

Config files are plain text, one `key: value` per line, `#` comments.
Recognized keys (defaults in brackets):

    n: 2 | 3                      [2]
    N: odd integer >= 9           [65]
    p: real >= 2                  [2]
    boundary: affine | saddle | cubic | radial-quartic
              | poly <e1,..,en>:<coeff>; ...      [saddle]
    weight: <const> | radial:<c0>,<c1>            [1]
    eps_schedule: comma list, strictly decreasing [0 for p=2, else 0.1,0.01,0.001,0.0001]
    tol_grad / tol_energy / max_iter / init / seed    (solver controls)
    out_dir: output directory                     [hessmin-out]
    radii: auto | comma list                      [auto]
    caccioppoli_radii: auto | comma list          [auto]
    alphas: comma list in (0,1]                   [0.5]
    holder_radius: region radius                  [0.5]
    center: comma point                           [origin]
    uniqueness_k: 0 disables, >= 2 enables        [0]

Boundary data are polynomials of total degree <= 4 so every preset lies in
the admissible Sobolev class and closed-form values are available to tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .energy import EnergyModel
from .errors import ParseError, ValidationError
from .mesh import DiscMesh, ScalarField
from .solver import INIT_MODES, SolveConfig

_KNOWN_KEYS = {
    "n",
    "N",
    "p",
    "boundary",
    "weight",
    "eps_schedule",
    "tol_grad",
    "tol_energy",
    "max_iter",
    "init",
    "seed",
    "out_dir",
    "radii",
    "caccioppoli_radii",
    "alphas",
    "holder_radius",
    "center",
    "uniqueness_k",
}

MAX_BOUNDARY_DEGREE = 4


def _preset_poly(name: str, n: int) -> dict:
    def e(*exps):
        return tuple(exps) + (0,) * (n - len(exps))

    if name == "affine":
        poly = {e(): 0.5, e(1): 1.0, e(0, 1): -0.25}
        if n == 3:
            poly[e(0, 0, 1)] = 0.75
        return poly
    if name == "saddle":
        return {e(2): 0.5, e(0, 2): -0.5}
    if name == "cubic":
        return {e(3): 1.0}
    if name == "radial-quartic":
        # (sum x_i^2)^2 expanded
        poly = {}
        for i in range(n):
            exps = [0] * n
            exps[i] = 4
            poly[tuple(exps)] = 1.0
        for i in range(n):
            for j in range(i + 1, n):
                exps = [0] * n
                exps[i] = 2
                exps[j] = 2
                poly[tuple(exps)] = 2.0
        return poly
    raise ValidationError("boundary", f"unknown preset {name!r}")


def _parse_poly_spec(spec: str, n: int) -> dict:
    poly = {}
    body = spec[len("poly") :].strip()
    if not body:
        raise ParseError("boundary: empty polynomial specification")
    for term in body.split(";"):
        term = term.strip()
        if not term:
            continue
        try:
            exp_part, coeff_part = term.split(":")
            exps = tuple(int(t) for t in exp_part.split(","))
            coeff = float(coeff_part)
        except ValueError as exc:
            raise ParseError(f"boundary: bad polynomial term {term!r}") from exc
        if len(exps) != n:
            raise ValidationError(
                "boundary", f"term {term!r} has {len(exps)} exponents, need {n}"
            )
        if any(x < 0 for x in exps) or sum(exps) > MAX_BOUNDARY_DEGREE:
            raise ValidationError(
                "boundary", f"term {term!r} exceeds total degree {MAX_BOUNDARY_DEGREE}"
            )
        poly[exps] = poly.get(exps, 0.0) + coeff
    if not poly:
        raise ParseError("boundary: no polynomial terms found")
    return poly


@dataclass
class RunConfig:
    """Validated configuration for one solve-and-diagnose pipeline run."""

    n: int = 2
    N: int = 65
    p: float = 2.0
    boundary_poly: dict = dc_field(default_factory=lambda: _preset_poly("saddle", 2))
    boundary_name: str = "saddle"
    weight_const: float = 1.0
    weight_radial: Optional[tuple] = None  # (c0, c1): a(x) = c0 + c1 |x|^2
    eps_schedule: Optional[tuple] = None
    tol_grad: float = 1e-7
    tol_energy: float = 1e-15
    max_iter: int = 100000
    init: str = "boundary-extension"
    seed: int = 0
    out_dir: str = "hessmin-out"
    radii: Optional[tuple] = None  # None: default ladder
    caccioppoli_radii: Optional[tuple] = None  # None: 0.10 .. 0.35 where they fit
    alphas: tuple = (0.5,)
    holder_radius: float = 0.5
    center: Optional[tuple] = None
    uniqueness_k: int = 0

    @property
    def delta(self) -> float:
        """Positive lower bound of the weight on the unit ball."""
        if self.weight_radial is not None:
            c0, c1 = self.weight_radial
            return c0 + min(0.0, c1)
        return self.weight_const

    def weight_field(self, mesh: DiscMesh) -> Optional[ScalarField]:
        if self.weight_radial is not None:
            c0, c1 = self.weight_radial
            return ScalarField(mesh, c0 + c1 * mesh.radius**2)
        if self.weight_const != 1.0:
            return ScalarField.full(mesh, self.weight_const)
        return None

    def boundary_field(self, mesh: DiscMesh) -> ScalarField:
        vals = np.zeros(mesh.shape)
        for exps, coeff in self.boundary_poly.items():
            term = np.full(mesh.shape, coeff)
            for g, e in zip(mesh.coord_grids, exps):
                if e:
                    term = term * g**e
            vals += term
        return ScalarField(mesh, vals)

    def energy_model(self, mesh: DiscMesh) -> EnergyModel:
        sched = self.eps_schedule
        eps_final = 0.0 if sched is None and self.p == 2.0 else (
            1e-4 if sched is None else sched[-1]
        )
        return EnergyModel(
            p=self.p, eps=eps_final, weight=self.weight_field(mesh), delta=self.delta
        )

    def solve_config(self) -> SolveConfig:
        return SolveConfig(
            tol_grad=self.tol_grad,
            tol_energy=self.tol_energy,
            max_iter=self.max_iter,
            eps_schedule=self.eps_schedule,
            init=self.init,
            seed=self.seed,
        )


def _parse_float_list(raw: str, key: str) -> tuple:
    try:
        return tuple(float(t) for t in raw.split(",") if t.strip())
    except ValueError as exc:
        raise ParseError(f"{key}: bad numeric list {raw!r}") from exc


def load_config(path: str) -> RunConfig:
    """Parse and validate a config file.

    Raises:
        ParseError: the file is malformed or holds unknown keys.
        ValidationError: a value violates a module precondition; the error
            names the offending key.
    """
    try:
        with open(path, "r") as fh:
            raw_lines = fh.readlines()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc

    pairs = {}
    for lineno, line in enumerate(raw_lines, 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if ":" not in stripped:
            raise ParseError(f"line {lineno}: expected 'key: value', got {stripped!r}")
        key, value = stripped.split(":", 1)
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        pairs[key] = value.strip()

    cfg = RunConfig()

    def geti(key, default, minimum=None):
        if key not in pairs:
            return default
        try:
            v = int(pairs[key])
        except ValueError as exc:
            raise ValidationError(key, f"not an integer: {pairs[key]!r}") from exc
        if minimum is not None and v < minimum:
            raise ValidationError(key, f"must be >= {minimum}, got {v}")
        return v

    def getf(key, default):
        if key not in pairs:
            return default
        try:
            return float(pairs[key])
        except ValueError as exc:
            raise ValidationError(key, f"not a number: {pairs[key]!r}") from exc

    cfg.n = geti("n", cfg.n)
    if cfg.n not in (2, 3):
        raise ValidationError("n", f"must be 2 or 3, got {cfg.n}")
    cfg.N = geti("N", cfg.N)
    if cfg.N % 2 == 0 or cfg.N < 9:
        raise ValidationError("N", f"must be odd and >= 9, got {cfg.N}")
    cfg.p = getf("p", cfg.p)
    if cfg.p < 2.0:
        raise ValidationError("p", f"must be >= 2, got {cfg.p}")

    bspec = pairs.get("boundary", "saddle")
    if bspec.startswith("poly"):
        cfg.boundary_poly = _parse_poly_spec(bspec, cfg.n)
        cfg.boundary_name = "poly"
    else:
        cfg.boundary_poly = _preset_poly(bspec, cfg.n)
        cfg.boundary_name = bspec

    wspec = pairs.get("weight", "1")
    if wspec.startswith("radial:"):
        params = _parse_float_list(wspec[len("radial:") :], "weight")
        if len(params) != 2:
            raise ValidationError("weight", f"radial weight needs c0,c1, got {wspec!r}")
        cfg.weight_radial = params
    else:
        try:
            cfg.weight_const = float(wspec)
        except ValueError as exc:
            raise ValidationError("weight", f"bad weight {wspec!r}") from exc
        cfg.weight_radial = None
    if cfg.delta <= 0.0:
        raise ValidationError("weight", f"weight must stay >= delta > 0 on B_1, min is {cfg.delta:g}")

    if "eps_schedule" in pairs:
        sched = _parse_float_list(pairs["eps_schedule"], "eps_schedule")
        if not sched:
            raise ValidationError("eps_schedule", "empty schedule")
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise ValidationError("eps_schedule", "must be strictly decreasing")
        if sched[-1] < 0:
            raise ValidationError("eps_schedule", "eps_final must be >= 0")
        if sched[-1] == 0.0 and cfg.p != 2.0:
            raise ValidationError(
                "eps_schedule", f"may end at 0 only for p = 2 (p = {cfg.p})"
            )
        cfg.eps_schedule = sched
    else:
        cfg.eps_schedule = None  # resolved from p at solve time

    cfg.tol_grad = getf("tol_grad", cfg.tol_grad)
    cfg.tol_energy = getf("tol_energy", cfg.tol_energy)
    if cfg.tol_grad <= 0 or cfg.tol_energy <= 0:
        key = "tol_grad" if cfg.tol_grad <= 0 else "tol_energy"
        raise ValidationError(key, "must be positive")
    cfg.max_iter = geti("max_iter", cfg.max_iter, minimum=1)
    cfg.init = pairs.get("init", cfg.init)
    if cfg.init not in INIT_MODES:
        raise ValidationError("init", f"must be one of {INIT_MODES}")
    cfg.seed = geti("seed", cfg.seed)
    cfg.out_dir = pairs.get("out_dir", cfg.out_dir)

    for key in ("radii", "caccioppoli_radii"):
        if key in pairs and pairs[key] != "auto":
            values = _parse_float_list(pairs[key], key)
            if any(v <= 0 for v in values) or any(
                b <= a for a, b in zip(values, values[1:])
            ):
                raise ValidationError(key, "must be positive and strictly increasing")
            setattr(cfg, key, values)

    if "alphas" in pairs:
        cfg.alphas = _parse_float_list(pairs["alphas"], "alphas")
    if any(not (0 < a <= 1) for a in cfg.alphas):
        raise ValidationError("alphas", "every alpha must lie in (0, 1]")
    cfg.holder_radius = getf("holder_radius", cfg.holder_radius)
    if cfg.holder_radius <= 0:
        raise ValidationError("holder_radius", "must be positive")

    if "center" in pairs:
        center = _parse_float_list(pairs["center"], "center")
        if len(center) != cfg.n:
            raise ValidationError("center", f"needs {cfg.n} components")
        cfg.center = center
    cfg.uniqueness_k = geti("uniqueness_k", cfg.uniqueness_k, minimum=0)
    if cfg.uniqueness_k == 1:
        raise ValidationError("uniqueness_k", "needs k >= 2 (or 0 to disable)")
    return cfg
