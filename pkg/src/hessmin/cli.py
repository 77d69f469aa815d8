"""Command-line surface: solve, diagnose, oracle, lemmas, selftest.

Exit codes: 0 ok, 2 configuration, 3 solver, 4 diagnostics, 5 io.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import diagnostics as diag
from . import errors as err
from .config import load_config
from .energy import EnergyModel, el_residual, energy, energy_gradient
from .io import read_field, read_profile_csv, write_field, write_profile_csv, write_report
from .mesh import (
    ScalarField,
    build_mesh,
    deep_interior_mask,
    integrate_annulus,
    integrate_ball,
)
from .operators import frob_norm, gradient, hessian
from .pipeline import run_pipeline
from .solver import SolveConfig, minimize, solve_linear_oracle

logger = logging.getLogger("hessmin")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_DIAGNOSTICS = 4
EXIT_IO = 5

_CONFIG_ERRORS = (err.ParseError, err.ValidationError, err.InvalidArg, err.RejectedGeometry)
_SOLVER_ERRORS = (
    err.LineSearchStall,
    err.DegenerateModel,
    err.NonFiniteEnergy,
    err.TooLarge,
    err.SingularSystem,
)
_DIAG_ERRORS = (
    err.RegionOutOfRange,
    err.RadiiTooFine,
    err.InsufficientData,
    err.InvalidParams,
    err.NoMatchingPairs,
    err.EmptyRegion,
    err.DegenerateDenominator,
    err.UnsupportedTestFunction,
)
_IO_ERRORS = (err.IoError, err.FormatError, OSError)


def _classify(exc: Exception) -> int:
    if isinstance(exc, _CONFIG_ERRORS):
        return EXIT_CONFIG
    if isinstance(exc, _SOLVER_ERRORS):
        return EXIT_SOLVER
    if isinstance(exc, _DIAG_ERRORS):
        return EXIT_DIAGNOSTICS
    if isinstance(exc, _IO_ERRORS):
        return EXIT_IO
    raise exc


def _cmd_solve(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    result = run_pipeline(cfg)
    print(f"report: {result['report']}")
    for key in ("final_energy", "gradient_sup_norm", "iterations"):
        print(f"{key}: {result['entries'][key]}")
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    u = read_field(args.field)
    mesh = u.mesh
    center = tuple(float(t) for t in args.center.split(","))
    if len(center) != mesh.n:
        raise err.InvalidArg(f"--center needs {mesh.n} components")
    p = args.p if args.p is not None else float(mesh.n)
    model = EnergyModel(p=p, eps=0.0)
    if args.levels < 3:
        raise err.InvalidArg("--levels must be >= 3")
    if args.rmin <= 0 or args.rmin >= args.rmax:
        raise err.InvalidArg("need 0 < rmin < rmax")
    ratio = (args.rmax / args.rmin) ** (1.0 / (args.levels - 1))
    radii = [args.rmin * ratio**j for j in range(args.levels)]
    profile = diag.decay_profile(u, model, center, radii)
    os.makedirs(args.out, exist_ok=True)
    profile_path = os.path.join(args.out, "decay_profile.csv")
    write_profile_csv(profile, profile_path)
    entries = [("field", args.field), ("p", p)]
    try:
        beta, coeff, resid = diag.fit_power_exponent(profile, "phi")
        alpha_raw = diag.morrey_exponent(profile, model)
        entries += [
            ("beta_status", "ok"),
            ("beta", beta),
            ("beta_C", coeff),
            ("beta_residual", resid),
            ("alpha_raw", alpha_raw),
            ("alpha_clamped", min(max(alpha_raw, 0.0), 1.0)),
        ]
    except err.InsufficientData:
        entries.append(("beta_status", "InsufficientData"))
    report_path = os.path.join(args.out, "diagnose_report.txt")
    write_report(entries, report_path)
    print(f"profile: {profile_path}")
    print(f"report: {report_path}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    if cfg.p != 2.0:
        raise err.ValidationError("p", "the oracle supports p = 2 only")
    mesh = build_mesh(cfg.n, cfg.N)
    model = EnergyModel(p=2.0, eps=0.0, weight=cfg.weight_field(mesh), delta=cfg.delta)
    g = cfg.boundary_field(mesh)
    u = solve_linear_oracle(model, g)
    os.makedirs(cfg.out_dir, exist_ok=True)
    field_path = os.path.join(cfg.out_dir, "oracle_solution.field")
    write_field(u, field_path)
    grad_sup = float(
        np.abs(energy_gradient(model, u).values[deep_interior_mask(mesh)]).max()
    )
    entries = [
        ("final_energy", energy(model, u)),
        ("gradient_sup_norm_free_set", grad_sup),
    ]
    report_path = os.path.join(cfg.out_dir, "oracle_report.txt")
    write_report(entries, report_path)
    print(f"field: {field_path}")
    print(f"report: {report_path}")
    return EXIT_OK


def _cmd_lemmas(args) -> int:
    profile = read_profile_csv(args.profile)
    params = diag.LemmaParams(
        c1=args.c1,
        alpha=args.alpha,
        beta=args.beta,
        mu=args.mu,
        c2=args.c2,
        sigma_exp=args.sigma,
    )
    verdict = diag.check_lemma_A(profile.radii, profile.phi, params, c4=args.c4)
    stem, _ = os.path.splitext(args.profile)
    verdict_path = stem + "_verdict.txt"
    entries = [
        ("hypothesis_ok", verdict.hypothesis_ok),
        ("conclusion_ok", verdict.conclusion_ok),
        ("c4_min", verdict.fitted["c4_min"]),
        ("hypothesis_violations", len(verdict.hypothesis_violations)),
        ("conclusion_violations", len(verdict.conclusion_violations)),
    ]
    write_report(entries, verdict_path)
    for key, value in entries:
        print(f"{key}: {value}")
    print(f"verdict: {verdict_path}")
    return EXIT_OK


def _selftest() -> int:
    """Fast built-in property battery; prints one line per check."""
    import math
    import tempfile

    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except Exception as exc:  # report, do not abort the battery
            checks.append((name, False, f"{type(exc).__name__}: {exc}"))

    def quadrature():
        mesh = build_mesh(2, 129)
        one = ScalarField.full(mesh, 1.0)
        v = integrate_ball(one, (0.0, 0.0), 0.5)
        assert abs(v - math.pi / 4) / (math.pi / 4) < 0.02
        a = integrate_annulus(one, (0.0, 0.0), 0.25, 0.5)
        b = integrate_ball(one, (0.0, 0.0), 0.5) - integrate_ball(one, (0.0, 0.0), 0.25)
        assert abs(a - b) < 1e-12

    def operator_exactness():
        mesh = build_mesh(2, 33)
        u = ScalarField.from_function(mesh, lambda x, y: x * y)
        H = hessian(u)
        inner = mesh.interior
        assert np.allclose(H.values[inner][:, 1], 1.0, atol=1e-10)
        assert np.abs(H.values[inner][:, 0]).max() < 1e-10
        nrm = frob_norm(H)
        assert np.allclose(nrm.values[inner], math.sqrt(2.0), atol=1e-9)

    def gradient_pairing():
        mesh = build_mesh(2, 17)
        rng = np.random.default_rng(7)
        u = ScalarField(mesh, rng.standard_normal(mesh.shape))
        v_vals = np.where(mesh.interior, rng.standard_normal(mesh.shape), 0.0)
        v = ScalarField(mesh, v_vals)
        m = EnergyModel(p=3.0, eps=1e-2)
        t = 1e-5
        up = ScalarField(mesh, u.values + t * v.values)
        dn = ScalarField(mesh, u.values - t * v.values)
        fd = (energy(m, up) - energy(m, dn)) / (2 * t)
        pair = float(np.sum(energy_gradient(m, u).values * v.values)) * mesh.h**2
        assert abs(pair - fd) / max(abs(fd), 1e-12) < 1e-5
        res = el_residual(m, u, v)
        assert abs(res - pair) / max(abs(pair), 1e-300) < 1e-10

    def round_trip():
        mesh = build_mesh(2, 17)
        rng = np.random.default_rng(3)
        u = ScalarField(mesh, rng.standard_normal(mesh.shape))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "u.field")
            write_field(u, path)
            back = read_field(path)
        assert np.array_equal(back.values, u.values)

    def lemma_synthetic():
        r = np.array([0.1, 0.15, 0.2, 0.3, 0.4, 0.5])
        params = diag.LemmaParams(c1=1.0, alpha=1.0, beta=0.5, mu=0.0, c2=0.0, sigma_exp=0.5)
        good = diag.check_lemma_A(r, r**1.0, params)
        assert good.hypothesis_ok
        bad = diag.check_lemma_A(r, np.ones_like(r), params)
        assert not bad.hypothesis_ok

    def solver_affine():
        mesh = build_mesh(2, 17)
        g = ScalarField.from_function(mesh, lambda x, y: 1.0 + 2.0 * x - y)
        m = EnergyModel(p=2.0, eps=0.0)
        u, rep = minimize(m, g, SolveConfig(tol_grad=1e-9, max_iter=5000))
        assert np.abs(u.values - g.values).max() < 1e-8
        assert rep.final_energy < 1e-12

    for name, fn in [
        ("quadrature", quadrature),
        ("operator-exactness", operator_exactness),
        ("gradient-pairing", gradient_pairing),
        ("field-round-trip", round_trip),
        ("lemma-checkers", lemma_synthetic),
        ("solver-affine-reproduction", solver_affine),
    ]:
        check(name, fn)

    failures = 0
    for name, ok, msg in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}{': ' + msg if msg else ''}")
        failures += not ok
    return EXIT_OK if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hessmin",
        description="Minimize weighted L^p Hessian energies on the unit ball "
        "and run regularity diagnostics on the minimizers.",
    )
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="minimize and run the diagnostics pipeline")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True)

    dp = sub.add_parser("diagnose", help="decay profile and exponent fit for a field file")
    dp.add_argument("--field", required=True)
    dp.add_argument("--center", required=True, help="x,y[,z]")
    dp.add_argument("--rmin", type=float, required=True)
    dp.add_argument("--rmax", type=float, required=True)
    dp.add_argument("--levels", type=int, required=True)
    dp.add_argument("--out", required=True)
    dp.add_argument("--p", type=float, default=None, help="integrand exponent (default: dimension)")

    op = sub.add_parser("oracle", help="dense linear solve, p = 2 only")
    op.add_argument("--config", required=True)

    lp = sub.add_parser("lemmas", help="iteration-lemma check on a profile CSV")
    lp.add_argument("--profile", required=True)
    lp.add_argument("--c1", type=float, required=True)
    lp.add_argument("--alpha", type=float, required=True)
    lp.add_argument("--beta", type=float, required=True)
    lp.add_argument("--mu", type=float, required=True)
    lp.add_argument("--c2", type=float, required=True)
    lp.add_argument("--sigma", type=float, required=True)
    lp.add_argument("--c4", type=float, default=None)

    sub.add_parser("selftest", help="run the built-in property battery")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "diagnose":
            return _cmd_diagnose(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "lemmas":
            return _cmd_lemmas(args)
        if args.command == "selftest":
            return _selftest()
        return EXIT_CONFIG
    except Exception as exc:  # map module errors to documented exit codes
        code = _classify(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
