"""Solve, diagnose, and report: the orchestration behind the CLI.

A pipeline run minimizes the configured energy, then executes the
regularity diagnostics on the computed minimizer and writes three files
into the output directory:

    solution.field       the minimizer (bit-exact round-trippable)
    decay_profile.csv    r, phi, sigma rows, ascending in r
    report.txt           key-value summary, one per line

CSV outputs are deterministic for a fixed config; the report additionally
carries wall time, which is excluded from the determinism contract.
"""

from __future__ import annotations

import logging
import os

import numpy as np

from .config import RunConfig
from .diagnostics import (
    caccioppoli_ratio,
    decay_profile,
    default_radius_ladder,
    fit_power_exponent,
    holder_seminorm,
    morrey_exponent,
)
from .errors import InsufficientData
from .io import write_field, write_profile_csv, write_report
from .mesh import build_mesh
from .operators import gradient
from .solver import minimize, uniqueness_check

logger = logging.getLogger("hessmin")

CACCIOPPOLI_DEFAULT_RADII = (0.10, 0.15, 0.20, 0.25, 0.30, 0.35)


def run_pipeline(cfg: RunConfig) -> dict:
    """Run solve -> diagnose -> report for one configuration.

    Returns a dict with the written paths and the report entries.
    """
    mesh = build_mesh(cfg.n, cfg.N)
    model = cfg.energy_model(mesh)
    g = cfg.boundary_field(mesh)
    center = cfg.center if cfg.center is not None else (0.0,) * cfg.n

    u, rep = minimize(model, g, cfg.solve_config())

    os.makedirs(cfg.out_dir, exist_ok=True)
    field_path = os.path.join(cfg.out_dir, "solution.field")
    write_field(u, field_path)

    entries = [
        ("boundary", cfg.boundary_name),
        ("n", cfg.n),
        ("N", cfg.N),
        ("p", float(cfg.p)),
        ("eps_final", float(rep.eps_final)),
        ("final_energy", rep.final_energy),
        ("final_energy_regularized", rep.final_energy_regularized),
        ("iterations", rep.total_iterations),
        ("gradient_sup_norm", rep.final_grad_sup),
        ("max_iter_hit", rep.max_iter_hit),
        ("stalled", rep.stalled),
    ]

    radii = cfg.radii if cfg.radii is not None else tuple(default_radius_ladder(mesh))
    profile = decay_profile(u, model, center, radii)
    profile_path = os.path.join(cfg.out_dir, "decay_profile.csv")
    write_profile_csv(profile, profile_path)

    try:
        beta, coeff, resid = fit_power_exponent(profile, "phi")
        alpha_raw = morrey_exponent(profile, model)
        entries += [
            ("beta_status", "ok"),
            ("beta", beta),
            ("beta_C", coeff),
            ("beta_residual", resid),
            ("alpha_raw", alpha_raw),
            ("alpha_clamped", min(max(alpha_raw, 0.0), 1.0)),
        ]
    except InsufficientData as exc:
        logger.info("decay fit unavailable: %s", exc)
        entries.append(("beta_status", "InsufficientData"))

    cacc_radii = (
        cfg.caccioppoli_radii
        if cfg.caccioppoli_radii is not None
        else CACCIOPPOLI_DEFAULT_RADII
    )
    c_abs = float(np.sqrt(sum(c * c for c in center)))
    reach = 1.0 - 2.0 * mesh.h
    for R in cacc_radii:
        if c_abs + 2.0 * R <= reach + 1e-12:
            ratio = caccioppoli_ratio(u, model, center, R, normalized=True)
            entries.append((f"caccioppoli_normalized_R{R:g}", ratio))

    du = gradient(u)
    if cfg.holder_radius <= reach:
        for alpha in cfg.alphas:
            report = holder_seminorm(du, alpha, cfg.holder_radius, seed=cfg.seed)
            entries.append((f"holder_Du_alpha{alpha:g}", report.seminorm))

    if cfg.uniqueness_k >= 2:
        diff = uniqueness_check(model, g, cfg.solve_config(), cfg.uniqueness_k)
        entries.append(("uniqueness_max_diff", diff))

    entries.append(("wall_time_s", rep.wall_time_s))
    report_path = os.path.join(cfg.out_dir, "report.txt")
    write_report(entries, report_path)
    return {
        "out_dir": cfg.out_dir,
        "field": field_path,
        "profile": profile_path,
        "report": report_path,
        "entries": dict(entries),
    }
