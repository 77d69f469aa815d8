"""hessmin: weighted L^p Hessian-energy minimization on the unit ball,
with hole-filling decay, Caccioppoli-ratio, and Holder-regularity
diagnostics for the computed minimizers.
"""

from .diagnostics import (
    DecayProfile,
    HolderReport,
    LemmaParams,
    LemmaVerdict,
    caccioppoli_ratio,
    check_lemma_A,
    check_lemma_B,
    cutoff_eta,
    decay_profile,
    default_radius_ladder,
    fit_power_exponent,
    holder_seminorm,
    interpolation_check,
    morrey_exponent,
)
from .energy import EnergyModel, el_residual, energy, energy_gradient
from .errors import HessminError
from .io import read_field, read_profile_csv, write_field, write_profile_csv
from .mesh import (
    DiscMesh,
    NodeClass,
    ScalarField,
    build_mesh,
    deep_interior_mask,
    integrate_annulus,
    integrate_ball,
)
from .operators import HessianField, VectorField, frob_norm, gradient, hessian
from .solver import (
    SolveConfig,
    SolveReport,
    minimize,
    solve_linear_oracle,
    uniqueness_check,
)

__version__ = "0.1.0"

__all__ = [
    "DecayProfile",
    "DiscMesh",
    "EnergyModel",
    "HessianField",
    "HessminError",
    "HolderReport",
    "LemmaParams",
    "LemmaVerdict",
    "NodeClass",
    "ScalarField",
    "SolveConfig",
    "SolveReport",
    "VectorField",
    "build_mesh",
    "caccioppoli_ratio",
    "check_lemma_A",
    "check_lemma_B",
    "cutoff_eta",
    "decay_profile",
    "deep_interior_mask",
    "default_radius_ladder",
    "el_residual",
    "energy",
    "energy_gradient",
    "fit_power_exponent",
    "frob_norm",
    "gradient",
    "hessian",
    "holder_seminorm",
    "integrate_annulus",
    "integrate_ball",
    "interpolation_check",
    "minimize",
    "morrey_exponent",
    "read_field",
    "read_profile_csv",
    "solve_linear_oracle",
    "uniqueness_check",
    "write_field",
    "write_profile_csv",
]
