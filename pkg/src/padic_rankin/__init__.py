"""p-adic interpolation of Rankin convolutions at non-critical points: exact q-expansion
arithmetic, nearly holomorphic forms, Eisenstein series, the Rankin kernel and its
Kummer-congruence verification."""

from .exactnum import Cyclotomic, DirichletCharacter, characters_mod, gauss_sum, parse_character
from .padic import PadicElement, hensel_unit_root, teichmuller
from .qexp import NewformData, QExpansion, eta_delta
from .rankin import RankinContext, euler_product_coeffs, k_star, k_tilde, rankin_coeffs
from .measures import LevelwiseDistribution, check_bounded, kummer_verify, mellin_eval
from .pipeline import Run, RunConfig, psi_value, verify_suite

__version__ = "0.1.0"

__all__ = [
    "Cyclotomic",
    "DirichletCharacter",
    "LevelwiseDistribution",
    "NewformData",
    "PadicElement",
    "QExpansion",
    "RankinContext",
    "Run",
    "RunConfig",
    "characters_mod",
    "check_bounded",
    "eta_delta",
    "euler_product_coeffs",
    "gauss_sum",
    "hensel_unit_root",
    "k_star",
    "k_tilde",
    "kummer_verify",
    "mellin_eval",
    "parse_character",
    "psi_value",
    "rankin_coeffs",
    "teichmuller",
    "verify_suite",
]
