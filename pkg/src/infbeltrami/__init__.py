"""Numerical toolkit for infinitesimal classes of Beltrami differentials on disks."""

__version__ = "0.1.0"

from .classcheck import NormEstimate, l1_norm, norm_lower_bound, verify_class_equality
from .decreasability import (DecreaseWitness, FileOracle, PerturbationOracle, ZeroOracle,
                             check_domination, greedy_run, make_oracle, verify_strong_witness,
                             zero_on_disk)
from .errors import (AccuracyError, BeltramiError, ConstructionInvalidError, DomainError,
                     FieldSpecError, GeometryError, PreconditionError, StrategyContractError,
                     ValidationError)
from .fields import (Combination, Constant, MomentLaurent, PolyZZbar, Piecewise, RationalPhase,
                     TeichForm, ess_sup, evaluate, field_from_doc)
from .geometry import Annulus, Disk
from .grid import DiskGrid
from .quadrature import cauchy_integral_direct, integrate, pairing_monomials
from .trivial import (choose_radius, construct_trivial, localize, moments, sign_calibration)

__all__ = [
    "__version__", "NormEstimate", "l1_norm", "norm_lower_bound", "verify_class_equality",
    "DecreaseWitness", "FileOracle", "PerturbationOracle", "ZeroOracle", "check_domination",
    "greedy_run", "make_oracle", "verify_strong_witness", "zero_on_disk", "AccuracyError",
    "BeltramiError", "ConstructionInvalidError", "DomainError", "FieldSpecError",
    "GeometryError", "PreconditionError", "StrategyContractError", "ValidationError",
    "Combination", "Constant", "MomentLaurent", "PolyZZbar", "Piecewise", "RationalPhase",
    "TeichForm", "ess_sup", "evaluate", "field_from_doc", "Annulus", "Disk", "DiskGrid",
    "cauchy_integral_direct", "integrate", "pairing_monomials", "choose_radius",
    "construct_trivial", "localize", "moments", "sign_calibration",
]
