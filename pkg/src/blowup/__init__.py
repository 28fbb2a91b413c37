"""Blow-up solutions of the critical-exponent equation on punctured space.

Constructs positive solutions of Delta u + n(n-2) K u^((n+2)/(n-2)) = 0
whose coefficient K stays within any prescribed distance of 1 while the
solution violates slow decay near the origin, and verifies the
construction numerically.
"""
from .dimension import Dimension
from .odecore import (DEFAULT_TOL, CylState, DelaunayProfile,
                      IntegrationError, NoPeriodicOrbitError, canonical_v,
                      canonical_vprime, canonical_vsecond, energy,
                      fit_neck_period_law, integrate, solve_by_neck,
                      solve_by_period)
from .glue import (Cutoff, KRadialProfile, ModifiedProfile,
                   PrecisionCeilingError, SpliceError, build_cutoff,
                   choose_T_for_epsilon, compute_K, splice)
from .conformal import (Bubble, KelvinMap, RadialEuclidFunction,
                        kelvin_of_bubble, offset_source, standard_solution,
                        symmetric_radius, translation_lemma_check)
from .assembly import (BlowupSolution, PlanError, Stage, blowup_diagnostic,
                       build_stage, plan_stages, solution_from_dict)
from .verify import (CriticalOrderReport, DimensionRestrictionError,
                     HolderReport, LipschitzReport, ResidualReport,
                     critical_order_check, cylindrical_residual,
                     euclid_residual, holder_check,
                     lipschitz_extension_check, scan_T_for_lipschitz)

__all__ = [
    "Dimension", "DEFAULT_TOL",
    "CylState", "DelaunayProfile", "IntegrationError", "NoPeriodicOrbitError",
    "canonical_v", "canonical_vprime", "canonical_vsecond", "energy",
    "fit_neck_period_law", "integrate", "solve_by_neck", "solve_by_period",
    "Cutoff", "KRadialProfile", "ModifiedProfile", "PrecisionCeilingError",
    "SpliceError", "build_cutoff", "choose_T_for_epsilon", "compute_K",
    "splice",
    "Bubble", "KelvinMap", "RadialEuclidFunction", "kelvin_of_bubble",
    "offset_source", "standard_solution", "symmetric_radius",
    "translation_lemma_check",
    "BlowupSolution", "PlanError", "Stage", "blowup_diagnostic",
    "build_stage", "plan_stages", "solution_from_dict",
    "CriticalOrderReport", "DimensionRestrictionError", "HolderReport",
    "LipschitzReport", "ResidualReport", "critical_order_check",
    "cylindrical_residual", "euclid_residual", "holder_check",
    "lipschitz_extension_check", "scan_T_for_lipschitz",
]

__version__ = "1.0.0"
