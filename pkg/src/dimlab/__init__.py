"""Staircase certificates for agreement-set capacity, and agreement-set search."""

__version__ = "0.1.0"

from .agreement import (SubsetWitness, check_witness, max_bv_subset, max_holder_subset,
                        max_monotone_subset, threshold_probe)
from .audit import empirical_agreement_audit
from .capacity import GridSubset, IntervalCover, estimate_dimension, optimal_cover
from .construction import (BVParams, HolderParams, build_bv_certificate,
                           build_holder_certificate, solve_bv_parameters, solve_parameters)
from .functions import PiecewiseFunction, SampledFunction, sup_distance, total_variation
from .generator import GeneratorSpec, generate, modulus_oracle
from .verify import verify_certificate

__all__ = [
    "BVParams", "GeneratorSpec", "GridSubset", "HolderParams", "IntervalCover",
    "PiecewiseFunction", "SampledFunction", "SubsetWitness", "build_bv_certificate",
    "build_holder_certificate", "check_witness", "empirical_agreement_audit",
    "estimate_dimension", "generate", "max_bv_subset", "max_holder_subset",
    "max_monotone_subset", "modulus_oracle", "optimal_cover", "solve_bv_parameters",
    "solve_parameters", "sup_distance", "threshold_probe", "total_variation",
    "verify_certificate",
]
