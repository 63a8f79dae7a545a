"""Exact combinatorial dimensions, lattice cell counts, covering numbers and
Gaussian/Rademacher supremum estimates for finite function classes."""

__version__ = "0.1.0"

from .core import FunctionClass, Measure, load_class, lp_norm, make_rng, parse_csv, parse_json, save_class
from .dimension import ShatterWitness, dimension_profile, fat_dimension, is_shattered, profile_steps, verify_witness
from .errors import (CalibrationError, EmptyInput, GeometryError, InvalidParameter, NumericFailure, ParseError,
                     ResourceLimit, ShatterkitError, StructureError)
from .lattice import IntegerCell, cconv_contains_cell, cconv_membership, cell_content, comb_dimension_geometric
from .lorentz import GeneratingFunction, comparison_function, lorentz_norm, tower_norm
from .packing import BodySpec, covering_number, entropy, entropy_linfty, kp_entropy_lower, packing_number
from .processes import (build_nosudakov_class, comb_integral, dudley_integral, iteration_bound, process_supremum,
                        selection_experiment, sup_t_sqrt_v)
from .sections import VPolytope, m_estimate, search_section, section_l1_check
from .trees import build_separating_tree, verify_separating_tree

__all__ = [
    "BodySpec", "CalibrationError", "EmptyInput", "FunctionClass", "GeneratingFunction", "GeometryError",
    "IntegerCell", "InvalidParameter", "Measure", "NumericFailure", "ParseError", "ResourceLimit",
    "ShatterWitness", "ShatterkitError", "StructureError", "VPolytope", "build_nosudakov_class",
    "build_separating_tree", "cconv_contains_cell", "cconv_membership", "cell_content", "comb_dimension_geometric",
    "comb_integral", "comparison_function", "covering_number", "dimension_profile", "dudley_integral", "entropy",
    "entropy_linfty", "fat_dimension", "is_shattered", "iteration_bound", "kp_entropy_lower", "load_class",
    "lorentz_norm", "lp_norm", "m_estimate", "make_rng", "packing_number", "parse_csv", "parse_json",
    "process_supremum", "profile_steps", "save_class", "search_section", "section_l1_check",
    "selection_experiment", "sup_t_sqrt_v", "tower_norm", "verify_separating_tree", "verify_witness",
]
