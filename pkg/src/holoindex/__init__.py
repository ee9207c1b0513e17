"""Fixed point indices and periodic point counts of holomorphic map germs.

The library computes local zero orders and fixed point indices of
holomorphic self-map germs of C^n, combines them into Dold indices over
divisor lattices, reduces germs to resonant normal forms, and verifies the
counting interpretation experimentally: the Dold index of period M equals
the number of period-M points that split off the fixed point under a small
generic perturbation, and it is positive exactly when the linear part has
a periodic point of period M.
"""

from ._newton import NewtonBudget
from .divisors import (DoldPlan, Number1Certificate, census_invert, divisors,
                       dold_plan, lcm, number1_construct, prime_set)
from .dold import (DoldReport, TheoremVerdict, consistency_check, dold_global,
                   dold_local, shub_sullivan_reduce, theorem_1_verdict)
from .dsl import MapSpecAst, parse, print_ast, to_germ
from .indices import (IndexReport, fixed_point_index, is_simple,
                      product_rule_check, zero_order_composite,
                      zero_order_cronin, zero_order_numerical)
from .jets import (Jet, MapGerm, compose, conjugate, displacement, invert,
                   iterate, linear_part, lowest_forms, substitute)
from .normal_form import (NormalFormResult, SkeletonReport, normalize,
                          resonant_skeleton)
from .orbits import (Ball, OrbitCensus, OrbitRecord, PerturbationReport,
                     find_periodic, minimal_period, perturb_and_count,
                     perturb_germ)
from .spectra import (Spectrum, classify_unity, condition_1_0,
                      linear_period_set, resonance_predicate,
                      shub_sullivan_applicable, spectrum_of, spectrum_of_germ,
                      unity_root)

__version__ = "0.1.0"

__all__ = [
    "Ball", "DoldPlan", "DoldReport", "IndexReport", "Jet", "MapGerm",
    "MapSpecAst", "NewtonBudget", "NormalFormResult", "Number1Certificate",
    "OrbitCensus", "OrbitRecord", "PerturbationReport", "SkeletonReport",
    "Spectrum", "TheoremVerdict", "census_invert", "classify_unity",
    "compose", "condition_1_0", "conjugate", "consistency_check",
    "displacement", "divisors", "dold_global", "dold_local", "dold_plan",
    "find_periodic", "fixed_point_index", "invert", "is_simple", "iterate",
    "lcm", "linear_part", "linear_period_set", "lowest_forms",
    "minimal_period", "normalize", "number1_construct", "parse",
    "perturb_and_count", "perturb_germ", "prime_set", "print_ast",
    "product_rule_check", "resonance_predicate", "resonant_skeleton",
    "shub_sullivan_applicable", "shub_sullivan_reduce", "spectrum_of",
    "spectrum_of_germ", "substitute", "theorem_1_verdict", "to_germ",
    "unity_root", "zero_order_composite", "zero_order_cronin",
    "zero_order_numerical",
]
