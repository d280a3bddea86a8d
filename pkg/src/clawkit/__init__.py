"""clawkit: classification, conservation laws, and numerical verification
for quasilinear third-order evolution equations u_t = f(x,u,u_x)*u_xxx + g.

Library entry points:

* expr / parser - exact symbolic kernel over jet coordinates
* jets          - total derivatives, Euler operator, flux reconstruction
* structure     - structural classifiers of the equation class
* search        - conservation-law search by determining equations
* catalog       - classified-equation regression fixtures
* pde           - periodic pseudospectral verifier
* curves        - closed-curve flow by the arclength derivative of curvature
* service / cli - FastAPI service and its command-line client
"""

from .expr import Expr, ExprError, DivisionError, CyclicBindingError
from .parser import ParamTable, ParseError, UnknownIdentifierError, parse
from .jets import (JetContext, euler, extract_flux, reduce_by_parts, total_t,
                   total_x)
from .structure import (EvolutionEq, StructReport, equation_from_strings,
                        k_invariant_vanishes, n_invariant_vanishes,
                        structural_report, validate_equation)
from .search import (Ansatz, ConservationLaw, DeterminingSystem, SearchOptions,
                     TypeTriple, build_ansatz, classify_type,
                     determining_system, solve_densities,
                     weight_sequence_probe)

__all__ = [
    "Expr", "ExprError", "DivisionError", "CyclicBindingError",
    "ParamTable", "ParseError", "UnknownIdentifierError", "parse",
    "JetContext", "euler", "extract_flux", "reduce_by_parts", "total_t",
    "total_x",
    "EvolutionEq", "StructReport", "equation_from_strings",
    "k_invariant_vanishes", "n_invariant_vanishes", "structural_report",
    "validate_equation",
    "Ansatz", "ConservationLaw", "DeterminingSystem", "SearchOptions",
    "TypeTriple", "build_ansatz", "classify_type", "determining_system",
    "solve_densities", "weight_sequence_probe",
]

__version__ = "0.1.0"
