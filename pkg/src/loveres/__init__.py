"""Forward/inverse resonance engine for half-line Schrodinger operators with
Robin boundary conditions and compactly supported potentials.

Forward: Jost function evaluation, eigenvalue/resonance location, scattering
data.  Inverse: Hadamard-product reconstruction of the Jost function from its
zeros, Marchenko recovery of the potential, and algebraic two-frequency
recovery of the shear modulus.
"""

from .errors import (BoundaryDegeneracyError, CalibrationError,
                     ClassViolationError, CompletenessError, ConfigError,
                     DegenerateDataError, DomainError, InconsistencyError,
                     InvariantViolationError, LoveResError, OverflowGuardError,
                     SingularRecoveryError, StageError)
from .profile import (PotentialProfile, SheetPoint, ShearProfile, calibrate,
                      load_potential, load_shear_profile, quasi_momentum,
                      robin_coefficient, save_potential, save_shear_profile,
                      xi_of_k)
from .jost import (JostEval, JostEvaluator, bound_check, faddeev_solve,
                   jost_derivative, jost_function, jost_solution_at,
                   norming_integral)
from .resonances import (Rectangle, ResonanceSet, count_zeros, eigenvalues,
                         find_zeros, forbidden_domain_xi, levinson_check,
                         resonance_search)
from .scattering import (MarchenkoKernel, ScatteringData, ScatteringFunction,
                         build_G0, norming_constants, scattering_function,
                         validate_scattering_class)
from .marchenko import (MarchenkoSolution, recover_potential, solve_diagonal,
                        solve_marchenko)
from .inversion import (HadamardJost, HadamardScattering,
                        check_sign_alternation, hadamard_jost, invert,
                        recover_shear, save_diagnostics, scattering_from_zeros)

__version__ = "0.1.0"

__all__ = [
    "BoundaryDegeneracyError", "CalibrationError", "ClassViolationError",
    "CompletenessError", "ConfigError", "DegenerateDataError", "DomainError",
    "InconsistencyError", "InvariantViolationError", "LoveResError",
    "OverflowGuardError", "SingularRecoveryError", "StageError",
    "PotentialProfile", "SheetPoint", "ShearProfile", "calibrate",
    "load_potential", "load_shear_profile", "quasi_momentum",
    "robin_coefficient", "save_potential", "save_shear_profile", "xi_of_k",
    "JostEval", "JostEvaluator", "bound_check", "faddeev_solve",
    "jost_derivative", "jost_function", "jost_solution_at", "norming_integral",
    "Rectangle", "ResonanceSet", "count_zeros", "eigenvalues", "find_zeros",
    "forbidden_domain_xi", "levinson_check", "resonance_search",
    "MarchenkoKernel", "ScatteringData", "ScatteringFunction", "build_G0",
    "norming_constants", "scattering_function", "validate_scattering_class",
    "MarchenkoSolution", "recover_potential", "solve_diagonal",
    "solve_marchenko",
    "HadamardJost", "HadamardScattering", "check_sign_alternation",
    "hadamard_jost", "invert", "recover_shear", "save_diagnostics",
    "scattering_from_zeros",
    "__version__",
]
