"""Escape probabilities for scalar dynamics driven by small symmetric heavy-tailed noise.

Three mutually cross-validating pipelines:

* ``solver`` - direct numerical solution of the nonlocal exterior-value problem;
* ``asymptotics`` - regular and layer-corrected (singular) expansions in the
  noise intensity;
* ``montecarlo`` - path simulation with jump-overshoot exit classification.
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    ConfigError,
    DomainValidationError,
    EscapeToolkitError,
    EstimateUnavailableError,
    RootNotFoundError,
    SolverError,
)
from .stable import (
    ALL_JUMPS,
    FULL_POWER_LAW,
    SMALL_JUMPS,
    TRUNCATED_POWER_LAW,
    ExtendedFunction,
    LevyMeasureSpec,
    QuadratureConfig,
    apply_generator,
    characteristic_exponent,
    levy_density,
    sample_stable_increment,
    sample_stable_increments,
    stable_constant,
)
from .problem import (
    CaseLabel,
    DiffusionSpec,
    DriftSpec,
    EscapeProblem,
    TARGET_LEFT,
    TARGET_RIGHT,
    classify_case,
    parse_problem_file,
    parse_problem_text,
    tumor_equilibria,
)
from .solver import (
    GridFunction,
    LayerFunction,
    SolverReport,
    assemble_system,
    solve_escape_probability,
    solve_layer_problem,
)
from .asymptotics import (
    Case4ConstantResult,
    RegularExpansion,
    SingularExpansion,
    case4_constant,
    example51_p1_oracle,
    explicit_left_layer,
    explicit_right_layer,
    gamma_root,
    left_layer_profile,
    regular_expansion,
    regular_g,
    regular_p0,
    regular_p1,
    right_layer_profile,
    singular_expansion,
    stationary_density,
)
from .montecarlo import (
    EstimateWithCI,
    MCConfig,
    default_t_max,
    estimate_escape,
    simulate_exit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
