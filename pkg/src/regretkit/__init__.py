"""Minimax-regret decision support on generalized additive utility models.

The package splits into: the canonical utility model (schema, model), the
feasible parameter polytope (space), regret computation (regret) over
constraint spaces (search) or catalogs, query scoring and sessions (elicit),
simulation experiments (simulate), and the document/service/CLI surface
(document, service, cli).
"""

from .document import ProblemDocument, load_problem, loads_problem
from .elicit import (
    AnchorBoundQuery,
    AnchorComparisonQuery,
    ElicitationSession,
    LocalBoundQuery,
    LocalComparisonQuery,
    Termination,
    render_query,
    select_query,
)
from .errors import (
    DegenerateFactorError,
    EmptyFeasibleSetError,
    InconsistentConstraintError,
    IterationLimitError,
    RegretkitError,
    RejectionBudgetError,
    SchemaError,
    ValidationError,
)
from .model import (
    CanonicalFit,
    CoefficientTable,
    GaiModel,
    GaiStructure,
    build_conditioning_sets,
    canonical_from_oracle,
    compute_coefficients,
)
from .regret import (
    MaximizingParams,
    MaxRegretResult,
    MinimaxResult,
    db_max_regret,
    db_minimax,
    local_regret,
    max_regret,
    minimax_regret,
    normalization_width,
    pairwise_regret,
)
from .schema import Attribute, AttributeSchema, LocalCodec, Outcome, project
from .search import FeasibilitySpec, is_feasible, kernel_backend
from .simulate import (
    ExperimentSpec,
    GeneratorSpec,
    PriorSpec,
    generate_problem,
    run_experiment,
    sample_prior,
    sample_true_utility,
    simulate_answer,
)
from .space import (
    BoundConstraint,
    ComparisonConstraint,
    HyperBox,
    ParamRef,
    UtilitySpace,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
