"""Normal forms of commuting families of singular vector fields.

The package computes, to a finite jet order, a normal form of a commuting
family ``X_1, ..., X_l`` relative to a commutative algebra ``S(g)`` of
diagonal linear fields, either one degree at a time or by a Newton
iteration that doubles the normalized order at every step.
"""

from .cartan import (
    CartanCertificate,
    NormalFormDecomposition,
    certify_cartan,
    check_auto_normalization,
    cofactor_transpose,
    decompose_over_module,
    det,
    single_field_morphism,
)
from .errors import (
    BudgetExceeded,
    CartanViolation,
    CommutationFailure,
    DimensionMismatch,
    InvalidBound,
    NormalFormError,
    NotInModule,
    RankDeficient,
    SolveInconsistent,
)
from .estimates import EstimateConstants, EstimateReport, estimate_constants, estimate_diagnostics
from .families import FamilyConfig, random_cartan_family, standard_morphisms
from .fields import JetDiffeo, VectorField, compose, exp_conjugate, flow_jet, invert, lie_bracket, pullback
from .hamiltonian import (
    Hamiltonian,
    build_ito_morphism,
    check_star_condition,
    hamiltonian_vector_field,
    integrable_family,
    poisson_bracket,
    verify_action_normal_form,
)
from .normalizer import (
    Gauge,
    Mode,
    NewtonState,
    NotRegular,
    newton_step,
    normalize_family,
    poincare_dulac_normalize,
    stepwise_step,
    tilde_D,
)
from .scalars import EXACT, Arith, GaussianRational
from .series import FormalSeries, PolyradiusSpec, dominates, inverse_bound, majorant_norm
from .torus import (
    DiophantineReport,
    LieMorphism,
    Weight,
    find_regular_element,
    is_regular_element,
    omega_sequence,
    weight_decompose,
    weight_of,
    zero_weight_projection,
)

__version__ = "0.1.0"
